"""
Intel Berkeley Lab mote pipeline.
"""

from .pipeline import IntelPipeline, get_intel_pipeline
from .state import IntelPipelineState, IntelPipelineStateDict

__all__ = [
    "IntelPipeline",
    "IntelPipelineState",
    "IntelPipelineStateDict",
    "get_intel_pipeline",
]
