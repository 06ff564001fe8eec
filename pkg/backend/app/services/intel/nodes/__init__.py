"""
Pipeline Nodes - Individual steps of the Intel Lab pipeline.
"""

from .agreement import measure_agreement, missing_data_curves, select_well_covered_epochs
from .cluster import cluster_motes, flag_window_motes
from .load import clean_readings, load_inputs
from .snr import compare_snr

__all__ = [
    "load_inputs",
    "clean_readings",
    "cluster_motes",
    "flag_window_motes",
    "select_well_covered_epochs",
    "measure_agreement",
    "compare_snr",
    "missing_data_curves",
]
