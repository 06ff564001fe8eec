"""
State schema for the Intel Lab pipeline.
Defines the shared state that flows through all pipeline nodes.
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, TypedDict

import pandas as pd

from app.models import ClusterAssignment, IntelConfig, MoteLocation, get_datetime_utc
from app.services.intel.analysis import (
    AgreementSummary,
    ClusterSnr,
    MissingDecoherenceCurves,
)


@dataclass
class IntelPipelineState:
    """
    Main state for the Intel Lab pipeline.
    Flows through all nodes and accumulates results.
    """

    config: IntelConfig
    data_path: Path
    locations_path: Path

    # Parsed inputs
    raw: pd.DataFrame | None = None
    skipped_lines: int = 0
    locations: list[MoteLocation] = field(default_factory=list)

    # Cleaned readings
    frame: pd.DataFrame | None = None
    dropped_temperature: int = 0
    dropped_unlocated: int = 0

    # Analysis results
    assignment: ClusterAssignment | None = None
    window_motes: set[int] = field(default_factory=set)
    epochs: list[int] = field(default_factory=list)
    agreement_all: AgreementSummary | None = None
    agreement_excluded: AgreementSummary | None = None
    snr: list[ClusterSnr] = field(default_factory=list)
    curves: MissingDecoherenceCurves | None = None

    # Metadata
    created_at: datetime = field(default_factory=get_datetime_utc)
    updated_at: datetime = field(default_factory=get_datetime_utc)
    error: str | None = None

    # Node execution tracking
    nodes_executed: list[str] = field(default_factory=list)

    @property
    def excluded_motes(self) -> set[int]:
        """Motes left out of SNR and curves; the window set when requested."""
        return set(self.window_motes) if self.config.exclude_windows else set()

    def add_node_execution(self, node_name: str) -> None:
        """Track which nodes have been executed."""
        self.nodes_executed.append(node_name)
        self.updated_at = get_datetime_utc()

    def summary(self) -> dict[str, Any]:
        """Agreement summary for serialization; cluster SNR rows go to their own table."""
        all_motes = self.agreement_all
        excluded = self.agreement_excluded
        improvement = (
            excluded.percent - all_motes.percent if all_motes and excluded else None
        )
        assignment = self.assignment
        return {
            "readings": 0 if self.frame is None else len(self.frame),
            "skipped_lines": self.skipped_lines,
            "dropped_temperature": self.dropped_temperature,
            "dropped_unlocated": self.dropped_unlocated,
            "clusters": None
            if assignment is None
            else [
                {
                    "cluster": c,
                    "centroid": list(assignment.centroids[c]),
                    "motes": assignment.members(c),
                }
                for c in range(assignment.k)
            ],
            "window_motes": sorted(self.window_motes),
            "epochs": len(self.epochs),
            "agreement_all": None if all_motes is None else all_motes.to_dict(),
            "agreement_excluded": None if excluded is None else excluded.to_dict(),
            "improvement_pp": improvement,
            "curves": None if self.curves is None else self.curves.to_dict(),
            "nodes_executed": self.nodes_executed,
            "error": self.error,
        }


# TypedDict wrapper for langgraph; nodes share the dataclass under one key
class IntelPipelineStateDict(TypedDict):
    """TypedDict version of IntelPipelineState for langgraph."""

    pipeline: IntelPipelineState
