"""
SNR Node
Compares each cluster's classical SNR with its SQL and Heisenberg limits.
"""

import logging

from app.services.intel.analysis import cluster_snr
from app.services.intel.state import IntelPipelineState

logger = logging.getLogger(__name__)


def compare_snr(state: IntelPipelineState) -> IntelPipelineState:
    """
    Per-cluster classical, SQL and HL SNR over the selected epochs.

    Args:
        state: Current pipeline state

    Returns:
        Updated state with one SNR row per non-empty cluster
    """
    try:
        if state.frame is None or state.assignment is None:
            state.error = "Clusters must be ready first"
            logger.warning("compare_snr: missing clusters")
            return state

        state.snr = cluster_snr(
            state.frame,
            state.assignment,
            state.config.atoms,
            epochs=state.epochs or None,
            eta=state.config.sensitivity,
            exclude=state.excluded_motes,
        )
        state.add_node_execution("compare_snr")
        logger.info(
            "SNR gains (dB): "
            + ", ".join(f"C{row.cluster}={row.gain_db:.3g}" for row in state.snr)
        )

    except Exception as e:
        error_msg = f"Error comparing SNR: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state
