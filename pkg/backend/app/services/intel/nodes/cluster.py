"""
Cluster Node
Partitions the located motes spatially and flags window-facing motes.
"""

import logging

from app.services.intel.analysis import detect_window_motes
from app.services.intel.clustering import kmeans_clusters
from app.services.intel.state import IntelPipelineState

logger = logging.getLogger(__name__)


def cluster_motes(state: IntelPipelineState) -> IntelPipelineState:
    """
    Run k-means over the motes that have both a location and readings.

    Args:
        state: Current pipeline state

    Returns:
        Updated state with the cluster assignment
    """
    try:
        if state.frame is None:
            state.error = "Readings must be cleaned first"
            logger.warning("cluster_motes: missing cleaned readings")
            return state

        reporting = set(state.frame["mote_id"].unique().tolist())
        located = [loc for loc in state.locations if loc.mote_id in reporting]
        state.assignment = kmeans_clusters(
            located, state.config.clusters, seed=state.config.seed
        )
        state.add_node_execution("cluster_motes")
        logger.info(f"Cluster sizes: {state.assignment.sizes()}")

    except Exception as e:
        error_msg = f"Error clustering motes: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state


def flag_window_motes(state: IntelPipelineState) -> IntelPipelineState:
    """Flag warm motes near the walls."""
    try:
        if state.frame is None:
            state.error = "Readings must be cleaned first"
            logger.warning("flag_window_motes: missing cleaned readings")
            return state

        state.window_motes = detect_window_motes(
            state.frame,
            state.locations,
            z_thresh=state.config.z_thresh,
            wall_margin=state.config.wall_margin,
        )
        state.add_node_execution("flag_window_motes")

    except Exception as e:
        error_msg = f"Error flagging window motes: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state
