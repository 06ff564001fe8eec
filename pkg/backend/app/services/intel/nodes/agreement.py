"""
Agreement Node
Selects well-covered epochs, measures per-cluster overlap agreement with and
without the window motes, and builds the missing-data/decoherence curves.
"""

import logging

from app.services.intel.analysis import (
    cluster_agreement,
    missing_vs_decoherence_curves,
    select_epochs,
)
from app.services.intel.state import IntelPipelineState

logger = logging.getLogger(__name__)


def select_well_covered_epochs(state: IntelPipelineState) -> IntelPipelineState:
    try:
        if state.frame is None:
            state.error = "Readings must be cleaned first"
            logger.warning("select_well_covered_epochs: missing cleaned readings")
            return state

        state.epochs = select_epochs(state.frame, state.config.epochs)
        state.add_node_execution("select_well_covered_epochs")
        logger.info(f"Selected {len(state.epochs)} epochs")

    except Exception as e:
        error_msg = f"Error selecting epochs: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state


def measure_agreement(state: IntelPipelineState) -> IntelPipelineState:
    """
    Overlap agreement over all motes and with the window motes left out.

    Args:
        state: Current pipeline state

    Returns:
        Updated state with both agreement summaries
    """
    try:
        if state.frame is None or state.assignment is None or not state.epochs:
            state.error = "Clusters and epochs must be ready first"
            logger.warning("measure_agreement: missing prerequisites")
            return state

        tolerance = state.config.tolerance
        state.agreement_all = cluster_agreement(
            state.frame, state.assignment, state.epochs, tolerance=tolerance
        )
        state.agreement_excluded = cluster_agreement(
            state.frame,
            state.assignment,
            state.epochs,
            exclude=state.window_motes,
            tolerance=tolerance,
        )
        state.add_node_execution("measure_agreement")

    except Exception as e:
        error_msg = f"Error measuring agreement: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state


def missing_data_curves(state: IntelPipelineState) -> IntelPipelineState:
    try:
        if state.frame is None or state.assignment is None or not state.epochs:
            state.error = "Clusters and epochs must be ready first"
            logger.warning("missing_data_curves: missing prerequisites")
            return state

        config = state.config
        state.curves = missing_vs_decoherence_curves(
            state.frame,
            state.assignment,
            state.epochs,
            config.missing_fracs,
            config.visibilities,
            seed=config.seed,
            tolerance=config.tolerance,
            atoms=config.atoms,
            eta=config.sensitivity,
            alpha=config.alpha,
            trials=config.trials,
            exclude=state.excluded_motes,
        )
        state.add_node_execution("missing_data_curves")

    except Exception as e:
        error_msg = f"Error building missing-data curves: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state
