"""
Load Node
Parses the mote data and location files, then cleans the readings.
"""

import logging

from app.services.intel.parsing import (
    clean_mote_data,
    parse_mote_data,
    parse_mote_locations,
    read_lines,
)
from app.services.intel.state import IntelPipelineState

logger = logging.getLogger(__name__)


def load_inputs(state: IntelPipelineState) -> IntelPipelineState:
    """
    Parse both input files.

    Args:
        state: Current pipeline state

    Returns:
        Updated state with raw readings and mote locations
    """
    try:
        parsed = parse_mote_data(read_lines(state.data_path))
        state.raw = parsed.frame
        state.skipped_lines = parsed.skipped
        state.locations = parse_mote_locations(read_lines(state.locations_path))

        if state.raw.empty:
            state.error = f"No readings parsed from {state.data_path}"
            logger.warning("load_inputs: empty mote data")
            return state
        if not state.locations:
            state.error = f"No mote locations parsed from {state.locations_path}"
            logger.warning("load_inputs: empty location file")
            return state

        state.add_node_execution("load_inputs")
        logger.info(
            f"Loaded {len(state.raw)} readings and {len(state.locations)} locations"
        )

    except Exception as e:
        error_msg = f"Error loading inputs: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state


def clean_readings(state: IntelPipelineState) -> IntelPipelineState:
    """
    Drop out-of-range temperatures and readings from unlocated motes.

    Args:
        state: Current pipeline state

    Returns:
        Updated state with the cleaned frame
    """
    try:
        if state.raw is None:
            state.error = "Inputs must be loaded first"
            logger.warning("clean_readings: missing raw readings")
            return state

        cleaned = clean_mote_data(state.raw, state.locations)
        state.frame = cleaned.frame
        state.dropped_temperature = cleaned.dropped_temperature
        state.dropped_unlocated = cleaned.dropped_unlocated

        if state.frame.empty:
            state.error = "No readings left after cleaning"
            logger.warning("clean_readings: nothing survived cleaning")
            return state

        state.add_node_execution("clean_readings")

    except Exception as e:
        error_msg = f"Error cleaning readings: {str(e)}"
        logger.error(error_msg, exc_info=True)
        state.error = error_msg

    return state
