"""
Intel Lab pipeline orchestration using LangGraph.
Defines the pipeline graph with nodes, edges and stop-on-error routing.
"""

import logging
from collections.abc import Callable
from pathlib import Path

from langgraph.graph import END, START, StateGraph

from app.core.config import INTEL_DATA_FILE, INTEL_LOCATIONS_FILE
from app.models import IntelConfig

from .nodes import (
    clean_readings,
    cluster_motes,
    compare_snr,
    flag_window_motes,
    load_inputs,
    measure_agreement,
    missing_data_curves,
    select_well_covered_epochs,
)
from .parsing import require_intel_files
from .state import IntelPipelineState, IntelPipelineStateDict

logger = logging.getLogger(__name__)

Node = Callable[[IntelPipelineState], IntelPipelineState]
GraphNode = Callable[[IntelPipelineStateDict], IntelPipelineStateDict]

NODES: list[tuple[str, Node]] = [
    ("load_inputs", load_inputs),
    ("clean_readings", clean_readings),
    ("cluster_motes", cluster_motes),
    ("flag_window_motes", flag_window_motes),
    ("select_well_covered_epochs", select_well_covered_epochs),
    ("measure_agreement", measure_agreement),
    ("compare_snr", compare_snr),
    ("missing_data_curves", missing_data_curves),
]


def _graph_node(node: Node) -> GraphNode:
    def run(graph_state: IntelPipelineStateDict) -> IntelPipelineStateDict:
        return {"pipeline": node(graph_state["pipeline"])}

    return run


def _continue_or_stop(next_node: str) -> Callable[[IntelPipelineStateDict], str]:
    def route(graph_state: IntelPipelineStateDict) -> str:
        return END if graph_state["pipeline"].error else next_node

    return route


class IntelPipeline:
    """
    Orchestrator for the Intel Lab analysis.
    Manages graph construction, execution and state hand-off.
    """

    def __init__(self) -> None:
        """Build and compile the graph once."""
        self.graph = self._build_graph()
        self.compiled_graph = self.graph.compile()
        logger.info("IntelPipeline initialized")

    def _build_graph(self) -> StateGraph[IntelPipelineStateDict]:
        """
        Build the LangGraph pipeline graph.

        Workflow:
        START -> load -> clean -> cluster -> windows -> epochs -> agreement
        -> snr -> curves -> END, leaving for END as soon as a node sets an error.

        Returns:
            Constructed StateGraph
        """
        workflow = StateGraph(IntelPipelineStateDict)

        for name, node in NODES:
            workflow.add_node(name, _graph_node(node))

        names = [name for name, _ in NODES]
        workflow.add_edge(START, names[0])
        for current, following in zip(names, names[1:], strict=False):
            workflow.add_conditional_edges(
                current, _continue_or_stop(following), [following, END]
            )
        workflow.add_edge(names[-1], END)

        logger.debug("Graph pipeline edges configured")
        return workflow

    def execute(self, config: IntelConfig, data_dir: Path) -> IntelPipelineState:
        """
        Run the graph over the dataset in ``data_dir``.

        Args:
            config: Pipeline parameters
            data_dir: Directory holding the mote data and location files

        Returns:
            Final state; ``error`` is set when a node failed

        Raises:
            DataNotFound: when either input file is missing
        """
        data_path = data_dir / INTEL_DATA_FILE
        locations_path = data_dir / INTEL_LOCATIONS_FILE
        require_intel_files(data_path, locations_path)

        initial_state: IntelPipelineStateDict = {
            "pipeline": IntelPipelineState(
                config=config, data_path=data_path, locations_path=locations_path
            )
        }
        logger.info(f"Starting Intel pipeline over {data_dir}")
        final_state = self.compiled_graph.invoke(initial_state)
        state: IntelPipelineState = final_state["pipeline"]

        if state.error:
            logger.error(f"Pipeline stopped after {state.nodes_executed}: {state.error}")
        logger.info(f"Pipeline finished. Nodes executed: {state.nodes_executed}")
        return state

    def get_pipeline_structure(self) -> dict[str, object]:
        """
        Get the structure of the pipeline graph for visualization/debugging.

        Returns:
            Dictionary describing the graph structure
        """
        names = [name for name, _ in NODES]
        return {
            "nodes": names,
            "edges": [
                {"from": a, "to": b}
                for a, b in zip(["START", *names], [*names, "END"], strict=True)
            ],
            "description": "Linear pipeline over the cleaned mote readings, stopping at the first error",
        }


# Singleton instance
_intel_pipeline: IntelPipeline | None = None


def get_intel_pipeline() -> IntelPipeline:
    """Get or create the singleton IntelPipeline instance."""
    global _intel_pipeline
    if _intel_pipeline is None:
        _intel_pipeline = IntelPipeline()
    return _intel_pipeline
