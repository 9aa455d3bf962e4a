from typing import Sequence

from langgraph.graph import END, StateGraph

from ..core.errors import InvalidParameterError
from .nodes import ScoringNodes
from .types import GraphState

# Pipeline order; every stage reads only what earlier stages produced.
STAGES = ("ingest", "join", "features", "metrics", "correlate", "regress", "curve", "bins", "score")


def build_graph(nodes: ScoringNodes, stages: Sequence[str] = STAGES):
    """
    Build the workflow graph for a run of the scoring pipeline.

    Args:
        nodes: Stage nodes bound to a configuration
        stages: Stages to chain, a subsequence of STAGES in pipeline order

    Returns:
        CompiledStateGraph: Linear graph over the chosen stages

    Raises:
        InvalidParameterError: For unknown, repeated or out-of-order stages
    """
    stages = list(stages)
    unknown = [s for s in stages if s not in STAGES]
    if unknown or not stages:
        raise InvalidParameterError(f"Unknown pipeline stages: {unknown or stages}", "graph", {"stages": stages})
    positions = [STAGES.index(s) for s in stages]
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise InvalidParameterError(f"Stages out of pipeline order: {stages}", "graph", {"stages": stages})

    workflow = StateGraph(GraphState)
    # Node names carry a suffix so they never collide with state keys
    for stage in stages:
        workflow.add_node(f"{stage}_node", getattr(nodes, stage))
    for a, b in zip(stages, stages[1:]):
        workflow.add_edge(f"{a}_node", f"{b}_node")
    workflow.add_edge(f"{stages[-1]}_node", END)
    workflow.set_entry_point(f"{stages[0]}_node")
    return workflow.compile()
