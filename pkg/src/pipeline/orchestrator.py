import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from ..config.settings import PipelineConfig
from ..core.errors import InvalidParameterError
from ..core.progress import ProgressTracker
from .graph import STAGES, build_graph
from .nodes import ScoringNodes
from .reports import read_assignments, write_outputs
from .types import GraphState

logger = logging.getLogger(__name__)

# command -> (stages to run, outputs to write)
COMMANDS: Dict[str, tuple] = {
    "ingest": (("ingest",), ()),
    "join": (("ingest", "join"), ("assignments",)),
    "features": (("ingest", "join", "features"), ("features",)),
    "metrics": (("ingest", "join", "features", "metrics"), ("metrics",)),
    "regress": (("ingest", "join", "features", "regress"), ("regression",)),
    "curve": (("ingest", "join", "features", "metrics", "curve"), ("curves",)),
    "bins": (("ingest", "join", "features", "metrics", "bins"), ("bins",)),
    "score": (("ingest", "join", "features", "metrics", "score"), ("scored",)),
    "run": (STAGES, ("assignments", "features", "metrics", "regression", "curves", "bins", "scored", "report")),
}


class ScoringOrchestrator:
    """
    Runs the scoring workflow graph and writes its report bundle.
    """
    def __init__(self, config: PipelineConfig, tracker: Optional[ProgressTracker] = None):
        """
        Initialize the orchestrator.

        Args:
            config: Validated pipeline configuration
            tracker: Optional progress tracker shared with the caller
        """
        self.config = config
        self.tracker = tracker or ProgressTracker()
        self.nodes = ScoringNodes(config)

    def run_stages(self, stages: Sequence[str], state: Optional[GraphState] = None) -> GraphState:
        """Run the given stages, in order, on top of an existing state."""
        workflow = build_graph(self.nodes, stages)
        initial: GraphState = dict(state or {})
        initial["tracker"] = self.tracker
        return workflow.invoke(initial)

    def run(self, command: str = "run", assignments: Optional[Union[str, Path]] = None) -> GraphState:
        """
        Run the stages behind a command.

        Args:
            command: One of COMMANDS
            assignments: A join output to use instead of running the join
                stage (only for commands that need the join)

        Returns:
            GraphState: Final state
        """
        if command not in COMMANDS:
            raise InvalidParameterError(f"Unknown command: {command}", "run", {"command": command})
        stages = list(COMMANDS[command][0])
        if assignments is None or "join" not in stages:
            return self.run_stages(stages)

        state = self.run_stages(["ingest"])
        state["joined"] = read_assignments(assignments, state["segments"], state.get("photos", []),
                                           state.get("venues", []))
        logger.info("Loaded %d photo and %d venue assignments from %s",
                    len(state["joined"].photo_idx), len(state["joined"].venue_idx), assignments)
        return self.run_stages([s for s in stages if s not in ("ingest", "join")], state)

    def write(self, state: GraphState, command: str = "run") -> List[Path]:
        """Write the outputs of a command into the configured output directory."""
        return write_outputs(state, self.config.output_dir, COMMANDS[command][1], self.config)

    def execute(self, command: str = "run", assignments: Optional[Union[str, Path]] = None) -> List[Path]:
        state = self.run(command, assignments)
        return self.write(state, command)


def run_pipeline(config: PipelineConfig) -> List[Path]:
    """Run every stage and write the full report bundle; returns the files written."""
    return ScoringOrchestrator(config).execute("run")
