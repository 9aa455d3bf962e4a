"""
Scoring pipeline: stage graph, orchestration, reports and synthetic inputs.
"""
from .types import GraphState, Joined, MetricOutcome
from .nodes import CORRELATIONS, METRIC_TARGETS, ScoringNodes
from .graph import STAGES, build_graph
from .reports import read_assignments, report_document, write_outputs
from .orchestrator import COMMANDS, ScoringOrchestrator, run_pipeline
from .synth import PlantedSample, SynthCity, SynthSpec, planted_metric_sample, synth_city
from .agreement import AgreementResult, annotation_agreement

__all__ = [
    "GraphState",
    "Joined",
    "MetricOutcome",
    "CORRELATIONS",
    "METRIC_TARGETS",
    "ScoringNodes",
    "STAGES",
    "build_graph",
    "read_assignments",
    "report_document",
    "write_outputs",
    "COMMANDS",
    "ScoringOrchestrator",
    "run_pipeline",
    "PlantedSample",
    "SynthCity",
    "SynthSpec",
    "planted_metric_sample",
    "synth_city",
    "AgreementResult",
    "annotation_agreement",
]
