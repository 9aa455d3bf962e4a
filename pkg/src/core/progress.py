"""
Per-stage timing and progress for a pipeline run.

Durations are wall-clock and only ever shown, never written to report files.
"""
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass
class StageProgress:
    """Progress of one stage; finished once progress reaches 1.0"""
    stage: str
    started: float
    progress: float = 0.0
    finished: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def duration(self) -> float:
        return (self.finished if self.finished is not None else time.perf_counter()) - self.started

    @property
    def done(self) -> bool:
        return self.finished is not None


class ProgressTracker:
    """Stage progress in the order stages started"""

    def __init__(self):
        self.stages: Dict[str, StageProgress] = {}
        self.active: Optional[str] = None

    def start_step(self, step: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.active = step
        self.stages[step] = StageProgress(stage=step, started=time.perf_counter(), details=dict(details or {}))

    def update_progress(self, progress: float, details: Optional[Dict[str, Any]] = None) -> None:
        stage = self.stages.get(self.active) if self.active else None
        if stage is None:
            return
        stage.progress = min(max(progress, 0.0), 1.0)
        stage.details.update(details or {})
        if stage.progress >= 1.0 and not stage.done:
            stage.finished = time.perf_counter()

    def summary(self) -> Dict[str, Dict[str, Any]]:
        return {
            name: {"duration": s.duration, "progress": s.progress, "details": s.details}
            for name, s in self.stages.items()
        }
