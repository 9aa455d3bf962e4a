"""
Report bundle emission.

Every file is sorted by segment id (or record id) and carries no timestamps,
so repeated runs over the same inputs write identical bytes.
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import geojson
import numpy as np
import pandas as pd

from ..config.settings import PipelineConfig
from ..core.errors import DuplicateKeyError, InputFileError, ParsingError, ReferentialIntegrityError
from ..features.types import FEATURE_COLUMNS, MetricKind, SegmentFeatures
from ..model.parsing import street_to_feature
from ..model.types import PhotoRecord, StreetSegment, VenueRecord
from ..score.walkability import score_color
from ..stats.types import BinSummary, StabilityCurve
from .types import GraphState, Joined

logger = logging.getLogger(__name__)

ASSIGNMENT_COLUMNS = ("record_type", "record_id", "segment_id")
METRIC_COLUMNS = (
    "segment_id",
    "night_fraction", "notnight_fraction", "photo_at_night",
    "male_fraction", "female_fraction", "manhood",
    "walk_tag_fraction", "car_tag_fraction", "zwalkability",
    "mean_age", "median_age",
    "walkability", "safety", "score",
)


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def write_json(document: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(document, indent=2, sort_keys=True, allow_nan=False))
        f.write("\n")
    logger.info("Wrote %s", path)
    return path


def assignments_frame(
    segments: Sequence[StreetSegment],
    photos: Sequence[PhotoRecord],
    venues: Sequence[VenueRecord],
    joined: Joined,
) -> pd.DataFrame:
    """One row per (photo, segment) match and per venue assignment."""
    rows = [
        ("photo", photos[p].id, segments[s].id)
        for p, s in zip(joined.photo_idx.tolist(), joined.photo_seg_idx.tolist())
    ]
    rows += [
        ("venue", venues[v].id, segments[s].id)
        for v, s in zip(joined.venue_idx.tolist(), joined.venue_seg_idx.tolist())
    ]
    rows.sort()
    return pd.DataFrame(rows, columns=list(ASSIGNMENT_COLUMNS))


def read_assignments(
    path: Union[str, Path],
    segments: Sequence[StreetSegment],
    photos: Sequence[PhotoRecord],
    venues: Sequence[VenueRecord],
) -> Joined:
    """
    Load a join output back into index pairs.

    Raises:
        InputFileError: If the file cannot be read
        ParsingError: For a missing column or unknown record type
        ReferentialIntegrityError: If a row names an unknown photo, venue or segment
        DuplicateKeyError: If a venue is assigned twice
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as e:
        raise InputFileError(f"Cannot read {path}: {e.strerror}", "features", {"path": str(path)})
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ParsingError(f"Malformed assignment file {path}: {e}", "features", {"path": str(path)})
    missing = [c for c in ASSIGNMENT_COLUMNS if c not in frame.columns]
    if missing:
        raise ParsingError(f"Assignment file lacks columns {missing}", "features", {"path": str(path)})

    positions = {
        "segment": {s.id: i for i, s in enumerate(segments)},
        "photo": {p.id: i for i, p in enumerate(photos)},
        "venue": {v.id: i for i, v in enumerate(venues)},
    }

    def lookup(kind: str, key: str, line: int) -> int:
        if key not in positions[kind]:
            raise ReferentialIntegrityError(
                f"Assignment line {line} references unknown {kind} {key!r}",
                "features",
                {"line": line, kind: key}
            )
        return positions[kind][key]

    photo_pairs = set()
    venue_seg: Dict[int, int] = {}
    # line 1 is the header
    for line, (kind, record_id, segment_id) in enumerate(
        frame[list(ASSIGNMENT_COLUMNS)].itertuples(index=False, name=None), start=2
    ):
        if kind not in ("photo", "venue"):
            raise ParsingError(f"Unknown record type {kind!r}", "features", line_number=line)
        record = lookup(kind, record_id, line)
        segment = lookup("segment", segment_id, line)
        if kind == "photo":
            photo_pairs.add((record, segment))
        elif record in venue_seg:
            raise DuplicateKeyError(f"Venue {record_id!r} is assigned twice", "features", {"line": line})
        else:
            venue_seg[record] = segment

    pairs = sorted(photo_pairs)
    venue_idx = sorted(venue_seg)
    return Joined(
        photo_idx=np.array([p for p, _ in pairs], dtype=np.int64),
        photo_seg_idx=np.array([s for _, s in pairs], dtype=np.int64),
        venue_idx=np.array(venue_idx, dtype=np.int64),
        venue_seg_idx=np.array([venue_seg[v] for v in venue_idx], dtype=np.int64),
    )


def features_frame(features: Iterable[SegmentFeatures]) -> pd.DataFrame:
    rows = [f.to_row() for f in sorted(features, key=lambda f: f.segment_id)]
    return pd.DataFrame(rows, columns=list(FEATURE_COLUMNS))


def metrics_frame(state: GraphState) -> pd.DataFrame:
    """Per-segment metric values; blank where a segment is excluded or a metric unavailable."""
    metrics = state["metrics"]
    scores = state.get("scores", {})
    rows = []
    for s in sorted(state["segments"], key=lambda s: s.id):
        row: Dict[str, Any] = {"segment_id": s.id}
        for kind in MetricKind:
            outcome = metrics[kind.metric_name]
            a, b = outcome.fractions.get(s.id, (None, None))
            row.update(dict(zip(kind.fraction_labels, (a, b))))
            row[kind.metric_name] = outcome.values.get(s.id)
        row["mean_age"] = metrics["mean_age"].values.get(s.id)
        row["median_age"] = metrics["median_age"].values.get(s.id)
        row.update(walkability=s.walkability, safety=s.safety, score=scores.get(s.id))
        rows.append(row)
    return pd.DataFrame(rows, columns=list(METRIC_COLUMNS))


def curve_frame(curve: StabilityCurve) -> pd.DataFrame:
    return pd.DataFrame(curve.to_rows(), columns=["threshold", "r", "n_segments"])


def bins_frame(summaries: Sequence[BinSummary]) -> pd.DataFrame:
    return pd.DataFrame(
        [b.to_row() for b in summaries],
        columns=["bin", "count", "metric_lo", "metric_hi", "median", "p2", "p98"],
    )


def regression_document(state: GraphState) -> Dict[str, Any]:
    document: Dict[str, Any] = {name: result.to_dict() for name, result in state.get("regressions", {}).items()}
    for item, reason in state.get("unavailable", {}).items():
        if item.startswith("regression:"):
            document[item.split(":", 1)[1]] = {"unavailable": reason}
    return document


def scored_geojson(state: GraphState) -> str:
    """Streets as a FeatureCollection with score, map color and metric properties."""
    scores = state["scores"]
    metrics = state.get("metrics", {})
    known = [v for v in scores.values() if v is not None]
    lo, hi = (min(known), max(known)) if known else (0.0, 0.0)
    features = []
    for segment in sorted(state["segments"], key=lambda s: s.id):
        feature = street_to_feature(segment)
        value = scores.get(segment.id)
        feature["properties"]["score"] = value
        feature["properties"]["color"] = score_color(value, lo, hi)
        for name, outcome in sorted(metrics.items()):
            feature["properties"][name] = outcome.values.get(segment.id)
        features.append(feature)
    return geojson.dumps(geojson.FeatureCollection(features), sort_keys=True)


def report_document(state: GraphState, config: Optional[PipelineConfig] = None) -> Dict[str, Any]:
    """Run summary: counts, exclusions, metric parameters, correlations, knees and descriptives."""
    photos = state.get("photos", [])
    document: Dict[str, Any] = {
        "inputs": {
            "segments": len(state["segments"]),
            "photos": len(photos),
            "venues": len(state.get("venues", [])),
            "skipped_lines": dict(state.get("skipped", {})),
        },
    }
    if "joined" in state:
        joined = state["joined"]
        document["join"] = {
            "photo_segment_pairs": int(len(joined.photo_idx)),
            "matched_photos": joined.matched_photos,
            "unmatched_photos": len(photos) - joined.matched_photos,
            "venues_assigned": int(len(joined.venue_idx)),
        }
    if "metrics" in state:
        document["metrics"] = {
            name: {
                "included": len(o.values),
                "excluded_segments": o.excluded,
                "params": None if o.params is None else {
                    "n": o.params.n,
                    "mu_a": o.params.mu_a,
                    "sigma_a": o.params.sigma_a,
                    "mu_b": o.params.mu_b,
                    "sigma_b": o.params.sigma_b,
                },
                "unavailable": o.unavailable,
            }
            for name, o in state["metrics"].items()
        }
    if "correlations" in state:
        document["correlations"] = {
            name: {"r": c.r, "p_value": c.p_value, "n": c.n} for name, c in state["correlations"].items()
        }
    if "regressions" in state:
        document["regressions"] = regression_document(state)
    if "knees" in state:
        document["stability_knees"] = dict(state["knees"])
    if "descriptives" in state:
        document["descriptives"] = {name: s.to_dict() for name, s in state["descriptives"].items()}
    if "scores" in state:
        known = [v for v in state["scores"].values() if v is not None]
        document["scores"] = {
            "scored": len(known),
            "min": min(known) if known else None,
            "max": max(known) if known else None,
        }
    document["unavailable"] = dict(state.get("unavailable", {}))
    if config is not None:
        document["config"] = config.to_dict()
    return document


def write_outputs(
    state: GraphState,
    output_dir: Union[str, Path],
    outputs: Sequence[str],
    config: Optional[PipelineConfig] = None,
) -> List[Path]:
    """
    Write the named outputs that the state supports.

    Args:
        state: Final graph state
        output_dir: Created if missing
        outputs: Any of "assignments", "features", "metrics", "regression",
            "curves", "bins", "scored", "report"
        config: Echoed into report.json

    Returns:
        List[Path]: Files written, in the order of outputs
    """
    out = Path(output_dir)
    os.makedirs(out, exist_ok=True)
    written: List[Path] = []
    for name in outputs:
        if name == "assignments":
            written.append(write_csv(
                assignments_frame(state["segments"], state.get("photos", []), state.get("venues", []),
                                  state["joined"]),
                out / "assignments.csv",
            ))
        elif name == "features":
            written.append(write_csv(features_frame(state["features"]), out / "features.csv"))
        elif name == "metrics":
            written.append(write_csv(metrics_frame(state), out / "metrics.csv"))
        elif name == "regression":
            written.append(write_json(regression_document(state), out / "regression.json"))
        elif name == "curves":
            for metric, curve in sorted(state.get("curves", {}).items()):
                written.append(write_csv(curve_frame(curve), out / f"stability_{metric}.csv"))
        elif name == "bins":
            for metric, summaries in sorted(state.get("bins", {}).items()):
                written.append(write_csv(bins_frame(summaries), out / f"bins_{metric}.csv"))
        elif name == "scored":
            path = out / "scored_streets.geojson"
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(scored_geojson(state))
                f.write("\n")
            logger.info("Wrote %s", path)
            written.append(path)
        elif name == "report":
            written.append(write_json(report_document(state, config), out / "report.json"))
        else:
            raise ValueError(f"Unknown output: {name}")
    return written
