"""
Stage nodes of the scoring workflow graph.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..config.settings import PipelineConfig
from ..core.errors import DegenerateStatisticsError, EmptyInputError, EmptyResultError, InputFileError
from ..features.aggregate import aggregate_pairs, tabulate_photos
from ..features.keywords import KeywordLists, load_keyword_lists
from ..features.metrics import category_design, fraction_pairs, mean_age, median_age, z_pair_metric, z_params
from ..features.types import MetricKind, SegmentFeatures
from ..geo.index import build_index, match_points, nearest_segment
from ..geo.projection import LocalProjection, PlanarPoint
from ..model.parsing import read_photos, read_streets, read_venues
from ..model.types import CATEGORIES
from ..score.walkability import overall_walkability
from ..stats.binning import quantile_bin
from ..stats.correlation import correlate
from ..stats.describe import describe
from ..stats.regression import ols_fit
from ..stats.stability import stability_curve, stability_knee
from .types import GraphState, Joined, MetricOutcome

logger = logging.getLogger(__name__)

# metric -> the target score it is read against
METRIC_TARGETS: Dict[str, str] = {
    "photo_at_night": "safety",
    "manhood": "safety",
    "mean_age": "safety",
    "median_age": "safety",
    "zwalkability": "walkability",
}

# name -> (x series, y series); series are metric names, tag fractions or targets
CORRELATIONS: Dict[str, Tuple[str, str]] = {
    "photo_at_night~safety": ("photo_at_night", "safety"),
    "manhood~safety": ("manhood", "safety"),
    "mean_age~safety": ("mean_age", "safety"),
    "median_age~safety": ("median_age", "safety"),
    "walk_tag_fraction~walkability": ("walk_tag_fraction", "walkability"),
    "car_tag_fraction~walkability": ("car_tag_fraction", "walkability"),
    "zwalkability~walkability": ("zwalkability", "walkability"),
    "safety~walkability": ("safety", "walkability"),
}


def volume(feature: SegmentFeatures, metric: str) -> int:
    """Data volume behind a segment's metric value: the denominator it was computed from."""
    if metric == "photo_at_night":
        return feature.night_count + feature.notnight_count
    if metric == "manhood":
        return feature.male_users + feature.female_users
    if metric == "zwalkability":
        return feature.tag_total
    return len(feature.ages)


class ScoringNodes:
    """
    Nodes for the scoring workflow graph.

    Every node takes the graph state and returns only the keys it produces.
    """
    def __init__(self, config: PipelineConfig):
        self.config = config

    def _begin(self, state: GraphState, step: str, details: Optional[Dict[str, Any]] = None) -> None:
        logger.info("=== Starting %s Phase ===", step.title())
        tracker = state.get("tracker")
        if tracker is not None:
            tracker.start_step(step, details)

    def _finish(self, state: GraphState, details: Optional[Dict[str, Any]] = None) -> None:
        tracker = state.get("tracker")
        if tracker is not None:
            tracker.update_progress(1.0, details)

    def _degenerate(self, item: str, error: DegenerateStatisticsError) -> str:
        """Re-raise under strict_stats, otherwise log and return the reason."""
        if self.config.strict_stats:
            raise error
        logger.warning("%s unavailable: %s", item, error.message)
        return error.message

    def _targets(self, state: GraphState) -> Dict[str, Dict[str, Optional[float]]]:
        return {
            name: {s.id: s.target(name) for s in state["segments"]}
            for name in ("safety", "walkability")
        }

    def ingest(self, state: GraphState) -> Dict[str, Any]:
        """Read and validate the input files."""
        cfg = self.config
        self._begin(state, "ingest", {"streets": cfg.streets_path})
        if not cfg.streets_path:
            raise InputFileError("No streets file configured", "ingest", {"key": "streets_path"})
        try:
            segments, origin = read_streets(cfg.streets_path)
        except EmptyInputError as e:
            raise EmptyResultError(f"No usable street segments: {e.message}", "ingest", {"path": cfg.streets_path})
        if not segments:
            raise EmptyResultError("No usable street segments", "ingest", {"path": cfg.streets_path})

        photos, skipped_photos = read_photos(cfg.photos_path, cfg.strict) if cfg.photos_path else ([], 0)
        venues, skipped_venues = read_venues(cfg.venues_path, cfg.strict) if cfg.venues_path else ([], 0)
        keywords = load_keyword_lists(cfg.keywords_path) if cfg.keywords_path else KeywordLists.default()

        logger.info("Ingested %d segments, %d photos (%d skipped), %d venues (%d skipped)",
                    len(segments), len(photos), skipped_photos, len(venues), skipped_venues)
        self._finish(state, {"segments": len(segments), "photos": len(photos), "venues": len(venues)})
        return {
            "origin": origin,
            "segments": segments,
            "photos": photos,
            "venues": venues,
            "skipped": {"photos": skipped_photos, "venues": skipped_venues},
            "keywords": keywords,
            "unavailable": {},
        }

    def _match_photos(self, index, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        workers = self.config.workers
        radius = self.config.buffer_radius
        if workers == 1 or len(xs) < 2 * workers:
            return match_points(index, xs, ys, radius)
        bounds = np.linspace(0, len(xs), workers + 1).astype(np.int64)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda b: match_points(index, xs[b[0]:b[1]], ys[b[0]:b[1]], radius),
                zip(bounds[:-1], bounds[1:]),
            ))
        # chunks are contiguous, so offset concatenation keeps the (point, segment) order
        return (
            np.concatenate([pts + lo for (pts, _), lo in zip(parts, bounds[:-1])]),
            np.concatenate([segs for _, segs in parts]),
        )

    def join(self, state: GraphState) -> Dict[str, Any]:
        """Buffer-join photos and nearest-join venues onto segments."""
        cfg = self.config
        segments = state["segments"]
        photos = state.get("photos", [])
        venues = state.get("venues", [])
        self._begin(state, "join", {"radius": cfg.buffer_radius, "cell_size": cfg.effective_cell_size})

        projection = LocalProjection(state["origin"])
        index = build_index(
            [(s.id, s.geometry) for s in segments],
            cell_size=cfg.effective_cell_size,
            radius=cfg.buffer_radius,
        )

        empty = np.zeros(0, dtype=np.int64)
        photo_idx, photo_seg = empty, empty
        if photos:
            xs, ys = projection.project_arrays(
                np.array([p.location.lon for p in photos]), np.array([p.location.lat for p in photos])
            )
            photo_idx, photo_seg = self._match_photos(index, xs, ys)

        venue_seg = empty
        if venues:
            lines = {s.id: s.geometry for s in segments}
            position = {s.id: i for i, s in enumerate(segments)}
            xs, ys = projection.project_arrays(
                np.array([v.location.lon for v in venues]), np.array([v.location.lat for v in venues])
            )
            venue_seg = np.array(
                [position[nearest_segment(index, lines, PlanarPoint(float(x), float(y)))] for x, y in zip(xs, ys)],
                dtype=np.int64,
            )

        joined = Joined(
            photo_idx=photo_idx,
            photo_seg_idx=photo_seg,
            venue_idx=np.arange(len(venues), dtype=np.int64),
            venue_seg_idx=venue_seg,
        )
        logger.info("Matched %d of %d photos (%d photo-segment pairs); %d venues assigned",
                    joined.matched_photos, len(photos), len(photo_idx), len(venue_seg))
        self._finish(state, {"pairs": int(len(photo_idx)), "matched_photos": joined.matched_photos})
        return {"index": index, "joined": joined}

    def features(self, state: GraphState) -> Dict[str, Any]:
        """Aggregate the joined photos and venues into per-segment features."""
        cfg = self.config
        segments = state["segments"]
        venues = state.get("venues", [])
        joined = state["joined"]
        self._begin(state, "features", {"workers": cfg.workers})

        table = tabulate_photos(state.get("photos", []), state["keywords"], cfg.night_confidence)
        venue_categories = np.array(
            [CATEGORIES.index(venues[j].category) for j in joined.venue_idx], dtype=np.int64
        )
        features = aggregate_pairs(
            [s.id for s in segments],
            table,
            joined.photo_idx,
            joined.photo_seg_idx,
            venue_categories,
            joined.venue_seg_idx,
            workers=cfg.workers,
        )

        ages = [a for f in features for a in f.ages]
        descriptives = {
            "age": describe(ages),
            "male_users": describe(f.male_users for f in features),
            "female_users": describe(f.female_users for f in features),
            "tags": describe(f.tag_total for f in features),
            "venues": describe(f.n_venues for f in features),
            "photos": describe(f.n_photos for f in features),
            "walkability": describe(s.walkability for s in segments if s.walkability is not None),
            "safety": describe(s.safety for s in segments if s.safety is not None),
        }
        self._finish(state, {"segments": len(features)})
        return {"features": features, "descriptives": descriptives}

    def metrics(self, state: GraphState) -> Dict[str, Any]:
        """Paired-fraction z metrics and owner age summaries per segment."""
        features = state["features"]
        self._begin(state, "metrics")
        outcomes: Dict[str, MetricOutcome] = {}
        unavailable: Dict[str, str] = {}

        for kind in MetricKind:
            pairs = fraction_pairs(features, kind)
            outcome = MetricOutcome(
                name=kind.metric_name,
                fractions={sid: (a, b) for sid, a, b in pairs},
                excluded=len(features) - len(pairs),
            )
            try:
                outcome.params = z_params(pairs, kind)
                outcome.values = dict(z_pair_metric(pairs, kind, outcome.params))
            except DegenerateStatisticsError as e:
                outcome.unavailable = unavailable[outcome.name] = self._degenerate(outcome.name, e)
            outcomes[outcome.name] = outcome

        for name, fn in (("mean_age", mean_age), ("median_age", median_age)):
            values = dict(fn(features))
            outcomes[name] = MetricOutcome(name=name, values=values, excluded=len(features) - len(values))

        self._finish(state, {name: len(o.values) for name, o in outcomes.items()})
        return {"metrics": outcomes, "unavailable": unavailable}

    def _series(self, state: GraphState, name: str) -> Mapping[str, float]:
        if name in ("safety", "walkability"):
            return {sid: v for sid, v in self._targets(state)[name].items() if v is not None}
        metrics = state["metrics"]
        if name in ("walk_tag_fraction", "car_tag_fraction"):
            column = 0 if name == "walk_tag_fraction" else 1
            return {sid: ab[column] for sid, ab in metrics["zwalkability"].fractions.items()}
        return metrics[name].values

    def correlate(self, state: GraphState) -> Dict[str, Any]:
        """Pearson correlations of each metric with its target score."""
        self._begin(state, "correlate")
        results = {}
        unavailable: Dict[str, str] = {}
        for name, (x_name, y_name) in CORRELATIONS.items():
            x = self._series(state, x_name)
            y = self._series(state, y_name)
            ids = sorted(set(x) & set(y))
            if len(ids) < 3:
                unavailable[name] = f"{len(ids)} segments carry both series, need at least 3"
                logger.warning("%s unavailable: %s", name, unavailable[name])
                continue
            try:
                results[name] = correlate([x[i] for i in ids], [y[i] for i in ids])
            except DegenerateStatisticsError as e:
                unavailable[name] = self._degenerate(name, e)
        for name, result in results.items():
            logger.info("r(%s) = %.4f (n=%d, p=%.3g)", name, result.r, result.n, result.p_value)
        self._finish(state, {"correlations": len(results)})
        return {"correlations": results, "unavailable": unavailable}

    def regress(self, state: GraphState) -> Dict[str, Any]:
        """Regress each target score on venue category fractions."""
        cfg = self.config
        self._begin(state, "regress", {"targets": list(cfg.targets)})
        targets = self._targets(state)
        results = {}
        unavailable: Dict[str, str] = {}
        for target in cfg.targets:
            design = category_design(state["features"], targets[target], cfg.reference_category)
            try:
                result = ols_fit(design.X, design.y, design.names, target)
            except DegenerateStatisticsError as e:
                unavailable[f"regression:{target}"] = self._degenerate(f"regression:{target}", e)
                continue
            result.reference = design.reference
            result.dropped_absent = list(design.dropped_absent)
            logger.info("%s ~ categories: n=%d, p=%d, adjusted R2=%.4f", target, result.n, result.p, result.adj_r2)
            results[target] = result
        self._finish(state, {"fitted": sorted(results)})
        return {"regressions": results, "unavailable": unavailable}

    def _available_metrics(self, state: GraphState) -> List[str]:
        return [name for name in METRIC_TARGETS if state["metrics"][name].available]

    def curve(self, state: GraphState) -> Dict[str, Any]:
        """Correlation stability over per-segment data volume thresholds."""
        cfg = self.config
        self._begin(state, "curve", {"thresholds": list(cfg.stability_thresholds)})
        targets = self._targets(state)
        by_id = {f.segment_id: f for f in state["features"]}
        curves, knees = {}, {}
        for name in self._available_metrics(state):
            values = state["metrics"][name].values
            target = METRIC_TARGETS[name]
            counts = {sid: volume(by_id[sid], name) for sid in values}
            result = stability_curve(values, targets[target], counts, cfg.stability_thresholds)
            result.metric, result.target = name, target
            curves[name] = result
            knees[name] = stability_knee(result, cfg.stability_tolerance)
            logger.info("%s stability knee: %s", name, knees[name])
        self._finish(state, {"curves": len(curves)})
        return {"curves": curves, "knees": knees}

    def bins(self, state: GraphState) -> Dict[str, Any]:
        """Equal-frequency bins of the z metrics with target-score summaries."""
        cfg = self.config
        self._begin(state, "bins")
        targets = self._targets(state)
        plan = (
            ("photo_at_night", cfg.night_bins),
            ("manhood", cfg.gender_bins),
            ("zwalkability", cfg.tag_bins),
        )
        results = {}
        unavailable: Dict[str, str] = {}
        for name, k in plan:
            outcome = state["metrics"][name]
            if not outcome.available:
                continue
            try:
                results[name] = quantile_bin(sorted(outcome.values.items()), targets[METRIC_TARGETS[name]], k)
            except DegenerateStatisticsError as e:
                unavailable[f"bins:{name}"] = self._degenerate(f"bins:{name}", e)
        self._finish(state, {"binned": sorted(results)})
        return {"bins": results, "unavailable": unavailable}

    def score(self, state: GraphState) -> Dict[str, Any]:
        """
        Composite walkability per segment.

        Segments with category ratings get the equal-weight mean; the others
        keep their given walkability, or no score.
        """
        self._begin(state, "score")
        scores: Dict[str, Optional[float]] = {}
        for s in state["segments"]:
            scores[s.id] = overall_walkability(s.ratings) if s.ratings is not None else s.walkability
        scored = sum(v is not None for v in scores.values())
        logger.info("Scored %d of %d segments", scored, len(scores))
        self._finish(state, {"scored": scored})
        return {"scores": scores}
