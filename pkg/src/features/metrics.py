"""
Paired-fraction z metrics, age summaries and venue category fractions.
"""
import logging
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import DegenerateMetricError, InsufficientDataError, InvalidParameterError, ValidationError
from ..model.types import CATEGORIES, VenueCategory
from .types import CategoryDesign, MetricKind, SegmentFeatures, ZMetricParams

logger = logging.getLogger(__name__)

FractionPair = Tuple[str, float, float]


def fraction_pairs(features: Sequence[SegmentFeatures], kind: Union[MetricKind, str]) -> List[FractionPair]:
    """
    Paired within-segment fractions (a, b) for one metric.

    night: night / (night + notnight) and notnight / (night + notnight)
    gender: male / (male + female) and female / (male + female)
    tags: walk / tag_total and car / tag_total

    Segments with a zero denominator are left out.
    """
    kind = MetricKind(kind)
    pairs: List[FractionPair] = []
    for f in features:
        if kind is MetricKind.NIGHT:
            a, b, total = f.night_count, f.notnight_count, f.night_count + f.notnight_count
        elif kind is MetricKind.GENDER:
            a, b, total = f.male_users, f.female_users, f.male_users + f.female_users
        else:
            a, b, total = f.walk_tag_count, f.car_tag_count, f.tag_total
        if total > 0:
            pairs.append((f.segment_id, a / total, b / total))
    excluded = len(features) - len(pairs)
    if excluded:
        logger.info("%s: %d of %d segments excluded (zero denominator)", kind.metric_name, excluded, len(features))
    return pairs


def z_params(pairs: Sequence[FractionPair], kind: Union[MetricKind, str] = MetricKind.NIGHT) -> ZMetricParams:
    """
    Mean and population standard deviation of both fractions.

    Raises:
        InsufficientDataError: With fewer than 2 pairs
        DegenerateMetricError: If either fraction is constant
    """
    kind = MetricKind(kind)
    if len(pairs) < 2:
        raise InsufficientDataError(
            f"{kind.metric_name} needs at least 2 segments, got {len(pairs)}",
            "metrics",
            {"metric": kind.metric_name, "n": len(pairs)}
        )
    a = np.array([p[1] for p in pairs])
    b = np.array([p[2] for p in pairs])
    for label, values in zip(kind.fraction_labels, (a, b)):
        if np.all(values == values[0]):
            raise DegenerateMetricError(
                f"{kind.metric_name}: {label} is constant ({values[0]}) across {len(values)} segments",
                "metrics",
                {"metric": kind.metric_name, "fraction": label, "value": float(values[0])}
            )
    return ZMetricParams(
        kind=kind,
        n=len(pairs),
        mu_a=float(np.mean(a)),
        sigma_a=float(np.std(a)),
        mu_b=float(np.mean(b)),
        sigma_b=float(np.std(b)),
    )


def z_pair_metric(
    pairs: Sequence[FractionPair],
    kind: Union[MetricKind, str] = MetricKind.NIGHT,
    params: Optional[ZMetricParams] = None,
) -> List[Tuple[str, float]]:
    """
    score_i = (a_i - mu_a) / sigma_a - (b_i - mu_b) / sigma_b.

    Args:
        pairs: (segment id, a, b) triples of included segments
        kind: Metric, used for error messages
        params: Precomputed z_params(pairs)

    Returns:
        List[Tuple[str, float]]: (segment id, score) in input order
    """
    params = params or z_params(pairs, kind)
    a = np.array([p[1] for p in pairs])
    b = np.array([p[2] for p in pairs])
    scores = (a - params.mu_a) / params.sigma_a - (b - params.mu_b) / params.sigma_b
    return [(p[0], float(s)) for p, s in zip(pairs, scores)]


def mean_age(features: Sequence[SegmentFeatures]) -> List[Tuple[str, float]]:
    """Mean owner age per segment with at least one known age."""
    return [(f.segment_id, float(np.mean(f.ages))) for f in features if f.ages]


def median_age(features: Sequence[SegmentFeatures]) -> List[Tuple[str, float]]:
    return [(f.segment_id, float(np.median(f.ages))) for f in features if f.ages]


def category_fractions(features: Sequence[SegmentFeatures]) -> List[Tuple[str, Tuple[float, ...]]]:
    """Venue category shares per segment with at least one venue, in CATEGORIES order."""
    result = []
    for f in features:
        total = f.n_venues
        if total:
            result.append((f.segment_id, tuple(c / total for c in f.venue_counts)))
    return result


def category_design(
    features: Sequence[SegmentFeatures],
    targets: Mapping[str, Optional[float]],
    reference: Optional[Union[VenueCategory, str]] = VenueCategory.TRAVEL,
) -> CategoryDesign:
    """
    Build the category-fraction regression design for one target score.

    Rows are segments with at least one venue and a known target. The
    reference category and categories absent from every row are dropped.
    When the reference is itself absent, the first present category takes
    its place so the remaining columns are not collinear with the intercept.

    Args:
        features: Segment features
        targets: Segment id -> target score (None when unknown)
        reference: Category left out of the design, or None to keep all

    Returns:
        CategoryDesign: X (n x p), y (n), column names and what was dropped
    """
    if reference is not None:
        try:
            reference = VenueCategory.parse(reference) if isinstance(reference, str) else reference
        except ValidationError:
            raise InvalidParameterError(f"Unknown reference category: {reference!r}", "regress")

    ids, rows, ys = [], [], []
    for segment_id, fractions in category_fractions(features):
        target = targets.get(segment_id)
        if target is None:
            continue
        ids.append(segment_id)
        rows.append(fractions)
        ys.append(target)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(CATEGORIES))
    y = np.array(ys, dtype=np.float64)

    present = [bool(np.any(X[:, j] > 0)) for j in range(len(CATEGORIES))]
    dropped_absent = [c.value for c, p in zip(CATEGORIES, present) if not p]
    if reference is not None and not present[CATEGORIES.index(reference)] and any(present):
        substitute = CATEGORIES[present.index(True)]
        logger.warning("Reference category %s absent from the data; using %s", reference.value, substitute.value)
        reference = substitute

    keep = [j for j, c in enumerate(CATEGORIES) if present[j] and c is not reference]
    return CategoryDesign(
        segment_ids=ids,
        X=X[:, keep],
        y=y,
        names=[CATEGORIES[j].value for j in keep],
        reference=reference.value if reference is not None else None,
        dropped_absent=dropped_absent,
    )
