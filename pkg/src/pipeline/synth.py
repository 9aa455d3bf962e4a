"""
Synthetic city generation with planted metric/score correlations.

Segments sit one per grid cell, far enough apart that buffers never overlap,
so every photo matches exactly the segment it was drawn for. Latent series
are built orthogonal in-sample, which makes each planted correlation exact
before count rounding.
"""
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import InvalidParameterError
from ..features.keywords import DEFAULT_CAR_KEYWORDS, DEFAULT_WALK_KEYWORDS
from ..geo.polyline import Polyline
from ..geo.projection import GeoPoint, LocalProjection, PlanarPoint
from ..model.parsing import COORDINATE_PRECISION, photo_to_json, streets_to_geojson, venue_to_json
from ..model.types import (
    CATEGORIES,
    RATING_FIELDS,
    CategoryRatings,
    Gender,
    MachineTag,
    PhotoRecord,
    StreetSegment,
    VenueCategory,
    VenueRecord,
)
from ..score.walkability import overall_walkability

logger = logging.getLogger(__name__)

MIN_CELL_SIZE = 150.0
SEGMENT_LENGTH = (50.0, 80.0)
CENTER_JITTER = 10.0
PHOTO_OFFSET = 15.0
VENUE_OFFSET = 10.0

FILLER_TAGS = ("london", "city", "sky", "people", "building", "uk", "bus", "river", "shop", "window")

# category -> (base weight, log-odds slope on standardized safety)
VENUE_MIX: Dict[VenueCategory, Tuple[float, float]] = {
    VenueCategory.ARTS: (0.06, 0.3),
    VenueCategory.COLLEGE: (0.05, 0.1),
    VenueCategory.FOOD: (0.25, 0.2),
    VenueCategory.NIGHTLIFE: (0.10, -0.6),
    VenueCategory.OUTDOORS: (0.08, 0.8),
    VenueCategory.RESIDENTIAL: (0.10, 0.4),
    VenueCategory.SHOPPING: (0.18, -0.2),
    VenueCategory.TRAVEL: (0.10, 0.0),
    VenueCategory.WORK: (0.08, -0.4),
}


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic city."""
    n_segments: int = 200
    extent: Optional[float] = None
    photos_median: float = 40.0
    photos_sigma: float = 0.35
    min_photos: int = 15
    rho_night: float = 0.6
    rho_gender: float = 0.58
    rho_tags: float = 0.89
    rho_age: float = 0.32
    rho_walk_safety: float = 0.22
    noise_slope: float = 0.0
    venues_mean: float = 4.0
    unclassified_share: float = 0.1
    gendered_share: float = 0.6
    tags_per_photo: int = 4
    seed: int = 0
    origin_lon: float = -0.1276
    origin_lat: float = 51.5072

    @property
    def grid_columns(self) -> int:
        return math.ceil(math.sqrt(self.n_segments))

    @property
    def cell_size(self) -> float:
        return MIN_CELL_SIZE if self.extent is None else self.extent / self.grid_columns

    def validate(self) -> "SynthSpec":
        """
        Raises:
            InvalidParameterError: Naming the first offending field
        """
        checks = [
            ("n_segments", self.n_segments >= 10, "must be >= 10"),
            ("extent", self.extent is None or self.extent / self.grid_columns >= MIN_CELL_SIZE,
             f"must leave grid cells of at least {MIN_CELL_SIZE} m"),
            ("photos_median", self.photos_median > 0, "must be > 0"),
            ("photos_sigma", self.photos_sigma >= 0, "must be >= 0"),
            ("min_photos", self.min_photos >= 1, "must be >= 1"),
            ("noise_slope", self.noise_slope >= 0, "must be >= 0"),
            ("venues_mean", self.venues_mean >= 0, "must be >= 0"),
            ("unclassified_share", 0 <= self.unclassified_share < 1, "must be in [0, 1)"),
            ("gendered_share", 0 < self.gendered_share <= 1, "must be in (0, 1]"),
            ("tags_per_photo", self.tags_per_photo >= 1, "must be >= 1"),
        ]
        checks += [
            (name, -1 < getattr(self, name) < 1, "must be in (-1, 1)")
            for name in ("rho_night", "rho_gender", "rho_tags", "rho_age", "rho_walk_safety")
        ]
        for name, ok, message in checks:
            if not ok:
                raise InvalidParameterError(f"{name} {message}, got {getattr(self, name)!r}", "synth", {name: getattr(self, name)})
        return self


@dataclass
class SynthCity:
    """Serialized inputs of a synthetic city plus the scores planted in it."""
    streets_geojson: str
    photos_jsonl: str
    venues_jsonl: str
    safety: Dict[str, float] = field(default_factory=dict)
    walkability: Dict[str, float] = field(default_factory=dict)

    def write(self, directory: Union[str, Path]) -> Dict[str, Path]:
        """Write streets.geojson, photos.jsonl and venues.jsonl into directory."""
        out = Path(directory)
        os.makedirs(out, exist_ok=True)
        paths = {
            "streets": out / "streets.geojson",
            "photos": out / "photos.jsonl",
            "venues": out / "venues.jsonl",
        }
        for name, text in (("streets", self.streets_geojson), ("photos", self.photos_jsonl),
                           ("venues", self.venues_jsonl)):
            with open(paths[name], "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        logger.info("Wrote synthetic city to %s", out)
        return paths


def _standardize(x: np.ndarray) -> np.ndarray:
    x = x - x.mean()
    return x / x.std()


def _orthogonal_noise(rng: np.random.Generator, n: int, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Standardized noise with zero sample correlation to every (centered) basis vector."""
    e = rng.standard_normal(n)
    e -= e.mean()
    for b in basis:
        e -= (e @ b) / (b @ b) * b
    return _standardize(e)


def _planted(rng: np.random.Generator, base: np.ndarray, rho: float) -> np.ndarray:
    """Standardized series whose sample correlation with base is exactly rho."""
    return rho * base + math.sqrt(1 - rho * rho) * _orthogonal_noise(rng, len(base), [base])


def _segment_ids(n: int) -> List[str]:
    width = len(str(n))
    return [f"s{i:0{width}d}" for i in range(1, n + 1)]


def synth_city(spec: SynthSpec) -> SynthCity:
    """
    Generate streets, photos and venues with planted correlations.

    Night fraction, male owner fraction and mean owner age correlate with
    safety at rho_night, rho_gender and rho_age. Walk and car tag fractions
    are built so that their z difference correlates with walkability at
    rho_tags. Walkability is the mean of eight category ratings and
    correlates with safety at rho_walk_safety.

    Args:
        spec: Generator parameters

    Returns:
        SynthCity: GeoJSON and JSON Lines text, identical for equal parameters
    """
    spec = spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n_segments
    projection = LocalProjection(GeoPoint(spec.origin_lon, spec.origin_lat))
    ids = _segment_ids(n)

    cols, cell = spec.grid_columns, spec.cell_size
    positions = np.arange(n)
    cx = (positions % cols + 0.5) * cell + rng.uniform(-CENTER_JITTER, CENTER_JITTER, n)
    cy = (positions // cols + 0.5) * cell + rng.uniform(-CENTER_JITTER, CENTER_JITTER, n)
    theta = rng.uniform(0.0, math.pi, n)
    half = rng.uniform(*SEGMENT_LENGTH, n) / 2
    ax, ay = cx - half * np.cos(theta), cy - half * np.sin(theta)
    bx, by = cx + half * np.cos(theta), cy + half * np.sin(theta)

    safety = np.round(np.clip(2.75 + 0.7 * rng.standard_normal(n), 0.5, 5.0), 4)
    s = _standardize(safety)
    walk_center = np.clip(2.9 + 0.4 * _planted(rng, s, spec.rho_walk_safety), 1.8, 4.2)
    spread = rng.uniform(-0.4, 0.4, (n, len(RATING_FIELDS)))
    spread -= spread.mean(axis=1, keepdims=True)
    rating_rows = np.round(walk_center[:, None] + spread, 4)
    ratings = [CategoryRatings.from_mapping(dict(zip(RATING_FIELDS, map(float, row)))) for row in rating_rows]
    walkability = np.array([overall_walkability(r) for r in ratings])

    night_z = _planted(rng, s, spec.rho_night)
    gender_z = _planted(rng, s, spec.rho_gender)
    age_z = _planted(rng, s, spec.rho_age)

    # z(w) - z(c) correlates with walkability at rho when each fraction does at
    # +/- rho' with independent noise and rho'^2 = rho^2 / (2 - rho^2)
    w = _standardize(walkability)
    rho_component = math.copysign(math.sqrt(spec.rho_tags ** 2 / (2 - spec.rho_tags ** 2)), spec.rho_tags)
    e1 = _orthogonal_noise(rng, n, [w])
    e2 = _orthogonal_noise(rng, n, [w, e1])
    residual = math.sqrt(1 - rho_component ** 2)
    walk_z = rho_component * w + residual * e1
    car_z = -rho_component * w + residual * e2

    n_photos = np.maximum(
        spec.min_photos, np.round(spec.photos_median * np.exp(spec.photos_sigma * rng.standard_normal(n)))
    ).astype(np.int64)
    if spec.noise_slope > 0:
        scale = spec.noise_slope / np.sqrt(n_photos)
        night_z = night_z + scale * rng.standard_normal(n)
        gender_z = gender_z + scale * rng.standard_normal(n)
        walk_z = walk_z + scale * rng.standard_normal(n)
        car_z = car_z + scale * rng.standard_normal(n)

    night_frac = np.clip(0.5 + 0.12 * night_z, 0.02, 0.98)
    male_frac = np.clip(0.5 + 0.12 * gender_z, 0.02, 0.98)
    walk_frac = np.clip(0.30 + 0.08 * walk_z, 0.01, 0.6)
    car_frac = np.clip(0.15 + 0.04 * car_z, 0.005, 0.35)
    age_mean = 38.0 + 6.0 * age_z

    walk_words = np.array(DEFAULT_WALK_KEYWORDS)
    car_words = np.array(DEFAULT_CAR_KEYWORDS)
    filler = np.array(FILLER_TAGS)

    segments: List[StreetSegment] = []
    photo_lines: List[str] = []
    venue_lines: List[str] = []
    photo_no = venue_no = 0

    def to_geo(xs: np.ndarray, ys: np.ndarray) -> List[GeoPoint]:
        lons, lats = projection.unproject_arrays(xs, ys)
        return [
            GeoPoint(round(float(lon), COORDINATE_PRECISION), round(float(lat), COORDINATE_PRECISION))
            for lon, lat in zip(lons, lats)
        ]

    def along(i: int, count: int, offset: float) -> Tuple[np.ndarray, np.ndarray]:
        t = rng.uniform(0.0, 1.0, count)
        lateral = rng.uniform(-offset, offset, count)
        nx, ny = -math.sin(theta[i]), math.cos(theta[i])
        return ax[i] + t * (bx[i] - ax[i]) + lateral * nx, ay[i] + t * (by[i] - ay[i]) + lateral * ny

    base_weights = np.array([VENUE_MIX[c][0] for c in CATEGORIES])
    slopes = np.array([VENUE_MIX[c][1] for c in CATEGORIES])

    for i, sid in enumerate(ids):
        ends = to_geo(np.array([ax[i], bx[i]]), np.array([ay[i], by[i]]))
        segments.append(StreetSegment(
            id=sid,
            geometry=Polyline((PlanarPoint(float(ax[i]), float(ay[i])), PlanarPoint(float(bx[i]), float(by[i])))),
            coordinates=tuple(ends),
            walkability=float(walkability[i]),
            safety=float(safety[i]),
            ratings=ratings[i],
        ))

        count = int(n_photos[i])
        owners = min(count, max(40, count // 2))
        gendered = int(round(spec.gendered_share * owners))
        males = int(round(male_frac[i] * gendered))
        owner_gender = [Gender.MALE] * males + [Gender.FEMALE] * (gendered - males) + [None] * (owners - gendered)
        owner_age = np.clip(np.round(age_mean[i] + 8.0 * rng.standard_normal(owners)), 18, 90).astype(int)
        owner_of = np.concatenate([np.arange(owners), rng.integers(0, owners, count - owners)])

        unclassified = int(round(spec.unclassified_share * count))
        classified = count - unclassified
        night = int(round(night_frac[i] * classified))
        classes = rng.permutation(np.array([2] * night + [1] * (classified - night) + [0] * unclassified))

        total_tags = spec.tags_per_photo * count
        n_walk = int(round(walk_frac[i] * total_tags))
        n_car = int(round(car_frac[i] * total_tags))
        tags = np.concatenate([
            rng.choice(walk_words, n_walk),
            rng.choice(car_words, n_car),
            rng.choice(filler, total_tags - n_walk - n_car),
        ])
        tags = rng.permutation(tags).reshape(count, spec.tags_per_photo)

        xs, ys = along(i, count, PHOTO_OFFSET)
        locations = to_geo(xs, ys)
        confidence = np.round(rng.uniform(0.96, 0.999, count), 3)
        weak = np.round(rng.uniform(0.5, 0.9, count), 3)
        views = rng.poisson(60, count)
        favorites = rng.poisson(3, count)
        comments = rng.poisson(1, count)

        for j in range(count):
            photo_no += 1
            owner = int(owner_of[j])
            gender = owner_gender[owner]
            if classes[j] == 2:
                machine = (MachineTag("night", float(confidence[j])), MachineTag("street", float(weak[j])))
            elif classes[j] == 1:
                machine = (MachineTag("daylight", float(confidence[j])),)
            else:
                machine = (MachineTag("outdoor", float(weak[j])),)
            photo_lines.append(photo_to_json(PhotoRecord(
                id=f"p{photo_no:07d}",
                location=locations[j],
                owner_id=f"u{sid}_{owner:03d}",
                gender=gender,
                age=int(owner_age[owner]) if gender is not None else None,
                user_tags=tuple(str(t) for t in tags[j]),
                machine_tags=machine,
                views=int(views[j]),
                favorites=int(favorites[j]),
                comments=int(comments[j]),
            )))

        n_venues = int(rng.poisson(spec.venues_mean))
        if n_venues:
            weights = base_weights * np.exp(slopes * s[i])
            categories = rng.choice(len(CATEGORIES), n_venues, p=weights / weights.sum())
            xs, ys = along(i, n_venues, VENUE_OFFSET)
            for category, location in zip(categories, to_geo(xs, ys)):
                venue_no += 1
                venue_lines.append(venue_to_json(VenueRecord(
                    id=f"v{venue_no:06d}", location=location, category=CATEGORIES[int(category)]
                )))

    logger.info("Synthetic city: %d segments, %d photos, %d venues", n, photo_no, venue_no)
    return SynthCity(
        streets_geojson=streets_to_geojson(segments) + "\n",
        photos_jsonl="".join(line + "\n" for line in photo_lines),
        venues_jsonl="".join(line + "\n" for line in venue_lines),
        safety={sid: float(v) for sid, v in zip(ids, safety)},
        walkability={sid: float(v) for sid, v in zip(ids, walkability)},
    )


@dataclass
class PlantedSample:
    scores: Dict[str, float]
    targets: Dict[str, float]
    counts: Dict[str, int]


def planted_metric_sample(
    n: int = 20_000,
    rho: float = 0.6,
    noise_slope: float = 30.0,
    max_count: int = 10_000,
    seed: int = 0,
) -> PlantedSample:
    """
    Metric/target pairs whose noise shrinks with per-segment data volume.

    metric = rho * target + sqrt(1 - rho^2) * e + noise_slope * u / sqrt(count),
    with target, e, u standard normal and count log-uniform on [1, max_count].
    """
    if not -1 < rho < 1 or n < 3 or max_count < 1 or noise_slope < 0:
        raise InvalidParameterError(
            "planted_metric_sample needs |rho| < 1, n >= 3, max_count >= 1 and noise_slope >= 0",
            "synth",
            {"n": n, "rho": rho, "max_count": max_count, "noise_slope": noise_slope}
        )
    rng = np.random.default_rng(seed)
    counts = np.floor(np.exp(rng.uniform(0.0, math.log(max_count), n))).astype(np.int64)
    counts = np.clip(counts, 1, max_count)
    target = rng.standard_normal(n)
    metric = (rho * target + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
              + noise_slope * rng.standard_normal(n) / np.sqrt(counts))
    keys = [f"m{i}" for i in range(n)]
    return PlantedSample(
        scores=dict(zip(keys, metric.tolist())),
        targets=dict(zip(keys, target.tolist())),
        counts=dict(zip(keys, counts.tolist())),
    )
