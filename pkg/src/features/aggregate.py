"""
Per-segment aggregation of matched photos and venues.

Photos are first tabulated into columns (night class, owner, gender, age,
tag counts), then (photo, segment) pairs are reduced with integer array
operations. Partial results over disjoint pair sets merge by sums, unions
and minimums, so any partitioning yields the same features.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence

import numpy as np

from ..core.errors import InvalidParameterError, ReferentialIntegrityError
from ..model.classify import DEFAULT_NIGHT_CONFIDENCE, classify_night
from ..model.types import CATEGORIES, Gender, NightClass, PhotoRecord, StreetSegment, VenueRecord
from .keywords import KeywordLists, match_tag_arrays
from .types import SegmentFeatures

logger = logging.getLogger(__name__)

NIGHT, NOT_NIGHT, UNCLASSIFIED = 1, 0, -1
UNKNOWN_GENDER, MALE, FEMALE = 0, 1, 2

# Summed per-segment columns, in this order.
SUM_COLUMNS = ("n_photos", "night_count", "notnight_count", "tag_total",
               "walk_tag_count", "car_tag_count", "views", "favorites", "comments")


@dataclass
class PhotoTable:
    """Columnar per-photo attributes; ages of 0 mean unknown."""
    night: np.ndarray
    owner: np.ndarray
    n_owners: int
    gender: np.ndarray
    age: np.ndarray
    tag_total: np.ndarray
    walk: np.ndarray
    car: np.ndarray
    views: np.ndarray
    favorites: np.ndarray
    comments: np.ndarray

    def __len__(self) -> int:
        return len(self.night)


def tabulate_photos(
    photos: Sequence[PhotoRecord],
    keywords: KeywordLists,
    night_threshold: float = DEFAULT_NIGHT_CONFIDENCE,
) -> PhotoTable:
    """
    Compute every per-photo attribute the aggregation needs, once.

    Owner indices follow the sorted owner ids, so the table does not depend
    on photo order beyond row order.
    """
    night_code = {NightClass.NIGHT: NIGHT, NightClass.NOT_NIGHT: NOT_NIGHT, NightClass.UNCLASSIFIED: UNCLASSIFIED}
    gender_code = {None: UNKNOWN_GENDER, Gender.MALE: MALE, Gender.FEMALE: FEMALE}

    owner_ids = np.array([p.owner_id for p in photos], dtype=object)
    owner = np.zeros(0, dtype=np.int64)
    if len(owner_ids):
        owner_ids, owner = np.unique(owner_ids, return_inverse=True)
    walk, car = match_tag_arrays([p.user_tags for p in photos], keywords)

    def column(values: Iterable[int], dtype=np.int64) -> np.ndarray:
        return np.fromiter(values, dtype=dtype, count=len(photos))

    return PhotoTable(
        night=column((night_code[classify_night(p, night_threshold)] for p in photos), np.int8),
        owner=np.asarray(owner, dtype=np.int64).ravel(),
        n_owners=max(len(owner_ids), 1),
        gender=column((gender_code[p.gender] for p in photos), np.int8),
        age=column(p.age or 0 for p in photos),
        tag_total=column(len(p.user_tags) for p in photos),
        walk=np.asarray(walk, dtype=np.int64),
        car=np.asarray(car, dtype=np.int64),
        views=column(p.views or 0 for p in photos),
        favorites=column(p.favorites or 0 for p in photos),
        comments=column(p.comments or 0 for p in photos),
    )


@dataclass
class _Partial:
    sums: np.ndarray
    male_keys: np.ndarray
    female_keys: np.ndarray
    age_keys: np.ndarray
    age_values: np.ndarray


def _min_by_key(keys: np.ndarray, values: np.ndarray):
    order = np.lexsort((values, keys))
    keys = keys[order]
    values = values[order]
    unique, first = np.unique(keys, return_index=True)
    return unique, values[first]


def _reduce(n_segments: int, table: PhotoTable, photo_idx: np.ndarray, seg_idx: np.ndarray) -> _Partial:
    sums = np.zeros((n_segments, len(SUM_COLUMNS)), dtype=np.int64)
    night = table.night[photo_idx]
    sums[:, 0] = np.bincount(seg_idx, minlength=n_segments)
    sums[:, 1] = np.bincount(seg_idx[night == NIGHT], minlength=n_segments)
    sums[:, 2] = np.bincount(seg_idx[night == NOT_NIGHT], minlength=n_segments)
    for col, values in enumerate((table.tag_total, table.walk, table.car,
                                  table.views, table.favorites, table.comments), start=3):
        v = values[photo_idx]
        nz = v != 0
        sums[:, col] = np.bincount(seg_idx[nz], weights=v[nz], minlength=n_segments).astype(np.int64)

    keys = seg_idx * table.n_owners + table.owner[photo_idx]
    gender = table.gender[photo_idx]
    age = table.age[photo_idx]
    known = age > 0
    age_keys, age_values = _min_by_key(keys[known], age[known])
    return _Partial(
        sums=sums,
        male_keys=np.unique(keys[gender == MALE]),
        female_keys=np.unique(keys[gender == FEMALE]),
        age_keys=age_keys,
        age_values=age_values,
    )


def _merge(parts: List[_Partial]) -> _Partial:
    if len(parts) == 1:
        return parts[0]
    age_keys, age_values = _min_by_key(
        np.concatenate([p.age_keys for p in parts]),
        np.concatenate([p.age_values for p in parts]),
    )
    return _Partial(
        sums=sum(p.sums for p in parts),
        male_keys=np.unique(np.concatenate([p.male_keys for p in parts])),
        female_keys=np.unique(np.concatenate([p.female_keys for p in parts])),
        age_keys=age_keys,
        age_values=age_values,
    )


def aggregate_pairs(
    segment_ids: Sequence[str],
    table: PhotoTable,
    photo_idx: np.ndarray,
    seg_idx: np.ndarray,
    venue_categories: Optional[np.ndarray] = None,
    venue_seg_idx: Optional[np.ndarray] = None,
    workers: int = 1,
) -> List[SegmentFeatures]:
    """
    Reduce (photo, segment) and (venue, segment) index pairs to features.

    Args:
        segment_ids: Segment ids; seg_idx values index into this
        table: Tabulated photos; photo_idx values index its rows
        photo_idx, seg_idx: Matched pairs, one entry per (photo, segment)
        venue_categories: Category index (into CATEGORIES) per matched venue
        venue_seg_idx: Segment index per matched venue
        workers: Number of pair partitions reduced concurrently

    Returns:
        List[SegmentFeatures]: One entry per segment, in segment_ids order
    """
    if workers < 1:
        raise InvalidParameterError(f"workers must be >= 1, got {workers}", "features", {"workers": workers})
    n_segments = len(segment_ids)
    photo_idx = np.asarray(photo_idx, dtype=np.int64)
    seg_idx = np.asarray(seg_idx, dtype=np.int64)

    if workers == 1 or len(photo_idx) < 2 * workers:
        partial = _reduce(n_segments, table, photo_idx, seg_idx)
    else:
        bounds = np.linspace(0, len(photo_idx), workers + 1).astype(np.int64)
        chunks = [(photo_idx[lo:hi], seg_idx[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _reduce(n_segments, table, c[0], c[1]), chunks))
        partial = _merge(parts)

    n_owners = table.n_owners
    male = np.bincount(partial.male_keys // n_owners, minlength=n_segments)
    female = np.bincount(partial.female_keys // n_owners, minlength=n_segments)
    age_seg = partial.age_keys // n_owners
    order = np.lexsort((partial.age_values, age_seg))
    age_seg = age_seg[order]
    age_values = partial.age_values[order]
    age_bounds = np.searchsorted(age_seg, np.arange(n_segments + 1))

    n_cat = len(CATEGORIES)
    if venue_categories is not None and len(venue_categories):
        flat = np.asarray(venue_seg_idx, dtype=np.int64) * n_cat + np.asarray(venue_categories, dtype=np.int64)
        venues = np.bincount(flat, minlength=n_segments * n_cat).reshape(n_segments, n_cat)
    else:
        venues = np.zeros((n_segments, n_cat), dtype=np.int64)

    features = []
    for i, segment_id in enumerate(segment_ids):
        s = partial.sums[i]
        features.append(SegmentFeatures(
            segment_id=segment_id,
            n_photos=int(s[0]),
            night_count=int(s[1]),
            notnight_count=int(s[2]),
            male_users=int(male[i]),
            female_users=int(female[i]),
            ages=tuple(int(a) for a in age_values[age_bounds[i]:age_bounds[i + 1]]),
            tag_total=int(s[3]),
            walk_tag_count=int(s[4]),
            car_tag_count=int(s[5]),
            venue_counts=tuple(int(c) for c in venues[i]),
            views=int(s[6]),
            favorites=int(s[7]),
            comments=int(s[8]),
        ))
    return features


def aggregate(
    segments: Sequence[StreetSegment],
    photos: Sequence[PhotoRecord],
    venues: Sequence[VenueRecord],
    photo_assignment: Mapping[str, Iterable[str]],
    venue_assignment: Mapping[str, str],
    keywords: Optional[KeywordLists] = None,
    night_threshold: float = DEFAULT_NIGHT_CONFIDENCE,
    workers: int = 1,
) -> List[SegmentFeatures]:
    """
    Aggregate matched photos and venues onto every segment.

    Args:
        segments: Street segments
        photos: Photo records
        venues: Venue records
        photo_assignment: Photo id -> ids of every segment it matched
        venue_assignment: Venue id -> id of its nearest segment
        keywords: Tag keyword lists (built-in lists when omitted)
        night_threshold: Machine-tag confidence cut-off
        workers: Partitions reduced concurrently

    Returns:
        List[SegmentFeatures]: One entry per segment, zero-filled when unmatched

    Raises:
        ReferentialIntegrityError: If an assignment names an unknown id
    """
    keywords = keywords or KeywordLists.default()
    seg_pos = {s.id: i for i, s in enumerate(segments)}
    photo_pos = {p.id: i for i, p in enumerate(photos)}
    venue_pos = {v.id: v for v in venues}

    def segment_index(segment_id: str, record_id: str) -> int:
        if segment_id not in seg_pos:
            raise ReferentialIntegrityError(
                f"Assignment of {record_id!r} references unknown segment {segment_id!r}",
                "features",
                {"record_id": record_id, "segment_id": segment_id}
            )
        return seg_pos[segment_id]

    photo_idx, seg_idx = [], []
    for photo_id, segment_ids in photo_assignment.items():
        if photo_id not in photo_pos:
            raise ReferentialIntegrityError(
                f"Assignment references unknown photo {photo_id!r}", "features", {"photo_id": photo_id}
            )
        for segment_id in set(segment_ids):
            photo_idx.append(photo_pos[photo_id])
            seg_idx.append(segment_index(segment_id, photo_id))

    venue_cat, venue_seg = [], []
    for venue_id, segment_id in venue_assignment.items():
        if venue_id not in venue_pos:
            raise ReferentialIntegrityError(
                f"Assignment references unknown venue {venue_id!r}", "features", {"venue_id": venue_id}
            )
        venue_cat.append(CATEGORIES.index(venue_pos[venue_id].category))
        venue_seg.append(segment_index(segment_id, venue_id))

    table = tabulate_photos(photos, keywords, night_threshold)
    features = aggregate_pairs(
        [s.id for s in segments],
        table,
        np.asarray(photo_idx, dtype=np.int64),
        np.asarray(seg_idx, dtype=np.int64),
        np.asarray(venue_cat, dtype=np.int64),
        np.asarray(venue_seg, dtype=np.int64),
        workers=workers,
    )
    logger.info("Aggregated %d photo and %d venue matches onto %d segments",
                len(photo_idx), len(venue_seg), len(segments))
    return features
