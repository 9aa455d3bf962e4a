"""
Uniform-grid spatial index over polyline pieces.

Each straight piece of every polyline is registered in every grid cell that
its bounding box, inflated by the index radius, overlaps. A point query only
looks at the point's own cell, which therefore holds a superset of the
segments whose buffer contains the point.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Sequence, Set, Tuple

import numpy as np

from ..core.errors import EmptyInputError, InvalidParameterError
from .polyline import DEFAULT_BUFFER_RADIUS, Polyline, piece_distances, point_to_polyline_distance
from .projection import PlanarPoint

logger = logging.getLogger(__name__)

# Points per vectorised batch in match_points; bounds peak memory.
MATCH_BATCH = 250_000


@dataclass
class SpatialIndex:
    """Grid buckets of polyline pieces, stored as sorted flat arrays."""
    cell_size: float
    radius: float
    segment_ids: Tuple[str, ...]
    origin_x: float
    origin_y: float
    nx: int
    ny: int
    piece_segment: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    cell_keys: np.ndarray
    cell_offsets: np.ndarray
    cell_pieces: np.ndarray

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.nx * self.cell_size,
            self.origin_y + self.ny * self.cell_size,
        )

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        return (
            int(math.floor((x - self.origin_x) / self.cell_size)),
            int(math.floor((y - self.origin_y) / self.cell_size)),
        )

    def _pieces_in_cell(self, ix: int, iy: int) -> np.ndarray:
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            return self.cell_pieces[:0]
        key = ix * self.ny + iy
        pos = int(np.searchsorted(self.cell_keys, key))
        if pos >= len(self.cell_keys) or self.cell_keys[pos] != key:
            return self.cell_pieces[:0]
        return self.cell_pieces[self.cell_offsets[pos]:self.cell_offsets[pos + 1]]

    def buckets(self) -> Dict[Tuple[int, int], FrozenSet[str]]:
        """Cell -> segment ids, for inspection."""
        result = {}
        for pos, key in enumerate(self.cell_keys):
            pieces = self.cell_pieces[self.cell_offsets[pos]:self.cell_offsets[pos + 1]]
            ids = frozenset(self.segment_ids[s] for s in np.unique(self.piece_segment[pieces]))
            result[(int(key) // self.ny, int(key) % self.ny)] = ids
        return result

    def query_candidates(self, p: PlanarPoint) -> Set[str]:
        """Segment ids registered in p's cell (superset of the buffer matches)."""
        pieces = self._pieces_in_cell(*self.cell_of(p.x, p.y))
        return {self.segment_ids[s] for s in np.unique(self.piece_segment[pieces])}


def build_index(
    segments: Sequence[Tuple[str, Polyline]],
    cell_size: float = None,
    radius: float = DEFAULT_BUFFER_RADIUS,
) -> SpatialIndex:
    """
    Build a grid index over the pieces of the given polylines.

    Args:
        segments: (id, polyline) pairs; order fixes the internal numbering
        cell_size: Grid cell edge in meters (default 2 × radius)
        radius: Largest query radius the index must serve

    Returns:
        SpatialIndex: Deterministic for a given input order

    Raises:
        EmptyInputError: If no segments are given
        InvalidParameterError: If radius <= 0 or cell_size < radius
    """
    if not segments:
        raise EmptyInputError("Cannot index an empty segment list", "join")
    if not radius > 0:
        raise InvalidParameterError(f"Index radius must be positive, got {radius}", "join", {"radius": radius})
    if cell_size is None:
        cell_size = 2.0 * radius
    if not cell_size >= radius:
        raise InvalidParameterError(
            f"Cell size {cell_size} must be at least the buffer radius {radius}",
            "join",
            {"cell_size": cell_size, "radius": radius}
        )

    seg_idx, ax, ay, bx, by = [], [], [], [], []
    for i, (_, line) in enumerate(segments):
        c = line.coords
        n = len(c) - 1
        seg_idx.append(np.full(n, i, dtype=np.int64))
        ax.append(c[:-1, 0])
        ay.append(c[:-1, 1])
        bx.append(c[1:, 0])
        by.append(c[1:, 1])
    piece_segment = np.concatenate(seg_idx)
    ax, ay, bx, by = (np.concatenate(a) for a in (ax, ay, bx, by))

    min_x = np.minimum(ax, bx) - radius
    max_x = np.maximum(ax, bx) + radius
    min_y = np.minimum(ay, by) - radius
    max_y = np.maximum(ay, by) + radius
    origin_x = float(min_x.min())
    origin_y = float(min_y.min())
    ix0 = np.floor((min_x - origin_x) / cell_size).astype(np.int64)
    ix1 = np.floor((max_x - origin_x) / cell_size).astype(np.int64)
    iy0 = np.floor((min_y - origin_y) / cell_size).astype(np.int64)
    iy1 = np.floor((max_y - origin_y) / cell_size).astype(np.int64)
    nx = int(ix1.max()) + 1
    ny = int(iy1.max()) + 1

    keys: List[np.ndarray] = []
    owners: List[np.ndarray] = []
    for k in range(len(piece_segment)):
        gx, gy = np.meshgrid(
            np.arange(ix0[k], ix1[k] + 1), np.arange(iy0[k], iy1[k] + 1), indexing="ij"
        )
        cells = (gx * ny + gy).ravel()
        keys.append(cells)
        owners.append(np.full(cells.size, k, dtype=np.int64))
    keys_flat = np.concatenate(keys)
    owners_flat = np.concatenate(owners)
    order = np.lexsort((owners_flat, keys_flat))
    keys_flat = keys_flat[order]
    owners_flat = owners_flat[order]
    cell_keys, starts = np.unique(keys_flat, return_index=True)
    cell_offsets = np.append(starts, len(keys_flat)).astype(np.int64)

    logger.info(
        "Indexed %d segments (%d pieces) into %d occupied cells of %.1f m",
        len(segments), len(piece_segment), len(cell_keys), cell_size
    )
    return SpatialIndex(
        cell_size=float(cell_size),
        radius=float(radius),
        segment_ids=tuple(sid for sid, _ in segments),
        origin_x=origin_x,
        origin_y=origin_y,
        nx=nx,
        ny=ny,
        piece_segment=piece_segment,
        ax=ax,
        ay=ay,
        bx=bx,
        by=by,
        cell_keys=cell_keys,
        cell_offsets=cell_offsets,
        cell_pieces=owners_flat,
    )


def _check_radius(index: SpatialIndex, radius: float) -> None:
    if not 0 < radius <= index.radius:
        raise InvalidParameterError(
            f"Query radius {radius} must be in (0, {index.radius}] for this index",
            "join",
            {"radius": radius, "index_radius": index.radius}
        )


def match_point_all(
    index: SpatialIndex,
    segments: Mapping[str, Polyline],
    p: PlanarPoint,
    radius: float = DEFAULT_BUFFER_RADIUS,
) -> Set[str]:
    """
    Ids of every segment whose closed buffer contains p.

    Args:
        index: Index built with radius >= the query radius
        segments: Segment id -> polyline
        p: Query point
        radius: Buffer radius in meters

    Returns:
        Set[str]: Exactly the brute-force matches
    """
    _check_radius(index, radius)
    return {
        sid for sid in index.query_candidates(p)
        if point_to_polyline_distance(p, segments[sid]) <= radius
    }


def match_points(
    index: SpatialIndex,
    xs: np.ndarray,
    ys: np.ndarray,
    radius: float = DEFAULT_BUFFER_RADIUS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bulk buffer join of points against the indexed segments.

    Args:
        index: Spatial index
        xs, ys: Planar point coordinates
        radius: Buffer radius in meters

    Returns:
        Tuple[np.ndarray, np.ndarray]: (point index, segment index) pairs,
        unique and sorted by point then segment
    """
    _check_radius(index, radius)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    point_parts, seg_parts = [], []
    for lo in range(0, len(xs), MATCH_BATCH):
        pts, segs = _match_batch(index, xs[lo:lo + MATCH_BATCH], ys[lo:lo + MATCH_BATCH], radius)
        point_parts.append(pts + lo)
        seg_parts.append(segs)
    if not point_parts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    return np.concatenate(point_parts), np.concatenate(seg_parts)


def _match_batch(index: SpatialIndex, xs: np.ndarray, ys: np.ndarray, radius: float):
    ix = np.floor((xs - index.origin_x) / index.cell_size)
    iy = np.floor((ys - index.origin_y) / index.cell_size)
    inside = (ix >= 0) & (ix < index.nx) & (iy >= 0) & (iy < index.ny)
    point_ids = np.nonzero(inside)[0]
    keys = ix[inside].astype(np.int64) * index.ny + iy[inside].astype(np.int64)

    pos = np.searchsorted(index.cell_keys, keys)
    pos_clipped = np.minimum(pos, len(index.cell_keys) - 1)
    hit = index.cell_keys[pos_clipped] == keys
    point_ids = point_ids[hit]
    pos = pos_clipped[hit]
    starts = index.cell_offsets[pos]
    counts = index.cell_offsets[pos + 1] - starts

    total = int(counts.sum())
    if total == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    rep_points = np.repeat(point_ids, counts)
    run_starts = np.repeat(np.cumsum(counts) - counts, counts)
    slots = np.arange(total, dtype=np.int64) - run_starts + np.repeat(starts, counts)
    pieces = index.cell_pieces[slots]

    d = piece_distances(
        xs[rep_points], ys[rep_points],
        index.ax[pieces], index.ay[pieces], index.bx[pieces], index.by[pieces],
    )
    keep = d <= radius
    n_segments = len(index.segment_ids)
    pair_keys = np.unique(rep_points[keep] * n_segments + index.piece_segment[pieces[keep]])
    return pair_keys // n_segments, pair_keys % n_segments


def nearest_segment(index: SpatialIndex, segments: Mapping[str, Polyline], p: PlanarPoint) -> str:
    """
    Id of the segment closest to p; ties go to the smallest id.

    Searches grid rings outward from p's cell until the ring radius covers
    the best distance found so far.

    Raises:
        EmptyInputError: If there are no segments
    """
    if not segments or not index.segment_ids:
        raise EmptyInputError("No segments to search", "join")
    cx, cy = index.cell_of(p.x, p.y)
    if not (0 <= cx < index.nx and 0 <= cy < index.ny):
        return _nearest_brute(segments, p, index.segment_ids)

    max_ring = max(cx, cy, index.nx - 1 - cx, index.ny - 1 - cy)
    seen: Set[int] = set()
    best: Tuple[float, str] = None
    ring = 0
    while ring <= max_ring:
        for ix, iy in _ring_cells(cx, cy, ring):
            for s in np.unique(index.piece_segment[index._pieces_in_cell(ix, iy)]):
                s = int(s)
                if s in seen:
                    continue
                seen.add(s)
                sid = index.segment_ids[s]
                candidate = (point_to_polyline_distance(p, segments[sid]), sid)
                if best is None or candidate < best:
                    best = candidate
        if best is not None and ring * index.cell_size >= best[0]:
            return best[1]
        ring += 1
    if best is None:
        return _nearest_brute(segments, p, index.segment_ids)
    return best[1]


def _ring_cells(cx: int, cy: int, ring: int):
    if ring == 0:
        yield cx, cy
        return
    for ix in range(cx - ring, cx + ring + 1):
        yield ix, cy - ring
        yield ix, cy + ring
    for iy in range(cy - ring + 1, cy + ring):
        yield cx - ring, iy
        yield cx + ring, iy


def _nearest_brute(segments: Mapping[str, Polyline], p: PlanarPoint, ids: Sequence[str]) -> str:
    return min((point_to_polyline_distance(p, segments[sid]), sid) for sid in ids)[1]
