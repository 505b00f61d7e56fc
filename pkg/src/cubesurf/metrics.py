"""Face intersections, width-r edge overlaps and total edge clearance of a projected scene."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cells import Cell, CubicalComplex, face_corners, face_edges
from .errors import DegenerateEdge, DegenerateFace
from .geometry import (
    EPS_GEOM,
    batch_clearances,
    batch_face_codes,
    edge_lengths,
    face_min_areas,
    faces_intersect,
)
from .projection import ProjectedScene

DEFAULT_RADIUS_FRACTION = 0.02


@dataclass(frozen=True)
class WidthConfig:
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"beam radius must be positive, got {self.r}")


@dataclass(frozen=True)
class MetricsReport:
    sigma: int
    overlaps: int
    total_clearance: float
    face_pairs: tuple[tuple[Cell, Cell], ...] = field(default=(), repr=False)
    edge_pairs: tuple[tuple[Cell, Cell], ...] = field(default=(), repr=False)

    def key(self) -> tuple[int, int]:
        return self.sigma, self.overlaps

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "overlaps": self.overlaps,
            "total_clearance": self.total_clearance,
            "face_pairs": [list(p) for p in self.face_pairs],
            "edge_pairs": [list(p) for p in self.edge_pairs],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


class PairTables:
    """Which face pairs and edge pairs of a complex get tested, precomputed once."""

    def __init__(self, cx: CubicalComplex):
        self.cx = cx
        faces = cx.faces
        edges = cx.edges
        fedges = [set(face_edges(f)) for f in faces]
        fcorners = [face_corners(f) for f in faces]
        fp, shared = [], []
        for i in range(len(faces)):
            for j in range(i + 1, len(faces)):
                if fedges[i] & fedges[j]:
                    continue
                common = set(fcorners[i]) & set(fcorners[j])
                if common:
                    (v,) = common
                    shared.append((fcorners[i].index(v), fcorners[j].index(v)))
                else:
                    shared.append((-1, -1))
                fp.append((i, j))
        self.face_pairs = np.array(fp, dtype=np.int64).reshape(-1, 2)
        self.face_shared = np.array(shared, dtype=np.int64).reshape(-1, 2)

        ends = [set(e.replace("*", b, 1) for b in "01") for e in edges]
        ep, adj = [], []
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                ep.append((i, j))
                adj.append(bool(ends[i] & ends[j]))
        self.edge_pairs = np.array(ep, dtype=np.int64).reshape(-1, 2)
        self.edge_adjacent = np.array(adj, dtype=bool)


@lru_cache(maxsize=32)
def pair_tables(cx: CubicalComplex) -> PairTables:
    return PairTables(cx)


def _check_scene(scene: ProjectedScene, cx: CubicalComplex) -> None:
    if len(cx.faces):
        areas = face_min_areas(scene.coords, scene.face_idx)
        bad = np.flatnonzero(areas <= EPS_GEOM)
        if bad.size:
            raise DegenerateFace(f"face {cx.faces[bad[0]]} projects to a degenerate quadrilateral")
    if len(cx.edges):
        lengths = edge_lengths(scene.coords, scene.edge_idx)
        bad = np.flatnonzero(lengths <= EPS_GEOM)
        if bad.size:
            raise DegenerateEdge(f"edge {cx.edges[bad[0]]} projects to a point")


def _face_hits(scene: ProjectedScene, t: PairTables) -> np.ndarray:
    if not len(t.face_pairs):
        return np.zeros(0, dtype=bool)
    codes = batch_face_codes(scene.coords, scene.face_idx, t.face_pairs, t.face_shared, EPS_GEOM)
    hits = codes == 1
    for k in np.flatnonzero(codes == 2):
        i, j = t.face_pairs[k]
        sa = t.face_shared[k, 0]
        sv = scene.coords[scene.face_idx[i, sa]] if sa >= 0 else None
        hits[k] = faces_intersect(scene.face_points(i), scene.face_points(j), shared_vertex=sv)
    return hits


def face_intersections(scene: ProjectedScene, cx: CubicalComplex) -> tuple[int, list[tuple[Cell, Cell]]]:
    """Count unordered face pairs whose images meet; pairs sharing an edge are skipped."""
    _check_scene(scene, cx)
    t = pair_tables(cx)
    hits = _face_hits(scene, t)
    pairs = [(cx.faces[i], cx.faces[j]) for i, j in t.face_pairs[hits]]
    return len(pairs), pairs


def _clearances(scene: ProjectedScene, t: PairTables) -> np.ndarray:
    if not len(t.edge_pairs):
        return np.zeros(0)
    return batch_clearances(scene.coords, scene.edge_idx, t.edge_pairs)


def edge_overlaps(scene: ProjectedScene, cx: CubicalComplex, w: WidthConfig | float,
                  count_adjacent: bool = False) -> tuple[int, list[tuple[Cell, Cell]]]:
    """Edge pairs closer than 2r; pairs sharing a vertex are left out unless ``count_adjacent``."""
    r = w.r if isinstance(w, WidthConfig) else WidthConfig(float(w)).r
    _check_scene(scene, cx)
    t = pair_tables(cx)
    close = _clearances(scene, t) < 2.0 * r
    if not count_adjacent:
        close &= ~t.edge_adjacent
    pairs = [(cx.edges[i], cx.edges[j]) for i, j in t.edge_pairs[close]]
    return len(pairs), pairs


def total_clearance(scene: ProjectedScene, cx: CubicalComplex) -> float:
    """Sum of segment clearances over all unordered edge pairs, adjacent ones included."""
    _check_scene(scene, cx)
    return float(_clearances(scene, pair_tables(cx)).sum())


def default_radius(scene: ProjectedScene) -> float:
    return DEFAULT_RADIUS_FRACTION * scene.bbox_diagonal()


def count_metrics(scene: ProjectedScene, cx: CubicalComplex, r: float | None = None,
                  count_adjacent: bool = False) -> tuple[int, int, float]:
    """(sigma, overlaps, total clearance) without materialising the offending pairs."""
    if r is None:
        r = default_radius(scene)
    r = WidthConfig(float(r)).r
    _check_scene(scene, cx)
    t = pair_tables(cx)
    hits = _face_hits(scene, t)
    clear = _clearances(scene, t)
    close = clear < 2.0 * r
    if not count_adjacent:
        close &= ~t.edge_adjacent
    return int(hits.sum()), int(close.sum()), float(clear.sum())


def compute_metrics(scene: ProjectedScene, cx: CubicalComplex, r: float | None = None,
                    count_adjacent: bool = False) -> MetricsReport:
    """All three quantities in one pass over the pair tables."""
    if r is None:
        r = default_radius(scene)
    r = WidthConfig(float(r)).r
    _check_scene(scene, cx)
    t = pair_tables(cx)
    hits = _face_hits(scene, t)
    clear = _clearances(scene, t)
    close = clear < 2.0 * r
    if not count_adjacent:
        close &= ~t.edge_adjacent
    fpairs = tuple((cx.faces[i], cx.faces[j]) for i, j in t.face_pairs[hits])
    epairs = tuple((cx.edges[i], cx.edges[j]) for i, j in t.edge_pairs[close])
    return MetricsReport(len(fpairs), len(epairs), float(clear.sum()), fpairs, epairs)
