"""Embedding states, 5D rotations and the two-stage perspective projection R^5 -> R^4 -> R^3."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numba as nb
import numpy as np

from .cells import Cell, CubicalComplex, face_corners, edge_endpoints
from .errors import BehindCamera

TWO_PI = 2.0 * math.pi
AMBIENT = 5
PLANES: tuple[tuple[int, int], ...] = tuple(combinations(range(AMBIENT), 2))
WORLD_RADIUS = math.sqrt(AMBIENT) / 2.0
DENOM_FLOOR = 1e-6
GUARD_MARGIN = 0.1


@dataclass(frozen=True)
class ProjectionConstants:
    """Screen distances for the two perspective stages.

    ``screen_from="camera"`` places each screen at distance c in front of the
    camera; ``"origin"`` places it at distance c from the origin instead.
    """

    c5: float = 1.0
    c4: float = 10.0
    screen_from: str = "camera"

    def __post_init__(self):
        if self.screen_from not in ("camera", "origin"):
            raise ValueError(f"screen_from must be 'camera' or 'origin', not {self.screen_from!r}")

    def scale(self, c: float, d: float) -> float:
        return c if self.screen_from == "camera" else d - c


@dataclass(frozen=True)
class EmbeddingState:
    d5: float
    d4: float
    phi: tuple[float, ...] = field(default=(0.0,) * 10)

    def __post_init__(self):
        if len(self.phi) != len(PLANES):
            raise ValueError(f"expected {len(PLANES)} angles, got {len(self.phi)}")
        object.__setattr__(self, "phi", tuple(float(x) for x in self.phi))

    def as_vector(self) -> np.ndarray:
        return np.array((self.d5, self.d4) + self.phi)

    @classmethod
    def from_vector(cls, vec) -> "EmbeddingState":
        vec = [float(x) for x in vec]
        return cls(vec[0], vec[1], tuple(vec[2:]))

    def to_text(self) -> str:
        phis = ",".join(repr(x) for x in self.phi)
        return f"d5={self.d5!r} d4={self.d4!r} phi={phis}"

    def to_json(self) -> str:
        return json.dumps({"d5": self.d5, "d4": self.d4, "phi": list(self.phi)})

    @classmethod
    def parse(cls, text: str) -> "EmbeddingState":
        """Read either the one-line ``d5=.. d4=.. phi=..`` record or its JSON form."""
        text = text.strip()
        if text.startswith("{"):
            obj = json.loads(text)
            return cls(float(obj["d5"]), float(obj["d4"]), tuple(float(x) for x in obj["phi"]))
        fields = {}
        for tok in text.split():
            key, sep, val = tok.partition("=")
            if not sep:
                raise ValueError(f"malformed state token {tok!r}")
            fields[key] = val
        try:
            return cls(float(fields["d5"]), float(fields["d4"]),
                       tuple(float(x) for x in fields["phi"].split(",")))
        except KeyError as exc:
            raise ValueError(f"state record missing {exc.args[0]!r}") from None


def wrap_angle(x: float) -> float:
    y = math.fmod(x, TWO_PI)
    if y < 0:
        y += TWO_PI
    # fmod of a tiny negative can round back up to exactly 2π
    return 0.0 if y >= TWO_PI else y


def wrap_state(s: EmbeddingState) -> EmbeddingState:
    return EmbeddingState(s.d5, s.d4, tuple(wrap_angle(a) for a in s.phi))


_PLANE_ARRAY = np.array(PLANES, dtype=np.int64)


@nb.njit(cache=True)
def _rotation(phi, planes):
    m = np.eye(5)
    for k in range(planes.shape[0]):
        a = phi[k]
        if a == 0.0:
            continue
        i = planes[k, 0]
        j = planes[k, 1]
        c = math.cos(a)
        s = math.sin(a)
        # left-multiplying by a Givens rotation only touches rows i and j
        for col in range(5):
            mi = m[i, col]
            mj = m[j, col]
            m[i, col] = c * mi - s * mj
            m[j, col] = s * mi + c * mj
    return m


def rotation_matrix(phi) -> np.ndarray:
    """Compose the ten plane rotations, (0,1) applied first and (3,4) last."""
    return _rotation(np.asarray(phi, dtype=float), _PLANE_ARRAY)


@nb.njit(cache=True)
def _project_kernel(pts5, phi, planes, d5, d4, s5, s4, floor):
    """Rotate then project twice. Returns (coords, index of first bad vertex or -1, stage)."""
    m = _rotation(phi, planes)
    nv = pts5.shape[0]
    out = np.empty((nv, 3))
    for v in range(nv):
        p = np.zeros(5)
        for i in range(5):
            acc = 0.0
            for j in range(5):
                acc += m[i, j] * pts5[v, j]
            p[i] = acc
        den5 = d5 - p[4]
        if den5 < floor:
            return out, v, 5
        q = np.empty(4)
        for i in range(4):
            q[i] = s5 * p[i] / den5
        den4 = d4 - q[3]
        if den4 < floor:
            return out, v, 4
        for i in range(3):
            out[v, i] = s4 * q[i] / den4
    return out, -1, 0


def perspective_project(p, d: float, c: float) -> np.ndarray:
    """Central projection along the last axis: q = c * p[:-1] / (d - p[-1])."""
    p = np.asarray(p, dtype=float)
    denom = d - p[..., -1]
    if np.any(denom < DENOM_FLOOR):
        raise BehindCamera(f"point lies behind the camera (d - p_last = {np.min(denom):.3g})")
    return c * p[..., :-1] / denom[..., None]


def radius_4d(d5: float, k: ProjectionConstants) -> float:
    """Upper bound on the norm of any 4D image of the centered cube."""
    return k.scale(k.c5, d5) * WORLD_RADIUS / (d5 - WORLD_RADIUS)


def state_guard_violation(s: EmbeddingState, k: ProjectionConstants) -> str | None:
    """Why ``s`` would put geometry behind a camera, or None if it is valid."""
    min_d5 = k.c5 + WORLD_RADIUS + GUARD_MARGIN
    if not s.d5 >= min_d5:
        return f"d5={s.d5:g} below guard {min_d5:g}"
    min_d4 = radius_4d(s.d5, k) + GUARD_MARGIN
    if not s.d4 >= min_d4:
        return f"d4={s.d4:g} below guard {min_d4:g}"
    return None


def centered_vertex_coords(vertices, n: int | None = None) -> np.ndarray:
    """Vertex words as points of R^5: centered on the cube, then zero-padded."""
    vertices = list(vertices)
    n = n if n is not None else (len(vertices[0]) if vertices else AMBIENT)
    if n > AMBIENT:
        raise ValueError(f"projection supports n <= {AMBIENT}, got {n}")
    pts = np.zeros((len(vertices), AMBIENT))
    if vertices:
        pts[:, :n] = np.array([[int(ch) for ch in v] for v in vertices], dtype=float) - 0.5
    return pts


def wrap_vector(vec: np.ndarray) -> np.ndarray:
    """State vector with its ten angles wrapped like ``wrap_angle``."""
    out = np.array(vec, dtype=float)
    phi = np.fmod(out[2:], TWO_PI)
    phi[phi < 0] += TWO_PI
    phi[phi >= TWO_PI] = 0.0
    out[2:] = phi
    return out


def vector_guard_ok(vec: np.ndarray, k: ProjectionConstants) -> bool:
    d5, d4 = vec[0], vec[1]
    if not d5 >= k.c5 + WORLD_RADIUS + GUARD_MARGIN:
        return False
    return bool(d4 >= radius_4d(d5, k) + GUARD_MARGIN)


def project_vector(pts5: np.ndarray, vec: np.ndarray, k: ProjectionConstants) -> tuple[np.ndarray, int, int]:
    """Unchecked fast path on an already wrapped state vector."""
    d5, d4 = float(vec[0]), float(vec[1])
    return _project_kernel(pts5, vec[2:], _PLANE_ARRAY, d5, d4,
                           k.scale(k.c5, d5), k.scale(k.c4, d4), DENOM_FLOOR)


def project_points(pts5: np.ndarray, s: EmbeddingState, k: ProjectionConstants,
                   names=None) -> np.ndarray:
    why = state_guard_violation(s, k)
    if why:
        raise BehindCamera(why)
    s = wrap_state(s)
    coords, bad, stage = project_vector(np.ascontiguousarray(pts5, dtype=float), s.as_vector(), k)
    if bad >= 0:
        who = names[bad] if names is not None else f"#{bad}"
        raise BehindCamera(f"vertex {who} is behind the {stage}D camera")
    return coords


@dataclass(frozen=True)
class ProjectedScene:
    """3D images of the complex's vertices plus index tables for faces and edges.

    ``coords[i]`` is the image of ``vertices[i]``; ``face_idx`` rows list the
    four corners in the face's cyclic order; ``edge_idx`` rows the endpoints.
    """

    vertices: tuple[Cell, ...]
    coords: np.ndarray
    face_idx: np.ndarray
    edge_idx: np.ndarray

    @property
    def vertex_coords(self) -> dict[Cell, np.ndarray]:
        return dict(zip(self.vertices, self.coords))

    def face_points(self, i: int) -> np.ndarray:
        return self.coords[self.face_idx[i]]

    def edge_points(self, i: int) -> np.ndarray:
        return self.coords[self.edge_idx[i]]

    def bbox_diagonal(self) -> float:
        if not len(self.coords):
            return 0.0
        return float(np.linalg.norm(self.coords.max(axis=0) - self.coords.min(axis=0)))

    def with_coords(self, coords: np.ndarray) -> "ProjectedScene":
        return ProjectedScene(self.vertices, np.asarray(coords, dtype=float), self.face_idx, self.edge_idx)


@dataclass(frozen=True)
class SceneLayout:
    """State-independent part of a projection: vertex order, 5D points, index tables."""

    vertices: tuple[Cell, ...]
    points5: np.ndarray
    face_idx: np.ndarray
    edge_idx: np.ndarray

    @classmethod
    def of(cls, cx: CubicalComplex) -> "SceneLayout":
        vi = {v: i for i, v in enumerate(cx.vertices)}
        face_idx = np.array([[vi[v] for v in face_corners(f)] for f in cx.faces], dtype=np.int64).reshape(-1, 4)
        edge_idx = np.array([[vi[v] for v in edge_endpoints(e)] for e in cx.edges], dtype=np.int64).reshape(-1, 2)
        return cls(cx.vertices, centered_vertex_coords(cx.vertices, cx.n or None), face_idx, edge_idx)

    def project(self, s: EmbeddingState, k: ProjectionConstants) -> ProjectedScene:
        coords = project_points(self.points5, s, k, names=self.vertices)
        return ProjectedScene(self.vertices, coords, self.face_idx, self.edge_idx)


def apply_state(cx: CubicalComplex, s: EmbeddingState, k: ProjectionConstants | None = None) -> ProjectedScene:
    return SceneLayout.of(cx).project(s, k or ProjectionConstants())


def initial_state(rng: np.random.Generator, k: ProjectionConstants | None = None) -> EmbeddingState:
    """Sample from the default initial-state distribution: fixed distances, uniform angles."""
    k = k or ProjectionConstants()
    d5 = k.c5 + WORLD_RADIUS + 1.0
    d4 = k.c4 / 2.0 + math.sqrt(AMBIENT)
    return EmbeddingState(d5, d4, tuple(rng.uniform(0.0, TWO_PI, size=len(PLANES))))
