"""Closed-surface checks, classification and search for cubical surfaces in Q^n."""
from __future__ import annotations

import hashlib
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .cells import (
    Cell,
    CubicalComplex,
    build_complex,
    edge_endpoints,
    face_corners,
    face_edges,
    full_skeleton,
    sorted_cells,
    write_complex,
)
from .errors import BudgetExceeded, ExhaustiveTooLarge, NotAClosedSurface, NotAVertex

EXHAUSTIVE_MAX_N = 4


@dataclass(frozen=True)
class VertexFigure:
    vertex: Cell
    nodes: tuple[Cell, ...]
    links: frozenset[frozenset[Cell]]

    def degree(self, node: str) -> int:
        return sum(1 for link in self.links if node in link)

    def is_cycle(self) -> bool:
        """True iff the graph is one cycle through every node (at least 3 nodes)."""
        if len(self.nodes) < 3 or len(self.links) != len(self.nodes):
            return False
        if any(self.degree(x) != 2 for x in self.nodes):
            return False
        adj: dict[Cell, list[Cell]] = {x: [] for x in self.nodes}
        for link in self.links:
            a, b = tuple(link)
            adj[a].append(b)
            adj[b].append(a)
        seen = {self.nodes[0]}
        todo = [self.nodes[0]]
        while todo:
            for y in adj[todo.pop()]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == len(self.nodes)


def _edges_at(face: str, vertex: str) -> frozenset[Cell]:
    return frozenset(e for e in face_edges(face) if vertex in edge_endpoints(e))


def vertex_figure(cx: CubicalComplex, v: str) -> VertexFigure:
    v = Cell(v)
    if v not in cx.vertex_edges:
        raise NotAVertex(f"{v} is not a vertex of the complex")
    links = frozenset(_edges_at(f, v) for f in cx.vertex_faces[v])
    return VertexFigure(vertex=v, nodes=cx.vertex_edges[v], links=links)


@dataclass
class ClosureReport:
    bad_edges: dict[Cell, int] = field(default_factory=dict)
    bad_vertices: list[Cell] = field(default_factory=list)
    empty: bool = False

    @property
    def ok(self) -> bool:
        return not (self.empty or self.bad_edges or self.bad_vertices)

    def lines(self) -> list[str]:
        out = []
        if self.empty:
            out.append("complex is empty")
        for e, k in self.bad_edges.items():
            out.append(f"edge {e}: in {k} faces (needs 2)")
        for v in self.bad_vertices:
            out.append(f"vertex {v}: vertex figure is not a cycle")
        return out


def is_closed_surface(cx: CubicalComplex) -> tuple[bool, ClosureReport]:
    report = ClosureReport(empty=not cx.faces)
    report.bad_edges = {e: len(fs) for e, fs in cx.edge_faces.items() if len(fs) != 2}
    report.bad_vertices = [v for v in cx.vertices if not vertex_figure(cx, v).is_cycle()]
    return report.ok, report


def euler_characteristic(cx: CubicalComplex) -> int:
    return len(cx.vertices) - len(cx.edges) + len(cx.faces)


def face_components(cx: CubicalComplex) -> list[list[Cell]]:
    """Connected components of the face-adjacency graph (faces sharing an edge)."""
    seen: set[Cell] = set()
    comps = []
    for start in cx.faces:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        todo = deque([start])
        while todo:
            f = todo.popleft()
            for e in face_edges(f):
                for g in cx.edge_faces[e]:
                    if g not in seen:
                        seen.add(g)
                        comp.append(g)
                        todo.append(g)
        comps.append(comp)
    return comps


def _edge_direction(face: str, k: int) -> int:
    """+1 if walking the face's cyclic order along edge k runs from the edge's 0-end to its 1-end."""
    c = face_corners(face)
    a, b = c[k], c[(k + 1) % 4]
    p = next(i for i in range(len(a)) if a[i] != b[i])
    return 1 if a[p] == "0" else -1


def is_orientable(cx: CubicalComplex) -> bool:
    """Propagate face orientations across shared edges; orientable iff no contradiction."""
    closed, _ = is_closed_surface(cx)
    if not closed:
        raise NotAClosedSurface("orientability is only defined here for closed surfaces")
    sign: dict[Cell, int] = {}
    for start in cx.faces:
        if start in sign:
            continue
        sign[start] = 1
        todo = deque([start])
        while todo:
            f = todo.popleft()
            for k, e in enumerate(face_edges(f)):
                dir_f = sign[f] * _edge_direction(f, k)
                (g,) = (x for x in cx.edge_faces[e] if x != f)
                kg = face_edges(g).index(e)
                # g must traverse e opposite to f
                want = -dir_f * _edge_direction(g, kg)
                if g in sign:
                    if sign[g] != want:
                        return False
                else:
                    sign[g] = want
                    todo.append(g)
    return True


@dataclass(frozen=True)
class SurfaceClass:
    connected: bool
    closed: bool
    euler_characteristic: int
    orientable: bool | None = None
    genus: int | None = None
    demigenus: int | None = None

    @property
    def name(self) -> str:
        if not (self.connected and self.closed):
            return "not a connected closed surface"
        if self.orientable:
            return {0: "sphere", 1: "torus"}.get(self.genus, f"genus-{self.genus} surface")
        return {1: "projective plane", 2: "Klein bottle"}.get(
            self.demigenus, f"demigenus-{self.demigenus} surface")

    def summary(self) -> str:
        if not self.closed:
            return f"closed surface: no; χ={self.euler_characteristic}"
        parts = ["closed surface: yes", f"χ={self.euler_characteristic}"]
        if not self.connected:
            parts.append("disconnected")
        elif self.orientable:
            parts += ["orientable", f"genus {self.genus}"]
        else:
            parts += ["non-orientable", f"demigenus {self.demigenus}"]
        return "; ".join(parts)

    def as_dict(self) -> dict:
        return {
            "connected": self.connected,
            "closed": self.closed,
            "orientable": self.orientable,
            "euler_characteristic": self.euler_characteristic,
            "genus": self.genus,
            "demigenus": self.demigenus,
            "name": self.name,
        }


def classify(cx: CubicalComplex) -> SurfaceClass:
    chi = euler_characteristic(cx)
    connected = len(face_components(cx)) == 1
    closed, _ = is_closed_surface(cx)
    if not (closed and connected):
        return SurfaceClass(connected=connected, closed=closed, euler_characteristic=chi)
    if is_orientable(cx):
        return SurfaceClass(True, True, chi, orientable=True, genus=(2 - chi) // 2)
    return SurfaceClass(True, True, chi, orientable=False, demigenus=2 - chi)


# -- symmetries of Q^n ------------------------------------------------------

@lru_cache(maxsize=None)
def _symmetry_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    flips = np.array(list(product((0, 1), repeat=n)), dtype=np.int64)
    return perms, flips


def _encode(words: Sequence[str]) -> np.ndarray:
    table = {"0": 0, "1": 1, "*": 2}
    return np.array([[table[ch] for ch in w] for w in words], dtype=np.int64)


def apply_symmetry(cx: CubicalComplex, perm: Sequence[int], flips: Sequence[int]) -> CubicalComplex:
    """Image of ``cx`` under position i <- old position perm[i], then 0/1 swap where flips[i]."""
    out = []
    for f in cx.faces:
        w = [f[p] for p in perm]
        w = [("1" if ch == "0" else "0") if fl and ch != "*" else ch for ch, fl in zip(w, flips)]
        out.append("".join(w))
    return build_complex(out, n=cx.n)


def canonical_signature(cx: CubicalComplex) -> str:
    """Lexicographically least sorted face list over all 2^n * n! cube symmetries."""
    if not cx.faces:
        return ""
    n = cx.n
    perms, flips = _symmetry_arrays(n)
    base = _encode(cx.faces)                            # (F, n)
    permuted = base[:, perms].transpose(1, 0, 2)         # (P, F, n)
    cand = permuted[:, None, :, :]
    fl = flips[None, :, None, :]
    cand = np.where(cand < 2, cand ^ fl, cand)           # (P, 2^n, F, n)
    weights = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = (cand * weights).sum(axis=-1).reshape(-1, len(cx.faces))
    codes.sort(axis=1)
    best = codes[np.lexsort(codes.T[::-1])[0]]
    words = []
    for code in best:
        digits = []
        for _ in range(n):
            code, d = divmod(int(code), 3)
            digits.append("01*"[d])
        words.append("".join(reversed(digits)))
    return ",".join(words)


def signature_hash(signature: str) -> str:
    return hashlib.sha1(signature.encode()).hexdigest()[:12]


# -- search -----------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceTarget:
    """Filter on classified surfaces; ``None`` fields match anything."""

    orientable: bool | None = None
    euler_characteristic: int | None = None

    def matches(self, cls: SurfaceClass) -> bool:
        if not (cls.connected and cls.closed):
            return False
        if self.orientable is not None and cls.orientable != self.orientable:
            return False
        if self.euler_characteristic is not None and cls.euler_characteristic != self.euler_characteristic:
            return False
        return True

    @classmethod
    def parse(cls, text: str) -> "SurfaceTarget":
        named = {
            "any": cls(),
            "sphere": cls(True, 2),
            "torus": cls(True, 0),
            "projective-plane": cls(False, 1),
            "rp2": cls(False, 1),
            "klein-bottle": cls(False, 0),
            "klein": cls(False, 0),
            "orientable": cls(orientable=True),
            "nonorientable": cls(orientable=False),
        }
        key = text.strip().lower()
        if key in named:
            return named[key]
        if "=" in key:
            kind, _, val = key.partition("=")
            k = int(val)
            if kind == "genus":
                return cls(True, 2 - 2 * k)
            if kind == "demigenus":
                return cls(False, 2 - k)
            if kind in ("chi", "euler"):
                return cls(None, k)
        raise ValueError(f"unknown surface target {text!r}")


class _CubeTables:
    """Index tables for the 2-skeleton of Q^n used by the search loops."""

    def __init__(self, n: int):
        self.n = n
        self.faces = sorted_cells(full_skeleton(n, 2))
        self.edges = sorted_cells(full_skeleton(n, 1))
        self.vertices = sorted_cells(full_skeleton(n, 0))
        eidx = {e: i for i, e in enumerate(self.edges)}
        vidx = {v: i for i, v in enumerate(self.vertices)}
        self.face_edges = [tuple(eidx[e] for e in face_edges(f)) for f in self.faces]
        self.face_corners = [tuple(vidx[v] for v in face_corners(f)) for f in self.faces]
        self.edge_faces: list[list[int]] = [[] for _ in self.edges]
        for fi, es in enumerate(self.face_edges):
            for e in es:
                self.edge_faces[e].append(fi)
        self.edge_ends = [tuple(vidx[v] for v in edge_endpoints(e)) for e in self.edges]
        # corner k of a face touches its edges k-1 and k
        self.corner_edges = [
            tuple((es[(k - 1) % 4], es[k]) for k in range(4)) for es in self.face_edges
        ]


@lru_cache(maxsize=None)
def _tables(n: int) -> _CubeTables:
    return _CubeTables(n)


class _Grower:
    """Mutable partial surface with the bookkeeping needed for pruned growth."""

    def __init__(self, t: _CubeTables):
        self.t = t
        self.in_face = [False] * len(t.faces)
        self.edeg = [0] * len(t.edges)
        self.vactive = [0] * len(t.vertices)
        self.vclosed = [False] * len(t.vertices)
        self.open: set[int] = set()
        self.stack: list[tuple[int, list[int]]] = []

    def _other_edge(self, f: int, v_corner: int, e: int) -> int:
        a, b = self.t.corner_edges[f][v_corner]
        return b if a == e else a

    def _closes_cycle(self, v: int, a: int, b: int) -> int:
        """Walk the vertex-figure path from a; return its node count if it ends at b, else 0."""
        t = self.t
        prev, cur, count = -1, a, 1
        while True:
            nxt = -1
            for g in t.edge_faces[cur]:
                if self.in_face[g]:
                    k = t.face_corners[g].index(v)
                    o = self._other_edge(g, k, cur)
                    if o != prev:
                        nxt = o
                        break
            if nxt < 0:
                return 0
            count += 1
            if nxt == b:
                return count
            prev, cur = cur, nxt

    def can_add(self, f: int) -> bool:
        t = self.t
        if self.in_face[f]:
            return False
        for e in t.face_edges[f]:
            if self.edeg[e] >= 2:
                return False
        for k, v in enumerate(t.face_corners[f]):
            if self.vclosed[v]:
                return False
            a, b = t.corner_edges[f][k]
            if self.edeg[a] and self.edeg[b]:
                size = self._closes_cycle(v, a, b)
                if size and size != self.vactive[v]:
                    return False
        return True

    def add(self, f: int) -> None:
        t = self.t
        closed_now = []
        for k, v in enumerate(t.face_corners[f]):
            a, b = t.corner_edges[f][k]
            if self.edeg[a] and self.edeg[b] and self._closes_cycle(v, a, b):
                closed_now.append(v)
        self.in_face[f] = True
        for e in t.face_edges[f]:
            self.edeg[e] += 1
            if self.edeg[e] == 1:
                self.open.add(e)
                for v in t.edge_ends[e]:
                    self.vactive[v] += 1
            else:
                self.open.discard(e)
        for v in closed_now:
            self.vclosed[v] = True
        self.stack.append((f, closed_now))

    def pop(self) -> None:
        t = self.t
        f, closed_now = self.stack.pop()
        for v in closed_now:
            self.vclosed[v] = False
        self.in_face[f] = False
        for e in t.face_edges[f]:
            self.edeg[e] -= 1
            if self.edeg[e] == 1:
                self.open.add(e)
            else:
                self.open.discard(e)
                for v in t.edge_ends[e]:
                    self.vactive[v] -= 1

    def candidates(self, e: int) -> list[int]:
        return [f for f in self.t.edge_faces[e] if self.can_add(f)]

    def faces(self) -> list[Cell]:
        return [self.t.faces[f] for f, _ in self.stack]


def _grow(g: _Grower, rng: random.Random | None, max_faces: int, budget: list[int]) -> Iterator[list[Cell]]:
    """Depth-first completion of the open edges, most-constrained edge first.

    Yields every closed surface reachable from the current partial one.
    ``budget[0]`` counts remaining search nodes and is shared by the caller.
    """
    if budget[0] <= 0:
        return
    budget[0] -= 1
    if not g.open:
        yield g.faces()
        return
    if len(g.stack) + (len(g.open) + 3) // 4 > max_faces:
        return
    best_c = None
    order = sorted(g.open)
    if rng is not None:
        rng.shuffle(order)
    for e in order:
        c = g.candidates(e)
        if best_c is None or len(c) < len(best_c):
            best_c = c
            if not c:
                return
    if rng is not None:
        rng.shuffle(best_c)
    for f in best_c:
        g.add(f)
        yield from _grow(g, rng, max_faces, budget)
        g.pop()
        if budget[0] <= 0:
            return


def _exhaustive(n: int, max_faces: int) -> Iterator[list[Cell]]:
    """Lexicographic include/exclude over all faces, pruning edges past degree 2.

    An edge is final once its lexicographically last face is decided; it must
    then have degree 0 or 2.
    """
    t = _tables(n)
    nf = len(t.faces)
    finalize: list[list[int]] = [[] for _ in range(nf)]
    for e, fs in enumerate(t.edge_faces):
        finalize[max(fs)].append(e)
    edeg = [0] * len(t.edges)
    chosen: list[int] = []

    def rec(i: int) -> Iterator[list[Cell]]:
        if i == nf:
            if chosen:
                yield [t.faces[f] for f in chosen]
            return
        # exclude
        if all(edeg[e] != 1 for e in finalize[i]):
            yield from rec(i + 1)
        # include
        es = t.face_edges[i]
        if len(chosen) < max_faces and all(edeg[e] < 2 for e in es):
            for e in es:
                edeg[e] += 1
            chosen.append(i)
            if all(edeg[e] != 1 for e in finalize[i]):
                yield from rec(i + 1)
            chosen.pop()
            for e in es:
                edeg[e] -= 1

    yield from rec(0)


def enumerate_closed_surfaces(
    n: int,
    max_faces: int,
    mode: str = "exhaustive",
    seed: int = 0,
    target: SurfaceTarget | None = None,
    count: int = 1,
    max_nodes: int = 200_000,
    restart_nodes: int = 2_000,
    allow_large: bool = False,
) -> list[CubicalComplex]:
    """Connected closed surfaces in Q^n with at most ``max_faces`` faces.

    ``exhaustive`` returns every isomorphism type (one representative per
    canonical signature); ``randomized`` grows surfaces from random seed
    faces with restarts and returns up to ``count`` distinct ones matching
    ``target``. Randomized results are deterministic for a given seed.
    """
    if mode == "exhaustive":
        if n > EXHAUSTIVE_MAX_N and not allow_large:
            raise ExhaustiveTooLarge(f"exhaustive search in Q^{n} is out of budget (n <= {EXHAUSTIVE_MAX_N})")
        found: dict[str, CubicalComplex] = {}
        for faces in _exhaustive(n, max_faces):
            cx = build_complex(faces)
            if len(face_components(cx)) != 1 or not is_closed_surface(cx)[0]:
                continue
            if target is not None and not target.matches(classify(cx)):
                continue
            found.setdefault(canonical_signature(cx), cx)
        return [found[k] for k in sorted(found, key=lambda s: (len(found[s]), s))]

    if mode != "randomized":
        raise ValueError(f"unknown search mode {mode!r}")
    rng = random.Random(seed)
    t = _tables(n)
    found = {}
    total = [max_nodes]
    while total[0] > 0 and len(found) < count:
        g = _Grower(t)
        g.add(rng.randrange(len(t.faces)))
        local = [min(restart_nodes, total[0])]
        spent_before = local[0]
        for faces in _grow(g, rng, max_faces, local):
            cx = build_complex(faces)
            if target is not None and not target.matches(classify(cx)):
                continue
            # dedup only matters when collecting several
            sig = canonical_signature(cx) if count > 1 else ""
            if sig not in found:
                found[sig] = cx
                if len(found) >= count:
                    break
        total[0] -= spent_before - max(local[0], 0)
    if not found:
        raise BudgetExceeded(f"no matching surface in Q^{n} within {max_nodes} search nodes")
    return list(found.values())


def write_search_results(surfaces: Sequence[CubicalComplex], outdir: str | Path) -> Path:
    """Write one complex file per surface plus ``manifest.tsv``; returns the manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ["file\tfaces\tchi\torientable\tgenus_or_demigenus\tsignature_hash"]
    for i, cx in enumerate(surfaces):
        cls = classify(cx)
        sig = signature_hash(canonical_signature(cx))
        name = f"surface_{i:04d}.txt"
        write_complex(cx, outdir / name, header=[cls.summary(), f"signature {sig}"])
        gk = cls.genus if cls.orientable else cls.demigenus
        rows.append(f"{name}\t{len(cx)}\t{cls.euler_characteristic}\t{int(bool(cls.orientable))}\t{gk}\t{sig}")
    manifest = outdir / "manifest.tsv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest
