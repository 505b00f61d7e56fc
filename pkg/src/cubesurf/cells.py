"""Cells of the n-cube in star notation and two-dimensional cubical complexes.

A cell of Q^n = [0,1]^n is a word over ``{0,1,*}``; each ``*`` marks a free
interval direction, so the cell dimension is the star count. Cells are kept
as plain ``str`` subclasses so they hash and compare like their words.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from pathlib import Path
from typing import Iterable

from .errors import BadSymbol, InvalidK, MixedAmbient, MixedDimension, WrongLength

SYMBOLS = frozenset("01*")
MAX_DIM = 8

_ORDER = str.maketrans("01*", "012")


class Cell(str):
    __slots__ = ()

    @property
    def n(self) -> int:
        return len(self)

    @property
    def dim(self) -> int:
        return self.count("*")

    def __repr__(self) -> str:
        return f"Cell({str.__repr__(self)})"


def cell_key(cell: str) -> str:
    """Sort key putting '0' < '1' < '*' at every position."""
    return cell.translate(_ORDER)


def sorted_cells(cells: Iterable[str]) -> list[Cell]:
    return [Cell(c) for c in sorted(cells, key=cell_key)]


def parse_cell(text: str, n: int) -> Cell:
    if not 1 <= n <= MAX_DIM:
        raise WrongLength(f"ambient dimension {n} outside 1..{MAX_DIM}")
    if len(text) != n:
        raise WrongLength(f"cell {text!r} has length {len(text)}, expected {n}")
    bad = set(text) - SYMBOLS
    if bad:
        raise BadSymbol(f"cell {text!r} contains symbols {sorted(bad)} outside {{0,1,*}}")
    return Cell(text)


def boundary_cells(cell: str, k: int) -> set[Cell]:
    """All k-dimensional faces of ``cell``.

    Obtained by fixing ``dim - k`` of the star positions to every 0/1
    combination, so the result has ``C(dim, dim-k) * 2**(dim-k)`` members.
    """
    stars = [i for i, ch in enumerate(cell) if ch == "*"]
    dim = len(stars)
    if k < 0 or k > dim:
        raise InvalidK(f"k={k} not in 0..{dim} for cell {cell!r}")
    out: set[Cell] = set()
    for fixed in combinations(stars, dim - k):
        for bits in product("01", repeat=dim - k):
            word = list(cell)
            for pos, b in zip(fixed, bits):
                word[pos] = b
            out.add(Cell("".join(word)))
    return out


@lru_cache(maxsize=None)
def _skeleton(n: int, k: int) -> tuple[Cell, ...]:
    cells = []
    for stars in combinations(range(n), k):
        rest = [i for i in range(n) if i not in stars]
        for bits in product("01", repeat=n - k):
            word = ["*"] * n
            for pos, b in zip(rest, bits):
                word[pos] = b
            cells.append("".join(word))
    return tuple(sorted_cells(cells))


def full_skeleton(n: int, k: int) -> set[Cell]:
    """All k-cells of Q^n; there are ``C(n,k) * 2**(n-k)`` of them."""
    if not 1 <= n <= MAX_DIM:
        raise WrongLength(f"ambient dimension {n} outside 1..{MAX_DIM}")
    if k < 0 or k > n:
        raise InvalidK(f"k={k} not in 0..{n}")
    return set(_skeleton(n, k))


def skeleton_size(n: int, k: int) -> int:
    return comb(n, k) * 2 ** (n - k)


def face_corners(face: str) -> tuple[Cell, Cell, Cell, Cell]:
    """The four vertices of a 2-cell in cyclic order.

    With stars at positions i < j the order is (i,j) = 00, 10, 11, 01.
    """
    i, j = (p for p, ch in enumerate(face) if ch == "*")
    out = []
    for a, b in (("0", "0"), ("1", "0"), ("1", "1"), ("0", "1")):
        w = list(face)
        w[i], w[j] = a, b
        out.append(Cell("".join(w)))
    return tuple(out)  # type: ignore[return-value]


def edge_between(u: str, v: str) -> Cell:
    """The edge spanned by two vertices at Hamming distance one."""
    diff = [p for p, (a, b) in enumerate(zip(u, v)) if a != b]
    if len(diff) != 1:
        raise ValueError(f"{u} and {v} are not adjacent")
    p = diff[0]
    return Cell(u[:p] + "*" + u[p + 1:])


def face_edges(face: str) -> tuple[Cell, Cell, Cell, Cell]:
    """Boundary edges in the cyclic order of ``face_corners``: edge k joins corner k and k+1."""
    c = face_corners(face)
    return tuple(edge_between(c[k], c[(k + 1) % 4]) for k in range(4))  # type: ignore[return-value]


def edge_endpoints(edge: str) -> tuple[Cell, Cell]:
    p = edge.index("*")
    return Cell(edge[:p] + "0" + edge[p + 1:]), Cell(edge[:p] + "1" + edge[p + 1:])


@dataclass(frozen=True, eq=False)
class CubicalComplex:
    """A set of 2-cells of Q^n with its derived edges, vertices and incidence maps.

    Immutable after construction. Build it with ``build_complex``.
    """

    n: int
    faces: tuple[Cell, ...]
    edges: tuple[Cell, ...]
    vertices: tuple[Cell, ...]
    edge_faces: dict[Cell, tuple[Cell, ...]]
    vertex_edges: dict[Cell, tuple[Cell, ...]]
    vertex_faces: dict[Cell, tuple[Cell, ...]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CubicalComplex):
            return NotImplemented
        return self.n == other.n and self.faces == other.faces

    def __hash__(self) -> int:
        return hash((self.n, self.faces))

    def __len__(self) -> int:
        return len(self.faces)

    def __repr__(self) -> str:
        return (f"CubicalComplex(n={self.n}, V={len(self.vertices)}, "
                f"E={len(self.edges)}, F={len(self.faces)})")

    def faces_containing(self, edge: str) -> tuple[Cell, ...]:
        return self.edge_faces.get(Cell(edge), ())

    def edges_of_face(self, face: str) -> tuple[Cell, ...]:
        return face_edges(face)


def build_complex(faces: Iterable[str], n: int | None = None) -> CubicalComplex:
    faces = set(faces)
    lengths = {len(f) for f in faces}
    if len(lengths) > 1:
        raise MixedAmbient(f"faces have differing lengths {sorted(lengths)}")
    if lengths:
        (m,) = lengths
        if n is not None and n != m:
            raise MixedAmbient(f"faces have length {m}, expected {n}")
        n = m
    elif n is None:
        n = 0
    for f in faces:
        if n:
            parse_cell(f, n)
        if f.count("*") != 2:
            raise MixedDimension(f"cell {f!r} has {f.count('*')} stars, expected 2")

    ordered = sorted_cells(faces)
    edge_faces: dict[Cell, list[Cell]] = {}
    vertex_edges: dict[Cell, set[Cell]] = {}
    vertex_faces: dict[Cell, list[Cell]] = {}
    for f in ordered:
        for e in face_edges(f):
            edge_faces.setdefault(e, []).append(f)
            for v in edge_endpoints(e):
                vertex_edges.setdefault(v, set()).add(e)
        for v in face_corners(f):
            vertex_faces.setdefault(v, []).append(f)

    edges = sorted_cells(edge_faces)
    vertices = sorted_cells(vertex_edges)
    return CubicalComplex(
        n=n,
        faces=tuple(ordered),
        edges=tuple(edges),
        vertices=tuple(vertices),
        edge_faces={e: tuple(edge_faces[e]) for e in edges},
        vertex_edges={v: tuple(sorted_cells(vertex_edges[v])) for v in vertices},
        vertex_faces={v: tuple(vertex_faces[v]) for v in vertices},
    )


@dataclass(frozen=True)
class IncidenceCardinalities:
    faces_per_edge: dict[Cell, int]
    faces_per_vertex: dict[Cell, int]
    edges_per_vertex: dict[Cell, int]


def incidence_counts(cx: CubicalComplex) -> IncidenceCardinalities:
    return IncidenceCardinalities(
        faces_per_edge={e: len(fs) for e, fs in cx.edge_faces.items()},
        faces_per_vertex={v: len(fs) for v, fs in cx.vertex_faces.items()},
        edges_per_vertex={v: len(es) for v, es in cx.vertex_edges.items()},
    )


def cube_boundary(cell: str) -> CubicalComplex:
    """Boundary surface of a 3-cell, e.g. ``'***00'`` -> the six squares around it."""
    return build_complex(boundary_cells(cell, 2))


# complex files: one 2-cell per line, '#' comments, blank lines ignored

def parse_complex_text(text: str) -> CubicalComplex:
    words = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words.append((lineno, line))
    if not words:
        return build_complex([])
    n = len(words[0][1])
    faces = []
    for lineno, w in words:
        try:
            faces.append(parse_cell(w, n))
        except (WrongLength, BadSymbol) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        if w.count("*") != 2:
            raise MixedDimension(f"line {lineno}: cell {w!r} is not a 2-cell")
    return build_complex(faces)


def read_complex(path: str | Path) -> CubicalComplex:
    return parse_complex_text(Path(path).read_text(encoding="utf-8"))


def format_complex(cx: CubicalComplex, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.extend(cx.faces)
    return "\n".join(lines) + "\n"


def write_complex(cx: CubicalComplex, path: str | Path, header: Iterable[str] = ()) -> None:
    Path(path).write_text(format_complex(cx, header), encoding="utf-8")
