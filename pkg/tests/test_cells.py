from itertools import product
from math import comb

import pytest
from hypothesis import given, strategies as st

from cubesurf.cells import (
    Cell,
    boundary_cells,
    build_complex,
    cell_key,
    cube_boundary,
    edge_endpoints,
    face_corners,
    face_edges,
    format_complex,
    full_skeleton,
    incidence_counts,
    parse_cell,
    parse_complex_text,
    read_complex,
    skeleton_size,
    sorted_cells,
    write_complex,
)
from cubesurf.errors import BadSymbol, InvalidK, MixedAmbient, MixedDimension, WrongLength


def contains(big: str, small: str) -> bool:
    return all(b == "*" or b == s for b, s in zip(big, small))


def brute_faces(cell: str, k: int) -> set[str]:
    # every word with k stars that sits inside the cell
    return {"".join(w) for w in product("01*", repeat=len(cell))
            if "".join(w).count("*") == k and contains(cell, "".join(w))}


def brute_skeleton(n: int, k: int) -> set[str]:
    return {"".join(w) for w in product("01*", repeat=n) if "".join(w).count("*") == k}


cells = st.integers(1, 6).flatmap(lambda n: st.text("01*", min_size=n, max_size=n))


@pytest.mark.parametrize("n", range(1, 7))
def test_skeleton_matches_enumeration(n):
    for k in range(n + 1):
        sk = full_skeleton(n, k)
        assert sk == brute_skeleton(n, k)
        assert len(sk) == skeleton_size(n, k) == comb(n, k) * 2 ** (n - k)


def test_penteract_counts():
    assert [len(full_skeleton(5, k)) for k in range(3)] == [32, 80, 80]


@given(cells, st.data())
def test_boundary_matches_containment(cell, data):
    k = data.draw(st.integers(0, cell.count("*")))
    got = boundary_cells(cell, k)
    assert got == brute_faces(cell, k)
    d = cell.count("*")
    assert len(got) == comb(d, k) * 2 ** (d - k)


def test_boundary_examples():
    assert boundary_cells("**", 1) == {"0*", "1*", "*0", "*1"}
    assert len(boundary_cells("***00", 2)) == 6
    assert boundary_cells("01", 0) == {"01"}
    with pytest.raises(InvalidK):
        boundary_cells("0*", 2)


def test_parse_cell_errors():
    assert parse_cell("0*1", 3) == "0*1"
    with pytest.raises(WrongLength):
        parse_cell("0*", 3)
    with pytest.raises(BadSymbol):
        parse_cell("0x1", 3)
    with pytest.raises(WrongLength):
        parse_cell("0" * 9, 9)


def test_sort_order():
    assert sorted_cells(["*0", "10", "01", "1*"]) == ["01", "10", "1*", "*0"]
    assert cell_key("0*1") < cell_key("*01")


@given(st.integers(2, 6).flatmap(lambda n: st.sampled_from(sorted(full_skeleton(n, 2)))))
def test_face_corner_cycle(face):
    corners = face_corners(face)
    assert set(corners) == boundary_cells(face, 0)
    # consecutive corners differ in exactly one coordinate
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        assert sum(x != y for x, y in zip(a, b)) == 1
    edges = face_edges(face)
    assert set(edges) == boundary_cells(face, 1)
    for k, e in enumerate(edges):
        assert set(edge_endpoints(e)) == {corners[k], corners[(k + 1) % 4]}


def test_build_complex_incidence():
    cx = cube_boundary("***")
    assert (len(cx.vertices), len(cx.edges), len(cx.faces)) == (8, 12, 6)
    inc = incidence_counts(cx)
    assert set(inc.faces_per_edge.values()) == {2}
    assert set(inc.faces_per_vertex.values()) == {3}
    assert set(inc.edges_per_vertex.values()) == {3}


def test_single_face_incidence():
    cx = build_complex(["**0"])
    inc = incidence_counts(cx)
    assert len(cx.edges) == 4 and set(inc.faces_per_edge.values()) == {1}


def test_complex_errors():
    with pytest.raises(MixedAmbient):
        build_complex(["**0", "**00"])
    with pytest.raises(MixedDimension):
        build_complex(["***0"])
    with pytest.raises(MixedDimension):
        parse_complex_text("**0\n*00\n")


def test_complex_equality_ignores_order():
    a = build_complex(["0**", "1**"])
    b = build_complex(["1**", "0**"])
    assert a == b and hash(a) == hash(b)
    assert all(isinstance(f, Cell) for f in a.faces)


def test_text_round_trip(tmp_path, torus):
    path = tmp_path / "t.txt"
    write_complex(torus, path, header=["a torus"])
    assert read_complex(path) == torus
    text = format_complex(torus)
    assert parse_complex_text("# comment\n\n" + text) == torus


def test_parse_reports_line():
    with pytest.raises(BadSymbol, match="line 2"):
        parse_complex_text("**0\n*x*\n")
