"""Printable meshes from projected scenes: beam-per-edge solids, binary STL and OBJ output."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cells import Cell, CubicalComplex
from .errors import DegenerateEdge, DegenerateFace
from .geometry import EPS_GEOM
from .projection import ProjectedScene

PROFILES = ("square", "octagon")
STL_HEADER = b"cubesurf binary stl"
STL_DTYPE = np.dtype([("normal", "<f4", (3,)), ("v", "<f4", (3, 3)), ("attr", "<u2")])


@dataclass(frozen=True)
class BeamMesh:
    """Triangle soup with outward normals and the source cell of each triangle.

    ``provenance[i]`` is ``("edge", cell)`` for beam triangles and
    ``("face", cell)`` for panel triangles.
    """

    triangles: np.ndarray
    normals: np.ndarray
    provenance: tuple[tuple[str, Cell], ...]

    def __len__(self) -> int:
        return len(self.triangles)


def triangle_normals(tris: np.ndarray) -> np.ndarray:
    """Unit normals by the right-hand rule on (v0, v1, v2)."""
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)


def _perp_frame(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(d)))] = 1.0
    u = np.cross(d, axis)
    u /= np.linalg.norm(u)
    return u, np.cross(d, u)


def _orient_outward(tris: list, center: np.ndarray) -> list:
    # only valid for convex solids, which is all we emit
    out = []
    for a, b, c in tris:
        n = np.cross(b - a, c - a)
        if np.dot(n, (a + b + c) / 3.0 - center) < 0:
            b, c = c, b
        out.append((a, b, c))
    return out


def _prism(bottom: list, top: list) -> list:
    """Closed convex prism from two matching convex polygons."""
    m = len(bottom)
    tris = []
    for k in range(1, m - 1):
        tris.append((bottom[0], bottom[k], bottom[k + 1]))
        tris.append((top[0], top[k], top[k + 1]))
    for k in range(m):
        j = (k + 1) % m
        tris.append((bottom[k], bottom[j], top[j]))
        tris.append((bottom[k], top[j], top[k]))
    center = (np.mean(bottom, axis=0) + np.mean(top, axis=0)) / 2.0
    return _orient_outward(tris, center)


def beam_triangles(p0, p1, r: float, profile: str = "square") -> list:
    """Solid beam of half-width r around segment p0p1; 12 triangles for the square profile."""
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    d = p1 - p0
    length = float(np.linalg.norm(d))
    if length <= EPS_GEOM:
        raise DegenerateEdge("beam segment shorter than eps_geom")
    u, v = _perp_frame(d / length)
    if profile == "square":
        ring = [r * (su * u + sv * v) for su, sv in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    elif profile == "octagon":
        # apothem r keeps the clearance semantics of the square profile
        rad = r / math.cos(math.pi / 8)
        ring = [rad * (math.cos(a) * u + math.sin(a) * v)
                for a in (math.pi / 8 + k * math.pi / 4 for k in range(8))]
    else:
        raise ValueError(f"profile must be one of {PROFILES}")
    return _prism([p0 + w for w in ring], [p1 + w for w in ring])


def panel_triangles(quad, thickness: float) -> list:
    """Thin slab over a planar quad: two triangles per side plus an 8-triangle rim."""
    q = np.asarray(quad, dtype=float)
    n = np.zeros(3)
    for k in range(4):
        n += np.cross(q[k], q[(k + 1) % 4])
    norm = np.linalg.norm(n)
    if norm <= EPS_GEOM:
        raise DegenerateFace("panel quad has no area")
    off = (thickness / 2.0) * n / norm
    return _prism([p - off for p in q], [p + off for p in q])


def build_beam_mesh(scene: ProjectedScene, cx: CubicalComplex, r: float,
                    panels: bool = False, profile: str = "square",
                    panel_thickness: float | None = None) -> BeamMesh:
    if not r > 0:
        raise ValueError(f"beam radius must be positive, got {r}")
    tris, prov = [], []
    for i, e in enumerate(cx.edges):
        a, b = scene.edge_points(i)
        try:
            bt = beam_triangles(a, b, r, profile)
        except DegenerateEdge:
            raise DegenerateEdge(f"edge {e} projects to a point") from None
        tris.extend(bt)
        prov.extend([("edge", e)] * len(bt))
    if panels:
        t = panel_thickness if panel_thickness is not None else r
        for i, f in enumerate(cx.faces):
            try:
                pt = panel_triangles(scene.face_points(i), t)
            except DegenerateFace:
                raise DegenerateFace(f"face {f} projects to a degenerate quadrilateral") from None
            tris.extend(pt)
            prov.extend([("face", f)] * len(pt))
    arr = np.array(tris, dtype=float).reshape(-1, 3, 3)
    areas = 0.5 * np.linalg.norm(np.cross(arr[:, 1] - arr[:, 0], arr[:, 2] - arr[:, 0]), axis=1)
    bad = np.flatnonzero(areas <= EPS_GEOM)
    if bad.size:
        kind, cell = prov[bad[0]]
        raise DegenerateEdge(f"{kind} {cell} yields a degenerate triangle; radius too small?")
    return BeamMesh(arr, triangle_normals(arr), tuple(prov))


def write_stl_binary(mesh: BeamMesh, path) -> int:
    """Write binary STL; returns the byte count, always 84 + 50 * len(mesh)."""
    rec = np.zeros(len(mesh), dtype=STL_DTYPE)
    rec["normal"] = mesh.normals
    rec["v"] = mesh.triangles
    with open(path, "wb") as fh:
        fh.write(STL_HEADER.ljust(80, b"\0"))
        fh.write(np.uint32(len(mesh)).astype("<u4").tobytes())
        fh.write(rec.tobytes())
    return 84 + 50 * len(mesh)


def read_stl_binary(path) -> tuple[np.ndarray, np.ndarray]:
    """(normals, triangles) as float32 arrays."""
    data = Path(path).read_bytes()
    if len(data) < 84:
        raise ValueError(f"{path}: too short for a binary STL")
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    if len(data) != 84 + 50 * count:
        raise ValueError(f"{path}: size {len(data)} does not match {count} triangles")
    rec = np.frombuffer(data, dtype=STL_DTYPE, count=count, offset=84)
    return rec["normal"].copy(), rec["v"].copy()


def _v_line(p) -> str:
    return "v " + " ".join(repr(float(x)) for x in p) + "\n"


def write_obj(obj, path) -> None:
    """Text OBJ of a BeamMesh (shared vertices, triangle faces) or a ProjectedScene.

    Scene mode writes the projected vertices, one quad ``f`` per face and one
    ``l`` per edge. Coordinates use repr so a re-read is exact.
    """
    lines = ["# cubesurf\n"]
    if isinstance(obj, ProjectedScene):
        lines.extend(_v_line(p) for p in obj.coords)
        lines.extend("f " + " ".join(str(int(i) + 1) for i in row) + "\n" for row in obj.face_idx)
        lines.extend("l " + " ".join(str(int(i) + 1) for i in row) + "\n" for row in obj.edge_idx)
    elif isinstance(obj, BeamMesh):
        index: dict[tuple, int] = {}
        faces = []
        for tri in obj.triangles:
            ids = []
            for p in tri:
                key = tuple(float(x) for x in p)
                if key not in index:
                    index[key] = len(index) + 1
                    lines.append(_v_line(key))
                ids.append(index[key])
            faces.append(ids)
        lines.extend(f"f {a} {b} {c}\n" for a, b, c in faces)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as OBJ")
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines)


def read_obj(path) -> tuple[np.ndarray, list[list[int]], list[list[int]]]:
    """Vertices plus 1-based ``f`` and ``l`` index lists; other records are ignored."""
    verts, faces, segs = [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif tag == "f":
                faces.append([int(x.split("/")[0]) for x in parts[1:]])
            elif tag == "l":
                segs.append([int(x) for x in parts[1:]])
    return np.array(verts, dtype=float).reshape(-1, 3), faces, segs
