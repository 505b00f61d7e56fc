"""Geometric predicates on projected scenes: segment clearance and quad-quad intersection.

Scalar entry points (``segment_clearance``, ``faces_intersect``) work on
plain point arrays. The ``batch_*`` kernels are numba-compiled and evaluate
many pairs of one scene at once; the face kernel uses an edge-versus-quad
formulation that is independent of the triangle-triangle scalar route.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from .errors import DegenerateEdge, DegenerateFace

EPS_GEOM = 1e-9

_TRIS = ((0, 1, 2), (0, 2, 3))


# -- segment clearance ------------------------------------------------------

@nb.njit(cache=True)
def _clamp01(x):
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


@nb.njit(cache=True)
def _dot(ax, ay, az, bx, by, bz):
    return ax * bx + ay * by + az * bz


@nb.njit(cache=True)
def _closest_params_xyz(p1x, p1y, p1z, q1x, q1y, q1z, p2x, p2y, p2z, q2x, q2y, q2z):
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = _dot(d1x, d1y, d1z, d1x, d1y, d1z)
    e = _dot(d2x, d2y, d2z, d2x, d2y, d2z)
    f = _dot(d2x, d2y, d2z, rx, ry, rz)
    c = _dot(d1x, d1y, d1z, rx, ry, rz)
    b = _dot(d1x, d1y, d1z, d2x, d2y, d2z)
    denom = a * e - b * b
    s = 0.0
    if denom > 1e-14 * a * e:
        s = _clamp01((b * f - c * e) / denom)
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = _clamp01(-c / a)
    elif t > 1.0:
        t = 1.0
        s = _clamp01((b - c) / a)
    wx = rx + s * d1x - t * d2x
    wy = ry + s * d1y - t * d2y
    wz = rz + s * d1z - t * d2z
    return s, t, math.sqrt(wx * wx + wy * wy + wz * wz)


@nb.njit(cache=True)
def _closest_params(p1, q1, p2, q2):
    s, t, _ = _closest_params_xyz(p1[0], p1[1], p1[2], q1[0], q1[1], q1[2],
                                  p2[0], p2[1], p2[2], q2[0], q2[1], q2[2])
    return s, t


def segment_clearance(a0, a1, b0, b1) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Minimum distance between closed segments a0a1 and b0b1, with the closest points."""
    a0, a1, b0, b1 = (np.asarray(x, dtype=float) for x in (a0, a1, b0, b1))
    if np.linalg.norm(a1 - a0) <= EPS_GEOM or np.linalg.norm(b1 - b0) <= EPS_GEOM:
        raise DegenerateEdge("segment shorter than eps_geom")
    s, t = _closest_params(a0, a1, b0, b1)
    pa = a0 + s * (a1 - a0)
    pb = b0 + t * (b1 - b0)
    return float(np.linalg.norm(pa - pb)), (pa, pb)


@nb.njit(cache=True)
def batch_clearances(coords, edge_idx, pairs):
    out = np.empty(pairs.shape[0])
    for k in range(pairs.shape[0]):
        a = edge_idx[pairs[k, 0], 0]
        b = edge_idx[pairs[k, 0], 1]
        c = edge_idx[pairs[k, 1], 0]
        d = edge_idx[pairs[k, 1], 1]
        out[k] = _closest_params_xyz(coords[a, 0], coords[a, 1], coords[a, 2],
                                     coords[b, 0], coords[b, 1], coords[b, 2],
                                     coords[c, 0], coords[c, 1], coords[c, 2],
                                     coords[d, 0], coords[d, 1], coords[d, 2])[2]
    return out


@nb.njit(cache=True)
def edge_lengths(coords, edge_idx):
    out = np.empty(edge_idx.shape[0])
    for k in range(edge_idx.shape[0]):
        a = edge_idx[k, 0]
        b = edge_idx[k, 1]
        wx = coords[b, 0] - coords[a, 0]
        wy = coords[b, 1] - coords[a, 1]
        wz = coords[b, 2] - coords[a, 2]
        out[k] = math.sqrt(wx * wx + wy * wy + wz * wz)
    return out


# -- scalar quad/quad test via triangle pairs -------------------------------

def _unit(v):
    n = np.linalg.norm(v)
    return (v / n if n > 0 else v), n


def quad_area(q) -> float:
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.linalg.norm(np.cross(q[2] - q[0], q[3] - q[1])))


def _check_face(q) -> None:
    for a, b, c in _TRIS:
        if np.linalg.norm(np.cross(q[b] - q[a], q[c] - q[a])) <= EPS_GEOM:
            raise DegenerateFace("face corners are collinear within eps_geom")


def _section(tri, dist, axis):
    """Parameters along ``axis`` of the points where the triangle meets the other plane."""
    ts = []
    for i in range(3):
        if dist[i] == 0.0:
            ts.append(axis @ tri[i])
        j = (i + 1) % 3
        if dist[i] * dist[j] < 0.0:
            u = dist[i] / (dist[i] - dist[j])
            ts.append(axis @ (tri[i] + u * (tri[j] - tri[i])))
    return min(ts), max(ts)


def _drop_axis(points, normal):
    keep = [k for k in range(3) if k != int(np.argmax(np.abs(normal)))]
    return np.asarray(points)[..., keep]


def _clip(subject, clipper):
    """Sutherland-Hodgman clip of a 2D polygon by a convex counter-clockwise polygon."""
    out = [np.asarray(p) for p in subject]
    m = len(clipper)
    for k in range(m):
        a, b = clipper[k], clipper[(k + 1) % m]
        edge = b - a
        inside = lambda p: edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= -EPS_GEOM * np.linalg.norm(edge)
        src, out = out, []
        if not src:
            break
        for i in range(len(src)):
            cur, prev = src[i], src[i - 1]
            ci, pi = inside(cur), inside(prev)
            if ci != pi:
                d = cur - prev
                den = edge[0] * d[1] - edge[1] * d[0]
                if den != 0.0:
                    u = (edge[0] * (a[1] - prev[1]) - edge[1] * (a[0] - prev[0])) / -den
                    out.append(prev + u * d)
            if ci:
                out.append(cur)
    return out


def _ccw(tri2):
    a, b, c = tri2
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return tri2 if cross > 0 else tri2[::-1]


def _poly_area(poly):
    s = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i - 1]
        x1, y1 = poly[i]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def _coplanar_contact(t1, t2, normal, shared):
    p1 = _ccw(_drop_axis(t1, normal))
    p2 = _ccw(_drop_axis(t2, normal))
    poly = _clip(list(p1), list(p2))
    if not poly:
        return False
    if _poly_area(poly) > EPS_GEOM:
        return True
    if shared is None:
        return True
    v = _drop_axis(shared, normal)
    return any(np.linalg.norm(p - v) > EPS_GEOM for p in poly)


def triangles_intersect(t1, t2, shared=None) -> bool:
    """Closed triangle intersection, ignoring contact that is only the point ``shared``."""
    n1, _ = _unit(np.cross(t1[1] - t1[0], t1[2] - t1[0]))
    n2, _ = _unit(np.cross(t2[1] - t2[0], t2[2] - t2[0]))
    d2 = np.array([n1 @ (q - t1[0]) for q in t2])
    d1 = np.array([n2 @ (p - t2[0]) for p in t1])
    d1[np.abs(d1) <= EPS_GEOM] = 0.0
    d2[np.abs(d2) <= EPS_GEOM] = 0.0
    if np.all(d2 > 0) or np.all(d2 < 0) or np.all(d1 > 0) or np.all(d1 < 0):
        return False
    axis, norm = _unit(np.cross(n1, n2))
    if norm <= EPS_GEOM:
        return _coplanar_contact(t1, t2, n1, shared)
    lo1, hi1 = _section(t1, d1, axis)
    lo2, hi2 = _section(t2, d2, axis)
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if lo > hi + EPS_GEOM:
        return False
    if shared is not None:
        tv = axis @ shared
        if abs(lo - tv) <= EPS_GEOM and abs(hi - tv) <= EPS_GEOM:
            return False
    return True


def faces_intersect(fa, fb, share_edge: bool = False, shared_vertex=None) -> bool:
    """Whether two projected quadrilateral faces intersect or overlap.

    Faces sharing an edge never count. When ``shared_vertex`` is given,
    contact confined to that point does not count either.
    """
    if share_edge:
        return False
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    _check_face(fa)
    _check_face(fb)
    sv = None if shared_vertex is None else np.asarray(shared_vertex, dtype=float)
    for ta in _TRIS:
        for tb in _TRIS:
            if triangles_intersect(fa[list(ta)], fb[list(tb)], sv):
                return True
    return False


# -- batch quad/quad test via edges against quads ---------------------------
# points are (x, y, z) tuples so the compiled loops never allocate

@nb.njit(cache=True)
def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


@nb.njit(cache=True)
def _vdot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@nb.njit(cache=True)
def _vcross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


@nb.njit(cache=True)
def _vnorm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


@nb.njit(cache=True)
def _drop(p, ax):
    if ax == 0:
        return (p[1], p[2])
    if ax == 1:
        return (p[0], p[2])
    return (p[0], p[1])


@nb.njit(cache=True)
def _orient2(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


@nb.njit(cache=True)
def _near_seg2(x, u, v, eps):
    dx, dy = v[0] - u[0], v[1] - u[1]
    wx, wy = x[0] - u[0], x[1] - u[1]
    l2 = dx * dx + dy * dy
    s = 0.0 if l2 == 0.0 else min(1.0, max(0.0, (wx * dx + wy * dy) / l2))
    rx, ry = wx - s * dx, wy - s * dy
    return math.sqrt(rx * rx + ry * ry) <= eps


@nb.njit(cache=True)
def _segs2_touch(p, q, a, b, eps):
    o1 = _orient2(p, q, a)
    o2 = _orient2(p, q, b)
    o3 = _orient2(a, b, p)
    o4 = _orient2(a, b, q)
    if ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and \
       ((o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)):
        return True
    return (_near_seg2(a, p, q, eps) or _near_seg2(b, p, q, eps)
            or _near_seg2(p, a, b, eps) or _near_seg2(q, a, b, eps))


@nb.njit(cache=True)
def _in_tri2(x, a, b, c, eps):
    sg = 1.0 if _orient2(a, b, c) > 0 else -1.0
    return (sg * _orient2(a, b, x) >= -eps and sg * _orient2(b, c, x) >= -eps
            and sg * _orient2(c, a, x) >= -eps)


@nb.njit(cache=True)
def _seg_hits_tri(p, q, a, b, c, eps):
    n = _vcross(_sub(b, a), _sub(c, a))
    nn = _vnorm(n)
    n = (n[0] / nn, n[1] / nn, n[2] / nn)
    dp = _vdot(n, _sub(p, a))
    dq = _vdot(n, _sub(q, a))
    if (dp > eps and dq > eps) or (dp < -eps and dq < -eps):
        return False
    if abs(dp) <= eps and abs(dq) <= eps:
        ax = 0
        if abs(n[1]) > abs(n[ax]):
            ax = 1
        if abs(n[2]) > abs(n[ax]):
            ax = 2
        p2, q2 = _drop(p, ax), _drop(q, ax)
        a2, b2, c2 = _drop(a, ax), _drop(b, ax), _drop(c, ax)
        if _in_tri2(p2, a2, b2, c2, eps) or _in_tri2(q2, a2, b2, c2, eps):
            return True
        return (_segs2_touch(p2, q2, a2, b2, eps) or _segs2_touch(p2, q2, b2, c2, eps)
                or _segs2_touch(p2, q2, c2, a2, eps))
    if abs(dp) <= eps:
        x = p
    elif abs(dq) <= eps:
        x = q
    else:
        u = dp / (dp - dq)
        x = (p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1]), p[2] + u * (q[2] - p[2]))
    for e0, e1 in ((a, b), (b, c), (c, a)):
        e = _sub(e1, e0)
        if _vdot(n, _vcross(e, _sub(x, e0))) < -eps * _vnorm(e):
            return False
    return True


@nb.njit(cache=True)
def _seg_hits_quad(p, q, q0, q1, q2, q3, eps):
    return _seg_hits_tri(p, q, q0, q1, q2, eps) or _seg_hits_tri(p, q, q0, q2, q3, eps)


@nb.njit(cache=True)
def _corner(coords, face_idx, f, c):
    i = face_idx[f, c]
    return (coords[i, 0], coords[i, 1], coords[i, 2])


@nb.njit(cache=True)
def _edges_hit(a, b, skip, eps):
    for k in range(4):
        if skip >= 0 and (k == skip or (k + 1) % 4 == skip):
            continue
        if _seg_hits_quad(a[k], a[(k + 1) % 4], b[0], b[1], b[2], b[3], eps):
            return True
    return False


@nb.njit(cache=True)
def quad_pair_code(a, b, sa, sb, eps):
    """0 = disjoint, 1 = intersecting, 2 = coplanar (caller resolves).

    ``a`` and ``b`` are 4-tuples of corner points; ``sa``/``sb`` index the
    shared corner in each, or -1. With a shared corner only the two edges
    away from it are tested, so contact at the corner alone never registers.
    """
    na = _vcross(_sub(a[2], a[0]), _sub(a[3], a[1]))
    nb_ = _vcross(_sub(b[2], b[0]), _sub(b[3], b[1]))
    la, lb = _vnorm(na), _vnorm(nb_)
    na = (na[0] / la, na[1] / la, na[2] / la)
    nb_ = (nb_[0] / lb, nb_[1] / lb, nb_[2] / lb)
    if _vnorm(_vcross(na, nb_)) <= eps:
        off = 0.0
        for k in range(4):
            off = max(off, abs(_vdot(na, _sub(b[k], a[0]))))
        return 2 if off <= eps else 0
    if _edges_hit(a, b, sa, eps) or _edges_hit(b, a, sb, eps):
        return 1
    return 0


@nb.njit(cache=True)
def batch_face_codes(coords, face_idx, pairs, shared, eps):
    out = np.zeros(pairs.shape[0], dtype=np.int8)
    for k in range(pairs.shape[0]):
        i = pairs[k, 0]
        j = pairs[k, 1]
        a = (_corner(coords, face_idx, i, 0), _corner(coords, face_idx, i, 1),
             _corner(coords, face_idx, i, 2), _corner(coords, face_idx, i, 3))
        b = (_corner(coords, face_idx, j, 0), _corner(coords, face_idx, j, 1),
             _corner(coords, face_idx, j, 2), _corner(coords, face_idx, j, 3))
        out[k] = quad_pair_code(a, b, shared[k, 0], shared[k, 1], eps)
    return out


def quad_pair_verdict(fa, fb, sa: int = -1, sb: int = -1) -> int:
    """Run the compiled edge-versus-quad test on one pair of corner arrays."""
    a = tuple(tuple(float(x) for x in p) for p in np.asarray(fa, dtype=float))
    b = tuple(tuple(float(x) for x in p) for p in np.asarray(fb, dtype=float))
    return int(quad_pair_code(a, b, sa, sb, EPS_GEOM))


@nb.njit(cache=True)
def face_min_areas(coords, face_idx):
    """Smaller of the two diagonal-split triangle areas (x2) per face."""
    out = np.empty(face_idx.shape[0])
    for k in range(face_idx.shape[0]):
        q0 = _corner(coords, face_idx, k, 0)
        q1 = _corner(coords, face_idx, k, 1)
        q2 = _corner(coords, face_idx, k, 2)
        q3 = _corner(coords, face_idx, k, 3)
        out[k] = min(_vnorm(_vcross(_sub(q1, q0), _sub(q2, q0))),
                     _vnorm(_vcross(_sub(q2, q0), _sub(q3, q0))))
    return out
