"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import time
from itertools import combinations

import numpy as np
import pytest

from cubesurf.cells import build_complex, cube_boundary, full_skeleton, sorted_cells
from cubesurf.export import build_beam_mesh, read_obj, write_obj, write_stl_binary
from cubesurf.geometry import faces_intersect, segment_clearance
from cubesurf.optimizer import AgentPolicy, Measure, RewardConfig, optimize, reward_r1, reward_r2, reward_r3, reward_r4
from cubesurf.projection import (
    EmbeddingState,
    ProjectionConstants,
    SceneLayout,
    apply_state,
    initial_state,
    rotation_matrix,
)
from cubesurf.surfaces import SurfaceTarget, classify, enumerate_closed_surfaces, face_components, is_closed_surface

from oracles import closed_surface_oracle, connected_oracle, quad_membership_oracle, random_planar_quad, segment_distance_grid


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
        assert ok, detail
    return emit


def test_c01_penteract_skeleton(report):
    t = time.perf_counter()
    counts = [len(full_skeleton(5, k)) for k in range(3)]
    dt = time.perf_counter() - t
    report(1, counts == [32, 80, 80] and dt < 1.0, f"Q^5 cells V/E/F = {counts} in {dt:.3f}s")


def test_c02_cube_boundaries(report):
    t = time.perf_counter()
    cubes = sorted_cells(full_skeleton(5, 3))
    good = 0
    for c in cubes:
        cls = classify(cube_boundary(c))
        good += (cls.connected and cls.closed and cls.orientable and cls.euler_characteristic == 2
                 and cls.genus == 0)
    dt = time.perf_counter() - t
    report(2, len(cubes) == 40 and good == 40 and dt < 1.0,
           f"{good}/{len(cubes)} 3-cube boundaries are spheres, {dt:.3f}s")


def test_c03_q3_census(report):
    t = time.perf_counter()
    faces = sorted_cells(full_skeleton(3, 2))
    ours, oracle = [], []
    for k in range(len(faces) + 1):
        for sub in combinations(faces, k):
            cx = build_complex(sub)
            if sub and is_closed_surface(cx)[0] and len(face_components(cx)) == 1:
                ours.append(set(sub))
            if closed_surface_oracle(sub) and connected_oracle(sub):
                oracle.append(set(sub))
    found = enumerate_closed_surfaces(3, 6)
    dt = time.perf_counter() - t
    ok = (len(ours) == 1 and ours == oracle and ours[0] == set(faces)
          and len(found) == 1 and set(found[0].faces) == set(faces) and dt < 1.0)
    report(3, ok, f"{len(ours)} closed surface(s) among 64 subsets (oracle {len(oracle)}), {dt:.3f}s")


def test_c04_tesseract_bound(report):
    t = time.perf_counter()
    found = enumerate_closed_surfaces(4, 24)
    classes = [classify(cx) for cx in found]
    tori = sum(c.orientable and c.euler_characteristic == 0 for c in classes)
    high = sum((c.genus or 0) >= 2 for c in classes)
    nonor = sum(not c.orientable for c in classes)
    dt = time.perf_counter() - t
    report(4, tori >= 1 and high == 0,
           f"{len(found)} types in Q^4: {tori} torus, {high} of genus >= 2, {nonor} non-orientable, {dt:.1f}s")


def test_c05_q5_genus_bounds(report):
    t = time.perf_counter()
    worst_g = worst_k = 0
    n = 10_000
    for seed in range(n):
        cls = classify(enumerate_closed_surfaces(5, 80, mode="randomized", seed=seed)[0])
        assert cls.connected and cls.closed
        if cls.orientable:
            worst_g = max(worst_g, cls.genus)
        else:
            worst_k = max(worst_k, cls.demigenus)
    dt = time.perf_counter() - t
    report(5, worst_g <= 5 and worst_k <= 8,
           f"{n} seeds: max genus {worst_g}, max demigenus {worst_k}, {dt:.0f}s")


def test_c06_geometry_kernel(report):
    rng = np.random.default_rng(606)
    faces_intersect(random_planar_quad(rng, np.zeros(3)), random_planar_quad(rng, np.zeros(3)))
    t = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        a0, a1, b0, b1 = rng.uniform(-1, 1, (4, 3))
        worst = max(worst, abs(segment_clearance(a0, a1, b0, b1)[0] - segment_distance_grid(a0, a1, b0, b1)))
    agree = total = 0
    while total < 500:
        a = random_planar_quad(rng, np.zeros(3))
        b = random_planar_quad(rng, rng.uniform(-0.8, 0.8, 3))
        verdict = quad_membership_oracle(a, b)
        if verdict is None:
            continue
        total += 1
        agree += faces_intersect(a, b) == verdict
    dt = time.perf_counter() - t
    report(6, worst < 1e-4 and agree == total and dt < 30,
           f"clearance max error {worst:.2e}; quads {agree}/{total} agree; {dt:.1f}s")


def test_c07_rotation_projection(report, rp2):
    rng = np.random.default_rng(707)
    lay = SceneLayout.of(rp2)
    k = ProjectionConstants()
    lay.project(initial_state(rng), k)
    t = time.perf_counter()
    orth = iso = plan = 0.0
    for _ in range(1000):
        s = initial_state(rng, k)
        s = EmbeddingState(s.d5 + rng.uniform(0, 5), s.d4 + rng.uniform(0, 5), s.phi)
        m = rotation_matrix(s.phi)
        orth = max(orth, np.abs(m @ m.T - np.eye(5)).max())
        x = rng.normal(size=5)
        iso = max(iso, abs(np.linalg.norm(m @ x) - np.linalg.norm(x)))
        c = lay.project(s, k).coords
        p = c[lay.face_idx]
        u, v, w = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]
        vol = np.abs(np.einsum("ij,ij->i", np.cross(u, v), w))
        plan = max(plan, (vol / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
                                 * np.linalg.norm(w, axis=1))).max())
    dt = time.perf_counter() - t
    report(7, orth < 1e-9 and iso < 1e-9 and plan < 1e-7 and dt < 10,
           f"orthogonality {orth:.1e}, isometry {iso:.1e}, face planarity {plan:.1e}, {dt:.1f}s")


def test_c08_verbatim_rewards(report):
    from fractions import Fraction as F
    v = RewardConfig(sign_mode="verbatim")
    v3 = RewardConfig(sigma_prop=3, sign_mode="verbatim")
    m = lambda s, o=0, total=100.0: Measure(s, o, total)
    cases = [
        (reward_r1(m(4), m(0), v), F(10)),
        (reward_r1(m(10), m(12), v), F(2, 10)),
        (reward_r1(m(9), m(3), v3), F(10)),
        (reward_r1(m(7), m(5), v3), F(-2, 7)),
        (reward_r2(m(6, 0), m(3, 2), v3), F(10)),
        (reward_r2(m(6, 19), m(2, 15), v3), F(-4, 19)),
        (reward_r2(m(6, 19), m(4, 15), v3), F(0)),
        (reward_r3(100.0, 90.0, "verbatim"), F(1, 10)),
        (reward_r3(80.0, 80.0, "verbatim"), F(0)),
        (reward_r4(90.0, [100.0, 95.0, 97.0], "verbatim"), F(1)),
        (reward_r4(95.0, [100.0, 95.0], "verbatim"), F(0)),
        (reward_r4(90.0, [], "verbatim"), F(0)),
    ]
    worst = max(abs(got - float(want)) for got, want in cases)
    report(8, worst <= 1e-12, f"{len(cases)} substitution examples, max deviation {worst:.1e}")


def _optimize_runs(cx, sigma_prop, budget):
    results = []
    for seed in range(5):
        res = optimize(cx, policy=AgentPolicy(seed=seed), cfg=RewardConfig(sigma_prop=sigma_prop),
                       episodes=budget // 500, steps_per_episode=500, max_steps=budget)
        results.append((res.best_metrics.sigma, res.best_metrics.overlaps, res.steps))
    return results


def test_c09_torus_reaches_zero(report):
    torus = enumerate_closed_surfaces(4, 24, target=SurfaceTarget.parse("torus"))[0]
    runs = _optimize_runs(torus, 0, 20_000)
    wins = sum(s == 0 and o == 0 for s, o, _ in runs)
    report(9, wins >= 1, f"torus F={len(torus.faces)}: {wins}/5 seeds reach sigma=0, o_w=0; (sigma, o_w, steps) {runs}")


def test_c10_projective_plane(report):
    rp2 = enumerate_closed_surfaces(5, 20, mode="randomized", seed=0,
                                    target=SurfaceTarget.parse("rp2"), max_nodes=10 ** 6)[0]
    runs = _optimize_runs(rp2, 3, 50_000)
    wins = sum(s <= 3 and o == 0 for s, o, _ in runs)
    report(10, wins >= 1,
           f"projective plane F={len(rp2.faces)}: {wins}/5 seeds reach sigma<=3, o_w=0; (sigma, o_w, steps) {runs}")


def test_c11_export_integrity(report, cube3, torus, rp2, tmp_path):
    sizes_ok = True
    sc = apply_state(cube3, EmbeddingState(3.0, 20.0))
    wire = build_beam_mesh(sc, cube3, 0.01)
    meshes = [wire]
    rng = np.random.default_rng(11)
    for cx in (torus, rp2):
        s = apply_state(cx, initial_state(rng))
        meshes.append(build_beam_mesh(s, cx, 0.005, panels=True))
        meshes.append(build_beam_mesh(s, cx, 0.005, profile="octagon"))
    for i, mesh in enumerate(meshes):
        path = tmp_path / f"m{i}.stl"
        write_stl_binary(mesh, path)
        sizes_ok &= path.stat().st_size == 84 + 50 * len(mesh)
    obj_ok = True
    for cx in (cube3, torus, rp2):
        s = apply_state(cx, initial_state(rng))
        write_obj(s, tmp_path / "s.obj")
        verts, faces, lines = read_obj(tmp_path / "s.obj")
        obj_ok &= np.array_equal(verts, s.coords) and faces == (s.face_idx + 1).tolist()
    report(11, sizes_ok and len(wire) == 144 and obj_ok,
           f"{len(meshes)} STL files sized 84+50n: {sizes_ok}; cube wireframe {len(wire)} triangles; OBJ exact: {obj_ok}")
