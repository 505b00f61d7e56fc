"""Command-line entry point: check, classify, search, metrics, optimize, export.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .cells import read_complex
from .errors import CubeSurfError
from .export import PROFILES, build_beam_mesh, write_obj, write_stl_binary
from .metrics import compute_metrics, default_radius
from .optimizer import AGENTS, SIGN_MODES, AgentPolicy, RewardConfig, optimize
from .projection import EmbeddingState, ProjectionConstants, SceneLayout
from .surfaces import (
    SurfaceTarget,
    canonical_signature,
    classify,
    enumerate_closed_surfaces,
    is_closed_surface,
    signature_hash,
    write_search_results,
)

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("cubesurf")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad arguments are validation errors (exit 1); exit 2 is reserved for I/O
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _load_state(source: str) -> EmbeddingState:
    """A state is either a path to a state file or the record itself."""
    text = source.strip()
    if text.startswith("{") or "phi=" in text:
        return EmbeddingState.parse(text)
    return EmbeddingState.parse(Path(source).read_text(encoding="utf-8"))


def _constants(args) -> ProjectionConstants:
    return ProjectionConstants(args.c5, args.c4, args.screen_from)


def _positive(kind):
    def conv(text):
        val = kind(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    conv.__name__ = f"positive {kind.__name__}"
    return conv


def _nonneg_int(text):
    val = int(text)
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return val


def cmd_check(args) -> int:
    cx = read_complex(args.complex)
    ok, report = is_closed_surface(cx)
    if ok:
        cls = classify(cx)
        _emit(args, {"closed": True, **cls.as_dict()}, cls.summary())
        return EXIT_OK
    _emit(args, {"closed": False, "violations": report.lines()},
          "\n".join(["closed surface: no"] + report.lines()))
    print(f"{args.complex}: not a closed surface ({len(report.lines())} violations)", file=sys.stderr)
    return EXIT_INVALID


def cmd_classify(args) -> int:
    cx = read_complex(args.complex)
    cls = classify(cx)
    sig = signature_hash(canonical_signature(cx))
    payload = {**cls.as_dict(), "name": cls.name, "faces": len(cx.faces),
               "edges": len(cx.edges), "vertices": len(cx.vertices), "signature": sig}
    text = f"{cls.summary()}\ntype: {cls.name}\nV={len(cx.vertices)} E={len(cx.edges)} F={len(cx.faces)}\nsignature: {sig}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_search(args) -> int:
    target = SurfaceTarget.parse(args.target) if args.target else None
    mode = "exhaustive" if (args.exhaustive or args.census) else "randomized"
    found = enumerate_closed_surfaces(args.dim, args.max_faces, mode=mode, seed=args.seed,
                                      target=target, count=args.count, max_nodes=args.max_nodes,
                                      allow_large=args.census)
    rows = []
    for cx in found:
        cls = classify(cx)
        rows.append({"faces": len(cx.faces), **cls.as_dict(), "name": cls.name,
                     "signature": signature_hash(canonical_signature(cx)),
                     "cells": list(cx.faces)})
    if args.out:
        write_search_results(found, args.out)
    text = "\n".join(f"{r['signature']}  F={r['faces']:<3d} {r['name']}" for r in rows)
    _emit(args, {"mode": mode, "dim": args.dim, "surfaces": rows}, text)
    return EXIT_OK


def cmd_metrics(args) -> int:
    cx = read_complex(args.complex)
    s = _load_state(args.state)
    scene = SceneLayout.of(cx).project(s, _constants(args))
    r = args.r if args.r is not None else default_radius(scene)
    rep = compute_metrics(scene, cx, r, args.count_adjacent_edges)
    lines = [f"sigma={rep.sigma} overlaps={rep.overlaps} L={rep.total_clearance!r} r={r!r}"]
    lines += [f"  faces {a} {b}" for a, b in rep.face_pairs]
    lines += [f"  edges {a} {b}" for a, b in rep.edge_pairs]
    _emit(args, rep.as_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_optimize(args) -> int:
    cx = read_complex(args.complex)
    s0 = _load_state(args.s0) if args.s0 else None
    cfg = RewardConfig(sigma_prop=args.sigma_prop, r=args.r, gamma=args.gamma,
                       sign_mode=args.sign_mode, count_adjacent_edges=args.count_adjacent_edges)
    policy = AgentPolicy(args.agent, args.exploration, args.learning_rate, args.seed)
    episodes = args.episodes
    if args.budget is not None:
        episodes = max(episodes, math.ceil(args.budget / args.steps_per_episode))
    res = optimize(cx, s0, policy, cfg, episodes=episodes, steps_per_episode=args.steps_per_episode,
                   constants=_constants(args), max_steps=args.budget)
    if args.log:
        res.write_log(args.log)
    if args.best:
        Path(args.best).write_text(res.best_state.to_text() + "\n", encoding="utf-8")
    m = res.best_metrics
    payload = {"best_state": json.loads(res.best_state.to_json()), "metrics": m.as_dict(),
               "steps": res.steps, "episodes": res.episodes, "r": res.r}
    text = (f"best: sigma={m.sigma} overlaps={m.overlaps} L={m.total_clearance!r}\n"
            f"steps={res.steps} episodes={res.episodes} r={res.r!r}\n{res.best_state.to_text()}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_export(args) -> int:
    cx = read_complex(args.complex)
    s = _load_state(args.state)
    scene = SceneLayout.of(cx).project(s, _constants(args))
    out = Path(args.output)
    suffix = out.suffix.lower()
    if suffix not in (".stl", ".obj"):
        raise UsageError(f"output must end in .stl or .obj, got {out.name}")
    r = args.r if args.r is not None else default_radius(scene)
    if suffix == ".obj" and args.scene:
        write_obj(scene, out)
        payload = {"path": str(out), "format": "obj", "mode": "scene",
                   "vertices": len(scene.coords), "faces": len(cx.faces), "edges": len(cx.edges)}
    else:
        mesh = build_beam_mesh(scene, cx, r, panels=args.panels, profile=args.profile)
        if suffix == ".stl":
            size = write_stl_binary(mesh, out)
            payload = {"path": str(out), "format": "stl", "triangles": len(mesh), "bytes": size, "r": r}
        else:
            write_obj(mesh, out)
            payload = {"path": str(out), "format": "obj", "mode": "mesh", "triangles": len(mesh), "r": r}
    _emit(args, payload, " ".join(f"{k}={v}" for k, v in payload.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    common.add_argument("-v", "--verbose", action="store_true")

    proj = _Parser(add_help=False)
    proj.add_argument("--c5", type=_positive(float), default=1.0)
    proj.add_argument("--c4", type=_positive(float), default=10.0)
    proj.add_argument("--screen-from", choices=("camera", "origin"), default="camera")
    proj.add_argument("-r", "--radius", dest="r", type=_positive(float), default=None,
                      help="beam radius (default: 2%% of the scene's bounding-box diagonal)")
    proj.add_argument("--count-adjacent-edges", action="store_true",
                      help="also count overlaps between edges sharing a vertex")

    p = _Parser(prog="cubesurf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("check", parents=[common], help="closed-surface report")
    sp.add_argument("complex")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("classify", parents=[common], help="Euler characteristic, orientability, genus")
    sp.add_argument("complex")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("search", parents=[common], help="find closed surfaces in Q^n")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--max-faces", type=_positive(int), required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--census", action="store_true",
                   help="exhaustive even above Q^4; in Q^5 this runs for a very long time")
    sp.add_argument("--target", help="sphere, torus, rp2, klein, genus=G, demigenus=K, chi=X, ...")
    sp.add_argument("--count", type=_positive(int), default=1)
    sp.add_argument("--max-nodes", type=_positive(int), default=200_000)
    sp.add_argument("--out", help="directory for surface files and manifest.tsv")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("metrics", parents=[common, proj], help="intersections, overlaps, clearance")
    sp.add_argument("complex")
    sp.add_argument("--state", required=True, help="state file or inline 'd5=.. d4=.. phi=..'")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("optimize", parents=[common, proj], help="search for a cleaner projection")
    sp.add_argument("complex")
    sp.add_argument("--s0", help="initial state (default: sampled from the seed)")
    sp.add_argument("--sigma-prop", type=_nonneg_int, default=0)
    sp.add_argument("--agent", choices=AGENTS, default="greedy_lookahead")
    sp.add_argument("--sign-mode", choices=SIGN_MODES, default="corrected")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=_positive(int), default=None, help="total step budget")
    sp.add_argument("--episodes", type=_positive(int), default=64)
    sp.add_argument("--steps-per-episode", type=_positive(int), default=512)
    sp.add_argument("--gamma", type=float, default=0.9)
    sp.add_argument("--exploration", type=float, default=0.1)
    sp.add_argument("--learning-rate", type=_positive(float), default=0.05)
    sp.add_argument("--log", help="write the step log as JSON lines")
    sp.add_argument("--best", help="write the best state record")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("export", parents=[common, proj], help="write STL or OBJ")
    sp.add_argument("complex")
    sp.add_argument("--state", required=True)
    sp.add_argument("--panels", action="store_true", help="add thin face panels")
    sp.add_argument("--profile", choices=PROFILES, default="square")
    sp.add_argument("--scene", action="store_true", help="OBJ only: write projected quads and lines")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_export)
    return p


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # config values become defaults, so flags given on the command line still win
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
        if not isinstance(conf, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        conf = {k.replace("-", "_"): v for k, v in conf.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(conf) - known)
        if unknown:
            raise UsageError(f"{args.config}: unknown option(s) {', '.join(unknown)}")
        sub.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CubeSurfError, ValueError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
