"""Markov decision process over embedding states, its rewards, and two agents.

States are 12-vectors (d5, d4, ten plane angles). Each of the 24 actions
nudges one coordinate by ±delta (distances) or ±epsilon (angles) and the
transition is deterministic. Rewards follow the intersection/overlap/clearance
terms R1..R4; ``sign_mode="verbatim"`` keeps the printed difference quotients,
``"corrected"`` flips them so that reducing counts is rewarded.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .cells import CubicalComplex
from .errors import CubeSurfError, InvalidInitialState, ZeroClearanceTotal
from .metrics import MetricsReport, compute_metrics, count_metrics, default_radius
from .projection import (
    EmbeddingState,
    ProjectionConstants,
    WORLD_RADIUS,
    SceneLayout,
    initial_state,
    state_guard_violation,
    wrap_state,
)

log = logging.getLogger(__name__)

DELTA = 0.5
EPSILON = math.pi / 180
PENALTY = -1.0
SIGN_MODES = ("verbatim", "corrected")
AGENTS = ("greedy_lookahead", "q_learning")


@dataclass(frozen=True)
class ActionSet:
    """±delta on d5, d4 followed by ±epsilon on each of the ten angles."""

    delta: float = DELTA
    epsilon: float = EPSILON

    @property
    def vectors(self) -> np.ndarray:
        out = np.zeros((24, 12))
        for i in range(12):
            step = self.delta if i < 2 else self.epsilon
            out[2 * i, i] = step
            out[2 * i + 1, i] = -step
        return out

    def __len__(self) -> int:
        return 24

    @staticmethod
    def describe(index: int) -> str:
        coord, sign = divmod(index, 2)
        name = ("d5", "d4")[coord] if coord < 2 else f"phi{coord - 1}"
        return ("+" if sign == 0 else "-") + name


@dataclass(frozen=True)
class RewardConfig:
    sigma_prop: int = 0
    r: float | None = None
    gamma: float = 0.9
    sign_mode: str = "corrected"
    weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    count_adjacent_edges: bool = False

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.sigma_prop < 0:
            raise ValueError("sigma_prop must be non-negative")
        if self.sign_mode not in SIGN_MODES:
            raise ValueError(f"sign_mode must be one of {SIGN_MODES}")
        if len(self.weights) != 4:
            raise ValueError("weights needs one entry per reward term")
        if self.r is not None and not self.r > 0:
            raise ValueError("r must be positive")


class Measure(NamedTuple):
    sigma: int
    overlaps: int
    total_clearance: float


def reward_r1(before, after, cfg: RewardConfig) -> float:
    s0, s1, prop = before.sigma, after.sigma, cfg.sigma_prop
    if s1 <= prop:
        return 10.0 * (1 - s1 + prop)
    diff = (s1 - s0) if cfg.sign_mode == "verbatim" else (s0 - s1)
    return diff / max(s0, 1)


def reward_r2(before, after, cfg: RewardConfig) -> float:
    if after.sigma > cfg.sigma_prop:
        return 0.0
    o0, o1 = before.overlaps, after.overlaps
    if o0 == 0:
        return 10.0 * (1 - after.sigma + cfg.sigma_prop)
    diff = (o1 - o0) if cfg.sign_mode == "verbatim" else (o0 - o1)
    return diff / o0


def reward_r3(l_before: float, l_after: float, sign_mode: str = "corrected") -> float:
    if l_before <= 1e-12:
        raise ZeroClearanceTotal("total clearance of the current state is zero")
    diff = (l_before - l_after) if sign_mode == "verbatim" else (l_after - l_before)
    return diff / l_before


def reward_r4(l_current: float, history, sign_mode: str = "corrected") -> float:
    """1 for a new running minimum (verbatim) or maximum (corrected) of L, else 0."""
    if len(history) == 0:
        return 0.0
    if sign_mode == "verbatim":
        return 1.0 if l_current < min(history) else 0.0
    return 1.0 if l_current > max(history) else 0.0


@dataclass(frozen=True)
class RewardBreakdown:
    r1: float
    r2: float
    r3: float
    r4: float
    penalty: float
    total: float


def combine_rewards(components, weights=(1.0, 1.0, 1.0, 1.0), penalty: float = 0.0) -> float:
    return float(sum(w * c for w, c in zip(weights, components)) + penalty)


def total_reward(before, after, l_history, cfg: RewardConfig) -> RewardBreakdown:
    comps = (
        reward_r1(before, after, cfg),
        reward_r2(before, after, cfg),
        reward_r3(before.total_clearance, after.total_clearance, cfg.sign_mode),
        reward_r4(after.total_clearance, l_history, cfg.sign_mode),
    )
    weighted = tuple(w * c for w, c in zip(cfg.weights, comps))
    return RewardBreakdown(*weighted, penalty=0.0, total=combine_rewards(comps, cfg.weights))


_REJECTED = RewardBreakdown(0.0, 0.0, 0.0, 0.0, PENALTY, PENALTY)


@dataclass
class StepResult:
    state: EmbeddingState
    reward: float
    metrics: Measure
    breakdown: RewardBreakdown
    rejected: bool


class MdpEnv:
    """Deterministic environment: s' = wrap(s + a), rewards from metrics at s and s'."""

    def __init__(self, cx: CubicalComplex, s0: EmbeddingState,
                 cfg: RewardConfig | None = None,
                 constants: ProjectionConstants | None = None,
                 actions: ActionSet | None = None):
        self.cx = cx
        self.cfg = cfg or RewardConfig()
        self.constants = constants or ProjectionConstants()
        self.actions = actions or ActionSet()
        self.layout = SceneLayout.of(cx)
        self._vectors = self.actions.vectors
        self._cache: dict[tuple, Measure | None] = {}
        s0 = wrap_state(s0)
        why = state_guard_violation(s0, self.constants)
        if why:
            raise InvalidInitialState(why)
        self.reset(s0)

    def reset(self, s0: EmbeddingState) -> None:
        s0 = wrap_state(s0)
        m = self.measure(s0)
        if m is None:
            raise InvalidInitialState("initial state violates the camera guard or degenerates a cell")
        self.state = s0
        self.metrics = m
        self.l_history: list[float] = [m.total_clearance]
        self.history: list[tuple[EmbeddingState, int, float, Measure]] = []

    def measure(self, s: EmbeddingState) -> Measure | None:
        key = (s.d5, s.d4) + s.phi
        if key in self._cache:
            return self._cache[key]
        try:
            scene = self.layout.project(s, self.constants)
            m = Measure(*count_metrics(scene, self.cx, self.radius(scene), self.cfg.count_adjacent_edges))
        except CubeSurfError:
            m = None
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = m
        return m

    def radius(self, scene) -> float:
        """Configured beam radius, or a fixed fraction of this scene's bounding-box diagonal."""
        return self.cfg.r if self.cfg.r is not None else default_radius(scene)

    def report(self, s: EmbeddingState) -> MetricsReport:
        scene = self.layout.project(s, self.constants)
        return compute_metrics(scene, self.cx, self.radius(scene), self.cfg.count_adjacent_edges)

    def successor(self, action: int) -> EmbeddingState:
        return wrap_state(EmbeddingState.from_vector(self.state.as_vector() + self._vectors[action]))

    def preview(self, action: int) -> tuple[EmbeddingState, RewardBreakdown, Measure | None]:
        nxt = self.successor(action)
        m = self.measure(nxt)
        if m is None:
            return nxt, _REJECTED, None
        try:
            rb = total_reward(self.metrics, m, self.l_history, self.cfg)
        except ZeroClearanceTotal:
            return nxt, _REJECTED, None
        return nxt, rb, m

    def step(self, action: int) -> StepResult:
        nxt, rb, m = self.preview(action)
        rejected = m is None
        if not rejected:
            self.state = nxt
            self.metrics = m
            self.l_history.append(m.total_clearance)
        self.history.append((self.state, action, rb.total, self.metrics))
        return StepResult(self.state, rb.total, self.metrics, rb, rejected)


@dataclass(frozen=True)
class AgentPolicy:
    kind: str = "greedy_lookahead"
    exploration: float = 0.1
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.kind not in AGENTS:
            raise ValueError(f"agent kind must be one of {AGENTS}")
        if not 0.0 <= self.exploration <= 1.0:
            raise ValueError("exploration must lie in [0, 1]")


def state_features(s: EmbeddingState, constants: ProjectionConstants) -> np.ndarray:
    """Bias, distances relative to their default values, sin/cos of each angle."""
    d5_ref = constants.c5 + WORLD_RADIUS + 1.0
    d4_ref = constants.c4 / 2.0 + 2.0 * WORLD_RADIUS
    phi = np.asarray(s.phi)
    return np.concatenate((
        [1.0, (s.d5 - d5_ref) / 10.0, (s.d4 - d4_ref) / 10.0],
        np.sin(phi),
        np.cos(phi),
    ))


@dataclass
class OptimizeResult:
    best_state: EmbeddingState
    best_metrics: MetricsReport
    log: list[dict] = field(repr=False)
    steps: int
    episodes: int
    r: float

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec) + "\n")


def _better(a: Measure, b: Measure | None, sign_mode: str) -> bool:
    if b is None:
        return True
    la = -a.total_clearance if sign_mode == "corrected" else a.total_clearance
    lb = -b.total_clearance if sign_mode == "corrected" else b.total_clearance
    return (a.sigma, a.overlaps, la) < (b.sigma, b.overlaps, lb)


def optimize(
    cx: CubicalComplex,
    s0: EmbeddingState | None = None,
    policy: AgentPolicy | None = None,
    cfg: RewardConfig | None = None,
    episodes: int = 64,
    steps_per_episode: int = 512,
    constants: ProjectionConstants | None = None,
    on_step: Callable[[dict], None] | None = None,
    max_steps: int | None = None,
) -> OptimizeResult:
    """Run the configured agent and return the best state seen.

    Episode 0 starts at ``s0`` (sampled if omitted); later episodes restart
    from fresh samples of the initial-state distribution. "Best" orders by
    fewer intersections, then fewer overlaps, then clearance (larger in
    corrected mode, smaller in verbatim mode). Stops early once
    sigma <= sigma_prop with no overlaps, or after ``max_steps`` total steps.
    """
    policy = policy or AgentPolicy()
    cfg = cfg or RewardConfig()
    constants = constants or ProjectionConstants()
    rng = np.random.default_rng(policy.seed)
    if s0 is None:
        s0 = initial_state(rng, constants)
    env = MdpEnv(cx, s0, cfg, constants)
    n_actions = len(env.actions)

    weights = None
    if policy.kind == "q_learning":
        weights = np.zeros((n_actions, len(state_features(s0, constants))))

    best_state, best_m = env.state, env.metrics
    records: list[dict] = []
    t = 0
    done = False
    ep = 0
    for ep in range(episodes):
        if ep > 0:
            try:
                env.reset(initial_state(rng, constants))
            except InvalidInitialState:
                continue
        if _better(env.metrics, best_m, cfg.sign_mode):
            best_state, best_m = env.state, env.metrics
        if best_m.sigma <= cfg.sigma_prop and best_m.overlaps == 0:
            done = True
            break
        feats = state_features(env.state, constants) if weights is not None else None
        for _ in range(steps_per_episode):
            explore = rng.random() < policy.exploration
            if weights is None:
                if explore:
                    a = int(rng.integers(n_actions))
                else:
                    rewards = [env.preview(i)[1].total for i in range(n_actions)]
                    a = int(np.argmax(rewards))
            else:
                a = int(rng.integers(n_actions)) if explore else int(np.argmax(weights @ feats))
            res = env.step(a)
            if weights is not None:
                nf = state_features(res.state, constants)
                target = res.reward + cfg.gamma * float(np.max(weights @ nf))
                weights[a] += policy.learning_rate * (target - float(weights[a] @ feats)) * feats
                feats = nf
            rb = res.breakdown
            rec = {
                "t": t, "episode": ep, "action_index": a,
                "state": [res.state.d5, res.state.d4, *res.state.phi],
                "sigma": res.metrics.sigma, "overlaps": res.metrics.overlaps,
                "L": res.metrics.total_clearance,
                "r1": rb.r1, "r2": rb.r2, "r3": rb.r3, "r4": rb.r4,
                "penalty": rb.penalty, "reward": rb.total,
            }
            records.append(rec)
            if on_step is not None:
                on_step(rec)
            t += 1
            if not res.rejected and _better(res.metrics, best_m, cfg.sign_mode):
                best_state, best_m = res.state, res.metrics
                log.debug("t=%d new best sigma=%d overlaps=%d", t, best_m.sigma, best_m.overlaps)
            if best_m.sigma <= cfg.sigma_prop and best_m.overlaps == 0:
                done = True
                break
            if max_steps is not None and t >= max_steps:
                done = True
                break
        if done:
            break
    r = env.radius(env.layout.project(best_state, constants))
    return OptimizeResult(best_state, env.report(best_state), records, t, ep + 1, r)
