import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubesurf.errors import InvalidInitialState, ZeroClearanceTotal
from cubesurf.optimizer import (
    ActionSet,
    AgentPolicy,
    Measure,
    MdpEnv,
    RewardConfig,
    combine_rewards,
    optimize,
    reward_r1,
    reward_r2,
    reward_r3,
    reward_r4,
    total_reward,
)
from cubesurf.projection import TWO_PI, EmbeddingState

VERB = RewardConfig(sign_mode="verbatim")
CORR = RewardConfig(sign_mode="corrected")


def m(sigma=0, overlaps=0, total=100.0):
    return Measure(sigma, overlaps, total)


def test_action_set_layout():
    a = ActionSet().vectors
    assert a.shape == (24, 12)
    assert np.count_nonzero(a, axis=1).tolist() == [1] * 24
    assert np.all(np.nonzero(a[:4])[1] < 2) and np.all(np.nonzero(a[4:])[1] >= 2)
    assert a[0, 0] == 0.5 and a[1, 0] == -0.5 and a[4, 2] == pytest.approx(math.pi / 180)
    assert sorted(np.nonzero(a[4:])[1].tolist()) == sorted(list(range(2, 12)) * 2)
    assert ActionSet.describe(0) == "+d5" and ActionSet.describe(5) == "-phi1"


def test_r1_examples():
    assert reward_r1(m(5), m(0), RewardConfig(sigma_prop=0)) == 10
    assert reward_r1(m(10), m(12), VERB) == pytest.approx(0.2, abs=1e-12)
    assert reward_r1(m(10), m(12), CORR) == pytest.approx(-0.2, abs=1e-12)
    # guarded division when the old count was zero
    assert reward_r1(m(0), m(2), CORR) == -2


def test_r2_examples():
    assert reward_r2(m(5, 0), m(3, 4), RewardConfig(sigma_prop=3)) == 10
    assert reward_r2(m(5, 19), m(0, 15), CORR) == pytest.approx(4 / 19, abs=1e-12)
    assert reward_r2(m(5, 19), m(0, 15), VERB) == pytest.approx(-4 / 19, abs=1e-12)
    assert reward_r2(m(5, 3), m(4, 0), RewardConfig(sigma_prop=3)) == 0


def test_r3_r4_examples():
    assert reward_r3(100, 90, "verbatim") == pytest.approx(0.1, abs=1e-12)
    assert reward_r3(100, 90, "corrected") == pytest.approx(-0.1, abs=1e-12)
    assert reward_r3(100, 100, "verbatim") == reward_r3(100, 100, "corrected") == 0
    with pytest.raises(ZeroClearanceTotal):
        reward_r3(0.0, 1.0)
    assert reward_r4(90, [100, 95, 97], "verbatim") == 1
    assert reward_r4(95, [100, 95], "verbatim") == 0
    assert reward_r4(90, [], "verbatim") == 0
    assert reward_r4(101, [100, 95], "corrected") == 1
    assert reward_r4(100, [100, 95], "corrected") == 0


def test_combination():
    assert combine_rewards((0, 0, 0, 0)) == 0
    assert combine_rewards((10, 10, 0.1, 1)) == pytest.approx(21.1, abs=1e-12)
    assert combine_rewards((10, 10, 0.1, 1), (1, 1, 0, 0)) == 20
    rb = total_reward(m(3, 0, 100.0), m(0, 0, 90.0), [100.0], VERB)
    assert (rb.r1, rb.r2, rb.r4) == (10, 10, 1)
    assert rb.r3 == pytest.approx(0.1) and rb.total == pytest.approx(21.1, abs=1e-12)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 10))
def test_corrected_rewards_never_punish_progress(s0, s1, o0, o1, prop):
    if not (s1 < s0 and o1 <= o0):
        return
    cfg = RewardConfig(sigma_prop=prop)
    assert reward_r1(m(s0, o0), m(s1, o1), cfg) + reward_r2(m(s0, o0), m(s1, o1), cfg) >= 0


@given(st.integers(0, 30), st.integers(0, 30), st.integers(1, 30), st.integers(0, 30), st.integers(0, 5))
def test_verbatim_is_exact_rational(s0, s1, o0, o1, prop):
    cfg = RewardConfig(sigma_prop=prop, sign_mode="verbatim")
    want1 = 10 * (1 - s1 + prop) if s1 <= prop else Fraction(s1 - s0, max(s0, 1))
    assert abs(reward_r1(m(s0, o0), m(s1, o1), cfg) - float(want1)) <= 1e-12
    want2 = 0 if s1 > prop else Fraction(o1 - o0, o0)
    assert abs(reward_r2(m(s0, o0), m(s1, o1), cfg) - float(want2)) <= 1e-12


def test_step_transitions(torus):
    s0 = EmbeddingState(3.0, 20.0, (0.0,) * 10)
    env = MdpEnv(torus, s0)
    res = env.step(0)
    assert not res.rejected
    assert (res.state.d5, res.state.d4, res.state.phi) == (3.5, 20.0, (0.0,) * 10)

    eps = math.pi / 180
    env = MdpEnv(torus, EmbeddingState(3.0, 20.0, (TWO_PI - eps / 2,) + (0.0,) * 9))
    res = env.step(4)
    assert 0 <= res.state.phi[0] < TWO_PI and res.state.phi[0] == pytest.approx(eps / 2)

    edge = EmbeddingState(1.0 + math.sqrt(5) / 2 + 0.1 + 0.2, 20.0)
    env = MdpEnv(torus, edge)
    res = env.step(1)
    assert res.rejected and res.reward == -1 and env.state == edge
    assert len(env.history) == 1


def test_invalid_start(torus):
    with pytest.raises(InvalidInitialState):
        MdpEnv(torus, EmbeddingState(1.0, 20.0))


def test_preview_is_pure(torus):
    env = MdpEnv(torus, EmbeddingState(3.0, 20.0, tuple(0.3 * i for i in range(10))))
    before = env.state
    a = [env.preview(i)[1].total for i in range(24)]
    b = [env.preview(i)[1].total for i in range(24)]
    assert a == b and env.state == before and env.history == []


def test_optimize_cube_reaches_zero(cube3):
    res = optimize(cube3, policy=AgentPolicy(seed=1), episodes=2, steps_per_episode=50)
    assert (res.best_metrics.sigma, res.best_metrics.overlaps) == (0, 0)


def test_optimize_log_and_determinism(torus, tmp_path):
    kw = dict(policy=AgentPolicy(seed=3), episodes=2, steps_per_episode=60, cfg=RewardConfig(sigma_prop=0))
    a = optimize(torus, **kw)
    b = optimize(torus, **kw)
    assert a.log == b.log and a.best_state == b.best_state
    for rec in a.log:
        parts = rec["r1"] + rec["r2"] + rec["r3"] + rec["r4"] + rec["penalty"]
        assert abs(parts - rec["reward"]) <= 1e-12
    best = min((r["sigma"], r["overlaps"]) for r in a.log)
    assert (a.best_metrics.sigma, a.best_metrics.overlaps) <= best
    path = tmp_path / "log.jsonl"
    a.write_log(path)
    lines = path.read_text().splitlines()
    assert len(lines) == a.steps and json.loads(lines[0])["t"] == 0
    assert set(json.loads(lines[0])) >= {"t", "action_index", "state", "sigma", "overlaps", "L",
                                          "r1", "r2", "r3", "r4", "reward"}


def test_best_sigma_monotone(torus):
    seen = []
    optimize(torus, policy=AgentPolicy(seed=4), episodes=1, steps_per_episode=80,
             on_step=lambda rec: seen.append(rec["sigma"]))
    running = np.minimum.accumulate(seen)
    assert np.all(np.diff(running) <= 0)


def test_q_learning_and_step_cap(torus):
    pol = AgentPolicy("q_learning", exploration=0.3, seed=2)
    a = optimize(torus, policy=pol, episodes=5, steps_per_episode=100, max_steps=150)
    b = optimize(torus, policy=pol, episodes=5, steps_per_episode=100, max_steps=150)
    assert a.steps <= 150 and a.log == b.log


def test_config_validation():
    with pytest.raises(ValueError):
        RewardConfig(gamma=1.0)
    with pytest.raises(ValueError):
        RewardConfig(sign_mode="flipped")
    with pytest.raises(ValueError):
        AgentPolicy(exploration=1.5)
    with pytest.raises(ValueError):
        AgentPolicy(kind="ppo")
