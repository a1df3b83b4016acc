import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmpo_bench.dmpo import (
    DmpoConfig,
    TrajectoryGroup,
    dm_loss,
    dmpo_loss,
    group_advantages,
    grpo_loss,
    kl_divergence,
    policy_distribution,
    q_lower_bound_holds,
    q_lower_bound,
    target_distribution,
    total_variation,
)
from dmpo_bench.rng import SplitMix64


# --- a synthetic multi-step policy: one softmax over K actions per step ------


def _logsoftmax(theta):
    m = theta.max()
    return theta - m - math.log(np.exp(theta - m).sum())


def make_group(theta, episodes, rewards, old_theta=None, ref_theta=None):
    """Group whose step log-probs come from softmax(theta) at every step."""
    def steps(th):
        ls = _logsoftmax(th)
        return tuple(np.array([ls[a] for a in ep]) for ep in episodes)

    p = np.exp(_logsoftmax(theta))
    grads = []
    for ep in episodes:
        g = -len(ep) * p
        for a in ep:
            g[a] += 1.0
        grads.append(g)
    old = steps(theta if old_theta is None else old_theta)
    ref = None if ref_theta is None else steps(ref_theta)
    return TrajectoryGroup(tuple(rewards), steps(theta), np.array(grads), old, ref)


def random_case(seed, k=4, g=5):
    rng = SplitMix64(seed)
    theta = np.array([2 * rng.random() - 1 for _ in range(k)])
    episodes = [[rng.randbelow(k) for _ in range(rng.randint(1, 6))] for _ in range(g)]
    rewards = [round(rng.random(), 3) for _ in range(g)]
    return theta, episodes, rewards


def fd_check(cfg, theta, episodes, rewards, old_theta=None, ref_theta=None, h=1e-5):
    old_theta = theta.copy() if old_theta is None else old_theta  # frozen while differencing

    def f(th):
        return dmpo_loss(make_group(th, episodes, rewards, old_theta, ref_theta), cfg)

    grad = f(theta).grad
    fd = np.array([(f(theta + h * e).total - f(theta - h * e).total) / (2 * h)
                   for e in np.eye(theta.size)])
    scale = max(np.linalg.norm(grad), np.linalg.norm(fd), 1e-12)
    return np.linalg.norm(grad - fd) / scale


# --- advantages -----------------------------------------------------------------


def test_advantage_examples():
    assert np.all(group_advantages([2, 2, 2, 2]) == 0)
    a = group_advantages([1, 0])
    assert a[0] == pytest.approx(1, abs=1e-7) and a[1] == pytest.approx(-1, abs=1e-7)
    a = group_advantages([1, 0, 0, 0])
    assert a[0] == pytest.approx(1.7320508, abs=1e-6)
    assert np.allclose(a[1:], -0.5773503, atol=1e-6)
    with pytest.raises(ValueError):
        group_advantages([1])


def test_advantages_exactly_shift_and_scale_invariant():
    r = [Fraction(3, 10), Fraction(7, 10), Fraction(1, 10), Fraction(9, 10)]
    base = group_advantages(r)
    for c in (Fraction(1, 10), 5, Fraction(-17, 3)):
        assert np.array_equal(group_advantages([x + c for x in r]), base)
    # scaling changes std, so only the std_eps guard term differs (relative size ~1e-8)
    assert np.allclose(group_advantages([3 * x for x in r]), base, atol=1e-7, rtol=0)


# --- distributions --------------------------------------------------------------


def test_target_examples():
    assert np.allclose(target_distribution([3, 3, 3], 0.5), 1 / 3, atol=1e-15)
    p = target_distribution([1, 0], 1.0)
    assert p == pytest.approx([0.7311, 0.2689], abs=1e-4)
    p = target_distribution([1, 0], 1 / 15)
    assert p[1] == pytest.approx(3.059e-7, abs=1e-8)
    assert p[0] == pytest.approx(1 - 3.059e-7, abs=1e-8)


def test_target_large_rewards_do_not_overflow():
    p = target_distribution([1000, 999], 1 / 15)
    assert np.isfinite(p).all() and math.isclose(p.sum(), 1.0)


@settings(max_examples=60)
@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=8),
       st.integers(-10**6, 10**6), st.integers(1, 20), st.sampled_from([1.0, 0.5, 1 / 15, 3.0]))
def test_target_shift_and_scale(rs, c, k, alpha):
    r = [Fraction(x, 100) for x in rs]
    p = target_distribution(r, alpha)
    assert np.max(np.abs(target_distribution([x + c for x in r], alpha) - p)) <= 1e-12
    assert np.max(np.abs(target_distribution([k * x for x in r], alpha)
                         - target_distribution(r, alpha / k))) <= 1e-12
    assert abs(p.sum() - 1) <= 1e-9 and np.all((p >= 0) & (p <= 1))


def test_policy_distribution_examples():
    step = math.log(0.7)
    g = TrajectoryGroup((1, 0), ([step] * 3, [step] * 30), np.zeros((2, 1)))
    assert np.max(np.abs(policy_distribution(g) - 0.5)) <= 1e-12
    g1 = TrajectoryGroup((1,), ([-0.3],), np.zeros((1, 1)))
    assert policy_distribution(g1).tolist() == [1.0]
    g2 = TrajectoryGroup((1, 0), ([math.log(0.9)], [math.log(0.1)]), np.zeros((2, 1)))
    assert np.max(np.abs(policy_distribution(g2) - [0.9, 0.1])) <= 1e-12


def test_group_validation():
    with pytest.raises(ValueError):
        TrajectoryGroup((1,), ([0.1],), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        TrajectoryGroup((1,), ([],), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        TrajectoryGroup((1, 2), ([-1.0], [-1.0]), np.zeros((3, 1)))


# --- divergences ----------------------------------------------------------------


def test_dm_loss_examples():
    for div in ("mse", "js"):
        assert dm_loss([0.3, 0.7], [0.3, 0.7], div)[0] == 0
    assert dm_loss([1, 0], [0.5, 0.5], "mse")[0] == 0.25
    assert dm_loss([1, 0], [0, 1], "js")[0] == pytest.approx(math.log(2), abs=1e-12)
    with pytest.raises(ValueError):
        dm_loss([1, 0], [0.5, 0.5, 0], "mse")
    with pytest.raises(ValueError):
        dm_loss([0.6, 0.6], [0.5, 0.5], "mse")


@pytest.mark.parametrize("div", ["mse", "js"])
def test_dm_loss_q_gradient(div):
    rng = SplitMix64(5)
    for _ in range(20):
        p = np.array([rng.random() + 0.05 for _ in range(5)])
        q = np.array([rng.random() + 0.05 for _ in range(5)])
        p, q = p / p.sum(), q / q.sum()
        _, grad = dm_loss(p, q, div)
        # directional derivatives along zero-sum directions stay on the simplex
        for _ in range(3):
            d = np.array([rng.random() - 0.5 for _ in range(5)])
            d -= d.mean()
            h = 1e-6
            fd = (dm_loss(p, q + h * d, div)[0] - dm_loss(p, q - h * d, div)[0]) / (2 * h)
            assert fd == pytest.approx(float(grad @ d), rel=1e-5, abs=1e-9)


def test_mse_is_second_order_kl():
    rng = SplitMix64(9)
    p = np.array([0.1, 0.2, 0.3, 0.4])
    d = np.array([rng.random() - 0.5 for _ in range(4)])
    d -= d.mean()
    quad = 0.5 * np.sum(d * d / p)
    for eta in (1e-3, 5e-4, 2.5e-4):
        err = abs(kl_divergence(p, p + eta * d) - eta**2 * quad)
        assert err <= 10 * eta**3


# --- GRPO surrogate --------------------------------------------------------------


def test_grpo_ratio_one():
    theta, eps, rewards = random_case(1)
    g = make_group(theta, eps, rewards)
    res = grpo_loss(g, DmpoConfig())
    adv = group_advantages(rewards)
    assert res.value == pytest.approx(0, abs=1e-12)
    assert np.allclose(res.grad, -(adv[:, None] * g.grad_logp).sum(0) / g.size, atol=1e-14)


def test_grpo_clipped_branch():
    # one-step episodes on a 2-action softmax: choose theta so that rho_0 = 1.5
    old = np.array([0.0, 0.0])
    theta = np.array([math.log(1.5), math.log(0.5)])  # pi(0) = 0.75, old pi(0) = 0.5
    g = make_group(theta, [[0], [1]], [1, 0], old_theta=old)
    res = grpo_loss(g, DmpoConfig())
    assert res.ratios[0] == pytest.approx(1.5)
    assert res.clipped[0]
    adv = res.advantages
    # contribution of trajectory 0 is 1.2 * A_0, trajectory 1 uses its ratio 0.5 -> clipped to 0.8
    # but min(0.5 * A_1, 0.8 * A_1) with A_1 < 0 picks the more negative 0.8 * A_1
    assert res.surrogate == pytest.approx(-(1.2 * adv[0] + 0.8 * adv[1]) / 2)


def test_grpo_needs_old_logp():
    g = TrajectoryGroup((1, 0), ([-1.0], [-1.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        grpo_loss(g, DmpoConfig())


def test_all_equal_rewards():
    theta, eps, _ = random_case(2)
    g = make_group(theta, eps, [0.4] * len(eps))
    rep = dmpo_loss(g, DmpoConfig())
    assert np.all(grpo_loss(g, DmpoConfig()).grad == 0)
    assert not np.allclose(rep.q, rep.q[0])
    assert np.linalg.norm(rep.grad) > 0


# --- combined objective -----------------------------------------------------------


def test_lambda_zero_is_bitwise_grpo():
    for s in range(10):
        theta, eps, rewards = random_case(s)
        g = make_group(theta, eps, rewards, old_theta=theta + 0.3)
        cfg = DmpoConfig(lam=0.0)
        rep, gr = dmpo_loss(g, cfg), grpo_loss(g, cfg)
        assert rep.total == gr.value
        assert rep.grad.tobytes() == gr.grad.tobytes()


def test_total_decomposition():
    theta, eps, rewards = random_case(3)
    cfg = DmpoConfig(lam=0.7, beta_kl=0.05)
    rep = dmpo_loss(make_group(theta, eps, rewards, ref_theta=theta * 0.5), cfg)
    assert rep.kl_term != 0
    assert rep.total == pytest.approx(rep.grpo_term + cfg.lam * rep.dm_term + cfg.beta_kl * rep.kl_term)
    js = rep.to_json()
    assert '"dm_term"' in js


def test_pure_dm_at_target_is_stationary():
    # one-step episodes, logits equal to r / alpha make q = p exactly
    rewards = [0.1, 0.5, 0.3]
    alpha = 0.5
    theta = np.array(rewards) / alpha
    g = make_group(theta, [[0], [1], [2]], rewards)
    rep = dmpo_loss(g, DmpoConfig(pure_dm=True, alpha=alpha))
    assert rep.total == pytest.approx(0, abs=1e-30)
    assert np.linalg.norm(rep.grad) < 1e-15


@pytest.mark.parametrize("div", ["mse", "js"])
@pytest.mark.parametrize("mode", ["ratio_one", "off_policy", "pure_dm", "with_kl"])
def test_gradient_matches_finite_differences(div, mode):
    for s in range(10):
        theta, eps, rewards = random_case(100 + s)
        cfg = DmpoConfig(divergence=div, alpha=0.5)
        old = ref = None
        if mode == "off_policy":
            old = theta + np.array([0.4, -0.3, 0.2, -0.5])
        elif mode == "pure_dm":
            cfg = replace(cfg, pure_dm=True)
        elif mode == "with_kl":
            cfg = replace(cfg, beta_kl=0.1)
            ref = -theta
        assert fd_check(cfg, theta, eps, rewards, old, ref) < 1e-4


# --- lower bound on q --------------------------------------------------------------


def test_q_lower_bound_examples():
    p = np.array([0.3, 0.3, 0.2, 0.2])
    assert q_lower_bound(p, 1e-4, 4)[0] == pytest.approx(0.28)
    assert q_lower_bound_holds(p, p)


@settings(max_examples=200)
@given(st.integers(2, 12), st.integers(0, 2**64 - 1))
def test_q_lower_bound_random(g, seed):
    rng = SplitMix64(seed)
    p = np.array([rng.random() ** 3 for _ in range(g)])
    q = np.array([rng.random() ** 3 for _ in range(g)])
    p, q = p / p.sum(), q / q.sum()
    assert q_lower_bound_holds(p, q, g)


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0


def test_config_validation():
    for bad in (dict(lam=-1), dict(alpha=0), dict(clip_eps=1), dict(std_eps=0),
                dict(divergence="kl"), dict(beta_kl=-0.1)):
        with pytest.raises(ValueError):
            DmpoConfig(**bad)
