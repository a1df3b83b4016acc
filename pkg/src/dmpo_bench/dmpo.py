"""Group-level losses: GRPO surrogate, distribution matching, and their sum.

All functions act on one :class:`TrajectoryGroup` (G trajectories sampled
for the same problem) and return values together with analytic gradients
with respect to the policy parameters.  The group carries, per trajectory,
the gradient of the summed step log-probabilities; every loss here depends
on the parameters only through those sums, so each gradient is a weighted
sum of the rows of ``group.grad_logp``.

Rewards may be given as ints, floats or Fractions; they are handled in
exact rational arithmetic up to the final division, which makes z-score
advantages and the Boltzmann target exactly invariant to reward shifts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DIVERGENCES = ("mse", "js")
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class DmpoConfig:
    lam: float = 2.0
    alpha: float = 1.0 / 15.0
    clip_eps: float = 0.2
    std_eps: float = 1e-8
    beta_kl: float = 0.0
    divergence: str = "mse"
    pure_dm: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0 < self.clip_eps < 1:
            raise ValueError("clip_eps must lie in (0, 1)")
        if self.std_eps <= 0:
            raise ValueError("std_eps must be > 0")
        if self.beta_kl < 0:
            raise ValueError("beta_kl must be >= 0")
        if self.divergence not in DIVERGENCES:
            raise ValueError(f"divergence must be one of {DIVERGENCES}")


@dataclass(frozen=True)
class TrajectoryGroup:
    """G trajectories with rewards, per-step log-probs and log-prob gradients.

    ``logp[i]`` are the step log-probs under the current parameters,
    ``old_logp[i]`` the ones recorded when sampling (the frozen policy) and
    ``ref_logp[i]`` optional reference-policy log-probs for the KL penalty.
    ``grad_logp[i]`` is the parameter gradient of ``sum(logp[i])``.
    """

    rewards: tuple
    logp: tuple
    grad_logp: np.ndarray
    old_logp: tuple | None = None
    ref_logp: tuple | None = None

    def __post_init__(self):
        g = len(self.rewards)
        if g < 1:
            raise ValueError("a group needs at least one trajectory")
        logp = tuple(np.asarray(x, dtype=float).reshape(-1) for x in self.logp)
        if len(logp) != g:
            raise ValueError("rewards and logp differ in length")
        for x in logp:
            if x.size < 1:
                raise ValueError("every trajectory needs at least one step")
            if np.any(x > 0):
                raise ValueError("log-probs must be <= 0")
        object.__setattr__(self, "logp", logp)
        grad = np.asarray(self.grad_logp, dtype=float)
        if grad.ndim != 2 or grad.shape[0] != g:
            raise ValueError("grad_logp must have shape (G, D)")
        object.__setattr__(self, "grad_logp", grad)
        for name in ("old_logp", "ref_logp"):
            other = getattr(self, name)
            if other is None:
                continue
            other = tuple(np.asarray(x, dtype=float).reshape(-1) for x in other)
            if [x.size for x in other] != [x.size for x in logp]:
                raise ValueError(f"{name} must match logp step counts")
            object.__setattr__(self, name, other)

    @property
    def size(self) -> int:
        return len(self.rewards)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([x.size for x in self.logp], dtype=float)

    @property
    def seq_logp(self) -> np.ndarray:
        return np.array([math.fsum(x) for x in self.logp])

    @property
    def phi(self) -> np.ndarray:
        """Length-normalized log-likelihood of each trajectory."""
        return self.seq_logp / self.lengths


@dataclass(frozen=True)
class GrpoResult:
    value: float
    grad: np.ndarray
    surrogate: float
    kl: float
    advantages: np.ndarray
    ratios: np.ndarray
    clipped: np.ndarray


@dataclass(frozen=True)
class LossReport:
    grpo_term: float
    dm_term: float
    kl_term: float
    total: float
    grad: np.ndarray
    p: np.ndarray
    q: np.ndarray
    advantages: np.ndarray

    def to_json(self) -> str:
        return json.dumps({
            "grpo_term": self.grpo_term,
            "dm_term": self.dm_term,
            "kl_term": self.kl_term,
            "total": self.total,
            "grad": self.grad.tolist(),
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "advantages": self.advantages.tolist(),
        }, sort_keys=True)


def _exact(values) -> list[Fraction]:
    return [Fraction(v) for v in values]


def _weighted_rows(coeffs: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # elementwise product then reduction keeps results identical across BLAS builds
    return (np.asarray(coeffs, dtype=float)[:, None] * rows).sum(axis=0)


def group_advantages(rewards, std_eps: float = 1e-8) -> np.ndarray:
    """Z-score of each reward within the group (population std)."""
    rs = _exact(rewards)
    g = len(rs)
    if g < 2:
        raise ValueError("z-score advantages need a group of at least 2")
    mean = sum(rs, Fraction(0)) / g
    dev = [r - mean for r in rs]
    var = sum((d * d for d in dev), Fraction(0)) / g
    std = math.sqrt(var)
    return np.array([float(d) / (std + std_eps) for d in dev])


def _softmax_exact_shift(values) -> np.ndarray:
    m = max(values)
    e = [math.exp(float(v - m)) for v in values]
    s = math.fsum(e)
    return np.array([x / s for x in e])


def target_distribution(rewards, alpha: float) -> np.ndarray:
    """Group Boltzmann target: softmax(r / alpha), max-shifted."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    a = Fraction(alpha)
    return _softmax_exact_shift([r / a for r in _exact(rewards)])


def softmax(x) -> np.ndarray:
    x = [float(v) for v in x]
    m = max(x)
    e = [math.exp(v - m) for v in x]
    s = math.fsum(e)
    return np.array([v / s for v in e])


def policy_distribution(group: TrajectoryGroup) -> np.ndarray:
    """softmax of the length-normalized log-likelihoods over the group."""
    return softmax(group.phi)


def _check_pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("p and q must be vectors of equal length")
    for name, v in (("p", p), ("q", q)):
        if abs(math.fsum(v) - 1.0) > NORMALIZATION_TOL or np.any(v < 0):
            raise ValueError(f"{name} is not a probability vector")
    return p, q


def _xlogy(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(y[nz])
    return out


def kl_divergence(p, q) -> float:
    """KL(p || q) with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(_xlogy(p, p) - _xlogy(p, q)))


def dm_loss(p, q, divergence: str = "mse") -> tuple[float, np.ndarray]:
    """Divergence between target p and policy q, and its gradient in q.

    mse: mean of squared differences.  js: Jensen-Shannon divergence
    (natural log), whose q-gradient is 0.5 * log(q / m).
    """
    p, q = _check_pair(p, q)
    g = p.size
    if divergence == "mse":
        diff = q - p
        return float(np.sum(diff * diff) / g), (2.0 / g) * diff
    if divergence == "js":
        m = 0.5 * (p + q)
        value = 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m)
        grad = np.zeros(g)
        nz = q > 0
        grad[nz] = 0.5 * np.log(q[nz] / m[nz])
        return value, grad
    raise ValueError(f"unknown divergence {divergence!r}")


def softmax_backward(q: np.ndarray, grad_q: np.ndarray) -> np.ndarray:
    """Chain dL/dq through q = softmax(phi) to dL/dphi."""
    return q * (grad_q - float(np.dot(grad_q, q)))


def grpo_loss(group: TrajectoryGroup, cfg: DmpoConfig) -> GrpoResult:
    """Clipped surrogate with z-score advantages plus optional KL penalty.

    The importance ratio is sequence level: exp(sum(logp) - sum(old_logp)).
    The KL term (k1 estimator, length normalized) is only evaluated when
    the group carries reference log-probs.
    """
    if group.old_logp is None:
        raise ValueError("grpo_loss needs the sampling-time (old) log-probs")
    g = group.size
    adv = group_advantages(group.rewards, cfg.std_eps)
    old = np.array([math.fsum(x) for x in group.old_logp])
    ratio = np.exp(group.seq_logp - old)
    lo, hi = 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps
    unclipped = ratio * adv
    clipped_obj = np.clip(ratio, lo, hi) * adv
    use_clipped = clipped_obj < unclipped
    j = np.where(use_clipped, clipped_obj, unclipped)
    surrogate = -float(np.sum(j)) / g
    # d(rho * A)/dtheta = rho * A * grad(sum logp); the clipped branch is flat
    coeff = np.where(use_clipped, 0.0, ratio * adv) * (-1.0 / g)
    grad = _weighted_rows(coeff, group.grad_logp)
    value = surrogate
    kl = 0.0
    if group.ref_logp is not None:
        lengths = group.lengths
        kl = float(np.mean([
            math.fsum(a - b) / n for a, b, n in zip(group.logp, group.ref_logp, lengths)
        ]))
        if cfg.beta_kl != 0.0:
            value = surrogate + cfg.beta_kl * kl
            grad = grad + cfg.beta_kl * _weighted_rows(1.0 / (g * lengths), group.grad_logp)
    return GrpoResult(value, grad, surrogate, kl, adv, ratio, use_clipped)


def dm_loss_group(group: TrajectoryGroup, cfg: DmpoConfig):
    """DM loss of a group and its parameter gradient; returns (value, grad, p, q)."""
    p = target_distribution(group.rewards, cfg.alpha)
    q = policy_distribution(group)
    value, grad_q = dm_loss(p, q, cfg.divergence)
    grad_phi = softmax_backward(q, grad_q)
    grad = _weighted_rows(grad_phi / group.lengths, group.grad_logp)
    return value, grad, p, q


def dmpo_loss(group: TrajectoryGroup, cfg: DmpoConfig) -> LossReport:
    """L_GRPO + lam * L_DM, or L_DM alone when ``cfg.pure_dm``.

    With ``lam == 0`` the total and gradient are exactly the GRPO ones.
    """
    dm_value, dm_grad, p, q = dm_loss_group(group, cfg)
    if cfg.pure_dm:
        adv = group_advantages(group.rewards, cfg.std_eps) if group.size > 1 else np.zeros(1)
        return LossReport(0.0, dm_value, 0.0, dm_value, dm_grad, p, q, adv)
    gr = grpo_loss(group, cfg)
    if cfg.lam == 0.0:
        total, grad = gr.value, gr.grad
    else:
        total = gr.value + cfg.lam * dm_value
        grad = gr.grad + cfg.lam * dm_grad
    return LossReport(gr.surrogate, dm_value, gr.kl, total, grad, p, q, gr.advantages)


def q_lower_bound(p, dm_value: float, g: int | None = None) -> np.ndarray:
    """Lower bound p_i - sqrt(G * L_DM) that every q_i must respect."""
    p = np.asarray(p, dtype=float)
    g = p.size if g is None else g
    return p - math.sqrt(g * dm_value)


def q_lower_bound_holds(p, q, g: int | None = None) -> bool:
    """True iff q_i >= p_i - sqrt(G * MSE(p, q)) for every i.

    Evaluated exactly on the given floats: with d = p - q the condition is
    d_i <= 0 or d_i**2 <= G * sum(d**2) / len(p), compared as rationals so
    rounding in the square root can never flag a spurious violation.
    """
    pf = np.asarray(p, dtype=float)
    qf = np.asarray(q, dtype=float)
    if pf.shape != qf.shape:
        raise ValueError("p and q must have the same length")
    g = pf.size if g is None else g
    # float fast path with a wide margin; only borderline entries go exact
    df = pf - qf
    budget_f = g * float(np.sum(df * df)) / pf.size
    if budget_f > 1e-280 and np.all((df <= 0) | (df * df <= budget_f * (1 - 1e-6))):
        return True
    ps, qs = _exact(pf.tolist()), _exact(qf.tolist())
    d = [a - b for a, b in zip(ps, qs)]
    budget = g * sum((x * x for x in d), Fraction(0)) / len(d)
    return all(x <= 0 or x * x <= budget for x in d)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))
