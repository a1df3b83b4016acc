"""Quick internal consistency checks used by ``npb selfcheck``.

Two suites: heuristic solvers against exact oracles on small random
instances, and analytic loss gradients against central finite differences
on the three construction families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import GenParams, TaskKind
from .dmpo import DmpoConfig, dmpo_loss, grpo_loss
from .generators import generate
from .policy import LinearPolicy, make_env, sample_trajectory
from .rng import SplitMix64, derive_seed
from .solvers import solve_exact
from .trainer import build_group
from .verifiers import verify

FAMILY_PROBES = {
    "permutation": (TaskKind.TSP, GenParams(n=5)),
    "subset": (TaskKind.VERTEX_COVER, GenParams(n=6, density=0.5)),
    "labeling": (TaskKind.GRAPH_COLORING, GenParams(n=5, density=0.5)),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


# --- oracle equivalence -----------------------------------------------------


def oracle_relation(task: TaskKind, heuristic, exact) -> bool:
    """Expected relation between a heuristic value and the exact optimum."""
    h, e = heuristic, exact
    if task in (TaskKind.MIN_CUT, TaskKind.MAX_CLIQUE, TaskKind.HAMILTONIAN_CYCLE):
        return h == e
    if task is TaskKind.VERTEX_COVER:
        return e <= h <= 2 * e
    if task.maximize:
        return h <= e
    return h >= e


def check_oracles(per_task: int = 10, n: int = 8, seed: int = 0) -> CheckResult:
    bad = []
    for t_index, task in enumerate(TaskKind):
        params = GenParams(n=n, density=0.4, planted=True)
        for k in range(per_task):
            inst = generate(task, params, derive_seed(seed, t_index, k))
            exact = solve_exact(task, inst.graph)
            h = inst.reference
            if not verify(task, inst.graph, h.solution).valid:
                bad.append(f"{inst.id}: reference invalid")
            elif not oracle_relation(task, h.value, exact.value):
                bad.append(f"{inst.id}: heuristic {h.value} vs exact {exact.value}")
    total = per_task * len(TaskKind)
    return CheckResult("solver/oracle", not bad, f"{total - len(bad)}/{total} ok" +
                       (f"; first: {bad[0]}" if bad else ""))


# --- finite-difference gradients ---------------------------------------------


def _loss_fn(env, trajs, rewards, cfg):
    def f(theta):
        rep = dmpo_loss(build_group(LinearPolicy(theta), env, trajs, rewards), cfg)
        return rep.total, rep.grad
    return f


def fd_relative_error(f, theta: np.ndarray, h: float = 1e-6) -> float:
    """||analytic - central FD|| / max(||analytic||, ||FD||) (absolute when both ~0)."""
    _, grad = f(theta)
    fd = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        fd[i] = (f(theta + e)[0] - f(theta - e)[0]) / (2 * h)
    scale = max(np.linalg.norm(grad), np.linalg.norm(fd))
    diff = np.linalg.norm(grad - fd)
    return float(diff / scale) if scale > 1e-8 else float(diff)


def gradient_case(family: str, seed: int, cfg: DmpoConfig, clip: bool,
                  group_size: int = 6, attempts: int = 50):
    """(relative error, clipped count) for one random group of ``family``.

    With ``clip`` the parameters are moved away from the sampling policy
    until at least one sample sits on the flat branch of the clipped
    surrogate; without it the ratios are exactly 1.
    """
    task, params = FAMILY_PROBES[family]
    inst = generate(task, params, derive_seed(seed, 0))
    env = make_env(inst)
    rng = SplitMix64(derive_seed(seed, 1))
    theta0 = np.array([rng.random() - 0.5 for _ in range(env.n_features)])
    for r in range(attempts):
        trajs = [sample_trajectory(LinearPolicy(theta0), env, rng.split(r, i))
                 for i in range(group_size)]
        rewards = [float(env.score(tr.solution)[2]) for tr in trajs]
        if len(set(rewards)) > 1:  # all-equal groups have no advantage to clip
            break
    f = _loss_fn(env, trajs, rewards, cfg)
    theta = theta0
    if clip:
        for a in range(attempts):
            jitter = rng.split(100 + a)
            cand = theta0 + np.array([2.0 * (jitter.random() - 0.5) for _ in theta0])
            gr = grpo_loss(build_group(LinearPolicy(cand), env, trajs, rewards), cfg)
            # keep away from the kink so the central difference stays on one branch
            margin = np.min(np.abs(np.abs(gr.ratios - 1.0) - cfg.clip_eps))
            if gr.clipped.any() and margin > 1e-3:
                theta = cand
                break
        else:
            return math.nan, 0
    clipped = int(grpo_loss(build_group(LinearPolicy(theta), env, trajs, rewards), cfg).clipped.sum())
    return fd_relative_error(f, theta), clipped


def check_gradients(seeds: int = 3, tol: float = 1e-4) -> CheckResult:
    worst, cases = 0.0, 0
    for divergence in ("mse", "js"):
        cfg = replace(DmpoConfig(), divergence=divergence)
        for family in FAMILY_PROBES:
            for s in range(seeds):
                for clip in (False, True):
                    err, _ = gradient_case(family, derive_seed(s, 7), cfg, clip)
                    worst = max(worst, err) if not math.isnan(err) else math.inf
                    cases += 1
    return CheckResult("gradients", worst < tol, f"{cases} cases, worst relative error {worst:.2e}")


def run_all() -> list[CheckResult]:
    return [check_oracles(), check_gradients()]
