"""Training loop: sample a problem, roll out a group, take a loss step.

Each iteration follows the same order: pick an instance, sample G
trajectories from a frozen snapshot of the policy, score them, form the
GRPO and distribution-matching terms, then step the parameters.  All
randomness comes from sub-streams of the master seed, so two runs with the
same configuration produce identical logs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import Instance, canonical_json
from .dmpo import (
    DmpoConfig,
    TrajectoryGroup,
    dm_loss_group,
    dmpo_loss,
    grpo_loss,
    target_distribution,
    total_variation,
)
from .policy import (
    ENV_CLASSES,
    BanditPolicy,
    ConstructionEnv,
    LinearPolicy,
    enumerate_solutions,
    log_prob_and_grad,
    make_env,
    sample_trajectory,
    solution_distribution,
)
from .rng import SplitMix64, check_seed, derive_seed

LOG_COLUMNS = (
    "iteration", "task", "mean_reward", "sr", "mean_qr", "entropy", "mean_length",
    "grpo_term", "dm_term", "total_loss", "grad_norm", "lr",
)
OBJECTIVES = ("dmpo", "grpo")


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    group_size: int = 8
    lr: float = 1e-2
    iterations: int = 250
    inner_epochs: int = 1
    cosine: bool = False
    dmpo: DmpoConfig = field(default_factory=DmpoConfig)
    objective: str = "dmpo"
    dataset: str | None = None
    seed: int = 0
    log_path: str | None = None
    policy_path: str | None = None

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.inner_epochs < 1:
            raise ValueError("inner_epochs must be at least 1")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        check_seed(self.seed)

    def lr_at(self, t: int) -> float:
        if not self.cosine or self.iterations <= 1:
            return self.lr
        return self.lr * 0.5 * (1.0 + math.cos(math.pi * t / self.iterations))


_DMPO_KEYS = {f.name for f in fields(DmpoConfig)}
_TRAIN_KEYS = {f.name for f in fields(TrainConfig)} - {"dmpo"}


def _coerce(text: str, like):
    if isinstance(like, bool) or like is None and text.lower() in ("true", "false"):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int) and not isinstance(like, bool):
        return int(text)
    if isinstance(like, float):
        if "/" in text:
            num, den = text.split("/")
            return float(num) / float(den)
        return float(text)
    return text


def parse_config_text(text: str) -> TrainConfig:
    """Flat ``key = value`` lines; DmpoConfig keys sit beside TrainConfig keys."""
    base, dm = TrainConfig(), DmpoConfig()
    train_kw, dm_kw = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _DMPO_KEYS:
            dm_kw[key] = _coerce(value, getattr(dm, key))
        elif key in _TRAIN_KEYS:
            train_kw[key] = _coerce(value, getattr(base, key))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return TrainConfig(dmpo=DmpoConfig(**dm_kw), **train_kw)


def config_to_text(cfg: TrainConfig) -> str:
    lines = []
    for k, v in asdict(cfg).items():
        if k == "dmpo":
            continue
        if v is not None:
            lines.append(f"{k} = {v}")
    for k, v in asdict(cfg.dmpo).items():
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


@dataclass
class PolicySet:
    """One linear policy per environment family."""

    policies: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls) -> "PolicySet":
        return cls({fam: LinearPolicy.zeros(c.n_features) for fam, c in ENV_CLASSES.items()})

    def for_env(self, env: ConstructionEnv) -> LinearPolicy:
        return self.policies[env.family]

    def copy(self) -> "PolicySet":
        return PolicySet({k: LinearPolicy(p.theta.copy()) for k, p in self.policies.items()})

    def to_json(self) -> dict:
        return {
            "format": "policy/1",
            "families": {k: [float(x) for x in p.theta] for k, p in sorted(self.policies.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolicySet":
        out = cls.zeros()
        for fam, theta in obj["families"].items():
            if fam not in ENV_CLASSES:
                raise ValueError(f"unknown policy family {fam!r}")
            theta = np.asarray(theta, dtype=float)
            if theta.size != ENV_CLASSES[fam].n_features:
                raise ValueError(f"{fam} policy needs {ENV_CLASSES[fam].n_features} parameters")
            out.policies[fam] = LinearPolicy(theta)
        return out

    def save(self, path) -> None:
        Path(path).write_bytes(canonical_json(self.to_json()))

    @classmethod
    def load(cls, path) -> "PolicySet":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class TrainLog:
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in LOG_COLUMNS])
        return buf.getvalue()

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def build_group(policy: LinearPolicy, env: ConstructionEnv, trajs, rewards) -> TrajectoryGroup:
    """Group with log-probs recomputed under the policy's current parameters."""
    logps, grads = [], []
    for tr in trajs:
        lp, g, _ = log_prob_and_grad(policy, env, tr)
        logps.append(lp)
        grads.append(g)
    return TrajectoryGroup(
        rewards=tuple(rewards),
        logp=tuple(logps),
        grad_logp=np.array(grads),
        old_logp=tuple(tr.logp for tr in trajs),
    )


def _loss_step(group: TrajectoryGroup, cfg: TrainConfig):
    """(gradient, grpo_term, dm_term, total) for the configured objective."""
    if cfg.objective == "grpo":
        gr = grpo_loss(group, cfg.dmpo)
        dm_value = dm_loss_group(group, cfg.dmpo)[0]
        return gr.grad, gr.surrogate, dm_value, gr.value
    rep = dmpo_loss(group, cfg.dmpo)
    return rep.grad, rep.grpo_term, rep.dm_term, rep.total


def _dump(group: TrajectoryGroup) -> str:
    return json.dumps({
        "rewards": [float(r) for r in group.rewards],
        "logp": [x.tolist() for x in group.logp],
        "old_logp": [x.tolist() for x in group.old_logp],
    })


def train(cfg: TrainConfig, instances=None, policies: PolicySet | None = None):
    """Run the loop; returns (PolicySet, TrainLog).  ``policies`` is not mutated."""
    if instances is None:
        if cfg.dataset is None:
            raise ValueError("no instances given and no dataset configured")
        from .generators import read_batch

        instances = read_batch(cfg.dataset)
    instances = list(instances)
    if not instances:
        raise ValueError("dataset is empty")
    policies = PolicySet.zeros() if policies is None else policies.copy()
    envs: dict = {}
    log = TrainLog()
    g_size = cfg.group_size

    for t in range(cfg.iterations):
        rng = SplitMix64(derive_seed(cfg.seed, t))
        inst: Instance = instances[rng.randbelow(len(instances))]
        env = envs.get(inst.id)
        if env is None:
            env = envs[inst.id] = make_env(inst)
        policy = policies.for_env(env)
        snapshot = LinearPolicy(policy.theta.copy())
        trajs = [sample_trajectory(snapshot, env, rng.split(i)) for i in range(g_size)]
        scored = [env.score(tr.solution) for tr in trajs]
        rewards = [s[2] for s in scored]
        lr = cfg.lr_at(t)
        for epoch in range(cfg.inner_epochs):
            group = build_group(policy, env, trajs, rewards)
            grad, grpo_term, dm_term, total = _loss_step(group, cfg)
            if not (math.isfinite(total) and np.all(np.isfinite(grad))):
                raise TrainingError(f"non-finite loss at iteration {t}: {_dump(group)}")
            if epoch == 0:
                first = (grpo_term, dm_term, total, float(np.sqrt(np.sum(grad * grad))))
            policy.theta = policy.theta - lr * grad
        log.rows.append({
            "iteration": t,
            "task": inst.task.value,
            "mean_reward": float(sum(rewards)) / g_size,
            "sr": sum(1 for s in scored if s[0].valid) / g_size,
            "mean_qr": float(sum(s[1] for s in scored)) / g_size,
            "entropy": float(np.mean(np.concatenate([tr.entropy for tr in trajs]))),
            "mean_length": sum(tr.length for tr in trajs) / g_size,
            "grpo_term": first[0],
            "dm_term": first[1],
            "total_loss": first[2],
            "grad_norm": first[3],
            "lr": lr,
        })
    return policies, log


# --- tabular bandit ---------------------------------------------------------


def bandit_group(policy: BanditPolicy, actions, rewards_table, old_logp=None) -> TrajectoryGroup:
    logp, grads = [], []
    for a in actions:
        lp, g = policy.log_prob_and_grad(a)
        logp.append([lp])
        grads.append(g)
    return TrajectoryGroup(
        rewards=tuple(rewards_table[a] for a in actions),
        logp=tuple(logp),
        grad_logp=np.array(grads),
        old_logp=tuple(logp) if old_logp is None else old_logp,
    )


def train_bandit(rewards, cfg: DmpoConfig, steps: int, lr: float, group_size: int | None = None,
                 objective: str = "dmpo", seed: int = 0, logits=None):
    """Policy-gradient training of a softmax bandit over ``rewards``.

    ``group_size=None`` uses the whole enumerated set (each arm once) as the
    group every step; otherwise G arms are sampled from the current policy.
    Returns (policy, per-step list of dm_term).
    """
    k = len(rewards)
    policy = BanditPolicy(np.zeros(k) if logits is None else np.array(logits, dtype=float))
    rng = SplitMix64(seed)
    history = []
    for t in range(steps):
        if group_size is None:
            actions = list(range(k))
        else:
            step_rng = rng.split(t)
            actions = [policy.sample(step_rng) for _ in range(group_size)]
        group = bandit_group(policy, actions, rewards)
        if objective == "grpo":
            grad = grpo_loss(group, cfg).grad
            history.append(dm_loss_group(group, cfg)[0])
        else:
            rep = dmpo_loss(group, cfg)
            grad = rep.grad
            history.append(rep.dm_term)
        policy.logits = policy.logits - lr * grad
    return policy, history


# --- diagnostics ------------------------------------------------------------


@dataclass(frozen=True)
class CollapseDiagnostics:
    tv_global: float
    tv_group: float | None
    optimum_mass: tuple
    entropy: float
    policy_probs: np.ndarray
    target_probs: np.ndarray


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def mode_collapse_probe(policy, env, alpha: float, group=None) -> CollapseDiagnostics:
    """Exact policy distribution vs the Boltzmann target over all solutions.

    ``env`` is a ConstructionEnv (with a LinearPolicy) or a reward vector
    (with a BanditPolicy).  ``group`` optionally lists solutions (arm
    indices for bandits) of a sampled group; the group TV compares the
    policy renormalized over those distinct members with the group target.
    """
    if isinstance(policy, BanditPolicy):
        rewards = list(env)
        pi = policy.probs()
        keys = list(range(len(rewards)))
    else:
        table = enumerate_solutions(env)
        dist = solution_distribution(policy, env)
        keys = [sol for sol, *_ in table]
        rewards = [r for *_, r in table]
        pi = np.array([dist.get(sol, 0.0) for sol in keys])
    target = target_distribution(rewards, alpha)
    best = max(rewards)
    opt_mass = tuple(float(pi[i]) for i, r in enumerate(rewards) if r == best)
    tv_group = None
    if group is not None:
        index = {k: i for i, k in enumerate(keys)}
        members = sorted({index[s] for s in group})
        q = pi[members]
        q = q / q.sum() if q.sum() > 0 else np.full(len(members), 1.0 / len(members))
        tv_group = total_variation(q, target_distribution([rewards[i] for i in members], alpha))
    return CollapseDiagnostics(
        total_variation(pi, target), tv_group, opt_mass, _entropy(pi), pi, target
    )
