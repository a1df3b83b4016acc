"""Small softmax policies and the construction MDPs they act in.

Three environment families cover the ten tasks:

* ``permutation`` (TSP, Hamiltonian cycle): pick the next unvisited vertex,
  episodes have exactly n steps.
* ``subset`` (VC, DS, clique, MIS, FVS): pick an unchosen vertex or STOP;
  once every vertex is chosen STOP is the only legal action, so episodes
  have at most n + 1 steps.
* ``labeling`` (coloring, min/max cut): label vertices 0..n-1 in order
  with one of K labels, exactly n steps.

A :class:`LinearPolicy` scores each legal action by ``theta . features``
and samples from the masked softmax.  Environment states are tuples of the
actions taken so far; features depend on the state only through the
quantities listed in each ``features`` method, which is what lets
:func:`solution_distribution` merge equivalent states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Instance, Solution, TaskKind
from .metrics import quality_ratio, reward
from .rng import SplitMix64
from .verifiers import verify

ENUMERATION_LIMIT = 10**4

FAMILY_OF = {
    TaskKind.TSP: "permutation",
    TaskKind.HAMILTONIAN_CYCLE: "permutation",
    TaskKind.VERTEX_COVER: "subset",
    TaskKind.DOMINATING_SET: "subset",
    TaskKind.MAX_CLIQUE: "subset",
    TaskKind.MAX_INDEPENDENT_SET: "subset",
    TaskKind.FEEDBACK_VERTEX_SET: "subset",
    TaskKind.GRAPH_COLORING: "labeling",
    TaskKind.MIN_CUT: "labeling",
    TaskKind.MAX_CUT: "labeling",
}


class ConstructionEnv:
    """Base class; subclasses define actions, masks and features."""

    family = ""
    n_features = 0

    def __init__(self, task, graph, reference_value=None):
        self.task = TaskKind(task)
        if FAMILY_OF[self.task] != self.family:
            raise ValueError(f"{self.task.value} does not belong to the {self.family} family")
        self.graph = graph
        self.n = graph.n
        self.reference_value = None if reference_value is None else Fraction(reference_value)
        self._deg_norm = [graph.degree(v) / max(1, self.n - 1) for v in range(self.n)]

    @classmethod
    def for_instance(cls, inst: Instance, **kw) -> "ConstructionEnv":
        return cls(inst.task, inst.graph, inst.reference.value, **kw)

    n_actions = 0

    def initial_state(self) -> tuple:
        return ()

    def step(self, state: tuple, action: int) -> tuple:
        return state + (action,)

    def legal(self, state: tuple) -> list[bool]:
        raise NotImplementedError

    def features(self, state: tuple) -> np.ndarray:
        raise NotImplementedError

    def is_done(self, state: tuple) -> bool:
        raise NotImplementedError

    def solution(self, state: tuple) -> Solution:
        raise NotImplementedError

    def state_key(self, state: tuple):
        return state

    def score(self, sol: Solution):
        """(verdict, QR, reward) of a complete solution."""
        verdict = verify(self.task, self.graph, sol)
        if self.reference_value is None:
            raise ValueError("environment has no reference value to score against")
        qr = quality_ratio(self.task, verdict.objective, self.reference_value, verdict.valid)
        return verdict, qr, reward(verdict, qr, format_ok=True)


class PermutationEnv(ConstructionEnv):
    family = "permutation"
    # weight to candidate, adjacency, degree, closing edge, unvisited-neighbour share
    n_features = 5

    def __init__(self, task, graph, reference_value=None):
        super().__init__(task, graph, reference_value)
        self.n_actions = self.n
        self._wmax = max(1, graph.max_weight)

    def legal(self, state):
        seen = set(state)
        return [v not in seen for v in range(self.n)]

    def features(self, state):
        g = self.graph
        n = self.n
        f = np.zeros((n, self.n_features))
        seen = set(state)
        last_step = len(state) == n - 1
        cur = state[-1] if state else None
        start = state[0] if state else None
        denom = max(1, n - 1)
        for v in range(n):
            if v in seen:
                continue
            if cur is not None:
                if g.has_edge(cur, v):
                    f[v, 0] = g.weight(cur, v) / self._wmax
                    f[v, 1] = 1.0
                else:
                    f[v, 0] = 1.0
            f[v, 2] = self._deg_norm[v]
            if last_step and g.has_edge(v, start):
                f[v, 3] = 1.0 if self.task is TaskKind.HAMILTONIAN_CYCLE else g.weight(v, start) / self._wmax
            f[v, 4] = sum(1 for u in g.adj[v] if u not in seen) / denom
        return f

    def is_done(self, state):
        return len(state) == self.n

    def solution(self, state):
        return Solution.tour(state)


class SubsetEnv(ConstructionEnv):
    family = "subset"
    # is_stop, degree, gain, conflict, feasible-now (STOP), fraction chosen (STOP)
    n_features = 6

    def __init__(self, task, graph, reference_value=None):
        super().__init__(task, graph, reference_value)
        self.n_actions = self.n + 1
        self.stop = self.n
        self._maxdeg = max(1, max((graph.degree(v) for v in range(self.n)), default=1))

    def legal(self, state):
        chosen = set(state)
        mask = [v not in chosen for v in range(self.n)]
        mask.append(True)
        return mask

    def _feasible(self, chosen) -> bool:
        return verify(self.task, self.graph, Solution.subset(chosen)).valid

    def features(self, state):
        g = self.graph
        n = self.n
        task = self.task
        chosen = set(state)
        f = np.zeros((n + 1, self.n_features))
        if task is TaskKind.DOMINATING_SET:
            dominated = set(chosen)
            for u in chosen:
                dominated |= g.adj[u]
        for v in range(n):
            if v in chosen:
                continue
            f[v, 1] = self._deg_norm[v]
            nb = g.adj[v]
            if task is TaskKind.VERTEX_COVER:
                f[v, 2] = sum(1 for u in nb if u not in chosen) / self._maxdeg
            elif task is TaskKind.DOMINATING_SET:
                f[v, 2] = len(({v} | nb) - dominated) / n
            elif task is TaskKind.MAX_CLIQUE:
                missing = sum(1 for u in chosen if u not in nb)
                f[v, 2] = 1.0 if missing == 0 else 0.0
                f[v, 3] = missing / n
            elif task is TaskKind.MAX_INDEPENDENT_SET:
                hits = sum(1 for u in chosen if u in nb)
                f[v, 2] = 1.0 if hits == 0 else 0.0
                f[v, 3] = hits / n
            else:  # feedback vertex set
                f[v, 2] = sum(1 for u in nb if u not in chosen) / self._maxdeg
        f[n, 0] = 1.0
        f[n, 4] = 1.0 if self._feasible(chosen) else 0.0
        f[n, 5] = len(chosen) / n
        return f

    def is_done(self, state):
        return bool(state) and state[-1] == self.stop

    def solution(self, state):
        return Solution.subset(a for a in state if a != self.stop)

    def state_key(self, state):
        return (frozenset(state), self.is_done(state))


class LabelingEnv(ConstructionEnv):
    family = "labeling"
    # same-label neighbour share, new label, label index, label share so far
    n_features = 4

    def __init__(self, task, graph, reference_value=None, n_labels: int | None = None):
        super().__init__(task, graph, reference_value)
        if self.task is TaskKind.GRAPH_COLORING:
            maxdeg = max((graph.degree(v) for v in range(self.n)), default=0)
            k = min(self.n, maxdeg + 1) if n_labels is None else n_labels
        else:
            k = 2 if n_labels is None else n_labels
            if k != 2:
                raise ValueError("cut tasks use exactly 2 labels")
        if k < 1:
            raise ValueError("need at least one label")
        self.n_labels = k
        self.n_actions = k

    @classmethod
    def for_instance(cls, inst: Instance, n_labels: int | None = None, **kw):
        return cls(inst.task, inst.graph, inst.reference.value, n_labels=n_labels)

    def legal(self, state):
        return [True] * self.n_labels

    def features(self, state):
        g = self.graph
        k = self.n_labels
        t = len(state)
        f = np.zeros((k, self.n_features))
        used = set(state)
        weighted = self.task is not TaskKind.GRAPH_COLORING
        total = 0.0
        same = [0.0] * k
        for u in g.adj[t]:
            if u < t:
                w = g.weight(t, u) if weighted else 1
                same[state[u]] += w
                total += w
        counts = [0] * k
        for a in state:
            counts[a] += 1
        for c in range(k):
            f[c, 0] = same[c] / total if total else 0.0
            f[c, 1] = 0.0 if c in used else 1.0
            f[c, 2] = c / (k - 1) if k > 1 else 0.0
            f[c, 3] = counts[c] / t if t else 0.0
        return f

    def is_done(self, state):
        return len(state) == self.n

    def solution(self, state):
        return Solution.labeling(state)


ENV_CLASSES = {"permutation": PermutationEnv, "subset": SubsetEnv, "labeling": LabelingEnv}


def make_env(inst: Instance, **kw) -> ConstructionEnv:
    return ENV_CLASSES[FAMILY_OF[inst.task]].for_instance(inst, **kw)


def family_features(family: str) -> int:
    return ENV_CLASSES[family].n_features


# --- policies ---------------------------------------------------------------


def masked_log_softmax(logits, mask) -> list[float]:
    """Log-probabilities with illegal entries set to -inf."""
    legal = [x for x, ok in zip(logits, mask) if ok]
    if not legal:
        raise ValueError("no legal action")
    m = max(legal)
    lse = m + math.log(math.fsum(math.exp(x - m) for x in legal))
    return [x - lse if ok else -math.inf for x, ok in zip(logits, mask)]


@dataclass
class LinearPolicy:
    """pi(a | s) proportional to exp(theta . features(s, a)) over legal actions."""

    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)

    @classmethod
    def zeros(cls, n_features: int) -> "LinearPolicy":
        return cls(np.zeros(n_features))

    def logits(self, feats: np.ndarray) -> list[float]:
        return (feats * self.theta).sum(axis=1).tolist()

    def step_distribution(self, env: ConstructionEnv, state):
        """(log-probs, probs, features) of the next action at ``state``."""
        feats = env.features(state)
        logp = masked_log_softmax(self.logits(feats), env.legal(state))
        probs = [math.exp(x) if x > -math.inf else 0.0 for x in logp]
        return logp, probs, feats


@dataclass(frozen=True)
class Trajectory:
    actions: tuple
    logp: np.ndarray
    solution: Solution
    entropy: np.ndarray

    @property
    def length(self) -> int:
        return len(self.actions)


def _entropy(logp, probs) -> float:
    return -math.fsum(p * lp for p, lp in zip(probs, logp) if p > 0.0)


def sample_trajectory(policy: LinearPolicy, env: ConstructionEnv, seed) -> Trajectory:
    """Roll out one episode; ``seed`` is an int or a SplitMix64 stream."""
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    state = env.initial_state()
    logps, ents = [], []
    while not env.is_done(state):
        logp, probs, _ = policy.step_distribution(env, state)
        a = rng.choice_index(probs)
        logps.append(logp[a])
        ents.append(_entropy(logp, probs))
        state = env.step(state, a)
    return Trajectory(state, np.array(logps), env.solution(state), np.array(ents))


def greedy_decode(policy: LinearPolicy, env: ConstructionEnv) -> Trajectory:
    """Most probable action at every step; ties go to the lowest action id."""
    state = env.initial_state()
    logps, ents = [], []
    while not env.is_done(state):
        logp, probs, _ = policy.step_distribution(env, state)
        a = max(range(len(logp)), key=lambda i: (logp[i], -i))
        logps.append(logp[a])
        ents.append(_entropy(logp, probs))
        state = env.step(state, a)
    return Trajectory(state, np.array(logps), env.solution(state), np.array(ents))


def log_prob_and_grad(policy: LinearPolicy, env: ConstructionEnv, traj: Trajectory):
    """Step log-probs of ``traj`` under the current ``policy.theta``.

    Returns (step log-probs, gradient of their sum, gradient of phi).
    """
    state = env.initial_state()
    logps = []
    grad = np.zeros_like(policy.theta)
    for a in traj.actions:
        if env.is_done(state):
            raise ValueError("trajectory continues past the end of the episode")
        logp, probs, feats = policy.step_distribution(env, state)
        if not 0 <= a < len(logp) or logp[a] == -math.inf:
            raise ValueError(f"illegal action {a} in trajectory")
        logps.append(logp[a])
        expected = (np.asarray(probs)[:, None] * feats).sum(axis=0)
        grad += feats[a] - expected
        state = env.step(state, a)
    if not env.is_done(state):
        raise ValueError("trajectory ends before the episode does")
    logps = np.array(logps)
    return logps, grad, grad / len(logps)


def enumerate_solutions(env: ConstructionEnv, limit: int = ENUMERATION_LIMIT):
    """Every distinct complete solution with its (verdict, QR, reward)."""
    n = env.n
    if env.family == "permutation":
        size = math.factorial(n)
    elif env.family == "subset":
        size = 2**n
    else:
        size = env.n_labels**n
    if size > limit:
        raise ValueError(f"solution space of {size} exceeds the limit {limit}")
    out = []
    if env.family == "permutation":
        from itertools import permutations

        sols = [Solution.tour(p) for p in permutations(range(n))]
    elif env.family == "subset":
        sols = [Solution.subset(v for v in range(n) if s >> v & 1) for s in range(2**n)]
    else:
        from itertools import product

        sols = [Solution.labeling(x) for x in product(range(env.n_labels), repeat=n)]
    for sol in sols:
        verdict, qr, r = env.score(sol)
        out.append((sol, verdict, qr, r))
    return out


def solution_distribution(policy: LinearPolicy, env: ConstructionEnv,
                          limit: int = ENUMERATION_LIMIT) -> dict:
    """Exact probability of each complete solution under ``policy``.

    Probabilities of all action sequences leading to the same solution are
    summed; states with equal ``state_key`` are merged on the way.
    """
    frontier = {env.state_key(env.initial_state()): (env.initial_state(), 1.0)}
    result: dict = {}
    visited = 0
    while frontier:
        nxt: dict = {}
        for state, prob in frontier.values():
            if env.is_done(state):
                sol = env.solution(state)
                result[sol] = result.get(sol, 0.0) + prob
                continue
            visited += 1
            if visited > 20 * limit:
                raise ValueError("state space too large for exact distribution")
            _, probs, _ = policy.step_distribution(env, state)
            for a, pa in enumerate(probs):
                if pa == 0.0:
                    continue
                s2 = env.step(state, a)
                key = env.state_key(s2)
                if key in nxt:
                    nxt[key] = (nxt[key][0], nxt[key][1] + prob * pa)
                else:
                    nxt[key] = (s2, prob * pa)
        frontier = nxt
    return result


# --- bandit -----------------------------------------------------------------


@dataclass
class BanditPolicy:
    """Tabular softmax over an enumerated solution set (one-step episodes)."""

    logits: np.ndarray

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=float).reshape(-1)

    @property
    def theta(self) -> np.ndarray:
        return self.logits

    def probs(self) -> np.ndarray:
        from .dmpo import softmax

        return softmax(self.logits)

    def log_probs(self) -> list[float]:
        return masked_log_softmax(self.logits.tolist(), [True] * self.logits.size)

    def sample(self, rng: SplitMix64) -> int:
        return rng.choice_index(self.probs().tolist())

    def log_prob_and_grad(self, a: int):
        """(log pi(a), gradient of log pi(a) in the logits)."""
        p = self.probs()
        grad = -p
        grad[a] += 1.0
        return self.log_probs()[a], grad
