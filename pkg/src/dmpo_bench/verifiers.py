"""Rule-based verifiers for the ten benchmark tasks.

``verify`` is the production checker (adjacency sets, DFS, linear scans).
``brute_force_verify`` re-derives every verdict from an adjacency matrix
with naive exhaustive checks and shares no code with ``verify``; the two
are compared in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Graph, InstanceError, Solution, TaskKind

BRUTE_FORCE_MAX_N = 12


class StructuralError(InstanceError):
    """The solution is the wrong union arm or references unknown vertices."""


@dataclass(frozen=True)
class Verdict:
    valid: bool
    objective: Fraction | None = None
    reason: str | None = None

    def __post_init__(self):
        if self.valid and (self.objective is None or self.reason is not None):
            raise ValueError("a valid verdict carries an objective and no reason")
        if not self.valid and (self.objective is not None or self.reason is None):
            raise ValueError("an invalid verdict carries a reason and no objective")

    @classmethod
    def ok(cls, objective) -> "Verdict":
        return cls(True, Fraction(objective), None)

    @classmethod
    def fail(cls, reason: str) -> "Verdict":
        return cls(False, None, reason)

    def to_json(self) -> dict:
        from .core import format_rational

        if self.valid:
            return {"valid": True, "objective": format_rational(self.objective)}
        return {"valid": False, "reason": self.reason}


def _check_arm(task: TaskKind, graph: Graph, sol: Solution) -> None:
    if not isinstance(sol, Solution):
        raise StructuralError(f"expected a Solution, got {type(sol).__name__}")
    if sol.kind != task.solution_kind:
        raise StructuralError(f"{task.value} expects a {task.solution_kind}, got a {sol.kind}")
    try:
        sol.check_structure(graph.n)
    except StructuralError:
        raise
    except InstanceError as exc:
        raise StructuralError(str(exc)) from None


def _has_cycle(n: int, adj, removed: set) -> bool:
    """Iterative DFS cycle detection on the undirected graph minus ``removed``."""
    state = [0] * n  # 0 unseen, 1 on stack / seen
    for root in range(n):
        if root in removed or state[root]:
            continue
        state[root] = 1
        stack = [(root, -1)]
        while stack:
            u, parent = stack.pop()
            for v in adj[u]:
                if v in removed or v == parent:
                    continue
                if state[v]:
                    return True
                state[v] = 1
                stack.append((v, u))
    return False


def _tour_check(graph: Graph, tour: tuple, need_all: bool) -> str | None:
    n = graph.n
    if need_all and len(tour) != n:
        return f"tour visits {len(tour)} vertices, expected {n}"
    if len(set(tour)) != len(tour):
        return "tour repeats a vertex"
    if len(tour) < 3:
        return "cycle needs at least 3 vertices"
    for i, u in enumerate(tour):
        v = tour[(i + 1) % len(tour)]
        if not graph.has_edge(u, v):
            return f"missing edge ({u}, {v})"
    return None


def verify(task: TaskKind, graph: Graph, sol: Solution) -> Verdict:
    """Check ``sol`` against ``task`` on ``graph``.

    Raises StructuralError for the wrong solution kind or out-of-range ids;
    semantic violations come back as an invalid Verdict.
    """
    task = TaskKind(task)
    _check_arm(task, graph, sol)
    data = sol.data
    adj = graph.adj

    if task is TaskKind.TSP:
        bad = _tour_check(graph, data, need_all=True)
        if bad:
            return Verdict.fail(bad)
        units = sum(graph.weight(data[i], data[(i + 1) % len(data)]) for i in range(len(data)))
        return Verdict.ok(graph.to_rational(units))

    if task is TaskKind.HAMILTONIAN_CYCLE:
        bad = _tour_check(graph, data, need_all=False)
        if bad:
            return Verdict.fail(bad)
        return Verdict.ok(len(data))

    if task is TaskKind.VERTEX_COVER:
        chosen = set(data)
        for u, v, _ in graph.edges:
            if u not in chosen and v not in chosen:
                return Verdict.fail(f"edge ({u}, {v}) is uncovered")
        return Verdict.ok(len(chosen))

    if task is TaskKind.DOMINATING_SET:
        dominated = set(data)
        for v in data:
            dominated.update(adj[v])
        if len(dominated) != graph.n:
            missing = min(set(range(graph.n)) - dominated)
            return Verdict.fail(f"vertex {missing} is not dominated")
        return Verdict.ok(len(data))

    if task in (TaskKind.MIN_CUT, TaskKind.MAX_CUT):
        if any(x not in (0, 1) for x in data):
            return Verdict.fail("cut labels must be 0 or 1")
        ones = sum(data)
        if ones == 0 or ones == graph.n:
            return Verdict.fail("empty partition side")
        units = sum(w for u, v, w in graph.edges if data[u] != data[v])
        return Verdict.ok(graph.to_rational(units))

    if task is TaskKind.MAX_CLIQUE:
        if not data:
            return Verdict.fail("clique is empty")
        for i, u in enumerate(data):
            for v in data[i + 1:]:
                if v not in adj[u]:
                    return Verdict.fail(f"vertices {u} and {v} are not adjacent")
        return Verdict.ok(len(data))

    if task is TaskKind.MAX_INDEPENDENT_SET:
        if not data:
            return Verdict.fail("independent set is empty")
        chosen = set(data)
        for u, v, _ in graph.edges:
            if u in chosen and v in chosen:
                return Verdict.fail(f"vertices {u} and {v} are adjacent")
        return Verdict.ok(len(data))

    if task is TaskKind.GRAPH_COLORING:
        for u, v, _ in graph.edges:
            if data[u] == data[v]:
                return Verdict.fail(f"adjacent vertices share color ({u}, {v})")
        return Verdict.ok(len(set(data)))

    if task is TaskKind.FEEDBACK_VERTEX_SET:
        if _has_cycle(graph.n, adj, set(data)):
            return Verdict.fail("remaining graph contains a cycle")
        return Verdict.ok(len(data))

    raise AssertionError(f"unhandled task {task}")


# --- independent oracle -----------------------------------------------------


def _matrix(graph: Graph):
    n = graph.n
    w = [[None] * n for _ in range(n)]
    for e in graph.edges:
        a, b, c = e
        w[a][b] = c
        w[b][a] = c
    return w


def _is_forest(n, w, keep) -> bool:
    # a graph is a forest iff edges == vertices - components
    keep = sorted(keep)
    reach = {u: {u} for u in keep}
    changed = True
    while changed:
        changed = False
        for u in keep:
            for v in keep:
                if w[u][v] is not None and not reach[v] <= reach[u]:
                    reach[u] |= reach[v]
                    changed = True
    components = len({frozenset(r) for r in reach.values()})
    edges = sum(1 for i in keep for j in keep if i < j and w[i][j] is not None)
    return edges == len(keep) - components


def brute_force_verify(task: TaskKind, graph: Graph, sol: Solution) -> Verdict:
    """Naive re-implementation of :func:`verify` for graphs with n <= 12."""
    task = TaskKind(task)
    n = graph.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute_force_verify is limited to n <= {BRUTE_FORCE_MAX_N}")
    expected = {"tsp": "tour", "hamiltonian_cycle": "tour", "min_cut": "labeling",
                "max_cut": "labeling", "graph_coloring": "labeling"}.get(task.value, "subset")
    if sol.kind != expected:
        raise StructuralError(f"wrong solution kind {sol.kind} for {task.value}")
    items = list(sol.data)
    if expected == "labeling":
        if len(items) != n or min(items, default=0) < 0:
            raise StructuralError("bad labeling")
    elif any(x < 0 or x >= n for x in items):
        raise StructuralError("vertex out of range")

    w = _matrix(graph)
    scale = graph.weight_scale

    if expected == "tour":
        k = len(items)
        if task is TaskKind.TSP and sorted(items) != list(range(n)):
            return Verdict.fail("not a permutation of all vertices")
        if k < 3 or len(set(items)) < k:
            return Verdict.fail("not a simple cycle")
        total = 0
        for a, b in zip(items, items[1:] + items[:1]):
            if w[a][b] is None:
                return Verdict.fail("consecutive vertices not adjacent")
            total += w[a][b]
        if task is TaskKind.TSP:
            return Verdict.ok(Fraction(total, scale))
        return Verdict.ok(k)

    if task in (TaskKind.MIN_CUT, TaskKind.MAX_CUT):
        if set(items) - {0, 1}:
            return Verdict.fail("non-binary label")
        if len(set(items)) < 2:
            return Verdict.fail("empty partition side")
        total = 0
        for i in range(n):
            for j in range(i + 1, n):
                if w[i][j] is not None and items[i] != items[j]:
                    total += w[i][j]
        return Verdict.ok(Fraction(total, scale))

    if task is TaskKind.GRAPH_COLORING:
        for i in range(n):
            for j in range(n):
                if i != j and w[i][j] is not None and items[i] == items[j]:
                    return Verdict.fail("monochromatic edge")
        return Verdict.ok(len(set(items)))

    chosen = set(items)
    size = len(chosen)
    if task is TaskKind.VERTEX_COVER:
        ok = all(i in chosen or j in chosen
                 for i in range(n) for j in range(n) if w[i][j] is not None)
        return Verdict.ok(size) if ok else Verdict.fail("uncovered edge")
    if task is TaskKind.DOMINATING_SET:
        ok = all(v in chosen or any(w[v][u] is not None for u in chosen) for v in range(n))
        return Verdict.ok(size) if ok else Verdict.fail("undominated vertex")
    if task is TaskKind.MAX_CLIQUE:
        ok = size > 0 and all(w[i][j] is not None for i in chosen for j in chosen if i != j)
        return Verdict.ok(size) if ok else Verdict.fail("not a clique")
    if task is TaskKind.MAX_INDEPENDENT_SET:
        ok = size > 0 and all(w[i][j] is None for i in chosen for j in chosen)
        return Verdict.ok(size) if ok else Verdict.fail("not independent")
    if task is TaskKind.FEEDBACK_VERTEX_SET:
        keep = [v for v in range(n) if v not in chosen]
        ok = _is_forest(n, w, keep)
        return Verdict.ok(size) if ok else Verdict.fail("cycle remains")
    raise AssertionError(f"unhandled task {task}")
