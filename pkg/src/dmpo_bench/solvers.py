"""Heuristic reference solvers and exact small-instance oracles.

``solve_heuristic`` reproduces the reference-solver table of the benchmark
(DSATUR, Stoer-Wagner, Bron-Kerbosch, 2-opt, greedy variants).  Every
heuristic breaks ties with a seed-derived vertex ranking, so the result is
a pure function of (graph, seed).

``solve_exact`` enumerates subsets / labelings (n <= 12) or runs Held-Karp
style dynamic programs (tours, n <= 10 for TSP) and is used only as a test
oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import Graph, Solution, TaskKind
from .rng import SplitMix64
from .verifiers import verify

EXACT_MAX_N = 12
EXACT_TSP_MAX_N = 10
HAMILTONIAN_BUDGET = 10**6


class SolverError(RuntimeError):
    pass


class SizeGuardError(SolverError, ValueError):
    pass


@dataclass(frozen=True)
class SolverResult:
    value: Fraction
    solution: Solution
    algorithm: str
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        from .core import format_rational

        return {
            "value": format_rational(self.value),
            "solution": self.solution.to_json(),
            "algorithm": self.algorithm,
            "meta": dict(self.meta),
        }


def _rank(n: int, seed: int) -> list[int]:
    """rank[v]: seed-derived tie-break priority (lower wins)."""
    order = SplitMix64(seed).permutation(n)
    rank = [0] * n
    for pos, v in enumerate(order):
        rank[v] = pos
    return rank


def _finish(task, graph, sol, algorithm, **meta) -> SolverResult:
    verdict = verify(task, graph, sol)
    if not verdict.valid:
        raise SolverError(f"{algorithm} produced an invalid solution: {verdict.reason}")
    return SolverResult(verdict.objective, sol, algorithm, meta)


# --- heuristics -------------------------------------------------------------


def dsatur(graph: Graph, seed: int = 0) -> list[int]:
    """DSATUR greedy coloring; returns a label per vertex."""
    n = graph.n
    adj = graph.adj
    rank = _rank(n, seed)
    colors = [-1] * n
    neighbor_colors = [set() for _ in range(n)]
    for _ in range(n):
        v = max(
            (u for u in range(n) if colors[u] < 0),
            key=lambda u: (len(neighbor_colors[u]), len(adj[u]), -rank[u]),
        )
        c = 0
        while c in neighbor_colors[v]:
            c += 1
        colors[v] = c
        for u in adj[v]:
            neighbor_colors[u].add(c)
    return colors


def _acyclic_without(graph: Graph, removed: set) -> bool:
    from .verifiers import _has_cycle

    return not _has_cycle(graph.n, graph.adj, removed)


def greedy_fvs(graph: Graph, seed: int = 0) -> tuple[list[int], int]:
    """Highest-degree removal until acyclic, then drop redundant vertices.

    Returns (chosen vertices, number pruned in the redundancy pass).
    """
    n = graph.n
    rank = _rank(n, seed)
    removed: set = set()
    chosen: list[int] = []
    while not _acyclic_without(graph, removed):
        alive = set(range(n)) - removed
        deg = {v: len(graph.adj[v] & alive) for v in alive}
        # vertices of degree <= 1 cannot lie on a cycle; peel them first
        peel = [v for v in alive if deg[v] <= 1]
        while peel:
            v = peel.pop()
            if v not in alive:
                continue
            alive.discard(v)
            for u in graph.adj[v]:
                if u in alive:
                    deg[u] -= 1
                    if deg[u] <= 1:
                        peel.append(u)
        v = max(alive, key=lambda u: (deg[u], -rank[u]))
        removed.add(v)
        chosen.append(v)
    pruned = 0
    for v in reversed(list(chosen)):
        trial = removed - {v}
        if _acyclic_without(graph, trial):
            removed = trial
            pruned += 1
    return sorted(removed), pruned


def matching_vertex_cover(graph: Graph, seed: int = 0) -> list[int]:
    """Both endpoints of a maximal matching (2-approximation)."""
    edges = list(graph.edges)
    SplitMix64(seed).shuffle(edges)
    covered: set = set()
    for u, v, _ in edges:
        if u not in covered and v not in covered:
            covered.add(u)
            covered.add(v)
    return sorted(covered)


def greedy_dominating_set(graph: Graph, seed: int = 0) -> list[int]:
    """Repeatedly take the vertex that dominates the most new vertices."""
    n = graph.n
    rank = _rank(n, seed)
    closed = [set(graph.adj[v]) | {v} for v in range(n)]
    undominated = set(range(n))
    chosen = []
    while undominated:
        v = max(range(n), key=lambda u: (len(closed[u] & undominated), -rank[u]))
        chosen.append(v)
        undominated -= closed[v]
    return sorted(chosen)


def stoer_wagner(graph: Graph) -> tuple[int, list[int]]:
    """Exact global minimum cut; returns (cut weight units, 0/1 labeling)."""
    n = graph.n
    if n < 2:
        raise SolverError("min cut needs at least two vertices")
    if not graph.is_connected():
        raise SolverError("min cut requires a connected graph")
    w = [[0] * n for _ in range(n)]
    for u, v, c in graph.edges:
        w[u][v] += c
        w[v][u] += c
    groups = [[v] for v in range(n)]
    active = list(range(n))
    best_value = None
    best_side: list[int] = []
    while len(active) > 1:
        # maximum adjacency ordering; ties go to the lowest vertex id
        added = [active[0]]
        conn = {v: w[active[0]][v] for v in active[1:]}
        prev = active[0]
        last = active[0]
        while conn:
            nxt = max(conn, key=lambda v: (conn[v], -v))
            cut_of_phase = conn.pop(nxt)
            prev, last = last, nxt
            added.append(nxt)
            for v in conn:
                conn[v] += w[nxt][v]
        if best_value is None or cut_of_phase < best_value:
            best_value = cut_of_phase
            best_side = list(groups[last])
        # merge last into prev
        groups[prev].extend(groups[last])
        for v in active:
            w[prev][v] += w[last][v]
            w[v][prev] = w[prev][v]
        w[prev][prev] = 0
        active.remove(last)
    labels = [0] * n
    for v in best_side:
        labels[v] = 1
    return best_value, labels


def local_search_max_cut(graph: Graph, seed: int = 0) -> tuple[list[int], int]:
    """Single-vertex flips from a random start until no flip improves the cut."""
    n = graph.n
    rng = SplitMix64(seed)
    labels = [rng.randbelow(2) for _ in range(n)]
    nbrs = [[(v, graph.weight(u, v)) for v in sorted(graph.adj[u])] for u in range(n)]
    flips = 0
    improved = True
    while improved:
        improved = False
        for u in range(n):
            same = sum(c for v, c in nbrs[u] if labels[v] == labels[u])
            other = sum(c for v, c in nbrs[u] if labels[v] != labels[u])
            if same > other:
                labels[u] ^= 1
                flips += 1
                improved = True
    if len(set(labels)) < 2:
        # only reachable when every edge weight is zero
        labels[0] ^= 1
    return labels, flips


def bron_kerbosch_max_clique(graph: Graph, seed: int = 0) -> tuple[list[int], int]:
    """Maximum clique by Bron-Kerbosch with Tomita pivoting and size pruning.

    Returns (clique, number of recursive calls).
    """
    adj = graph.adj
    rank = _rank(graph.n, seed)
    best: list = []
    calls = 0

    def expand(r: list, p: set, x: set):
        nonlocal best, calls
        calls += 1
        if not p and not x:
            if len(r) > len(best):
                best = list(r)
            return
        if len(r) + len(p) <= len(best):
            return
        pivot = max(p | x, key=lambda u: (len(adj[u] & p), -rank[u]))
        for v in sorted(p - adj[pivot], key=lambda u: rank[u]):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand([], set(range(graph.n)), set())
    if not best and graph.n:
        best = [min(range(graph.n), key=lambda u: rank[u])]
    return sorted(best), calls


def min_degree_independent_set(graph: Graph, seed: int = 0) -> list[int]:
    """Pick a minimum-degree vertex, delete it with its neighbours, repeat."""
    rank = _rank(graph.n, seed)
    alive = set(range(graph.n))
    chosen = []
    while alive:
        v = min(alive, key=lambda u: (len(graph.adj[u] & alive), rank[u]))
        chosen.append(v)
        alive -= graph.adj[v] | {v}
    return sorted(chosen)


def nearest_neighbor_tour(graph: Graph, start: int, seed: int = 0) -> list[int]:
    rank = _rank(graph.n, seed)
    tour = [start]
    left = set(range(graph.n)) - {start}
    while left:
        u = tour[-1]
        v = min(left, key=lambda x: (graph.weight(u, x), rank[x]))
        tour.append(v)
        left.discard(v)
    return tour


def two_opt(graph: Graph, tour: list[int]) -> tuple[list[int], int]:
    """First-improvement 2-opt, scanning (i asc, j asc); returns (tour, moves)."""
    tour = list(tour)
    n = len(tour)
    d = graph.weight
    moves = 0
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a, b = tour[i], tour[i + 1]
                c, e = tour[j], tour[(j + 1) % n]
                delta = d(a, c) + d(b, e) - d(a, b) - d(c, e)
                if delta < 0:
                    tour[i + 1:j + 1] = reversed(tour[i + 1:j + 1])
                    moves += 1
                    improved = True
    return tour, moves


def longest_cycle_dfs(graph: Graph, seed: int = 0, budget: int = HAMILTONIAN_BUDGET):
    """Longest simple cycle by pruned DFS under a node-expansion budget.

    Each cycle is searched from its minimum vertex only.  Returns
    (cycle or None, expansions, exhausted_flag).
    """
    n = graph.n
    adj = graph.adj
    rank = _rank(n, seed)
    best: list = []
    expansions = 0
    exhausted = False
    order = sorted(range(n), key=lambda v: rank[v])

    for start in order:
        if len(best) == n or exhausted:
            break
        allowed = {v for v in range(n) if v > start} | {start}
        # vertices of the start's component restricted to `allowed`
        reach = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in allowed and v not in reach:
                    reach.add(v)
                    stack.append(v)
        if len(reach) <= max(len(best), 2):
            continue
        path = [start]
        on_path = {start}

        def dfs(u):
            nonlocal best, expansions, exhausted
            if exhausted or len(best) == len(reach):
                return
            expansions += 1
            if expansions > budget:
                exhausted = True
                return
            if len(path) >= 3 and start in adj[u] and len(path) > len(best):
                best = list(path)
            if len(reach) <= len(best):
                return
            for v in sorted(adj[u], key=lambda x: (len(adj[x]), rank[x])):
                if v in reach and v not in on_path:
                    path.append(v)
                    on_path.add(v)
                    dfs(v)
                    path.pop()
                    on_path.discard(v)

        dfs(start)
    return (best or None), expansions, exhausted


def solve_heuristic(task, graph: Graph, seed: int = 0) -> SolverResult:
    task = TaskKind(task)

    if task is TaskKind.GRAPH_COLORING:
        return _finish(task, graph, Solution.labeling(dsatur(graph, seed)), "dsatur")

    if task is TaskKind.FEEDBACK_VERTEX_SET:
        chosen, pruned = greedy_fvs(graph, seed)
        return _finish(task, graph, Solution.subset(chosen), "greedy_high_degree+prune",
                       pruned=pruned)

    if task is TaskKind.VERTEX_COVER:
        return _finish(task, graph, Solution.subset(matching_vertex_cover(graph, seed)),
                       "maximal_matching_2approx")

    if task is TaskKind.DOMINATING_SET:
        return _finish(task, graph, Solution.subset(greedy_dominating_set(graph, seed)),
                       "greedy_max_coverage")

    if task is TaskKind.MIN_CUT:
        _, labels = stoer_wagner(graph)
        return _finish(task, graph, Solution.labeling(labels), "stoer_wagner")

    if task is TaskKind.MAX_CUT:
        if not graph.is_connected():
            raise SolverError("max cut requires a connected graph")
        labels, flips = local_search_max_cut(graph, seed)
        return _finish(task, graph, Solution.labeling(labels), "greedy_local_search", flips=flips)

    if task is TaskKind.MAX_CLIQUE:
        clique, calls = bron_kerbosch_max_clique(graph, seed)
        return _finish(task, graph, Solution.subset(clique), "bron_kerbosch_tomita", calls=calls)

    if task is TaskKind.MAX_INDEPENDENT_SET:
        return _finish(task, graph, Solution.subset(min_degree_independent_set(graph, seed)),
                       "min_degree_greedy")

    if task is TaskKind.TSP:
        if graph.m != graph.n * (graph.n - 1) // 2:
            raise SolverError("TSP requires a complete graph")
        start = _rank(graph.n, seed).index(0)
        tour, moves = two_opt(graph, nearest_neighbor_tour(graph, start, seed))
        return _finish(task, graph, Solution.tour(tour), "nearest_neighbor+2opt", moves=moves)

    if task is TaskKind.HAMILTONIAN_CYCLE:
        cycle, expansions, exhausted = longest_cycle_dfs(graph, seed)
        if cycle is None:
            raise SolverError("graph has no cycle within the search budget")
        return _finish(task, graph, Solution.tour(cycle), "dfs_longest_cycle",
                       expansions=expansions, budget_exhausted=exhausted)

    raise AssertionError(task)


# --- exact oracles ----------------------------------------------------------


def _masks(graph: Graph):
    nb = [0] * graph.n
    for u, v, _ in graph.edges:
        nb[u] |= 1 << v
        nb[v] |= 1 << u
    return nb


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _forest_mask(graph: Graph, keep: int) -> bool:
    parent = list(range(graph.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, _ in graph.edges:
        if keep >> u & 1 and keep >> v & 1:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
    return True


def _exact_subset(task: TaskKind, graph: Graph) -> list[int]:
    n = graph.n
    nb = _masks(graph)
    full = (1 << n) - 1

    def feasible(s: int) -> bool:
        if task is TaskKind.VERTEX_COVER:
            return all(s >> u & 1 or s >> v & 1 for u, v, _ in graph.edges)
        if task is TaskKind.DOMINATING_SET:
            dom = s
            for v in _bits(s):
                dom |= nb[v]
            return dom == full
        if task is TaskKind.MAX_CLIQUE:
            return s != 0 and all((nb[v] | 1 << v) & s == s for v in _bits(s))
        if task is TaskKind.MAX_INDEPENDENT_SET:
            return s != 0 and all(nb[v] & s == 0 for v in _bits(s))
        if task is TaskKind.FEEDBACK_VERTEX_SET:
            return _forest_mask(graph, full & ~s)
        raise AssertionError(task)

    # enumerate by size so the first hit is optimal
    sizes = range(n, -1, -1) if task.maximize else range(0, n + 1)
    by_size: dict = {}
    for s in range(1 << n):
        by_size.setdefault(bin(s).count("1"), []).append(s)
    for k in sizes:
        for s in by_size.get(k, []):
            if feasible(s):
                return _bits(s)
    raise SolverError(f"no feasible {task.value} solution")


def _exact_cut(task: TaskKind, graph: Graph) -> list[int]:
    n = graph.n
    best = None
    best_labels = None
    # vertex n-1 fixed to side 0 removes the mirror symmetry
    for s in range(1, 1 << (n - 1)):
        labels = [s >> i & 1 for i in range(n)]
        value = sum(w for u, v, w in graph.edges if labels[u] != labels[v])
        if best is None or (value > best if task.maximize else value < best):
            best, best_labels = value, labels
    if best_labels is None:
        raise SolverError("cut needs at least two vertices")
    return best_labels


def _exact_coloring(graph: Graph) -> list[int]:
    n = graph.n
    nb = _masks(graph)
    full = (1 << n) - 1
    independent = [True] * (1 << n)
    for s in range(1, 1 << n):
        low = (s & -s).bit_length() - 1
        rest = s & ~(1 << low)
        independent[s] = independent[rest] and not (nb[low] & rest)
    inf = n + 1
    best = [inf] * (1 << n)
    choice = [0] * (1 << n)
    best[0] = 0
    for s in range(1, 1 << n):
        low = s & -s
        rest = s & ~low
        # enumerate the colour class that contains the lowest vertex of s
        sub = rest
        while True:
            cls = sub | low
            if independent[cls] and best[s & ~cls] + 1 < best[s]:
                best[s] = best[s & ~cls] + 1
                choice[s] = cls
            if sub == 0:
                break
            sub = (sub - 1) & rest
    labels = [0] * n
    s, c = full, 0
    while s:
        for v in _bits(choice[s]):
            labels[v] = c
        s &= ~choice[s]
        c += 1
    return labels


def _held_karp(graph: Graph) -> list[int]:
    n = graph.n
    d = [[0 if i == j else graph.weight(i, j) for j in range(n)] for i in range(n)]
    # paths start at vertex 0; dp[(mask, j)] over masks of vertices 1..n-1
    dp = {(1 << j, j): (d[0][j], 0) for j in range(1, n)}
    for size in range(2, n):
        for mask in range(1, 1 << n):
            if mask & 1 or bin(mask).count("1") != size:
                continue
            for j in _bits(mask):
                prev = mask & ~(1 << j)
                dp[(mask, j)] = min((dp[(prev, k)][0] + d[k][j], k) for k in _bits(prev))
    full = ((1 << n) - 1) & ~1
    cost, last = min((dp[(full, j)][0] + d[j][0], j) for j in range(1, n))
    tour = []
    mask = full
    while last != 0:
        tour.append(last)
        _, prev = dp[(mask, last)]
        mask &= ~(1 << last)
        last = prev
    tour.append(0)
    return tour[::-1]


def _exact_longest_cycle(graph: Graph) -> list[int] | None:
    n = graph.n
    nb = _masks(graph)
    best = None
    for start in range(n):
        # reachable[mask][v]: a simple path start -> v covering mask, all ids >= start
        parent: dict = {(1 << start, start): None}
        frontier = [(1 << start, start)]
        while frontier:
            nxt = []
            for mask, v in frontier:
                if bin(mask).count("1") >= 3 and nb[v] >> start & 1:
                    if best is None or bin(mask).count("1") > len(best):
                        path = []
                        key = (mask, v)
                        while key is not None:
                            path.append(key[1])
                            key = parent[key]
                        best = path[::-1]
                for u in _bits(nb[v]):
                    if u > start and not mask >> u & 1:
                        key = (mask | 1 << u, u)
                        if key not in parent:
                            parent[key] = (mask, v)
                            nxt.append(key)
            frontier = nxt
    return best


def solve_exact(task, graph: Graph) -> SolverResult:
    task = TaskKind(task)
    n = graph.n
    limit = EXACT_TSP_MAX_N if task is TaskKind.TSP else EXACT_MAX_N
    if n > limit:
        raise SizeGuardError(f"exact {task.value} is limited to n <= {limit}, got {n}")

    if task is TaskKind.TSP:
        if graph.m != n * (n - 1) // 2:
            raise SolverError("TSP requires a complete graph")
        sol = Solution.tour(_held_karp(graph))
        return _finish(task, graph, sol, "held_karp")
    if task is TaskKind.HAMILTONIAN_CYCLE:
        cycle = _exact_longest_cycle(graph)
        if cycle is None:
            raise SolverError("graph has no cycle")
        return _finish(task, graph, Solution.tour(cycle), "exhaustive_longest_cycle")
    if task in (TaskKind.MIN_CUT, TaskKind.MAX_CUT):
        if not graph.is_connected():
            raise SolverError("cut tasks require a connected graph")
        return _finish(task, graph, Solution.labeling(_exact_cut(task, graph)), "exhaustive_cut")
    if task is TaskKind.GRAPH_COLORING:
        return _finish(task, graph, Solution.labeling(_exact_coloring(graph)), "subset_dp_coloring")
    return _finish(task, graph, Solution.subset(_exact_subset(task, graph)), "exhaustive_subset")
