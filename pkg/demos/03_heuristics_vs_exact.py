"""Compare the heuristic reference solvers with exact oracles."""

# %%
from dmpo_bench.core import GenParams, TaskKind
from dmpo_bench.generators import generate
from dmpo_bench.solvers import solve_exact, solve_heuristic

# %%
for task in TaskKind:
    gaps = []
    for seed in range(10):
        inst = generate(task, GenParams(n=9, density=0.4, planted=True), seed)
        h = solve_heuristic(task, inst.graph, seed)
        e = solve_exact(task, inst.graph)
        gaps.append(h.value == e.value)
    print(f"{task.value:22s} heuristic optimal on {sum(gaps)}/10 ({h.algorithm} vs {e.algorithm})")
