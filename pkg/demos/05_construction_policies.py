"""Step-wise construction environments and the linear softmax policy."""

# %%
import numpy as np

from dmpo_bench.core import GenParams, TaskKind
from dmpo_bench.generators import generate
from dmpo_bench.policy import (
    LinearPolicy, greedy_decode, make_env, sample_trajectory, solution_distribution,
)

# %% one environment per family
for task in (TaskKind.TSP, TaskKind.DOMINATING_SET, TaskKind.GRAPH_COLORING):
    env = make_env(generate(task, GenParams(n=5, density=0.5), seed=2))
    pol = LinearPolicy.zeros(env.n_features)
    tr = sample_trajectory(pol, env, 7)
    verdict, qr, reward = env.score(tr.solution)
    print(f"{type(env).__name__:15s} actions={tr.actions} valid={verdict.valid} reward={float(reward):.3f}")

# %% exact solution distribution of a random policy, and its greedy decode
env = make_env(generate(TaskKind.MAX_CUT, GenParams(n=5, density=0.6), seed=3))
pol = LinearPolicy(np.array([0.5, -0.2, 1.0, 0.3]))
dist = solution_distribution(pol, env)
top = sorted(dist.items(), key=lambda kv: -kv[1])[:3]
for sol, p in top:
    print(sol.data, f"{p:.4f}", env.score(sol)[2])
print("greedy", greedy_decode(pol, env).solution.data)
