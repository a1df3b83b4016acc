"""Train GRPO and DMPO policies on a small TSP set and compare logs."""

# %%
from dataclasses import replace

from dmpo_bench.core import GenParams, TaskKind
from dmpo_bench.generators import generate_batch
from dmpo_bench.trainer import TrainConfig, train

insts = generate_batch(TaskKind.TSP, GenParams(n=6, count=8), master_seed=2)
base = TrainConfig(iterations=100, group_size=8, lr=0.5, seed=0)

# %%
for objective in ("grpo", "dmpo"):
    policies, log = train(replace(base, objective=objective), insts)
    r = log.column("mean_reward")
    print(f"{objective}: mean reward first 10 = {r[:10].mean():.3f}, last 10 = {r[-10:].mean():.3f}")
    print("  theta", policies.policies["permutation"].theta.round(3))

# %% the first lines of the CSV log
print("\n".join(log.to_csv().splitlines()[:3]))
