"""Generate seeded instances for every task and inspect one of them."""

# %%
from dmpo_bench.core import GenParams, TaskKind, serialize_instance
from dmpo_bench.generators import generate, generate_batch, generate_suite

# %% one instance per task; the seed fixes graph, prompt and reference
for task in TaskKind:
    inst = generate(task, GenParams(n=8, density=0.4, planted=True), seed=1)
    print(f"{task.value:22s} n={inst.graph.n} m={inst.graph.m:2d} "
          f"reference={inst.reference.value} via {inst.reference.solver}")

# %% the prompt text and the canonical JSON form
inst = generate(TaskKind.TSP, GenParams(n=5), seed=3)
print(inst.prompt)
print(serialize_instance(inst)[:160], b"...")

# %% batches derive per-instance seeds from a master seed
batch = generate_batch(TaskKind.MAX_CUT, GenParams(n=7, count=3), master_seed=42)
print([i.id for i in batch])

# %% the checked-in "test" suite: 100 instances per task
suite = generate_suite("test", master_seed=0)
print(len(suite), "instances in the test suite")
