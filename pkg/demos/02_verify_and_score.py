"""Verify candidate answers and turn verdicts into SR / QR metrics."""

# %%
from dmpo_bench.core import GenParams, Solution, TaskKind
from dmpo_bench.generators import generate
from dmpo_bench.metrics import EvalReport, quality_ratio
from dmpo_bench.verifiers import brute_force_verify, verify

inst = generate(TaskKind.VERTEX_COVER, GenParams(n=7, density=0.4), seed=5)
ref = inst.reference

# %% the reference is a 2-approximation, so dropping a vertex may still leave a cover
print(verify(inst.task, inst.graph, ref.solution))
smaller = Solution.subset(list(ref.solution.data)[1:])
print(verify(inst.task, inst.graph, smaller))

# %% the fast verifier agrees with the exhaustive one
print(brute_force_verify(inst.task, inst.graph, smaller))

# %% quality ratio is V*/V for minimization and 0 for invalid answers
report = EvalReport()
for sol in (ref.solution, smaller, Solution.subset(range(7))):
    v = verify(inst.task, inst.graph, sol)
    qr = quality_ratio(inst.task, v.objective or 0, ref.value, v.valid)
    report.add(inst.task, v, qr)
    print(sol.data, v.valid, float(qr))
print(report.to_json())
print(report.to_csv(label="demo"))
