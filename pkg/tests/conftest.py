"""Shared helpers: random candidate solutions for verifier comparisons."""

from dmpo_bench.core import Solution, TaskKind
from dmpo_bench.rng import SplitMix64


def random_candidate(task: TaskKind, inst, rng: SplitMix64) -> Solution:
    """A structurally well-formed candidate, valid or not.

    Half the draws perturb the reference solution so that valid and
    near-valid answers are common; the rest are uniform random.
    """
    g = inst.graph
    n = g.n
    ref = list(inst.reference.solution.data)
    near = rng.random() < 0.5
    kind = task.solution_kind
    if kind == "tour":
        if near:
            tour = ref[:]
            r = rng.randbelow(4)
            if r == 1 and len(tour) > 1:
                i, j = rng.randbelow(len(tour)), rng.randbelow(len(tour))
                tour[i], tour[j] = tour[j], tour[i]
            elif r == 2 and tour:
                tour.pop(rng.randbelow(len(tour)))
            elif r == 3 and tour:
                tour.append(tour[rng.randbelow(len(tour))])
            return Solution.tour(tour)
        perm = rng.permutation(n)
        if task is TaskKind.TSP and rng.random() < 0.7:
            return Solution.tour(perm)
        return Solution.tour(perm[: rng.randint(0, n)])
    if kind == "subset":
        if near:
            s = set(ref)
            for _ in range(rng.randbelow(3)):
                s ^= {rng.randbelow(n)}
            return Solution.subset(s)
        p = rng.random()
        return Solution.subset(v for v in range(n) if rng.random() < p)
    # labeling
    if task in (TaskKind.MIN_CUT, TaskKind.MAX_CUT):
        if near:
            lab = ref[:]
            lab[rng.randbelow(n)] ^= 1
            return Solution.labeling(lab)
        if rng.random() < 0.1:
            return Solution.labeling([rng.randbelow(2)] * n)
        top = 3 if rng.random() < 0.1 else 2
        return Solution.labeling([rng.randbelow(top) for _ in range(n)])
    if near:
        lab = ref[:]
        lab[rng.randbelow(n)] = rng.randbelow(max(lab) + 2)
        return Solution.labeling(lab)
    k = rng.randint(1, n)
    return Solution.labeling([rng.randbelow(k) for _ in range(n)])
