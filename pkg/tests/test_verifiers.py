from fractions import Fraction

import pytest
from conftest import random_candidate

from dmpo_bench.core import GenParams, Graph, Solution, TaskKind
from dmpo_bench.generators import generate
from dmpo_bench.rng import SplitMix64, derive_seed
from dmpo_bench.verifiers import StructuralError, Verdict, brute_force_verify, verify

TRIANGLE = Graph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 1)))
K4 = Graph(4, tuple((u, v, 1) for u in range(4) for v in range(u + 1, 4)))


def test_coloring_conflict_reason():
    g = Graph(2, ((0, 1, 1),))
    v = verify(TaskKind.GRAPH_COLORING, g, Solution.labeling([0, 0]))
    assert not v.valid and "adjacent vertices share color" in v.reason
    assert v.objective is None


def test_tsp_objective_is_closed_tour_length():
    g = Graph.euclidean([(0, 0), (3, 0), (3, 4), (0, 4)])
    v = verify(TaskKind.TSP, g, Solution.tour([0, 1, 2, 3]))
    assert v.valid and v.objective == Fraction(14)
    w = sum(g.weight(a, b) for a, b in [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert v.objective == g.to_rational(w)


def test_fvs_triangle_single_vertex():
    assert verify(TaskKind.FEEDBACK_VERTEX_SET, TRIANGLE, Solution.subset([0])) == Verdict.ok(1)
    assert not verify(TaskKind.FEEDBACK_VERTEX_SET, TRIANGLE, Solution.subset([])).valid


def test_clique_and_cut_examples():
    assert brute_force_verify(TaskKind.MAX_CLIQUE, K4, Solution.subset(range(4))) == Verdict.ok(4)
    v = brute_force_verify(TaskKind.MIN_CUT, K4, Solution.labeling([0] * 4))
    assert not v.valid and v.reason == "empty partition side"
    assert verify(TaskKind.MIN_CUT, K4, Solution.labeling([0] * 4)).reason == "empty partition side"


def test_hamiltonian_is_longest_cycle():
    g = Graph(5, ((0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1), (3, 4, 1), (2, 4, 1)))
    assert verify(TaskKind.HAMILTONIAN_CYCLE, g, Solution.tour([0, 1, 2])) == Verdict.ok(3)
    assert not verify(TaskKind.HAMILTONIAN_CYCLE, g, Solution.tour([0, 1, 2, 3, 4])).valid
    assert not verify(TaskKind.HAMILTONIAN_CYCLE, g, Solution.tour([0, 1])).valid


def test_coloring_counts_distinct_labels():
    g = Graph(3, ((0, 1, 1),))
    assert verify(TaskKind.GRAPH_COLORING, g, Solution.labeling([5, 9, 5])) == Verdict.ok(2)


def test_wrong_arm_is_structural():
    with pytest.raises(StructuralError):
        verify(TaskKind.TSP, TRIANGLE, Solution.subset([0]))
    with pytest.raises(StructuralError):
        verify(TaskKind.GRAPH_COLORING, TRIANGLE, Solution.labeling([0, 1]))
    with pytest.raises(StructuralError):
        verify(TaskKind.VERTEX_COVER, TRIANGLE, Solution.subset([5]))


def test_verdict_invariant():
    with pytest.raises(ValueError):
        Verdict(True, None, None)
    with pytest.raises(ValueError):
        Verdict(False, Fraction(1), "x")


def test_brute_force_size_guard():
    g = Graph(13, ())
    with pytest.raises(ValueError):
        brute_force_verify(TaskKind.VERTEX_COVER, g, Solution.subset([]))


@pytest.mark.parametrize("task", list(TaskKind), ids=lambda t: t.value)
def test_agrees_with_brute_force(task):
    rng = SplitMix64(derive_seed(404, list(TaskKind).index(task)))
    for k in range(200):
        params = GenParams(n=rng.randint(4, 10), density=0.2 + 0.6 * rng.random(), planted=True)
        inst = generate(task, params, derive_seed(17, k))
        cand = random_candidate(task, inst, rng)
        a = verify(task, inst.graph, cand)
        b = brute_force_verify(task, inst.graph, cand)
        assert (a.valid, a.objective) == (b.valid, b.objective), (inst.id, cand)
        if not a.valid:
            assert a.objective is None and a.reason
