import csv
import io
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmpo_bench.core import Category, TaskKind
from dmpo_bench.metrics import (
    EmptyInputWarning,
    EvalReport,
    TaskStats,
    quality_ratio,
    reward,
    success_rate,
)
from dmpo_bench.verifiers import Verdict

OK = Verdict.ok(1)
BAD = Verdict.fail("nope")


def test_quality_ratio_examples():
    assert quality_ratio(TaskKind.TSP, 5, 5, False) == 0
    assert quality_ratio(TaskKind.TSP, 7, 7, True) == 1
    assert quality_ratio(TaskKind.VERTEX_COVER, 20, 10, True) == Fraction(1, 2)
    assert quality_ratio(TaskKind.MAX_CLIQUE, 3, 4, True) == Fraction(3, 4)
    assert quality_ratio(TaskKind.MAX_CLIQUE, 5, 4, True) == Fraction(5, 4)  # uncapped


def test_quality_ratio_degenerate_zeros():
    assert quality_ratio(TaskKind.MIN_CUT, 0, 0, True) == 1
    assert quality_ratio(TaskKind.MIN_CUT, 3, 0, True) == 0
    assert quality_ratio(TaskKind.MAX_CUT, 0, 0, True) == 1


@given(st.integers(1, 1000), st.integers(1, 1000), st.integers(1, 1000))
def test_quality_ratio_monotone(v_star, a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert quality_ratio(TaskKind.VERTEX_COVER, lo, v_star, True) > \
        quality_ratio(TaskKind.VERTEX_COVER, hi, v_star, True)
    assert quality_ratio(TaskKind.MAX_CLIQUE, lo, v_star, True) < \
        quality_ratio(TaskKind.MAX_CLIQUE, hi, v_star, True)


def test_success_rate():
    assert success_rate([OK] * 4) == 1.0
    assert success_rate([BAD] * 4) == 0.0
    assert success_rate([OK, OK, OK, BAD]) == 0.75
    with pytest.warns(EmptyInputWarning):
        assert success_rate([]) == 0.0


def test_reward():
    assert reward(OK, Fraction(1, 2), True) == Fraction(6, 10)
    assert reward(BAD, 0, True) == Fraction(1, 10)
    assert reward(BAD, 0, False) == 0


def test_report_is_instance_weighted():
    rep = EvalReport()
    for _ in range(3):
        rep.add(TaskKind.GRAPH_COLORING, OK, 1)
    rep.add(TaskKind.FEEDBACK_VERTEX_SET, BAD, 0)
    c = rep.category(Category.CONSTRAINT)
    assert (c.count, c.valid, c.sr, c.qr) == (4, 3, 0.75, 0.75)
    assert rep.overall.count == 4


def test_report_merge_matches_single_pass():
    a, b, full = EvalReport(), EvalReport(), EvalReport()
    rows = [(TaskKind.TSP, OK, Fraction(9, 10)), (TaskKind.MAX_CUT, BAD, 0),
            (TaskKind.TSP, OK, Fraction(1, 2)), (TaskKind.MAX_CUT, OK, 1)]
    for i, r in enumerate(rows):
        (a if i % 2 else b).add(*r)
        full.add(*r)
    assert a.merge(b).to_json() == full.to_json()


def test_csv_layout():
    rep = EvalReport()
    rep.add(TaskKind.TSP, OK, Fraction(1, 2))
    rows = list(csv.reader(io.StringIO(rep.to_csv("dmpo"))))
    assert rows[0] == ["method",
                       "Constraint SR", "Constraint QR", "Covering SR", "Covering QR",
                       "Partition SR", "Partition QR", "Subgraph SR", "Subgraph QR",
                       "Path SR", "Path QR", "Overall SR", "Overall QR"]
    assert rows[1][0] == "dmpo"
    assert rows[1][9:11] == ["100.0", "50.0"]


def test_empty_report():
    rep = EvalReport()
    js = rep.to_json()
    assert rep.empty and js["overall"]["count"] == 0
    assert js["warnings"] == ["empty evaluation set"]
    assert TaskStats().sr == 0.0
