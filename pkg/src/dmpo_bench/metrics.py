"""Success Rate, Quality Ratio, the composite training reward and EvalReport."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Category, TaskKind

FORMAT_REWARD = Fraction(1, 10)
CATEGORY_ORDER = (
    Category.CONSTRAINT,
    Category.COVERING,
    Category.PARTITION,
    Category.SUBGRAPH,
    Category.PATH,
)


class EmptyInputWarning(UserWarning):
    pass


def quality_ratio(task, v_model, v_star, valid: bool) -> Fraction:
    """Objective relative to the reference value; 0 for invalid solutions.

    Maximization: v_model / v_star.  Minimization: v_star / v_model.
    Zero denominators: equal zeros give 1, anything else gives 0.
    The ratio is not capped, a model may beat the reference.
    """
    if not valid:
        return Fraction(0)
    task = TaskKind(task)
    v_model = Fraction(v_model)
    v_star = Fraction(v_star)
    num, den = (v_model, v_star) if task.maximize else (v_star, v_model)
    if den == 0:
        return Fraction(1) if num == 0 else Fraction(0)
    return num / den


def success_rate(verdicts) -> float:
    verdicts = list(verdicts)
    if not verdicts:
        warnings.warn("success_rate of an empty verdict list is defined as 0", EmptyInputWarning)
        return 0.0
    return sum(1 for v in verdicts if v.valid) / len(verdicts)


def reward(verdict, qr, format_ok: bool = True) -> Fraction:
    r = FORMAT_REWARD if format_ok else Fraction(0)
    if verdict.valid:
        r += Fraction(qr)
    return r


@dataclass
class TaskStats:
    count: int = 0
    valid: int = 0
    qr_sum: Fraction = Fraction(0)

    def add(self, valid: bool, qr) -> None:
        self.count += 1
        self.valid += int(bool(valid))
        self.qr_sum += Fraction(qr)

    def merge(self, other: "TaskStats") -> "TaskStats":
        return TaskStats(self.count + other.count, self.valid + other.valid,
                         self.qr_sum + other.qr_sum)

    @property
    def sr(self) -> float:
        return self.valid / self.count if self.count else 0.0

    @property
    def qr(self) -> float:
        return float(self.qr_sum / self.count) if self.count else 0.0


@dataclass
class EvalReport:
    """Per-task, per-category and overall SR / mean QR.

    Aggregates are instance-weighted, i.e. computed from pooled counts.
    Reports built over shards can be combined with :meth:`merge`.
    """

    tasks: dict = field(default_factory=dict)

    def add(self, task, verdict, qr) -> None:
        task = TaskKind(task)
        self.tasks.setdefault(task, TaskStats()).add(verdict.valid, qr)

    def merge(self, other: "EvalReport") -> "EvalReport":
        out = EvalReport(dict(self.tasks))
        for t, s in other.tasks.items():
            out.tasks[t] = out.tasks[t].merge(s) if t in out.tasks else s
        return out

    def _pool(self, tasks) -> TaskStats:
        total = TaskStats()
        for t in tasks:
            if t in self.tasks:
                total = total.merge(self.tasks[t])
        return total

    def category(self, cat: Category) -> TaskStats:
        return self._pool([t for t in TaskKind if t.category is cat])

    @property
    def overall(self) -> TaskStats:
        return self._pool(list(TaskKind))

    @property
    def empty(self) -> bool:
        return self.overall.count == 0

    def to_json(self) -> dict:
        def row(s: TaskStats) -> dict:
            return {"count": s.count, "valid": s.valid, "sr": s.sr, "qr": s.qr}

        return {
            "tasks": {t.value: row(self.tasks[t]) for t in TaskKind if t in self.tasks},
            "categories": {c.value: row(self.category(c)) for c in CATEGORY_ORDER},
            "overall": row(self.overall),
            "warnings": ["empty evaluation set"] if self.empty else [],
        }

    def to_csv(self, label: str = "model") -> str:
        """One-row table: SR and QR (percent) per category, then Overall."""
        header = ["method"]
        values = [label]
        groups = [(c.value, self.category(c)) for c in CATEGORY_ORDER] + [("Overall", self.overall)]
        for name, stats in groups:
            header += [f"{name} SR", f"{name} QR"]
            values += [f"{100 * stats.sr:.1f}", f"{100 * stats.qr:.1f}"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerow(values)
        return buf.getvalue()
