"""Graph and instance data model plus canonical JSON serialization.

Edge weights are stored as non-negative integers in units of
``1 / weight_scale``.  Non-geometric graphs use ``weight_scale == 1``;
Euclidean graphs put their cities on an integer grid and store distances
rounded to four decimals (``weight_scale == 10_000``), computed with exact
integer square roots so every platform produces the same bits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property

from .rng import check_seed

FORMAT_TAG = "npi/1"
EUCLIDEAN_SCALE = 10_000
GRID_SIZE = 1000


class InstanceError(ValueError):
    """A graph, solution or instance file violates the data model."""


class Category(str, Enum):
    PATH = "Path"
    COVERING = "Covering"
    PARTITION = "Partition"
    SUBGRAPH = "Subgraph"
    CONSTRAINT = "Constraint"


class TaskKind(str, Enum):
    TSP = "tsp"
    HAMILTONIAN_CYCLE = "hamiltonian_cycle"
    VERTEX_COVER = "vertex_cover"
    DOMINATING_SET = "dominating_set"
    MIN_CUT = "min_cut"
    MAX_CUT = "max_cut"
    MAX_CLIQUE = "max_clique"
    MAX_INDEPENDENT_SET = "max_independent_set"
    GRAPH_COLORING = "graph_coloring"
    FEEDBACK_VERTEX_SET = "feedback_vertex_set"

    @property
    def category(self) -> Category:
        return _TASK_TABLE[self][0]

    @property
    def direction(self) -> str:
        return _TASK_TABLE[self][1]

    @property
    def maximize(self) -> bool:
        return self.direction == "maximize"

    @property
    def solution_kind(self) -> str:
        return _TASK_TABLE[self][2]

    @classmethod
    def parse(cls, name: str) -> "TaskKind":
        key = name.strip().lower().replace("-", "_")
        key = _TASK_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown task {name!r}") from None


_TASK_TABLE = {
    TaskKind.TSP: (Category.PATH, "minimize", "tour"),
    TaskKind.HAMILTONIAN_CYCLE: (Category.PATH, "maximize", "tour"),
    TaskKind.VERTEX_COVER: (Category.COVERING, "minimize", "subset"),
    TaskKind.DOMINATING_SET: (Category.COVERING, "minimize", "subset"),
    TaskKind.MIN_CUT: (Category.PARTITION, "minimize", "labeling"),
    TaskKind.MAX_CUT: (Category.PARTITION, "maximize", "labeling"),
    TaskKind.MAX_CLIQUE: (Category.SUBGRAPH, "maximize", "subset"),
    TaskKind.MAX_INDEPENDENT_SET: (Category.SUBGRAPH, "maximize", "subset"),
    TaskKind.GRAPH_COLORING: (Category.CONSTRAINT, "minimize", "labeling"),
    TaskKind.FEEDBACK_VERTEX_SET: (Category.CONSTRAINT, "minimize", "subset"),
}

_TASK_ALIASES = {
    "hamiltonian": "hamiltonian_cycle",
    "hc": "hamiltonian_cycle",
    "vc": "vertex_cover",
    "ds": "dominating_set",
    "mincut": "min_cut",
    "maxcut": "max_cut",
    "clique": "max_clique",
    "mis": "max_independent_set",
    "coloring": "graph_coloring",
    "gcp": "graph_coloring",
    "fvs": "feedback_vertex_set",
}


def euclidean_weight(a, b) -> int:
    """Distance between integer points in units of 1e-4, rounded half up."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    scaled = (dx * dx + dy * dy) * EUCLIDEAN_SCALE * EUCLIDEAN_SCALE
    # floor(sqrt(x) + 1/2) == (isqrt(4x) + 1) // 2
    return (math.isqrt(4 * scaled) + 1) // 2


@dataclass(frozen=True, eq=True)
class Graph:
    """Undirected simple graph with integer edge weights.

    ``edges`` is canonicalized on construction: each edge is stored as
    ``(min(u, v), max(u, v), w)`` and the list is sorted, so two graphs
    built from the same edge set in different orders compare equal and
    serialize identically.
    """

    n: int
    edges: tuple = ()
    coords: tuple | None = None
    weight_scale: int = 1

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 0:
            raise InstanceError(f"vertex count must be a non-negative int, got {self.n!r}")
        if not isinstance(self.weight_scale, int) or self.weight_scale < 1:
            raise InstanceError("weight_scale must be a positive int")
        canon = []
        seen = set()
        for e in self.edges:
            if len(e) != 3:
                raise InstanceError(f"edge must be (u, v, w), got {e!r}")
            u, v, w = e
            for x in (u, v, w):
                if isinstance(x, bool) or not isinstance(x, int):
                    raise InstanceError(f"edge entries must be ints, got {e!r}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"vertex id out of range in edge {e!r}")
            if u == v:
                raise InstanceError(f"self-loop at vertex {u}")
            if w < 0:
                raise InstanceError(f"negative weight in edge {e!r}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InstanceError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        canon.sort()
        object.__setattr__(self, "edges", tuple(canon))
        if self.coords is not None:
            coords = tuple((int(x), int(y)) for x, y in self.coords)
            if len(coords) != self.n:
                raise InstanceError("coords must list one point per vertex")
            object.__setattr__(self, "coords", coords)
            for u, v, w in self.edges:
                if w != euclidean_weight(coords[u], coords[v]):
                    raise InstanceError(f"edge ({u}, {v}) weight does not match coordinates")

    @classmethod
    def euclidean(cls, coords) -> "Graph":
        """Complete graph over integer points with rounded Euclidean weights."""
        coords = tuple((int(x), int(y)) for x, y in coords)
        n = len(coords)
        edges = [
            (u, v, euclidean_weight(coords[u], coords[v]))
            for u in range(n)
            for v in range(u + 1, n)
        ]
        return cls(n, tuple(edges), coords, EUCLIDEAN_SCALE)

    @cached_property
    def adj(self) -> tuple:
        nb = [set() for _ in range(self.n)]
        for u, v, _ in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(frozenset(s) for s in nb)

    @cached_property
    def _weights(self) -> dict:
        table = {}
        for u, v, w in self.edges:
            table[(u, v)] = w
            table[(v, u)] = w
        return table

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._weights

    def weight(self, u: int, v: int) -> int:
        """Integer weight of edge (u, v); KeyError if absent."""
        return self._weights[(u, v)]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_weight(self) -> int:
        return max((w for _, _, w in self.edges), default=0)

    def to_rational(self, units: int) -> Fraction:
        return Fraction(units, self.weight_scale)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "weight_scale": self.weight_scale,
            "edges": [list(e) for e in self.edges],
            "coords": None if self.coords is None else [list(c) for c in self.coords],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        coords = obj.get("coords")
        return cls(
            obj["n"],
            tuple(tuple(e) for e in obj["edges"]),
            None if coords is None else tuple(tuple(c) for c in coords),
            obj.get("weight_scale", 1),
        )


SOLUTION_KINDS = ("tour", "subset", "labeling")


@dataclass(frozen=True)
class Solution:
    """Tagged union: ``kind`` is one of tour / subset / labeling.

    Subsets are stored sorted and de-duplicated.
    """

    kind: str
    data: tuple

    def __post_init__(self):
        if self.kind not in SOLUTION_KINDS:
            raise InstanceError(f"unknown solution kind {self.kind!r}")
        data = tuple(self.data)
        for x in data:
            if isinstance(x, bool) or not isinstance(x, int):
                raise InstanceError(f"solution entries must be ints, got {x!r}")
        if self.kind == "subset":
            data = tuple(sorted(set(data)))
        object.__setattr__(self, "data", data)

    @classmethod
    def tour(cls, order) -> "Solution":
        return cls("tour", tuple(order))

    @classmethod
    def subset(cls, members) -> "Solution":
        return cls("subset", tuple(members))

    @classmethod
    def labeling(cls, labels) -> "Solution":
        return cls("labeling", tuple(labels))

    def check_structure(self, n: int) -> None:
        """Raise InstanceError unless ids are in range (labelings: length n)."""
        if self.kind == "labeling":
            if len(self.data) != n:
                raise InstanceError(f"labeling has length {len(self.data)}, expected {n}")
            if any(x < 0 for x in self.data):
                raise InstanceError("labels must be non-negative")
        else:
            for x in self.data:
                if not 0 <= x < n:
                    raise InstanceError(f"vertex id {x} out of range for n={n}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "data": list(self.data)}

    @classmethod
    def from_json(cls, obj: dict) -> "Solution":
        try:
            return cls(obj["kind"], tuple(obj["data"]))
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed solution: {exc}") from None


def format_rational(x: Fraction) -> str:
    """Exact text form: integer, terminating decimal, or ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    scaled = x * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    text = f"{sign}{digits[:-places]}.{digits[-places:]}"
    return text


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise InstanceError("rational value must be a string or int")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InstanceError(f"rational value must be a string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InstanceError(f"bad rational value {text!r}") from None


@dataclass(frozen=True)
class GenParams:
    """Difficulty parameters for one generated instance (or a batch of ``count``)."""

    n: int
    density: float = 0.5
    weight_range: tuple = (1, 100)
    planted: bool = False
    count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "weight_range", tuple(int(w) for w in self.weight_range))
        object.__setattr__(self, "density", float(self.density))
        if self.n < 3:
            raise ValueError("GenParams.n must be at least 3")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("GenParams.density must lie in (0, 1]")
        lo, hi = self.weight_range
        if lo > hi or lo < 0:
            raise ValueError("GenParams.weight_range needs 0 <= lo <= hi")
        if self.count < 0:
            raise ValueError("GenParams.count must be non-negative")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "density": self.density,
            "weight_range": list(self.weight_range),
            "planted": self.planted,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenParams":
        return cls(
            n=obj["n"],
            density=obj["density"],
            weight_range=tuple(obj["weight_range"]),
            planted=bool(obj.get("planted", False)),
        )


@dataclass(frozen=True)
class ReferenceSolution:
    value: Fraction
    solution: Solution
    solver: str

    def to_json(self) -> dict:
        return {
            "value": format_rational(self.value),
            "solution": self.solution.to_json(),
            "solver": self.solver,
        }


@dataclass(frozen=True)
class Instance:
    id: str
    task: TaskKind
    seed: int
    params: GenParams
    graph: Graph
    prompt: str
    reference: ReferenceSolution
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def to_json(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "id": self.id,
            "task": self.task.value,
            "seed": self.seed,
            "params": self.params.to_json(),
            "graph": self.graph.to_json(),
            "prompt": self.prompt,
            "reference": self.reference.to_json(),
        }


def instance_id(task: TaskKind, n: int, seed: int) -> str:
    return f"{task.value}-{n}-{seed}"


def canonical_json(obj) -> bytes:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False)
    return (text + "\n").encode("ascii")


def serialize_instance(inst: Instance) -> bytes:
    return canonical_json(inst.to_json())


def parse_instance(data) -> Instance:
    """Parse canonical (or any equivalent) JSON into a validated Instance.

    The stored reference is re-verified; a mismatch means the file is corrupt.
    """
    from .verifiers import StructuralError, verify

    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError:
            raise InstanceError("malformed JSON: not UTF-8") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InstanceError("malformed JSON: top level must be an object")
    try:
        if obj.get("format", FORMAT_TAG) != FORMAT_TAG:
            raise InstanceError(f"unsupported format tag {obj.get('format')!r}")
        task = TaskKind(obj["task"])
        seed = check_seed(obj["seed"])
        params = GenParams.from_json(obj["params"])
        graph = Graph.from_json(obj["graph"])
        ref = obj["reference"]
        reference = ReferenceSolution(
            parse_rational(ref["value"]), Solution.from_json(ref["solution"]), str(ref["solver"])
        )
        inst = Instance(str(obj["id"]), task, seed, params, graph, str(obj["prompt"]), reference)
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from None
    try:
        verdict = verify(task, graph, reference.solution)
    except StructuralError as exc:
        raise InstanceError(f"reference invalid: {exc}") from None
    if not verdict.valid:
        raise InstanceError(f"reference invalid: {verdict.reason}")
    if verdict.objective != reference.value:
        raise InstanceError(
            f"reference invalid: stored value {reference.value} != objective {verdict.objective}"
        )
    return inst


def load_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_instance(inst))


def serialize_solution(sol: Solution) -> bytes:
    return canonical_json(sol.to_json())


def parse_solution(data) -> Solution:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InstanceError("malformed solution: top level must be an object")
    return Solution.from_json(obj)


def with_reference(inst: Instance, reference: ReferenceSolution) -> Instance:
    return replace(inst, reference=reference)
