"""Parametric instance generation, prompt templates and the SR-band filter."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .core import (
    GRID_SIZE,
    GenParams,
    Graph,
    Instance,
    ReferenceSolution,
    TaskKind,
    canonical_json,
    instance_id,
    serialize_instance,
)
from .rng import SplitMix64, check_seed, derive_seed
from .solvers import SolverError, solve_heuristic
from .verifiers import verify

CONNECT_RETRIES = 100
CUT_TASKS = (TaskKind.MIN_CUT, TaskKind.MAX_CUT)


class GenerationError(ValueError):
    """Parameters cannot produce a valid instance."""


def _random_edges(n: int, params: GenParams, rng: SplitMix64, planted=()) -> list:
    lo, hi = params.weight_range
    present = {(min(u, v), max(u, v)) for u, v in planted}
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            hit = rng.random() < params.density
            w = rng.randint(lo, hi)
            if hit or (u, v) in present:
                edges.append((u, v, w))
    return edges


def random_graph(task: TaskKind, params: GenParams, rng: SplitMix64) -> Graph:
    n = params.n
    if task is TaskKind.TSP:
        coords = [(rng.randint(0, GRID_SIZE), rng.randint(0, GRID_SIZE)) for _ in range(n)]
        return Graph.euclidean(coords)
    if task is TaskKind.HAMILTONIAN_CYCLE and params.planted:
        perm = rng.permutation(n)
        cycle = [(perm[i], perm[(i + 1) % n]) for i in range(n)]
        return Graph(n, tuple(_random_edges(n, params, rng, cycle)))
    if task in CUT_TASKS:
        for _ in range(CONNECT_RETRIES):
            g = Graph(n, tuple(_random_edges(n, params, rng)))
            if g.is_connected():
                return g
        raise GenerationError(
            f"no connected graph with n={n}, density={params.density} after {CONNECT_RETRIES} tries"
        )
    return Graph(n, tuple(_random_edges(n, params, rng)))


_PROMPTS = {
    TaskKind.TSP: "Find the shortest tour visiting all {n} cities exactly once and returning "
                  "to the start. Cities are points on a {grid}x{grid} grid; the travel cost "
                  "between two cities is their Euclidean distance.",
    TaskKind.HAMILTONIAN_CYCLE: "Find the longest cycle in the graph with {n} vertices and "
                                "{m} edges: a closed path that never repeats a vertex and "
                                "only uses listed edges.",
    TaskKind.VERTEX_COVER: "Select the minimum set of vertices such that every one of the "
                           "{m} edges has at least one endpoint in the set ({n} vertices).",
    TaskKind.DOMINATING_SET: "Find the minimum set of vertices such that every one of the "
                             "{n} vertices is in the set or adjacent to a vertex in it.",
    TaskKind.MIN_CUT: "Split the {n} vertices into two non-empty groups so that the total "
                      "weight of edges between the groups is as small as possible.",
    TaskKind.MAX_CUT: "Split the {n} vertices into two non-empty groups so that the total "
                      "weight of edges between the groups is as large as possible.",
    TaskKind.MAX_CLIQUE: "Find the largest set of vertices among the {n} vertices in which "
                         "every pair is connected by an edge.",
    TaskKind.MAX_INDEPENDENT_SET: "Find the largest set of vertices among the {n} vertices "
                                  "in which no two are connected by an edge.",
    TaskKind.GRAPH_COLORING: "Assign a color to each of the {n} vertices so that no adjacent "
                             "vertices share a color, using as few colors as possible.",
    TaskKind.FEEDBACK_VERTEX_SET: "Find the minimum set of vertices whose removal leaves the "
                                  "graph with {n} vertices free of cycles.",
}


def make_prompt(task, graph: Graph) -> str:
    """Deterministic natural-language statement followed by the edge list."""
    task = TaskKind(task)
    head = _PROMPTS[task].format(n=graph.n, m=graph.m, grid=GRID_SIZE)
    if graph.coords is not None:
        body = "Coordinates: " + ", ".join(f"{i}:({x},{y})" for i, (x, y) in enumerate(graph.coords))
    elif graph.weight_scale == 1 and task in (TaskKind.MIN_CUT, TaskKind.MAX_CUT):
        body = "Edges (u-v:weight): " + ", ".join(f"{u}-{v}:{w}" for u, v, w in graph.edges)
    else:
        body = "Edges: " + ", ".join(f"{u}-{v}" for u, v, _ in graph.edges)
    return f"{head}\n{body}"


def generate(task, params: GenParams, seed: int) -> Instance:
    """One instance; a pure function of (task, params, seed)."""
    task = TaskKind(task)
    check_seed(seed)
    params = replace(params, count=1)
    rng = SplitMix64(seed)
    graph = random_graph(task, params, rng.split(0))
    try:
        result = solve_heuristic(task, graph, derive_seed(seed, 1))
    except SolverError as exc:
        raise GenerationError(f"{task.value}: {exc}") from None
    reference = ReferenceSolution(result.value, result.solution, result.algorithm)
    return Instance(
        instance_id(task, params.n, seed), task, seed, params, graph,
        make_prompt(task, graph), reference,
    )


def generate_batch(task, params: GenParams, master_seed: int) -> list[Instance]:
    """``params.count`` instances with sub-seeds derived from ``master_seed``."""
    return [generate(task, params, derive_seed(master_seed, k)) for k in range(params.count)]


# --- rejection-sampling filter ----------------------------------------------


def uniform_probe(inst: Instance, rng: SplitMix64):
    """Uniform-random construction policy (all-zero linear policy)."""
    from .policy import LinearPolicy, make_env, sample_trajectory

    env = make_env(inst)
    return sample_trajectory(LinearPolicy.zeros(env.n_features), env, rng).solution


@dataclass(frozen=True)
class FilterBand:
    sr_lo: float = 0.05
    sr_hi: float = 0.8
    probe_policy: object = uniform_probe
    samples_per_instance: int = 64

    def __post_init__(self):
        if not 0.0 <= self.sr_lo < self.sr_hi <= 1.0:
            raise ValueError("FilterBand needs 0 <= sr_lo < sr_hi <= 1")
        if self.samples_per_instance < 1:
            raise ValueError("samples_per_instance must be positive")


@dataclass
class FilterResult:
    instances: list
    rates: dict
    metadata: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.instances


def filter_training_set(instances, band: FilterBand, seed: int) -> FilterResult:
    """Keep instances whose probe success rate lies inside [sr_lo, sr_hi]."""
    kept, rates = [], {}
    for k, inst in enumerate(instances):
        rng = SplitMix64(derive_seed(seed, k))
        ok = 0
        for _ in range(band.samples_per_instance):
            sol = band.probe_policy(inst, rng)
            if verify(inst.task, inst.graph, sol).valid:
                ok += 1
        sr = ok / band.samples_per_instance
        rates[inst.id] = sr
        if band.sr_lo <= sr <= band.sr_hi:
            kept.append(inst)
    meta = {
        "method": "rejection_sampling",
        "probe": getattr(band.probe_policy, "__name__", type(band.probe_policy).__name__),
        "samples_per_instance": band.samples_per_instance,
        "sr_band": [band.sr_lo, band.sr_hi],
        "seed": seed,
        "input_count": len(rates),
        "kept_count": len(kept),
        "empty": not kept,
    }
    return FilterResult(kept, rates, meta)


# --- suites and batch output ------------------------------------------------


def load_suite(name: str = "test") -> dict:
    """Checked-in suite description: per-task GenParams and counts."""
    text = resources.files("dmpo_bench").joinpath("suites", f"{name}.json").read_text()
    return json.loads(text)


def generate_suite(name: str, master_seed: int) -> list[Instance]:
    suite = load_suite(name)
    out = []
    for t_index, (task_name, spec) in enumerate(sorted(suite["tasks"].items())):
        task = TaskKind(task_name)
        params = GenParams(
            n=spec["n"], density=spec.get("density", 0.5),
            weight_range=tuple(spec.get("weight_range", (1, 100))),
            planted=spec.get("planted", False),
        )
        for k in range(spec.get("count", suite.get("count", 100))):
            out.append(generate(task, params, derive_seed(master_seed, t_index, k)))
    return out


def write_batch(instances, out_dir, manifest_extra: dict | None = None) -> Path:
    """Write ``<out>/<task>/<id>.npi.json`` files and ``<out>/manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for inst in instances:
        d = out / inst.task.value
        d.mkdir(exist_ok=True)
        (d / f"{inst.id}.npi.json").write_bytes(serialize_instance(inst))
        entries.append({
            "id": inst.id,
            "task": inst.task.value,
            "seed": inst.seed,
            "params": inst.params.to_json(),
            "file": f"{inst.task.value}/{inst.id}.npi.json",
        })
    manifest = {"instances": entries}
    if manifest_extra:
        manifest.update(manifest_extra)
    path = out / "manifest.json"
    path.write_bytes(canonical_json(manifest))
    return path


def read_batch(in_dir) -> list[Instance]:
    """All ``*.npi.json`` files below ``in_dir`` in sorted path order."""
    from .core import load_instance

    return [load_instance(p) for p in sorted(Path(in_dir).rglob("*.npi.json"))]
