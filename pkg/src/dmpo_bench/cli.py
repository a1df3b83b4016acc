"""``npb`` command line: gen, verify, solve, eval, train, render, selfcheck.

Exit codes: 0 success, 1 semantic failure (invalid solution, failed check,
size guard), 2 usage or input-format errors.  ``NPB_SEED`` supplies the
master seed whenever ``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .core import (
    GenParams,
    InstanceError,
    TaskKind,
    canonical_json,
    load_instance,
    parse_solution,
)
from .generators import (
    FilterBand,
    GenerationError,
    filter_training_set,
    generate_batch,
    generate_suite,
    load_suite,
    read_batch,
    write_batch,
)
from .metrics import EvalReport, quality_ratio
from .rng import SplitMix64, check_seed, derive_seed
from .verifiers import StructuralError, Verdict, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(args, default: int = 0) -> int:
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    elif os.environ.get("NPB_SEED"):
        try:
            seed = int(os.environ["NPB_SEED"], 0)
        except ValueError:
            raise UsageError(f"NPB_SEED is not an integer: {os.environ['NPB_SEED']!r}") from None
    else:
        seed = default
    try:
        return check_seed(seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(obj, path=None) -> None:
    data = canonical_json(obj)
    if path:
        Path(path).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_solution(path):
    try:
        return parse_solution(Path(path).read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# --- gen ----------------------------------------------------------------------


def cmd_gen(args) -> int:
    seed = _seed(args)
    if args.suite:
        if args.task:
            raise UsageError("--suite and --task are mutually exclusive")
        try:
            load_suite(args.suite)
        except FileNotFoundError:
            raise UsageError(f"unknown suite {args.suite!r}") from None
        instances = generate_suite(args.suite, seed)
        extra = {"suite": args.suite, "master_seed": seed}
    else:
        if not args.task or args.n is None:
            raise UsageError("gen needs --task and --n (or --suite)")
        try:
            task = TaskKind.parse(args.task)
            params = GenParams(n=args.n, density=args.density,
                               weight_range=(args.weight_min, args.weight_max),
                               planted=args.planted, count=args.count)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        instances = generate_batch(task, params, seed)
        extra = {"master_seed": seed}
    if args.filter:
        band = FilterBand(args.sr_lo, args.sr_hi, samples_per_instance=args.samples)
        result = filter_training_set(instances, band, derive_seed(seed, 0xF11))
        instances = result.instances
        extra["filter"] = result.metadata
        if result.empty:
            print("warning: filter kept no instances", file=sys.stderr)
    write_batch(instances, args.out, extra)
    print(f"wrote {len(instances)} instances to {args.out}", file=sys.stderr)
    return EXIT_OK


# --- verify / solve -------------------------------------------------------------


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    sol = inst.reference.solution if args.solution is None else _load_solution(args.solution)
    try:
        verdict = verify(inst.task, inst.graph, sol)
    except StructuralError as exc:
        _emit(Verdict.fail(f"structural: {exc}").to_json())
        return EXIT_USAGE
    _emit(verdict.to_json())
    return EXIT_OK if verdict.valid else EXIT_FAIL


def cmd_solve(args) -> int:
    from .solvers import SizeGuardError, solve_exact, solve_heuristic

    inst = _load(args.instance)
    try:
        if args.exact:
            result = solve_exact(inst.task, inst.graph)
        else:
            result = solve_heuristic(inst.task, inst.graph, _seed(args))
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(result.to_json(), args.out)
    if args.solution_out:
        from .core import serialize_solution

        Path(args.solution_out).write_bytes(serialize_solution(result.solution))
    return EXIT_OK


# --- eval ------------------------------------------------------------------------


def _eval_solutions(instances, sol_dir) -> EvalReport:
    files = {p.name[: -len(".sol.json")]: p for p in Path(sol_dir).rglob("*.sol.json")}
    report = EvalReport()
    for inst in instances:
        path = files.get(inst.id)
        verdict = None
        if path is not None:
            try:
                verdict = verify(inst.task, inst.graph, parse_solution(path.read_bytes()))
            except (StructuralError, InstanceError):
                verdict = None
        if verdict is None:  # missing or unparseable answers count as failures
            verdict = Verdict.fail("no parseable solution")
        report.add(inst.task, verdict, quality_ratio(inst.task, verdict.objective or 0,
                                                     inst.reference.value, verdict.valid))
    return report


def _eval_policy(instances, policy_path, samples: int, seed: int) -> EvalReport:
    from .policy import greedy_decode, make_env, sample_trajectory
    from .trainer import PolicySet

    try:
        policies = PolicySet.load(policy_path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load policy {policy_path}: {exc}") from None
    report = EvalReport()
    for k, inst in enumerate(instances):
        env = make_env(inst)
        pol = policies.for_env(env)
        if samples == 0:
            trajs = [greedy_decode(pol, env)]
        else:
            rng = SplitMix64(derive_seed(seed, k))
            trajs = [sample_trajectory(pol, env, rng.split(i)) for i in range(samples)]
        for tr in trajs:
            verdict, qr, _ = env.score(tr.solution)
            report.add(inst.task, verdict, qr)
    return report


def cmd_eval(args) -> int:
    if (args.policy is None) == (args.solutions is None):
        raise UsageError("eval needs exactly one of --policy or --solutions")
    if not Path(args.instances).is_dir():
        raise UsageError(f"not a directory: {args.instances}")
    instances = read_batch(args.instances)
    if args.policy:
        report = _eval_policy(instances, args.policy, args.samples, _seed(args))
    else:
        report = _eval_solutions(instances, args.solutions)
    if report.empty:
        print("warning: evaluation set is empty", file=sys.stderr)
    _emit(report.to_json(), args.json)
    if args.csv:
        Path(args.csv).write_text(report.to_csv(args.label))
    return EXIT_OK


# --- train -----------------------------------------------------------------------


def cmd_train(args) -> int:
    from .trainer import PolicySet, TrainingError, parse_config_text, train

    try:
        cfg = parse_config_text(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if args.seed is not None or os.environ.get("NPB_SEED"):
        cfg = replace(cfg, seed=_seed(args))
    for key in ("dataset", "log_path", "policy_path"):
        if getattr(args, key) is not None:
            cfg = replace(cfg, **{key: getattr(args, key)})
    if cfg.dataset is None:
        raise UsageError("no dataset: set dataset in the config or pass --dataset")
    init = PolicySet.load(args.init) if args.init else None
    try:
        policies, log = train(cfg, policies=init)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log_path = cfg.log_path or "train_log.csv"
    policy_path = cfg.policy_path or "final.policy.json"
    Path(log_path).write_text(log.to_csv())
    policies.save(policy_path)
    print(f"wrote {log_path} and {policy_path}", file=sys.stderr)
    return EXIT_OK


# --- render / selfcheck ----------------------------------------------------------


def cmd_render(args) -> int:
    from .render import default_style, render_svg

    inst = _load(args.instance)
    kw = {"show_weights": args.weights, "size": args.size}
    if args.layout:
        kw["layout"] = args.layout
    if args.solution:
        kw["highlight"] = _load_solution(args.solution)
    try:
        svg = render_svg(inst, default_style(inst, **kw))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    Path(args.out).write_text(svg)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .selfcheck import check_gradients, check_oracles

    results = [check_oracles(args.per_task, seed=_seed(args)), check_gradients(args.grad_seeds)]
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# --- parser ----------------------------------------------------------------------


def _seed_arg(p):
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                   help="master seed (default: $NPB_SEED, else 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="npb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instances")
    p.add_argument("--task")
    p.add_argument("--suite", help="checked-in suite name, e.g. test")
    p.add_argument("--n", type=int)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--weight-min", type=int, default=1)
    p.add_argument("--weight-max", type=int, default=100)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--filter", action="store_true", help="keep instances inside the SR band")
    p.add_argument("--sr-lo", type=float, default=0.05)
    p.add_argument("--sr-hi", type=float, default=0.8)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", required=True)
    _seed_arg(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", help=".sol.json file (default: the stored reference)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="run the heuristic or exact solver")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--heuristic", action="store_true")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", help="write SolverResult JSON here instead of stdout")
    p.add_argument("--solution-out", help="also write the solution as .sol.json")
    _seed_arg(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="SR/QR report over a directory of instances")
    p.add_argument("--instances", required=True)
    p.add_argument("--policy", help=".policy.json to decode with")
    p.add_argument("--solutions", help="directory of <id>.sol.json files")
    p.add_argument("--samples", type=int, default=0,
                   help="sampled attempts per instance (0: one greedy decode)")
    p.add_argument("--json", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="write the category table here")
    p.add_argument("--label", default="model", help="method name in the CSV row")
    _seed_arg(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train", help="train linear construction policies")
    p.add_argument("--config", required=True)
    p.add_argument("--dataset")
    p.add_argument("--log-path", dest="log_path")
    p.add_argument("--policy-path", dest="policy_path")
    p.add_argument("--init", help="resume from a .policy.json")
    _seed_arg(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("render", help="draw an instance as SVG")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution")
    p.add_argument("--out", required=True)
    p.add_argument("--layout", choices=["circle", "coordinates"])
    p.add_argument("--size", type=int, default=480)
    p.add_argument("--weights", action="store_true", help="label edges with weights")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("selfcheck", help="solver/oracle and gradient checks")
    p.add_argument("--per-task", type=int, default=10)
    p.add_argument("--grad-seeds", type=int, default=3)
    _seed_arg(p)
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"npb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, GenerationError) as exc:
        print(f"npb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
