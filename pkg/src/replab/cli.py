"""Command line entry point: ``replab <subcommand> ...``.

Exit codes: 0 success, 1 invalid input or usage, 2 a checked property failed
(oracle disagreement or a bound below its empirical frequency).  Errors are
reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict

from replab import bounds
from replab.errors import ReplabError
from replab.experiments import (
    OracleDisagreement,
    figure3_surface,
    grid,
    occupancy_campaign,
    oracle_agreement_campaign,
    pruning_probability_campaign,
    size_growth_campaign,
    surface_claims,
)
from replab.generators import (
    ATTRIBUTE_UNIFORM,
    DIRECT,
    NoiseModel,
    gen_figure1_instance,
    gen_noise_pruning_set,
    gen_random_tree,
    gen_theorem6_sample,
    minimal_consistent_threshold_tree,
)
from replab.oracle import DEFAULT_LEAF_CAP, optimal_pruning
from replab.pruning import iterative_prune, rep_prune, rep_prune_train_labeled
from replab.structure import safe_nodes, theorem4_predicate
from replab.tree import (
    PRUNING_MAJORITY,
    TRAINING_MAJORITY,
    apply_pruning,
    classify_pass,
    dataset_from_csv,
    dataset_to_csv,
    deserialize,
    serialize,
)

EXIT_OK, EXIT_INVALID, EXIT_ASSERTION = 0, 1, 2


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _default_seed() -> int:
    raw = os.environ.get("REPLAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"REPLAB_SEED must be an integer, got {raw!r}") from None


def _range(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return lo, hi, step


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(args, report: dict, csv_text: str | None) -> None:
    if csv_text is not None and args.out:
        write_atomic(args.out, csv_text)
    if args.json:
        print(json.dumps(report, default=_jsonable, sort_keys=True))


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- subcommands ----------------------------------------------------------------------------

def cmd_prune(args) -> int:
    tree = deserialize(_read(args.tree))
    counted = classify_pass(tree, dataset_from_csv(_read(args.data)))
    if args.variant == "iterative":
        pruned, steps, error = iterative_prune(counted)
        trace = [asdict(s) for s in steps]
    else:
        res = rep_prune(counted) if args.variant == "rep" else rep_prune_train_labeled(counted)
        pruned, error = res.tree, res.error
        trace = [asdict(r) for r in res.trace]
    write_atomic(args.out, serialize(pruned, indent=2) + "\n")
    if args.trace:
        write_atomic(args.trace, json.dumps({"variant": args.variant, "error": error, "records": trace},
                                            indent=2) + "\n")
    print(json.dumps({"variant": args.variant, "error": error, "size": pruned.size,
                      "leaves": pruned.leaf_count}))
    return EXIT_OK


def cmd_oracle(args) -> int:
    tree = deserialize(_read(args.tree))
    counted = classify_pass(tree, dataset_from_csv(_read(args.data)))
    labeling = PRUNING_MAJORITY if args.labeling == "prune" else TRAINING_MAJORITY
    res = optimal_pruning(counted, labeling, cap=args.cap)
    doc = {"best_error": res.best_error, "best_size": res.best_size,
           "pruning_count": res.pruning_count, "collapsed": sorted(res.best),
           "tree": json.loads(serialize(apply_pruning(counted, res.best, labeling)))}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    tree = deserialize(_read(args.tree))
    counted = classify_pass(tree, dataset_from_csv(_read(args.data)))
    report = safe_nodes(counted)
    res = rep_prune(counted)
    pred = theorem4_predicate(counted, res.tree, report)
    doc = {**report.to_dict(), "leaves": counted.leaf_count,
           "predicted_single_leaf": pred.collapses, "reason": pred.reason.value,
           "rep_single_leaf": res.tree.root.is_leaf, "rep_error": res.error}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"bounds {args.which}: missing required flag --{name.replace('_', '-')}")


def cmd_bounds(args) -> int:
    w = args.which
    if w == "slud":
        _need(args, "m", "q", "h")
        value = bounds.slud_lower_bound(args.m, args.q, args.h)
    elif w == "eq1":
        _need(args, "n", "p")
        value = bounds.negative_majority_bound(args.n, args.p, args.continuity)
    elif w == "eq2":
        _need(args, "n", "k", "p")
        value = bounds.eq2_pruning_upper_bound(args.n, args.k, args.p, args.continuity)
    elif w == "eq4":
        _need(args, "n", "k", "c")
        value = bounds.eq4_expected_small_nodes(args.n, args.k, args.c)
    elif w == "eq5":
        _need(args, "n", "k", "p", "c")
        res = bounds.eq5_uniform_pruning_bound(args.n, args.k, args.p, args.c, args.continuity)
        print(f"eq5 = {res.bound!r} exponent_P = {res.exponent_P!r} vacuous = {str(res.vacuous).lower()}")
        return EXIT_OK
    elif w == "occupancy":
        _need(args, "n", "k")
        if args.lam is not None:
            mu = bounds.occupancy_expected_empty(args.n, args.k)[0] if args.mu is None else args.mu
            value = bounds.occupancy_deviation_bound(args.k, mu, args.lam)
            w = "occupancy_deviation"
        else:
            exact, approx = bounds.occupancy_expected_empty(args.n, args.k)
            print(f"occupancy_exact = {exact!r} occupancy_approx = {approx!r}")
            return EXIT_OK
    elif w == "mcdiarmid":
        _need(args, "n", "lam")
        value = bounds.mcdiarmid_bound(args.n, args.lam)
    else:  # pdev
        _need(args, "n", "k", "lam")
        er = bounds.occupancy_expected_empty(args.n, args.k)[0]
        value = bounds.p_deviation_bound(args.n, args.k, er, args.lam)
    print(f"{w} = {value!r}")
    return EXIT_OK


def cmd_surface(args) -> int:
    s = figure3_surface(args.k, args.n, grid(*args.p_grid), grid(*args.c_grid))
    write_atomic(args.out, s.to_csv())
    if args.contours:
        write_atomic(args.contours, s.contours_csv())
    claims = surface_claims(s)
    summary = {"points": int(s.bound.size), "levels": {str(k): len(v) for k, v in s.contours.items()},
               "claims": asdict(claims)}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed
    if args.what == "tree":
        tree = gen_random_tree(args.internal, seed, args.bias, args.attributes)
        write_atomic(args.out, serialize(tree, indent=2) + "\n")
    elif args.what == "noise":
        if not args.tree:
            raise UsageError("gen noise: missing required flag --tree")
        tree = deserialize(_read(args.tree))
        routing = DIRECT if args.routing == "direct" else ATTRIBUTE_UNIFORM
        data = gen_noise_pruning_set(tree, NoiseModel(args.p, routing), args.n, seed, args.attributes)
        write_atomic(args.out, dataset_to_csv(data))
    elif args.what == "theorem6":
        data = gen_theorem6_sample(args.t, args.p, seed)
        write_atomic(args.out, dataset_to_csv(data))
        if args.tree:
            write_atomic(args.tree, serialize(minimal_consistent_threshold_tree(data), indent=2) + "\n")
    else:
        tree, data = gen_figure1_instance()
        write_atomic(args.out, serialize(tree, indent=2) + "\n")
        if args.data:
            write_atomic(args.data, dataset_to_csv(data))
    return EXIT_OK


def _campaign_csv(header: str, columns: list[str], rows: list[list]) -> str:
    lines = [f"# {header}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_simulate(args) -> int:
    what = args.what
    if what == "prune-prob":
        ps = args.p_list or [args.p]
        reports = [pruning_probability_campaign(args.k, args.n, p, args.trials, args.seed, args.mode,
                                                args.workers) for p in ps]
        rows = [[r.k, r.n, r.p, r.mode, r.positive.trials, r.attempts, r.rejection_rate,
                 r.positive.estimate, r.positive.ci99[1], r.eq2_bound, r.positive.dominated,
                 r.negative.estimate, r.collapse.estimate] for r in reports]
        cols = ["k", "n", "p", "mode", "trials", "attempts", "rejection_rate", "all_positive",
                "all_positive_ci99_hi", "eq2_bound", "dominated", "all_negative", "collapse"]
        _emit(args, {"reports": [r.to_dict() for r in reports]},
              _campaign_csv("columns: safe nodes, examples, p, mode, accepted trials, attempts, rejected share, "
                            "frequency all safe nodes pos>=neg, its 99% upper limit, eq2 bound, upper limit <= bound, "
                            "frequency all neg>=pos, frequency of collapse", cols, rows))
        bad = [r.p for r in reports if not r.positive.dominated]
        if bad:
            raise CheckFailed(f"eq2 bound below the 99% upper limit for p in {bad}", args.out)
    elif what == "size-growth":
        rep = size_growth_campaign(args.p, args.t_list, args.reps, args.seed, args.alpha, args.workers)
        cols = ["t", "mean_leaves", "se", "predicted", "mean_alternations",
                "pruned_mean_leaves", "pruned_se", "pruned_mean_safe"]
        rows = [[getattr(r, c) if getattr(r, c) is not None else "" for c in cols] for r in rep.rows]
        _emit(args, rep.to_dict(),
              _campaign_csv("columns: sample size, mean leaves of zero-error tree, standard error, "
                            "2(t-1)p(1-p)+1, mean class alternations, REP-pruned mean leaves, its SE, "
                            "mean safe nodes", cols, rows))
    elif what == "occupancy":
        rep = occupancy_campaign(args.k, args.n, args.c, args.trials, args.seed, workers=args.workers)
        cols = ["quantity", "lambda", "frequency", "ci99_hi", "bound", "dominated"]
        rows = [[r.quantity, r.lam, r.campaign.estimate, r.campaign.ci99[1], r.campaign.bound,
                 r.campaign.dominated] for r in rep.deviations]
        _emit(args, rep.to_dict(),
              _campaign_csv("columns: Q small nodes / Z empty nodes / P=Q-Z, deviation lambda, "
                            "empirical Pr{|X-EX|>=lambda}, 99% upper limit, bound, upper limit <= bound",
                            cols, rows))
        if not rep.all_dominated():
            raise CheckFailed("a deviation bound lies below its empirical frequency", args.out)
    else:  # oracle-check
        try:
            rep = oracle_agreement_campaign(args.trials, args.cap, args.seed, pruner=rep_prune)
        except OracleDisagreement as exc:
            path = args.counterexample or (args.out + ".counterexample.json" if args.out
                                           else "oracle-counterexample.json")
            write_atomic(path, json.dumps(exc.counterexample, indent=2) + "\n")
            raise CheckFailed(str(exc), path) from None
        if rep.first_witness and args.witness:
            write_atomic(args.witness, json.dumps(rep.first_witness, indent=2) + "\n")
        cols = ["instances", "seed", "disagreements", "iterative_suboptimal"]
        _emit(args, rep.to_dict(),
              _campaign_csv("columns: random instances checked, seed, REP/oracle (error,size) mismatches, "
                            "instances where the iterative variant is less accurate than optimal", cols,
                            [[rep.instances, rep.seed, rep.disagreements, rep.iterative_suboptimal]]))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    parser = _Parser(prog="replab", description="Reduced error pruning laboratory.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("prune", help="prune a tree with a pruning set")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--variant", choices=["rep", "rep-train", "iterative"], default="rep")
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("oracle", help="exhaustive smallest-most-accurate pruning")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labeling", choices=["prune", "train"], default="prune")
    p.add_argument("--cap", type=int, default=DEFAULT_LEAF_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("analyze", help="safe-node report and collapse prediction")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", help="evaluate one bound")
    p.add_argument("which", choices=["slud", "eq1", "eq2", "eq4", "eq5", "occupancy", "mcdiarmid", "pdev"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--continuity", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("surface", help="uniform-routing bound on a (p, c) grid")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--p-grid", type=_range, default=(0.51, 1.0, 0.01))
    p.add_argument("--c-grid", type=_range, default=(0.02, 2.0, 0.02))
    p.add_argument("--out", required=True)
    p.add_argument("--contours")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("gen", help="write generated trees and datasets")
    p.add_argument("what", choices=["tree", "noise", "theorem6", "figure1"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--internal", type=int, default=7)
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument("--attributes", type=int, default=None)
    p.add_argument("--tree")
    p.add_argument("--data")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--t", type=int, default=100)
    p.add_argument("--p", type=float, default=0.75)
    p.add_argument("--routing", choices=["uniform", "direct"], default="uniform")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="Monte Carlo campaigns")
    p.add_argument("what", choices=["prune-prob", "size-growth", "occupancy", "oracle-check"])
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--p", type=float, default=0.6)
    p.add_argument("--p-list", type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--mode", choices=["event-level", "full-rep"], default="event-level")
    p.add_argument("--t-list", type=_int_list, default=[51, 101, 201, 401])
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--alpha", type=float)
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--witness")
    p.add_argument("--counterexample")
    p.set_defaults(func=cmd_simulate)
    return parser


def _fail(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
        if args.command == "gen" and args.attributes is None and args.what != "noise":
            args.attributes = 1
        if hasattr(args, "trials") and args.trials < 1:
            raise UsageError("--trials must be positive")
        if hasattr(args, "workers") and args.workers < 1:
            raise UsageError("--workers must be positive")
        return args.func(args)
    except UsageError as exc:
        _fail("usage", str(exc))
        if "invalid choice" in str(exc) or "required: command" in str(exc) or "the following arguments" in str(exc):
            print(build_parser().format_usage(), file=sys.stderr, end="")
        return EXIT_INVALID
    except CheckFailed as exc:
        _fail("assertion", str(exc), path=exc.path)
        return EXIT_ASSERTION
    except (ReplabError, ValueError) as exc:
        _fail("validation", f"{type(exc).__name__}: {exc}")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
