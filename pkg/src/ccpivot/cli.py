"""Command-line surface: gen / lp / round / certify / opt / bench.

Every command is a pure function of its inputs, flags and seed, and
randomized commands require an explicit seed. Exit codes: 0 success or
certification PASS, 1 certification FAIL, 2 ineligible scheme without
the full-grid fallback, 64 usage error, 65 data-format error, 70
internal numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certify import certify, certify_weighted_ti
from .instance import (
    COMPLETE,
    KPARTITE,
    WEIGHTED,
    FormatError,
    Instance,
    clustering_cost,
    gen_complete_random,
    gen_gap_triangle_ineq,
    gen_kpartite_random,
    gen_planted,
    gen_weighted_random,
    parse_instance,
    serialize_instance,
)
from .lp import (
    LpNumericalError,
    solution_from_json,
    solution_to_json,
    solve_relaxation,
)
from .oracle import brute_force_opt
from .rounding import (
    IneligibleSchemeError,
    RoundingScheme,
    derandomize_round,
    get_scheme,
    monte_carlo_ratio,
    round_instance,
)

EXIT_OK = 0
EXIT_CERTIFY_FAIL = 1
EXIT_INELIGIBLE = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NUMERICAL = 70


class _UsageExit(Exception):
    def __init__(self, message):
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageExit(message)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_instance(path: str) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _resolve_scheme(name: str) -> RoundingScheme:
    if Path(name).exists():
        return RoundingScheme.from_json(Path(name).read_text(encoding="utf-8"))
    try:
        return get_scheme(name)
    except KeyError as e:
        raise _UsageExit(str(e)) from None


def _meta(args, **extra) -> dict:
    m = {"version": __version__}
    for key in ("seed", "grid", "tol", "alpha", "trials"):
        if hasattr(args, key) and getattr(args, key) is not None:
            m[key] = getattr(args, key)
    m.update(extra)
    return m


# -- subcommands ------------------------------------------------------------


def _cmd_gen(args) -> int:
    if args.family == "complete":
        inst = gen_complete_random(args.n, args.p, args.seed)
    elif args.family == "kpartite":
        sizes = [int(t) for t in args.parts.split(",")]
        inst = gen_kpartite_random(sizes, args.p, args.seed)
    elif args.family == "planted":
        inst, _truth = gen_planted(args.n, args.k, args.corruption, args.seed)
    elif args.family == "gap-ti":
        inst = gen_gap_triangle_ineq(args.n)
    elif args.family == "weighted":
        inst = gen_weighted_random(args.n, args.seed)
    else:  # argparse choices guard this
        raise _UsageExit(f"unknown family {args.family!r}")
    _write(args.output, serialize_instance(inst, fmt=args.format))
    return EXIT_OK


def _cmd_lp(args) -> int:
    inst = _load_instance(args.instance)
    x, stats = solve_relaxation(inst, tol=args.tol)
    doc = json.loads(solution_to_json(x, stats.objective))
    doc["meta"] = _meta(
        args,
        iterations=stats.iterations,
        constraints_generated=stats.constraints_generated,
        separation_rounds=stats.separation_rounds,
    )
    _write(args.output, json.dumps(doc, indent=1))
    print(
        f"objective={stats.objective:.9g} rounds={stats.separation_rounds} "
        f"cuts={stats.constraints_generated} pivots={stats.iterations}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_round(args) -> int:
    inst = _load_instance(args.instance)
    x = solution_from_json(Path(args.lp_solution).read_text(encoding="utf-8"))
    scheme = _resolve_scheme(args.scheme)
    if args.mode == "random":
        if args.seed is None:
            raise _UsageExit("--seed is required in random mode")
        clustering = round_instance(inst, x, scheme, args.seed)
    else:
        if args.alpha is None:
            raise _UsageExit("--alpha is required in derand mode")
        clustering = derandomize_round(inst, x, scheme, args.alpha)
    cost = clustering_cost(inst, clustering)
    from .lp import lp_objective

    lp = lp_objective(inst, x)
    doc = {
        "meta": _meta(args, mode=args.mode, scheme=scheme.name),
        "assignment": clustering.assignment.tolist(),
        "cost": cost,
        "lp": lp,
    }
    if args.mode == "derand":
        if cost > args.alpha * lp + 1e-9:
            raise LpNumericalError(
                f"derandomized cost {cost} exceeds alpha * LP = {args.alpha * lp}"
            )
        doc["alpha_lp"] = args.alpha * lp
    _write(args.output, json.dumps(doc, indent=1))
    print(f"cost={cost:.9g} lp={lp:.9g}", file=sys.stderr)
    return EXIT_OK


def _cmd_certify(args) -> int:
    scheme = _resolve_scheme(args.scheme)
    if args.graph_class == WEIGHTED:
        report = certify_weighted_ti(
            scheme,
            args.alpha,
            length_grid_step=args.grid,
            tol=args.tol,
            jobs=args.jobs,
        )
    else:
        report = certify(
            scheme,
            args.alpha,
            graph_class=args.graph_class,
            grid_step=args.grid,
            tol=args.tol,
            allow_full_grid=not args.no_full_grid,
        )
    _write(args.output, report.to_json())
    verdict = "PASS" if report.passed else "FAIL"
    worst = report.worst()
    print(
        f"{verdict} scheme={scheme.name} alpha={args.alpha} "
        f"min_surplus={report.min_surplus:.3g} worst_type={worst.label} "
        f"witness={worst.witness}",
        file=sys.stderr,
    )
    return EXIT_OK if report.passed else EXIT_CERTIFY_FAIL


def _cmd_opt(args) -> int:
    inst = _load_instance(args.instance)
    clustering, cost = brute_force_opt(inst)
    doc = {
        "meta": _meta(args),
        "cost": cost,
        "assignment": clustering.assignment.tolist(),
    }
    _write(args.output, json.dumps(doc, indent=1))
    print(f"opt={cost:.9g} clusters={clustering.num_clusters}", file=sys.stderr)
    return EXIT_OK


def _bench_one(payload) -> dict:
    i, family, n, parts, p, inst_seed, mc_seed, scheme_json, trials, alpha, opt_cap = payload
    scheme = RoundingScheme.from_json(scheme_json)
    if family == "complete":
        inst = gen_complete_random(n, p, inst_seed)
    else:
        inst = gen_kpartite_random(parts, p, inst_seed)
    x, stats = solve_relaxation(inst)
    mc = monte_carlo_ratio(inst, x, scheme, trials, mc_seed)
    derand = derandomize_round(inst, x, scheme, alpha)
    row = {
        "instance": i,
        "lp": stats.objective,
        "mean_alg": mc.mean,
        "std_alg": mc.stddev,
        "derand_alg": clustering_cost(inst, derand),
        "ratio_mean": mc.ratio,
    }
    if inst.n <= opt_cap:
        _c, opt = brute_force_opt(inst)
        row["opt"] = opt
    return row


def _cmd_bench(args) -> int:
    from .rng import SplitMix64

    scheme = _resolve_scheme(args.scheme)
    if args.family not in ("complete", "kpartite"):
        raise _UsageExit(f"bench does not support family {args.family!r}")
    parts = [int(t) for t in args.parts.split(",")]
    master = SplitMix64(args.seed)
    payloads = []
    for i in range(args.instances):
        inst_seed = master.next_u64()
        mc_seed = master.next_u64()
        payloads.append(
            (i, args.family, args.n, parts, args.p, inst_seed, mc_seed,
             scheme.to_json(), args.trials, args.alpha, args.opt_cap)
        )
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, payloads))
    else:
        rows = [_bench_one(p) for p in payloads]

    buf = io.StringIO()
    fields = ["instance", "lp", "opt", "mean_alg", "std_alg", "derand_alg", "ratio_mean"]
    writer = csv.DictWriter(buf, fieldnames=fields, restval="")
    buf.write(f"# meta: {json.dumps(_meta(args, scheme=scheme.name))}\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    _write(args.output, buf.getvalue())
    ratios = [r["ratio_mean"] for r in rows]
    print(
        f"instances={len(rows)} mean_ratio={np.mean(ratios):.4f} "
        f"max_ratio={np.max(ratios):.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _build_parser() -> _Parser:
    p = _Parser(prog="ccpivot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("family", choices=["complete", "kpartite", "planted", "gap-ti", "weighted"])
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--parts", type=str, default="3,3,3")
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--corruption", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--format", choices=["edgelist", "json"], default="edgelist")
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=_cmd_gen, needs_seed_families={"complete", "kpartite", "planted", "weighted"})

    l = sub.add_parser("lp", help="solve the relaxation")
    l.add_argument("--instance", required=True)
    l.add_argument("--tol", type=float, default=1e-6)
    l.add_argument("-o", "--output", default=None)
    l.set_defaults(func=_cmd_lp)

    r = sub.add_parser("round", help="round an LP solution to a clustering")
    r.add_argument("--instance", required=True)
    r.add_argument("--lp-solution", required=True)
    r.add_argument("--scheme", required=True)
    r.add_argument("--mode", choices=["random", "derand"], default="random")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--alpha", type=float, default=None)
    r.add_argument("-o", "--output", default=None)
    r.set_defaults(func=_cmd_round)

    c = sub.add_parser("certify", help="grid-certify a scheme at a ratio")
    c.add_argument("scheme")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--class", dest="graph_class",
                   choices=[COMPLETE, KPARTITE, WEIGHTED], default=COMPLETE)
    c.add_argument("--grid", type=float, default=0.005)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--no-full-grid", action="store_true",
                   help="refuse ineligible schemes instead of full-grid fallback")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("-o", "--output", default=None)
    c.set_defaults(func=_cmd_certify)

    o = sub.add_parser("opt", help="exact optimum by exhaustive search")
    o.add_argument("--instance", required=True)
    o.add_argument("-o", "--output", default=None)
    o.set_defaults(func=_cmd_opt)

    b = sub.add_parser("bench", help="per-instance LP/OPT/rounding table")
    b.add_argument("--family", choices=["complete", "kpartite"], default="complete")
    b.add_argument("--n", type=int, default=9)
    b.add_argument("--parts", type=str, default="3,3,3")
    b.add_argument("--p", type=float, default=0.5)
    b.add_argument("--instances", type=int, default=10)
    b.add_argument("--trials", type=int, default=200)
    b.add_argument("--scheme", default="complete206")
    b.add_argument("--alpha", type=float, default=2.06)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--opt-cap", type=int, default=10)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=_cmd_bench)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            if args.family in args.needs_seed_families and args.seed is None:
                raise _UsageExit(f"gen {args.family} requires an explicit --seed")
        return args.func(args)
    except _UsageExit as e:
        print(f"usage error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except IneligibleSchemeError as e:
        print(f"ineligible scheme: {e}", file=sys.stderr)
        return EXIT_INELIGIBLE
    except (FormatError, FileNotFoundError, json.JSONDecodeError, KeyError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except LpNumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
