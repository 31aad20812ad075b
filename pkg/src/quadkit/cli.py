"""Command-line interface.

Subcommands mirror the library surface: `rule`, `sparse`, `sample`,
`design`, `subselect`, `lsq`, `gram`, `experiment`, `validate`.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, serialize
from .diagnostics import condition_number, gram_report, solve_least_squares
from .experiments import (EXPERIMENT_NAMES, ExperimentDescriptor,
                          emit_gnuplot_hints, run_experiment, validate_selection)
from .orthopoly import design_matrix, multi_index_set, recurrence_coefficients
from .quadrature import (SparseGridSpec, clenshaw_curtis, gauss_lobatto,
                         golub_welsch, sparse_grid)
from .sampling import christoffel_sample, monte_carlo_sample, sample_weights
from .subselect import STRATEGY_NAMES, run_strategy


def _table(family, count, a=None, b=None):
    if family == "jacobi":
        return recurrence_coefficients("jacobi", count, a=a, b=b)
    return recurrence_coefficients(family, count)


def _add_common(parser):
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format for rule-like results")
    parser.add_argument("--seed", type=int, default=0, help="stream seed")


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_rule(rule, args):
    if args.format == "json":
        _emit(json.dumps(rule.to_json(), indent=2) + "\n", args.out)
    else:
        _emit(rule.to_csv(), args.out)


def cmd_rule(args):
    table = _table(args.family, max(args.points + 2, 2 * args.points),
                   args.jacobi_a, args.jacobi_b)
    if args.kind == "gauss":
        rule = golub_welsch(table, args.points)
    elif args.kind == "lobatto":
        rule = gauss_lobatto(table, args.points)
    else:
        rule = clenshaw_curtis(args.points)
    _emit_rule(rule, args)
    return 0


def cmd_sparse(args):
    need = 2 ** (args.level + args.d) + 8 if args.growth == "exponential" \
        else args.level + args.d + 2
    table = _table(args.family, need, args.jacobi_a, args.jacobi_b)
    rule = sparse_grid(SparseGridSpec(args.d, args.level, args.growth),
                       (table,) * args.d)
    _emit_rule(rule, args)
    return 0


def cmd_sample(args):
    if args.strategy == "christoffel":
        samp = christoffel_sample(args.d, args.m, args.seed)
    else:
        samp = monte_carlo_sample((args.family,) * args.d, args.m, args.seed)
    if args.weights_order is not None:
        basis = multi_index_set(args.weights_kind, args.d, args.weights_order)
        table = _table(args.family, args.weights_order + 2)
        w = sample_weights(samp.points, basis, (table,) * args.d)
    else:
        w = np.full(samp.m, 1.0 / samp.m)
    rows = ([*(serialize.fmt(c) for c in p), serialize.fmt(wi)]
            for p, wi in zip(samp.points, w))
    text_rows = "\n".join(",".join(r) for r in rows) + "\n"
    _emit(text_rows, args.out)
    return 0


def cmd_design(args):
    points, weights = serialize.read_points_csv(args.points)
    d = points.shape[1]
    basis = multi_index_set(args.kind, d, args.order, q=args.q)
    table = _table(args.family, max(args.order + 2, 2 * args.order + 2),
                   args.jacobi_a, args.jacobi_b)
    A = design_matrix(basis, (table,) * d, points, weights)
    serialize.save_design(A, args.out or "design.json")
    return 0


def cmd_subselect(args):
    A = serialize.load_design(args.infile)
    kwargs = {}
    if args.strategy == "newton":
        kwargs = {"lam": args.lam, "max_iter": args.max_iter}
    selection = run_strategy(args.strategy, A, args.k, **kwargs)
    serialize.save_selection(selection, args.out or "selection.json", design=A)
    return 0


def cmd_lsq(args):
    A = serialize.load_design(args.design)
    values = np.loadtxt(args.values, delimiter=",", dtype=float, ndmin=1)
    if values.ndim > 1:
        values = values[:, -1]
    b = np.sqrt(A.weights) * values
    x, residual = solve_least_squares(A, b)
    result = {"coefficients": x.tolist(), "residual": residual,
              "basis": A.basis.to_json()}
    _emit(json.dumps(result, indent=2) + "\n", args.out)
    return 0


def cmd_gram(args):
    A = serialize.load_design(args.design)
    report = gram_report(A, tol=args.tol)
    out = args.out or "gram.csv"
    serialize.save_gram_csv(report, out)
    summary = {"kappa_design": condition_number(A),
               "max_offdiag_error": report.max_offdiag_error,
               "frontier_pass_fraction": float(report.exactness_frontier.mean())}
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_experiment(args):
    params = {}
    if args.params:
        params.update(json.loads(args.params))
    if args.trials is not None:
        params["trials"] = args.trials
    if args.seeds:
        params["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.no_plots:
        params["plots"] = False
    descriptor = ExperimentDescriptor(args.name, params, args.out_dir)
    if args.emit_gnuplot_hints:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        emit_gnuplot_hints(args.name, args.out_dir)
    try:
        manifest = run_experiment(descriptor)
    except Exception as exc:
        record = {"experiment": args.name, "status": "failed",
                  "error": f"{type(exc).__name__}: {exc}"}
        sys.stderr.write(json.dumps(record) + "\n")
        return 1
    sys.stdout.write(json.dumps({"experiment": manifest["experiment"],
                                 "status": manifest["status"],
                                 "stages": [s["name"] for s in manifest["stages"]],
                                 "output_dir": args.out_dir}, indent=2) + "\n")
    return 0


def cmd_validate(args):
    try:
        report = validate_selection(args.selection, args.design)
    except Exception as exc:
        sys.stderr.write(json.dumps({"status": "failed",
                                     "error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return 1
    text = json.dumps(report, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="quadkit",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rule", help="univariate quadrature rule")
    p.add_argument("--family", default="legendre",
                   choices=("legendre", "hermite", "chebyshev1", "jacobi"))
    p.add_argument("--points", "-m", type=int, required=True)
    p.add_argument("--kind", choices=("gauss", "lobatto", "clenshaw_curtis"),
                   default="gauss")
    p.add_argument("--jacobi-a", type=float, default=None)
    p.add_argument("--jacobi-b", type=float, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_rule)

    p = sub.add_parser("sparse", help="Smolyak sparse grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--growth", choices=("linear", "exponential"), default="linear")
    p.add_argument("--family", default="legendre",
                   choices=("legendre", "hermite", "chebyshev1", "jacobi"))
    p.add_argument("--jacobi-a", type=float, default=None)
    p.add_argument("--jacobi-b", type=float, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_sparse)

    p = sub.add_parser("sample", help="random point sets")
    p.add_argument("--strategy", choices=("monte_carlo", "christoffel"),
                   required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--family", default="legendre",
                   choices=("legendre", "hermite", "chebyshev1"))
    p.add_argument("--weights-order", type=int, default=None,
                   help="append kernel-based weights for this basis order")
    p.add_argument("--weights-kind", default="total_order",
                   choices=("total_order", "tensor_order", "hyperbolic_cross"))
    _add_common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("design", help="assemble a design matrix")
    p.add_argument("--points", required=True, help="rule-format CSV (coords,weight)")
    p.add_argument("--family", default="legendre",
                   choices=("legendre", "hermite", "chebyshev1", "jacobi"))
    p.add_argument("--kind", default="total_order",
                   choices=("total_order", "tensor_order", "hyperbolic_cross",
                            "hyperbolic_q"))
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--jacobi-a", type=float, default=None)
    p.add_argument("--jacobi-b", type=float, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_design)

    p = sub.add_parser("subselect", help="pick k rows of a design matrix")
    p.add_argument("--strategy", choices=STRATEGY_NAMES, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True, help="design.json")
    p.add_argument("--lam", type=float, default=1e-2)
    p.add_argument("--max-iter", type=int, default=200)
    _add_common(p)
    p.set_defaults(fn=cmd_subselect)

    p = sub.add_parser("lsq", help="weighted least-squares coefficients")
    p.add_argument("--design", required=True)
    p.add_argument("--values", required=True,
                   help="CSV of function values at the design points")
    _add_common(p)
    p.set_defaults(fn=cmd_lsq)

    p = sub.add_parser("gram", help="Gram matrix and exactness frontier")
    p.add_argument("--design", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(fn=cmd_gram)

    p = sub.add_parser("experiment", help="run a canned study")
    p.add_argument("--name", choices=EXPERIMENT_NAMES, required=True)
    p.add_argument("--out-dir", default="experiment-out")
    p.add_argument("--params", help="JSON object of parameter overrides")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--emit-gnuplot-hints", action="store_true",
                   help="write a columns.txt describing each CSV")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("validate", help="recheck a stored selection")
    p.add_argument("--selection", required=True)
    p.add_argument("--design", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
