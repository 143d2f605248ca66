"""Command line front end for correlation-operator computations.

Inputs are small JSON documents (kernels, domains, coefficient windows,
cube functions).  Every subcommand prints a JSON report to stdout and can
mirror it to a file with ``--out``; paths that write delimited output also
render a matplotlib figure next to the output file unless ``--no-plot`` is
given.

Exit codes: 0 success, 1 demonstration or suite failure, 2 invalid input,
3 iteration budget exhausted before convergence, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .coeffs import load_multisequence
from .errors import CorropsError, InputError, ResourceError
from .factorization import load_cubefunction, weak_factorize
from .geometry import GridMask, load_domain
from .nehari import (
    DEFAULT_EXT_MULT,
    DEFAULT_GRID_MULT,
    ENSEMBLES,
    extend_and_certify,
    sweep_constant,
)
from .norms import DEFAULT_EPS_SWEEP, certificate_sweep, norm_iterative
from .operators import CorrelationOperator, Kernel, load_kernel


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated float list, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated int list, got {text!r}") from exc


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _report(command: str, seed, result: dict, wall_s: float) -> dict:
    """Report envelope with a digest over everything except the wall time."""
    digest = hashlib.sha256(
        _canonical({"command": command, "seed": seed, "result": result}).encode()
    ).hexdigest()
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "digest": digest,
        "wall_s": wall_s,
        "result": result,
    }


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")


def _figure_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".png"


# ---------------------------------------------------------------------------
# subcommands


def cmd_norm(args) -> int:
    t0 = time.perf_counter()
    kernel = load_kernel(args.kernel)
    mask, _kind = load_domain(args.domain)
    flavor = "psi" if args.flavor == "gamma" else args.flavor
    op = CorrelationOperator(kernel, mask, mask, flavor)
    est = norm_iterative(op, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    result = {
        "value": est.value,
        "lower_certificate": est.lower_certificate,
        "iterations": est.iterations,
        "converged": est.converged,
        "tol": est.tol,
        "flavor": flavor,
        "cells": [op.output_mask.n_cells, op.input_mask.n_cells],
    }
    _emit(_report("norm", args.seed, result, time.perf_counter() - t0), args.out)
    return 0 if est.converged else 3


def cmd_certify(args) -> int:
    t0 = time.perf_counter()
    kernel = load_kernel(args.kernel)
    mask, kind = load_domain(args.domain)
    xi = _float_list(args.xi)
    nu = _float_list(args.nu)
    eps_values = _float_list(args.eps) if args.eps else list(DEFAULT_EPS_SWEEP)
    best, per_eps = certificate_sweep(kernel, mask, xi, nu, eps_values, kind)
    result = {
        "best": best,
        "per_eps": [[e, v] for e, v in per_eps],
        "xi": xi,
        "nu": nu,
        "domain_kind": kind,
        "cells": mask.n_cells,
    }
    _emit(_report("certify", None, result, time.perf_counter() - t0), args.out)
    if args.out and not args.no_plot:
        from .report import plot_certificate_curve

        plot_certificate_curve([e for e, _ in per_eps], [v for _, v in per_eps],
                               _figure_path(args.out), reference=best)
    return 0


def cmd_extend(args) -> int:
    t0 = time.perf_counter()
    a = load_multisequence(args.input)
    cert = extend_and_certify(a, tol=args.tol, max_iter=args.max_iter,
                              ext_mult=args.ext_mult, grid_mult=args.grid_mult)
    ext = cert.extension
    result = {
        "extension": ext.to_dict(),
        "section_norm": cert.section_norm,
        "ratio": cert.ratio,
        "checked_sections": [[m, v] for m, v in cert.checked_sections],
    }
    _emit(_report("extend", None, result, time.perf_counter() - t0), args.out)
    if args.out and not args.no_plot and a.window.d <= 2:
        from .report import plot_symbol_modulus

        grid = tuple(args.grid_mult * m for m in ext.coeffs.window.radii)
        plot_symbol_modulus(ext.coeffs, grid, _figure_path(args.out),
                            level=ext.t_cert)
    return 0 if ext.converged else 3


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    report = sweep_constant(args.d, args.n, args.trials, seed=args.seed,
                            ensemble=args.ensemble, tol=args.tol,
                            max_iter=args.max_iter, workers=args.threads)
    result = report.to_dict()
    _emit(_report("sweep", args.seed, result, time.perf_counter() - t0), None)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "seed", "section_norm", "t_cert", "ratio"])
            for row in report.rows:
                writer.writerow([row["trial"], row["seed"], repr(row["section_norm"]),
                                 repr(row["t_cert"]), repr(row["ratio"])])
        if not args.no_plot:
            from .report import plot_ratio_histogram

            plot_ratio_histogram(report.ratios, _figure_path(args.out))
    return 0


def cmd_factorize(args) -> int:
    t0 = time.perf_counter()
    g = load_cubefunction(args.input)
    res = weak_factorize(g, args.kmax, min_margin=args.min_margin)
    _emit(_report("factorize", None, res.to_dict(), time.perf_counter() - t0),
          args.out)
    if args.out and not args.no_plot:
        from .report import plot_term_magnitudes

        plot_term_magnitudes(res.term_array(), _figure_path(args.out))
    return 0


def _hilbert_norms(sizes, tol: float, max_iter: int):
    rows = []
    for n in sizes:
        if n < 1:
            raise InputError("section sizes must be positive")
        kern = Kernel(np.array([0]), 1.0 / (np.arange(2 * n - 1) + 1.0))
        mask = GridMask.box([0], [n - 1])
        op = CorrelationOperator(kern, mask, mask, "psi")
        est = norm_iterative(op, tol=tol, max_iter=max_iter, seed=0)
        rows.append({"size": int(n), "norm": est.value,
                     "iterations": est.iterations, "converged": est.converged})
    return rows


def cmd_demo(args) -> int:
    t0 = time.perf_counter()
    if args.name != "hilbert":
        raise InputError(f"unknown demo {args.name!r}")
    sizes = _int_list(args.sizes)
    rows = _hilbert_norms(sizes, args.tol, args.max_iter)
    norms = [r["norm"] for r in rows]
    monotone = all(b > a for a, b in zip(norms, norms[1:]))
    bounded = all(v <= math.pi + 1e-9 for v in norms)
    result = {
        "name": "hilbert",
        "rows": rows,
        "bound": math.pi,
        "monotone": monotone,
        "bounded": bounded,
    }
    _emit(_report("demo", None, result, time.perf_counter() - t0), None)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["size", "norm"])
            for r in rows:
                writer.writerow([r["size"], repr(r["norm"])])
        if not args.no_plot:
            from .report import plot_section_growth

            plot_section_growth(sizes, norms, _figure_path(args.out),
                                bound=math.pi)
    return 0 if monotone and bounded else 1


def cmd_suite(args) -> int:
    from . import harness

    t0 = time.perf_counter()
    if args.name == "all":
        reports = harness.run_all(seed=args.seed, count=args.count)
    else:
        reports = [harness.run_suite(args.name, seed=args.seed, count=args.count)]
    docs = [harness.report_to_dict(r) for r in reports]
    failures = [c for r in reports for c in r.failures]
    result = {
        "suites": docs,
        "cases": sum(len(r.results) for r in reports),
        "failures": len(failures),
    }
    _emit(_report("suite", args.seed, result, time.perf_counter() - t0), args.out)
    if args.junit:
        harness.write_junit_xml(reports, args.junit)
    for case in failures:
        print(f"FAIL {case.case.suite}:{case.case.name} deviation={case.deviation:.3e} "
              f"tol={case.case.tolerance:.3e} {case.detail}", file=sys.stderr)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrops",
        description="norms, certificates, and extensions of correlation operators",
    )
    parser.add_argument("--version", action="version", version=f"corrops {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("norm", help="operator norm on a mask domain")
    p.add_argument("--kernel", required=True, help="kernel JSON path")
    p.add_argument("--domain", required=True, help="domain JSON path")
    p.add_argument("--flavor", choices=("theta", "psi", "gamma"), default="psi")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("certify", help="exponential test-function lower bounds")
    p.add_argument("--kernel", required=True)
    p.add_argument("--domain", required=True)
    p.add_argument("--xi", required=True, help="frequency, comma separated")
    p.add_argument("--nu", required=True, help="decay direction, comma separated")
    p.add_argument("--eps", help="decay parameters, comma separated")
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("extend", help="minimal sup-norm coefficient extension")
    p.add_argument("--input", required=True, help="coefficient window JSON path")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=1500)
    p.add_argument("--ext-mult", type=int, default=DEFAULT_EXT_MULT)
    p.add_argument("--grid-mult", type=int, default=DEFAULT_GRID_MULT)
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("sweep", help="ratio sweep over random coefficient draws")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n", type=int, required=True, help="window radius per axis")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", choices=ENSEMBLES, default="complex-gaussian")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=1500)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write per-trial rows to this CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("factorize", help="weak factorization of a cube function")
    p.add_argument("--input", required=True, help="cube function JSON path")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--min-margin", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("demo", help="built-in demonstration problems")
    p.add_argument("name", choices=("hilbert",))
    p.add_argument("--sizes", default="64,256,1024,4096")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100000)
    p.add_argument("--out", help="write size/norm rows to this CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("suite", help="randomized property suites")
    p.add_argument("name", nargs="?", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out")
    p.add_argument("--junit", help="also write a JUnit XML report here")
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CorropsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
