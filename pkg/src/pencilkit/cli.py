"""Command-line front end.

Every command prints a JSON report on stdout and a short table on stderr.
Exit status: 0 success, 2 bad input, 3 computation failed, 4 a residual
exceeded its tolerance.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from typing import Callable, Optional

import numpy as np

from . import catalog
from .core import LaurentSeries, LinearPencil, fundamental_residuals, frob, residual_base
from .determining import basic_conditions, basic_solution, solve_determining
from .errors import InputError, PencilError
from .io import (complex_to_json, dumps, load_json, matrix_to_json, pencil_from_json,
                 pencil_to_json, plain, pole_solution_from_json, pole_solution_to_json,
                 poly_from_json, poly_to_json, radius_to_json, series_to_json,
                 singularity_set_to_json)
from .laurent import coefficients_from_basic, contour_coefficients
from .markov import (fundamental_inverse, perturbed_pencil, read_chain_csv,
                     staircase_chain)
from .polynomial import poly_basic_solution, poly_fundamental_residuals, poly_series
from .spectral import expand_in_annulus, global_decomposition

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_VERIFY = 0, 2, 3, 4


class _Failure(Exception):
    def __init__(self, code: int, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.code = code
        self.stage = stage


class Checks:
    """Residuals with their tolerances, in insertion order."""

    def __init__(self):
        self.items = []

    def add(self, name: str, value: float, tol: float):
        self.items.append({"name": name, "value": float(value), "tol": float(tol),
                           "pass": bool(value <= tol)})

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.items)

    def to_json(self):
        return {"checks": plain(self.items), "all_pass": self.ok}


# --------------------------------------------------------------------------
# argument parsing

def parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected re or re,im, got {text!r}")


def parse_annulus(text: str) -> tuple[float, float]:
    try:
        s, r = text.split(":")
        return float(s), math.inf if r.strip() == "inf" else float(r)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected s:r, got {text!r}") from None


def _stage(stage: str, code: int, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError as exc:
        raise _Failure(EXIT_INPUT, stage, exc) from exc
    except PencilError as exc:
        raise _Failure(code, stage, exc) from exc
    except (ValueError, KeyError, np.linalg.LinAlgError) as exc:
        raise _Failure(code, stage, exc) from exc


def _load_pencil(source: str) -> LinearPencil:
    if source.startswith("name:"):
        try:
            return catalog.named(source[5:])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from exc
    return pencil_from_json(load_json(source))


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _tol(args, pencil: LinearPencil) -> float:
    base = args.tol if args.tol is not None else residual_base()
    return base * max(1.0, frob(pencil.a0) + frob(pencil.a1))


def _table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j"


# --------------------------------------------------------------------------
# commands: each returns (inputs, outputs, checks, table)

def cmd_solve(args):
    pencil = _stage("read pencil", EXIT_INPUT, _load_pencil, args.pencil)
    tol = _tol(args, pencil)
    ps = _stage("determining equations", EXIT_COMPUTE, solve_determining, pencil,
                args.center, max_order=args.max_order, tol=tol)
    checks = Checks()
    checks.add("fundamental equations, j = -p..0", ps.diagnostics["fundamental_residual"], tol)
    if ps.order >= 1:
        local = pencil.shifted(ps.center)
        for name, v in basic_conditions(ps.r_m1, ps.r_0, local).items():
            checks.add(name, v, tol)
    inputs = {"pencil": pencil_to_json(pencil), "center": complex_to_json(args.center),
              "max_order": args.max_order, "tol": tol}
    rows = [(f"R_{j}", f"{frob(ps.coeff(j)):.6g}") for j in range(-ps.order, 1)]
    table = f"pole order {ps.order} at z = {_fmt(ps.center)}\n" + _table(["coeff", "norm"], rows)
    return inputs, {"order": ps.order, "solution": pole_solution_to_json(ps)}, checks, table


def cmd_spectrum(args):
    pencil = _stage("read pencil", EXIT_INPUT, _load_pencil, args.pencil)
    tol = _tol(args, pencil)
    ss = _stage("global decomposition", EXIT_COMPUTE, global_decomposition, pencil, tol=tol)
    checks = Checks()
    checks.add("P_k P_l = 0 and Q_k Q_l = 0", ss.annihilation(), 10 * tol)
    rows = []
    for pt in ss.points:
        idem = max(frob(pt.p @ pt.p - pt.p), frob(pt.q @ pt.q - pt.q))
        checks.add(f"P^2 = P, Q^2 = Q at {_fmt(pt.z)}", idem, tol)
        rows.append((_fmt(pt.z), pt.order, f"{frob(pt.residue):.6g}", f"{idem:.2e}"))
    # partial fractions against direct inversion at fixed sample points
    radius = 2.0 * max([1.0] + [abs(pt.z) for pt in ss.points])
    worst = 0.0
    for k in range(8):
        z = radius * complex(math.cos(2 * math.pi * (k + 0.37) / 8),
                             math.sin(2 * math.pi * (k + 0.37) / 8))
        direct = np.linalg.inv(pencil.a0 + z * pencil.a1)
        worst = max(worst, frob(ss.evaluate(z) - direct) / max(1.0, frob(direct)))
    checks.add("partial fractions vs direct inverse (relative)", worst, 1e-8)
    inputs = {"pencil": pencil_to_json(pencil), "tol": tol}
    table = _table(["z", "order", "|R_-1|", "projection defect"], rows) if rows else "no finite singularities"
    return inputs, {"singularities": singularity_set_to_json(ss)}, checks, table


def cmd_expand(args):
    pencil = _stage("read pencil", EXIT_INPUT, _load_pencil, args.pencil)
    tol = _tol(args, pencil)
    s, r = args.annulus
    k = args.terms
    ss = _stage("global decomposition", EXIT_COMPUTE, global_decomposition, pencil, tol=tol)
    series = _stage("annulus expansion", EXIT_COMPUTE, expand_in_annulus, ss, s, r, k, k)
    checks = Checks()
    res = fundamental_residuals(series, pencil, range(-k + 1, k + 1))
    # truncating the window leaves only the edge equations inexact
    worst = max(max(v) for v in res.values())
    checks.add(f"fundamental equations, j = {-k + 1}..{k}", worst, tol)
    inputs = {"pencil": pencil_to_json(pencil), "annulus": [s, radius_to_json(r)],
              "terms": k, "tol": tol}
    rows = [(f"R_{j}", f"{frob(m):.6g}") for j, m in series.items() if -3 <= j <= 3]
    table = f"expansion on {s} < |z| < {r}\n" + _table(["coeff", "norm"], rows)
    return inputs, {"series": series_to_json(series)}, checks, table


def cmd_verify(args):
    pencil = _stage("read pencil", EXIT_INPUT, _load_pencil, args.pencil)
    raw = _stage("read solution", EXIT_INPUT, load_json, args.solution)
    if isinstance(raw, dict) and "outputs" in raw:
        raw = raw["outputs"].get("solution", raw)
    ps = _stage("read solution", EXIT_INPUT, pole_solution_from_json, raw)
    tol = _tol(args, pencil)
    checks = Checks()
    if ps.order >= 1:
        basic = _stage("basic solution", EXIT_VERIFY, basic_solution, ps, pencil, tol=tol)
        for name, v in basic_conditions(basic.r_m1, basic.r_0, basic.local).items():
            checks.add(name, v, tol)
        series = coefficients_from_basic(basic, args.terms, args.terms)
        js = range(-args.terms + 1, args.terms + 1)
    else:
        local = pencil.shifted(ps.center)
        checks.add("R0 A0 = I", frob(ps.r_0 @ local.a0 - np.eye(local.n)), tol)
        basic = None
        series = LaurentSeries(neg=[np.zeros_like(ps.r_0)], nonneg=[ps.r_0], center=ps.center)
        js = [0]
    rows = []
    for j, (left, right) in fundamental_residuals(series, pencil, js).items():
        checks.add(f"fundamental equations j = {j}", max(left, right), tol)
        rows.append((j, f"{left:.2e}", f"{right:.2e}"))
    inputs = {"pencil": pencil_to_json(pencil), "solution": pole_solution_to_json(ps),
              "terms": args.terms, "tol": tol}
    return inputs, {"order": ps.order, "window": [series.j_min, series.j_max]}, checks, \
        _table(["j", "left", "right"], rows)


def cmd_markov(args):
    if args.csv:
        def read():
            try:
                with open(args.csv, "r", encoding="utf-8") as fh:
                    return read_chain_csv(fh.read())
            except OSError as exc:
                raise InputError(f"cannot read {args.csv}: {exc.strerror}") from exc
        chain = _stage("read chain", EXIT_INPUT, read)
        source = {"csv": args.csv}
    else:
        chain = _stage("build chain", EXIT_INPUT, staircase_chain, args.r)
        source = {"staircase": args.r}
    pcp = _stage("chain pencil", EXIT_COMPUTE, perturbed_pencil, chain)
    tol = _tol(args, pcp.pencil)
    ps = _stage("determining equations", EXIT_COMPUTE, solve_determining, pcp.pencil, 0j, tol=tol)
    basic = _stage("basic solution", EXIT_COMPUTE, basic_solution, ps, pcp.pencil, tol=tol)
    fi = _stage("fundamental inverse", EXIT_COMPUTE, fundamental_inverse, chain, args.epsilon, basic)
    checks = Checks()
    checks.add("limit of P^k equals 1 e_1", pcp.limit_residual, 1e-8)
    checks.add("(A0 + eps A1) X = I", fi.residual, 1e-9)
    checks.add("X vs LU inverse", fi.lu_difference, 1e-9)
    inputs = {"chain": source, "P": matrix_to_json(chain.p), "epsilon": args.epsilon, "tol": tol}
    outputs = {"order": ps.order, "R_-1": matrix_to_json(basic.r_m1),
               "R_0": matrix_to_json(basic.r_0), "inverse": matrix_to_json(fi.value)}
    table = f"pole order {ps.order}; inverse at eps = {args.epsilon}\n" + np.array2string(
        fi.value.real, precision=6, suppress_small=True)
    return inputs, outputs, checks, table


def cmd_poly(args):
    pp = _stage("read polynomial pencil", EXIT_INPUT, lambda: poly_from_json(load_json(args.poly)))
    base = args.tol if args.tol is not None else residual_base()
    tol = base * max(1.0, sum(frob(c) for c in pp.coeffs))
    pb = _stage("augmented solve", EXIT_COMPUTE, poly_basic_solution, pp, args.center, tol=tol)
    k = max(args.terms, pp.degree)
    series = _stage("augmented recurrences", EXIT_COMPUTE, poly_series, pb, k + pp.degree, k)
    checks = Checks()
    for j, (left, right) in poly_fundamental_residuals(series, pp, range(-k + pp.degree, k + 1)).items():
        checks.add(f"polynomial fundamental equations j = {j}", max(left, right), tol)
    checks.add("duplicate block agreement", pb.diagnostics.get("block_disagreement", 0.0), 1e-8)
    n = pp.degree
    inputs = {"poly": poly_to_json(pp), "center": complex_to_json(args.center), "tol": tol}
    outputs = {"augmented_order": pb.order, "degree": n,
               "basic": {str(t): matrix_to_json(pb.coeff(t)) for t in range(-n, n)},
               "series": series_to_json(series)}
    rows = [(f"R_{t}", f"{frob(pb.coeff(t)):.6g}") for t in range(-n, n)]
    return inputs, outputs, checks, f"augmented pole order {pb.order}\n" + _table(["coeff", "norm"], rows)


def cmd_oracle(args):
    pencil = _stage("read pencil", EXIT_INPUT, _load_pencil, args.pencil)
    tol = _tol(args, pencil)
    coeffs, nodes = _stage("contour integral", EXIT_COMPUTE, contour_coefficients, pencil,
                           args.center, args.rho, [args.j], args.nodes)
    value = coeffs[args.j]
    checks = Checks()
    comparison = None
    try:
        ps = solve_determining(pencil, args.center, tol=tol)
        basic = basic_solution(ps, pencil, tol=tol)
        if basic.annulus.contains(args.rho):
            k = max(1, abs(args.j))
            series = coefficients_from_basic(basic, k, k)
            if ps.order == 0 and args.j < 0:
                ref = np.zeros_like(value)
            else:
                ref = series[args.j]
            comparison = frob(value - ref)
            checks.add(f"contour R_{args.j} vs determining solver", comparison, 1e-8)
    except PencilError:
        pass
    inputs = {"pencil": pencil_to_json(pencil), "center": complex_to_json(args.center),
              "rho": args.rho, "j": args.j, "nodes": args.nodes}
    outputs = {"coefficient": matrix_to_json(value), "nodes_used": nodes,
               "solver_difference": comparison}
    table = f"R_{args.j} by contour ({nodes} nodes), norm {frob(value):.6g}" + (
        "" if comparison is None else f", solver difference {comparison:.2e}")
    return inputs, outputs, checks, table


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencilkit",
                                 description="Laurent expansions of matrix pencil resolvents.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, pencil=True):
        if pencil:
            p.add_argument("--pencil", required=True,
                           help="pencil JSON file, or name:<catalog entry>")
        p.add_argument("--out", help="write the report (without timing) to this file")
        p.add_argument("--tol", type=float, default=None,
                       help="base residual tolerance (default 1e-10 or $PENCILKIT_TOL)")
        p.add_argument("--quiet", action="store_true", help="suppress the table on stderr")

    p = sub.add_parser("solve", help="pole order and R_-p..R_0 at a point")
    common(p)
    p.add_argument("--center", type=parse_complex, default=0j, help="re or re,im")
    p.add_argument("--max-order", type=int, default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("spectrum", help="all finite singularities and projections")
    common(p)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("expand", help="Laurent window about 0 on an annulus")
    common(p)
    p.add_argument("--annulus", type=parse_annulus, required=True, help="s:r, r may be inf")
    p.add_argument("--terms", type=int, default=6)
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("verify", help="check a stored pole solution against a pencil")
    common(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--terms", type=int, default=6)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("markov", help="fundamental inverse of a perturbed absorbing chain")
    common(p, pencil=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--r", type=int, help="staircase chain with r + 1 states")
    g.add_argument("--csv", help="row-stochastic matrix, one row per line")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.set_defaults(fn=cmd_markov)

    p = sub.add_parser("poly", help="polynomial pencil through its augmented pencil")
    common(p, pencil=False)
    p.add_argument("--poly", required=True, help='JSON {"coeffs": [A0, A1, ...]}')
    p.add_argument("--center", type=parse_complex, default=0j)
    p.add_argument("--terms", type=int, default=4)
    p.set_defaults(fn=cmd_poly)

    p = sub.add_parser("oracle", help="Laurent coefficient by contour integration")
    common(p)
    p.add_argument("--center", type=parse_complex, default=0j)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--j", type=int, default=-1)
    p.add_argument("--nodes", type=int, default=128)
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    started = time.perf_counter()
    report = {"command": args.command}
    try:
        inputs, outputs, checks, table = args.fn(args)
    except _Failure as exc:
        report.update({"error": {"stage": exc.stage, "message": str(exc.__cause__)},
                       "verification": {"checks": [], "all_pass": False}})
        code = exc.code
        table = f"error in stage '{exc.stage}': {exc.__cause__}"
    else:
        report.update({"inputs_digest": _digest(inputs), "inputs": inputs,
                       "outputs": outputs, "verification": checks.to_json()})
        code = EXIT_OK if checks.ok else EXIT_VERIFY
        if not checks.ok:
            failed = [c["name"] for c in checks.items if not c["pass"]]
            table += "\nverification failed: " + "; ".join(failed)
    report["exit_status"] = code
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(dumps(report))
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_INPUT
    report["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    sys.stdout.write(dumps(report))
    if not args.quiet:
        print(table, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
