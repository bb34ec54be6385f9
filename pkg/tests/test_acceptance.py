"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed inline)
or directly with ``python3 tests/test_acceptance.py``.  Tolerances are fixed
here and must not be loosened.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pencilkit import Annulus, LinearPencil, basic_solution, solve_determining  # noqa: E402
from pencilkit.catalog import (DOUBLE_POLE_COEFFS, THREE_POLE_REGIONS,  # noqa: E402
                               THREE_POLE_RESIDUES, double_pole_pencil, three_pole_pencil)
from pencilkit.core import fundamental_residuals, geometric_bound_estimate  # noqa: E402
from pencilkit.determining import BasicSolution, basic_conditions  # noqa: E402
from pencilkit.errors import NoPoleWithinBound  # noqa: E402
from pencilkit.laurent import (coefficients_from_basic, contour_coefficient_oracle,  # noqa: E402
                               resolvent_equation_residual)
from pencilkit.markov import (chain_basic_solution, closed_form_staircase,  # noqa: E402
                              closed_form_staircase_exact, harmonic, perturbed_pencil,
                              staircase_chain)
from pencilkit.polynomial import (PolynomialPencil, augment, poly_basic_solution,  # noqa: E402
                                  poly_series)
from pencilkit.spectral import (expand_in_annulus, find_singularities,  # noqa: E402
                                global_decomposition, jordan_chain, shift_pencil,
                                weighted_shift, weighted_shift_power_norm)

from oracles import exact_poly_coefficients, structured_pencil  # noqa: E402

SEED = 20240611

TOL_EX1 = 1e-10
TOL_STAIRCASE = 1e-10
TOL_STAIRCASE_INVERSE = 1e-9
TOL_ROOTS = 1e-8
TOL_EX3 = 1e-10
TOL_NORM_REL = 1e-9
TOL_PROPERTY = 1e-9
TOL_GELFAND_INNER = 1e-6
TOL_GELFAND_OUTER = 1e-6
TOL_ORACLE = 1e-8
TOL_RESOLVENT = 1e-9
TOL_POLY = 1e-9
TOL_SHIFT_NORM_REL = 1e-12


def _max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _spectral_radius(m):
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def _ex3_basic(region):
    r_m1, r_0 = THREE_POLE_REGIONS[region]
    return BasicSolution(r_m1=r_m1, r_0=r_0, pencil=three_pole_pencil(),
                         annulus=Annulus(*region))


# --------------------------------------------------------------------------
# criteria; each returns (passed, detail)

def criterion_1():
    ps = solve_determining(double_pole_pencil(), 0)
    err = max(_max_abs(g, w) for g, w in zip(ps.coeffs, DOUBLE_POLE_COEFFS))
    ok = ps.order == 2 and err <= TOL_EX1
    return ok, f"order {ps.order}, max entry error {err:.2e} (tol {TOL_EX1:g})"


def criterion_2():
    worst_coeff = worst_inv = 0.0
    harmonic_ok = True
    for r in range(1, 7):
        chain = staircase_chain(r)
        basic = chain_basic_solution(chain)
        rm1, r0 = closed_form_staircase(r)
        worst_coeff = max(worst_coeff, _max_abs(basic.r_m1, rm1), _max_abs(basic.r_0, r0))
        exact_rm1, _ = closed_form_staircase_exact(r)
        for k in range(1, r + 1):
            harmonic_ok &= exact_rm1[0][k] == -(harmonic(k) + 1)
            harmonic_ok &= abs(basic.r_m1[0, k] - float(-(harmonic(k) + 1))) <= TOL_STAIRCASE
        pencil = perturbed_pencil(chain).pencil
        for eps in (1.0, 0.5, 0.25):
            a = pencil.a0 + eps * pencil.a1
            x = basic.r_m1 / eps + basic.r_0
            worst_inv = max(worst_inv, _max_abs(a @ x, np.eye(r + 1)))
    ok = worst_coeff <= TOL_STAIRCASE and worst_inv <= TOL_STAIRCASE_INVERSE and harmonic_ok
    return ok, (f"r = 1..6: coefficient error {worst_coeff:.2e}, inverse residual "
                f"{worst_inv:.2e}, harmonic first row {'ok' if harmonic_ok else 'wrong'}")


def criterion_3():
    pencil = three_pole_pencil()
    zs = sorted(find_singularities(pencil), key=lambda z: z.real)
    root_err = max(abs(z - w) for z, w in zip(zs, (-3, -1, 0))) if len(zs) == 3 else math.inf
    ss = global_decomposition(pencil)
    by_z = {round(pt.z.real): pt for pt in ss.points}
    res_err = max(_max_abs(by_z[z].residue, m) for z, m in THREE_POLE_RESIDUES.items())
    region_err = 0.0
    for region, (r_m1, r_0) in THREE_POLE_REGIONS.items():
        series = expand_in_annulus(ss, region[0], region[1], 6, 6)
        region_err = max(region_err, _max_abs(series[-1], r_m1), _max_abs(series[0], r_0))
    # norms of R0 A1 and of powers of R-1 A0 read as spectral radii
    inner = _ex3_basic((0.0, 1.0))
    middle = _ex3_basic((1.0, 3.0))
    outer = _ex3_basic((3.0, math.inf))
    rel = [abs(_spectral_radius(inner.r_0 @ pencil.a1) - 1.0),
           abs(_spectral_radius(middle.r_0 @ pencil.a1) - 1 / 3) * 3]
    m = outer.r_m1 @ pencil.a0
    for j in range(1, 6):
        rel.append(abs(_spectral_radius(np.linalg.matrix_power(m, j)) - 3 ** j) / 3 ** j)
    ok = (root_err <= TOL_ROOTS and res_err <= TOL_EX3 and region_err <= TOL_EX3
          and max(rel) <= TOL_NORM_REL)
    return ok, (f"roots {root_err:.2e}, residues {res_err:.2e}, regions {region_err:.2e}, "
                f"norm facts rel {max(rel):.2e}")


def criterion_4(count=50):
    rng = np.random.default_rng(SEED)
    worst_cond = worst_fund = worst_inner = worst_outer = 0.0
    orders_ok = True
    for _ in range(count):
        n = int(rng.integers(3, 9))
        p = int(rng.integers(1, min(3, n - 1) + 1))
        a0, a1, _, d = structured_pencil(rng, n, p)
        pencil = LinearPencil(a0, a1)
        ps = solve_determining(pencil, 0)
        orders_ok &= ps.order == p
        basic = basic_solution(ps, pencil, other_singularities=list(-d))
        worst_cond = max(worst_cond, max(basic_conditions(basic.r_m1, basic.r_0,
                                                          basic.local).values()))
        series = coefficients_from_basic(basic, 8, 8)
        res = fundamental_residuals(series, pencil, range(-6, 7))
        worst_fund = max(worst_fund, max(max(v) for v in res.values()))
        est = geometric_bound_estimate(series, pencil)
        rho = _spectral_radius(basic.r_0 @ pencil.a1)
        worst_inner = max(worst_inner, est.s_est)
        worst_outer = max(worst_outer, 1.0 / est.r_est - rho)
    ok = (orders_ok and worst_cond < TOL_PROPERTY and worst_fund < TOL_PROPERTY
          and worst_inner < TOL_GELFAND_INNER and worst_outer <= TOL_GELFAND_OUTER)
    return ok, (f"{count} pencils: orders {'ok' if orders_ok else 'wrong'}, conditions "
                f"{worst_cond:.2e}, fundamental {worst_fund:.2e}, s_est {worst_inner:.2e}, "
                f"1/r_est - rho {worst_outer:.2e}")


def criterion_5():
    cases = []
    ex1 = double_pole_pencil()
    cases.append((ex1, basic_solution(solve_determining(ex1, 0), ex1, [-1.0]), 0.5))
    ex3 = three_pole_pencil()
    cases.append((ex3, basic_solution(solve_determining(ex3, 0), ex3, [-1.0, -3.0]), 0.5))
    rng = np.random.default_rng(SEED + 5)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        p = int(rng.integers(1, min(3, n - 1) + 1))
        a0, a1, _, d = structured_pencil(rng, n, p)
        pencil = LinearPencil(a0, a1)
        basic = basic_solution(solve_determining(pencil, 0), pencil, list(-d))
        cases.append((pencil, basic, 0.5 * float(min(abs(d)))))
    worst = 0.0
    for pencil, basic, rho in cases:
        series = coefficients_from_basic(basic, 4, 4)
        for j in range(-4, 5):
            est = contour_coefficient_oracle(pencil, 0, rho, j=j)
            worst = max(worst, _max_abs(est, series[j]))
    return worst <= TOL_ORACLE, f"{len(cases)} pencils, |j| <= 4: max difference {worst:.2e}"


def _random_pairs(rng, annulus, count=10):
    # -1/lam must lie in the annulus: 1/r < |lam| < 1/s
    lo = 0.0 if math.isinf(annulus.r) else 1.0 / annulus.r
    hi = math.inf if annulus.s == 0 else 1.0 / annulus.s
    lo, hi = lo * 1.25 if lo else 0.05, min(hi / 1.25, 5.0) if not math.isinf(hi) else 5.0
    out = []
    for _ in range(count):
        mods = rng.uniform(lo, hi, 2)
        args = rng.uniform(0, 2 * math.pi, 2)
        out.append(tuple(m * complex(math.cos(a), math.sin(a)) for m, a in zip(mods, args)))
    return out


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    ex1 = double_pole_pencil()
    examples = {
        "double pole": basic_solution(solve_determining(ex1, 0), ex1, [-1.0]),
        "staircase r=3": chain_basic_solution(staircase_chain(3)),
    }
    for region in THREE_POLE_REGIONS:
        examples[f"three poles {region}"] = _ex3_basic(region)
    worst = 0.0
    for basic in examples.values():
        for lam, mu in _random_pairs(rng, basic.annulus):
            worst = max(worst, *resolvent_equation_residual(basic, lam, mu))
    return worst < TOL_RESOLVENT, f"{len(examples)} examples x 10 pairs: max residual {worst:.2e}"


def criterion_7():
    scalar = [[[2]], [[-3]], [[1]]]
    quads = [[[[0, 1], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, 1]]],
             [[[1, 2], [0, 0]], [[0, 1], [-1, 3]], [[1, 0], [2, 1]]]]
    worst = 0.0
    for rows, centers in [(scalar, (0, 1, 2))] + [(q, (0, 0.5)) for q in quads]:
        pp = PolynomialPencil(tuple(np.array(r, float) for r in rows))
        for c in centers:
            series = poly_series(poly_basic_solution(pp, c), 4, 4)
            js = list(range(-2 if c else 0, 5))
            exact = exact_poly_coefficients(rows, c, js)
            worst = max(worst, max(_max_abs(series[j], exact[j]) for j in js))
    ex1 = double_pole_pencil()
    pp = PolynomialPencil.from_linear(ex1)
    aug = augment(pp).inner
    pb = poly_basic_solution(pp, 0)
    basic = basic_solution(solve_determining(ex1, 0), ex1)
    identical = (np.array_equal(aug.a0, ex1.a0) and np.array_equal(aug.a1, ex1.a1)
                 and np.array_equal(pb.coeff(-1), basic.r_m1)
                 and np.array_equal(pb.coeff(0), basic.r_0))
    ok = worst <= TOL_POLY and identical
    return ok, (f"expansion error {worst:.2e}, linear path "
                f"{'bit-identical' if identical else 'differs'}")


def criterion_8():
    ex1 = double_pole_pencil()
    chain = jordan_chain(solve_determining(ex1, 0), ex1)
    ok = len(chain) == 2
    shift = shift_pencil(0.5, 6)
    ps = solve_determining(shift, 0)
    lengths = []
    for length in range(1, 6):
        lengths.append(len(jordan_chain(ps, shift, length=length)))
    ok &= lengths == [1, 2, 3, 4, 5]
    w = weighted_shift(0.5, 6)
    rel = max(abs(np.linalg.norm(np.linalg.matrix_power(w, n), 2)
                  / weighted_shift_power_norm(0.5, n) - 1) for n in range(1, 6))
    ok &= rel <= TOL_SHIFT_NORM_REL
    return ok, f"double pole chain length {len(chain)}, shift chains {lengths}, norm rel {rel:.1e}"


def criterion_9():
    shift = shift_pencil(0.5, 6)
    messages = []
    for max_order in range(0, 6):
        try:
            solve_determining(shift, 0, max_order=max_order)
        except NoPoleWithinBound as exc:
            messages.append(str(exc))
        else:
            return False, f"max_order {max_order} returned a solution"
    named = all("essential" in m for m in messages)
    return named, f"max_order 0..5 refused; limitation named: {named}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 10)}


def run_criterion(n):
    try:
        ok, detail = CRITERIA[n]()
    except Exception as exc:  # a crash is a failure with its message shown
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return ok, f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, line = run_criterion(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n) for n in range(1, 10)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
