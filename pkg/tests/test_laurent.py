import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pencilkit import basic_solution, solve_determining
from pencilkit.catalog import DOUBLE_POLE_COEFFS, staircase_pencil
from pencilkit.errors import InnerSingular, NodeSingular, OutOfDomain
from pencilkit.laurent import (coefficients_from_basic, contour_coefficient_oracle,
                               contour_coefficients, contour_series, evaluate_closed_form,
                               evaluate_partial_sum, resolvent_equation_residual)
from pencilkit.markov import chain_basic_solution, staircase_chain

from conftest import EX3_A0, EX3_A1, ex3_region_basic
from oracles import exact_region_coefficients

REGIONS = [(0.0, 1.0), (1.0, 3.0), (3.0, math.inf)]


@pytest.fixture
def ex1_basic(ex1):
    return basic_solution(solve_determining(ex1, 0), ex1, other_singularities=[-1.0])


def test_recurrences_double_pole(ex1_basic):
    series = coefficients_from_basic(ex1_basic, 4, 3)
    assert np.max(np.abs(series[-2] - DOUBLE_POLE_COEFFS[0])) < 1e-10
    assert np.max(np.abs(series[-3])) < 1e-12 and np.max(np.abs(series[-4])) < 1e-12
    r0 = DOUBLE_POLE_COEFFS[2]
    for j in range(4):
        assert np.max(np.abs(series[j] - (-1) ** j * r0)) < 1e-10


@pytest.mark.parametrize("region", REGIONS)
def test_recurrences_match_exact_expansion(region):
    basic = ex3_region_basic(*region)
    series = coefficients_from_basic(basic, 4, 4)
    exact = exact_region_coefficients(EX3_A0, EX3_A1, region[0], region[1], range(-4, 5))
    for j in range(-4, 5):
        assert np.max(np.abs(series[j] - exact[j])) < 1e-10


@pytest.mark.parametrize("region,points", [
    ((0.0, 1.0), [0.5, 0.3j, -0.7 + 0.1j]),
    ((1.0, 3.0), [2.0, 1.5j, -2.5 + 0.5j]),
    ((3.0, math.inf), [4.0, 10j, -50 + 3j]),
])
def test_closed_form_is_inverse(region, points):
    basic = ex3_region_basic(*region)
    for z in points:
        sample = evaluate_closed_form(basic, z)
        want = np.linalg.inv(basic.pencil.a0 + z * basic.pencil.a1)
        assert np.max(np.abs(sample.value - want)) < 1e-10
        assert sample.residual < 1e-10


def test_closed_form_at_twenty_points(ex1_basic, rng):
    p = ex1_basic.pencil
    for _ in range(20):
        z = complex(*rng.uniform(-1, 1, 2)) * 0.9
        if abs(z) < 0.05:
            continue
        sample = evaluate_closed_form(ex1_basic, z)
        a = p.a0 + z * p.a1
        assert np.linalg.norm(a @ sample.value - np.eye(3)) < 1e-9
        assert np.linalg.norm(sample.value @ a - np.eye(3)) < 1e-9


def test_closed_form_at_the_pole_refuses(ex1_basic):
    with pytest.raises(InnerSingular):
        evaluate_closed_form(ex1_basic, 0.0)


def test_partial_sum_double_pole(ex1_basic):
    series = coefficients_from_basic(ex1_basic, 8, 8)
    z = 0.1
    want = np.linalg.inv(ex1_basic.pencil.a0 + z * ex1_basic.pencil.a1)
    assert np.max(np.abs(evaluate_partial_sum(series, z) - want)) < 1e-8


def test_partial_sum_middle_region():
    # the tail decays like (2/3)^j, so a long window is needed at |z| = 2
    basic = ex3_region_basic(1.0, 3.0)
    z = 2j
    want = np.linalg.inv(basic.pencil.a0 + z * basic.pencil.a1)
    short = evaluate_partial_sum(coefficients_from_basic(basic, 12, 12), z)
    long = evaluate_partial_sum(coefficients_from_basic(basic, 60, 60), z)
    assert np.max(np.abs(long - want)) < 1e-9
    assert np.max(np.abs(short - want)) > 1e-4


@pytest.mark.parametrize("lam,mu", [(1.0, 2.0), (0.5 + 0.5j, -3.0), (4j, 1.5)])
def test_resolvent_equations_staircase(lam, mu):
    basic = chain_basic_solution(staircase_chain(3))
    res_r, res_s = resolvent_equation_residual(basic, lam, mu)
    assert res_r < 1e-9 and res_s < 1e-9


def test_resolvent_equations_inner_region():
    basic = ex3_region_basic(0.0, 1.0)
    res = resolvent_equation_residual(basic, -2.0, 4.0)
    assert max(res) < 1e-9
    assert max(resolvent_equation_residual(basic, 3.0, 3.0)) < 1e-12


def test_resolvent_equations_domain_check():
    basic = ex3_region_basic(0.0, 1.0)
    with pytest.raises(OutOfDomain):
        resolvent_equation_residual(basic, 0.5, 4.0)
    with pytest.raises(OutOfDomain):
        resolvent_equation_residual(basic, 0.0, 4.0)


@given(st.floats(0.05, 0.95), st.floats(0, 2 * math.pi))
def test_closed_form_matches_series_inner(radius, angle):
    basic = ex3_region_basic(0.0, 1.0)
    z = radius * complex(math.cos(angle), math.sin(angle))
    sample = evaluate_closed_form(basic, z)
    want = np.linalg.inv(basic.pencil.a0 + z * basic.pencil.a1)
    assert np.max(np.abs(sample.value - want)) < 1e-8 * max(1.0, np.abs(want).max())


def test_contour_oracle_double_pole(ex1, ex1_basic):
    series = coefficients_from_basic(ex1_basic, 4, 4)
    for j in range(-4, 5):
        est = contour_coefficient_oracle(ex1, 0, 0.5, j=j)
        assert np.max(np.abs(est - series[j])) < 1e-8


@pytest.mark.parametrize("region,rho", [((0.0, 1.0), 0.5), ((1.0, 3.0), 2.0),
                                        ((3.0, math.inf), 5.0)])
def test_contour_oracle_regions(ex3, region, rho):
    series = coefficients_from_basic(ex3_region_basic(*region), 4, 4)
    coeffs, nodes = contour_coefficients(ex3, 0, rho, range(-4, 5))
    assert nodes >= 128
    for j in range(-4, 5):
        assert np.max(np.abs(coeffs[j] - series[j])) < 1e-8


def test_contour_node_on_a_pole(ex3):
    with pytest.raises(NodeSingular):
        contour_coefficients(ex3, 0, 1.0, [0], nodes=16)


def test_contour_argument_checks(ex3):
    with pytest.raises(ValueError):
        contour_coefficients(ex3, 0, 0.5, [0], nodes=8)
    with pytest.raises(ValueError):
        contour_coefficients(ex3, 0, -1.0, [0])


def test_staircase_contour_series():
    p = staircase_pencil(4)
    basic = chain_basic_solution(staircase_chain(4))
    series = contour_series(p, 0, 0.5, 3, 3)
    generated = coefficients_from_basic(basic, 3, 3)
    for j in range(-3, 4):
        assert np.max(np.abs(series[j] - generated[j])) < 1e-8


def test_geometric_tail_outer_region():
    basic = ex3_region_basic(3.0, math.inf)
    series = coefficients_from_basic(basic, 8, 2)
    norms = [np.max(np.abs(np.linalg.eigvals(series[-j - 1] @ np.linalg.pinv(series[-j]))))
             for j in range(1, 4)]
    for v in norms:
        assert v == pytest.approx(3.0, rel=1e-9)


def test_window_argument_checks(ex1_basic):
    with pytest.raises(ValueError):
        coefficients_from_basic(ex1_basic, 0, 3)
