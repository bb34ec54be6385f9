"""Perturbed absorbing Markov chains as a singular linear pencil.

For a row-stochastic P absorbing at the first state, the perturbed chain
T_eps = (1 - eps) I + eps P has limit T^inf = 1 e_1 for every eps > 0, and
the fundamental matrix [I - T_eps + T_eps^inf]^{-1} (transposed) is the
resolvent of A0 + eps A1 with A0 = (T^inf)^T and A1 = (I - P)^T.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import LinearPencil, as_matrix, frob
from .determining import BasicSolution, basic_solution, solve_determining
from .errors import InputError, NotAbsorbingAtFirstState
from .laurent import evaluate_closed_form

NEGATIVE_TOL = 1e-12
ROW_SUM_TOL = 1e-10
LIMIT_TOL = 1e-8
SQUARINGS = 40


@dataclass(frozen=True)
class StochasticMatrix:
    p: np.ndarray
    #: exact rational entries when the chain was built symbolically
    exact: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InputError(f"transition matrix must be square, got shape {p.shape}")
        if np.any(np.abs(p.imag) > 0):
            raise InputError("transition matrix must be real")
        real = p.real
        for i, row in enumerate(real):
            if not np.all(np.isfinite(row)):
                raise InputError(f"row {i + 1}: non-finite entry")
            if np.any(row < -NEGATIVE_TOL):
                raise InputError(f"row {i + 1}: negative probability {row.min():.3g}")
            if abs(row.sum() - 1.0) > ROW_SUM_TOL:
                raise InputError(f"row {i + 1}: entries sum to {row.sum():.12g}, not 1")
        object.__setattr__(self, "p", as_matrix(p, "P"))

    @property
    def size(self) -> int:
        return self.p.shape[0]


def staircase_chain(r: int) -> StochasticMatrix:
    """(r+1)-state chain whose k-th row (1-based) spreads mass 1/k over states 1..k."""
    if r < 1:
        raise InputError("r must be at least 1")
    rows = []
    for k in range(1, r + 2):
        rows.append(tuple(Fraction(1, k) if c < k else Fraction(0) for c in range(r + 1)))
    assert all(sum(row) == 1 for row in rows)
    p = np.array([[float(x) for x in row] for row in rows])
    return StochasticMatrix(p, exact=tuple(rows))


def read_chain_csv(text: str) -> StochasticMatrix:
    """Parse a row-stochastic matrix, one row per line."""
    rows = []
    for i, raw in enumerate(csv.reader(io.StringIO(text))):
        cells = [c.strip() for c in raw if c.strip() != ""]
        if not cells:
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise InputError(f"row {i + 1}: {exc}") from exc
    if not rows:
        raise InputError("empty chain file")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InputError(f"row {i + 1}: expected {width} entries, got {len(row)}")
    return StochasticMatrix(np.array(rows))


def limit_matrix(chain: StochasticMatrix, squarings: int = SQUARINGS) -> np.ndarray:
    t = chain.p.real.copy()
    for _ in range(squarings):
        t = t @ t
    return t


@dataclass(frozen=True)
class PerturbedChainPencil:
    pencil: LinearPencil
    source: StochasticMatrix
    #: max |T^inf - 1 e_1| and ||P T^inf - T^inf||
    limit_residual: float = 0.0
    invariance_residual: float = 0.0


def perturbed_pencil(chain: StochasticMatrix) -> PerturbedChainPencil:
    """A0 with first row all ones, A1 = (I - P)^T, after checking T^inf = 1 e_1."""
    n = chain.size
    t_inf = limit_matrix(chain)
    target = np.zeros((n, n))
    target[:, 0] = 1.0
    limit_res = float(np.max(np.abs(t_inf - target)))
    invariance = frob(chain.p.real @ t_inf - t_inf)
    if not limit_res <= LIMIT_TOL:
        raise NotAbsorbingAtFirstState(
            f"the limit of P^k is not 1 e_1 (max deviation {limit_res:.3e}); "
            "the pencil construction needs every state to drain into the first")
    a0 = np.zeros((n, n))
    a0[0, :] = 1.0
    a1 = (np.eye(n) - chain.p.real).T
    return PerturbedChainPencil(LinearPencil(a0, a1), chain, limit_res, invariance)


def chain_basic_solution(chain: StochasticMatrix) -> BasicSolution:
    pcp = perturbed_pencil(chain)
    ps = solve_determining(pcp.pencil, 0j)
    return basic_solution(ps, pcp.pencil)


@dataclass(frozen=True)
class FundamentalInverse:
    value: np.ndarray
    epsilon: float
    #: ||value - LU inverse of A0 + eps A1||_F
    lu_difference: float
    #: ||(A0 + eps A1) value - I||_F
    residual: float


def fundamental_inverse(chain: StochasticMatrix, epsilon: float,
                        basic: Optional[BasicSolution] = None) -> FundamentalInverse:
    """(A0 + eps A1)^{-1} from the basic solution, cross-checked by LU."""
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 1.0:
        raise InputError("epsilon must lie in (0, 1]")
    if basic is None:
        basic = chain_basic_solution(chain)
    sample = evaluate_closed_form(basic, epsilon)
    a = basic.pencil.a0 + epsilon * basic.pencil.a1
    direct = np.linalg.inv(a)
    return FundamentalInverse(value=sample.value, epsilon=epsilon,
                              lu_difference=frob(sample.value - direct),
                              residual=sample.residual)


def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))


def closed_form_staircase_exact(r: int) -> tuple[list, list]:
    """Exact rational R_{-1}, R_0 of the staircase pencil."""
    if r < 1:
        raise InputError("r must be at least 1")
    n = r + 1
    rm1 = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n):
        rm1[0][k] = -(harmonic(k) + 1)
    for i in range(1, n):
        rm1[i][i] = 1 + Fraction(1, i)
        for k in range(i + 1, n):
            rm1[i][k] = Fraction(1, i)
    r0 = [[Fraction(1) if i == 0 else Fraction(0) for _ in range(n)] for i in range(n)]
    return rm1, r0


def closed_form_staircase(r: int) -> tuple[np.ndarray, np.ndarray]:
    rm1, r0 = closed_form_staircase_exact(r)
    return (as_matrix([[float(x) for x in row] for row in rm1]),
            as_matrix([[float(x) for x in row] for row in r0]))
