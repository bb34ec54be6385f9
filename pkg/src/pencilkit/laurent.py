"""Laurent windows, the closed-form resolvent and the contour oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import EPS, LaurentSeries, LinearPencil, frob
from .determining import BasicSolution
from .errors import InnerSingular, NodeSingular, OutOfDomain

#: condition numbers above this are treated as numerically singular
COND_LIMIT = 1.0 / (1e3 * EPS)


@dataclass(frozen=True)
class ResolventSample:
    z: complex
    value: np.ndarray
    residual: float
    #: condition numbers of the two inner matrices of the closed form
    cond: tuple = (1.0, 1.0)


def coefficients_from_basic(basic: BasicSolution, k_neg: int, k_pos: int) -> LaurentSeries:
    """R_{-1} .. R_{-k_neg} and R_0 .. R_{k_pos} generated from the basic pair.

    R_{-j-1} = -(R_{-1} A0) R_{-j} and R_{j+1} = -(R_0 A1) R_j.
    """
    if k_neg < 1 or k_pos < 1:
        raise ValueError("k_neg and k_pos must be at least 1")
    local = basic.local
    m_in = basic.r_m1 @ local.a0
    m_out = basic.r_0 @ local.a1
    neg = [basic.r_m1]
    for _ in range(k_neg - 1):
        neg.append(-m_in @ neg[-1])
    pos = [basic.r_0]
    for _ in range(k_pos):
        pos.append(-m_out @ pos[-1])
    return LaurentSeries(neg=neg, nonneg=pos, annulus=basic.annulus, center=basic.center)


def _solve_checked(a: np.ndarray, b: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    cond = float(np.linalg.cond(a))
    if not cond < COND_LIMIT:
        raise InnerSingular(f"{what} is numerically singular (cond {cond:.3e})")
    return np.linalg.solve(a, b), cond


def evaluate_closed_form(basic: BasicSolution, z: complex) -> ResolventSample:
    """R(z) = (I w + R_{-1} A0)^{-1} R_{-1} + (I + R_0 A1 w)^{-1} R_0, w = z - center."""
    z = complex(z)
    w = z - basic.center
    local = basic.local
    eye = np.eye(basic.r_m1.shape[0], dtype=complex)
    inner, c1 = _solve_checked(eye * w + basic.r_m1 @ local.a0, basic.r_m1,
                               "I w + R_-1 A0")
    outer, c2 = _solve_checked(eye + w * (basic.r_0 @ local.a1), basic.r_0,
                               "I + R_0 A1 w")
    value = inner + outer
    a = basic.pencil.a0 + z * basic.pencil.a1
    residual = frob(a @ value - np.eye(a.shape[0]))
    return ResolventSample(z=z, value=value, residual=residual, cond=(c1, c2))


def evaluate_partial_sum(series: LaurentSeries, z: complex) -> np.ndarray:
    w = complex(z) - series.center
    total = np.zeros(series.shape, dtype=complex)
    for j, r in series.items():
        total = total + r * w ** j
    return total


def resolvent_equation_residual(basic: BasicSolution, lam: complex, mu: complex,
                                margin: float = 1e-12) -> tuple[float, float]:
    """Residuals of both classical resolvent equations at (lam, mu).

    With R_lam = lam^{-1} R(-1/lam) A0 and S_lam = lam^{-1} A0 R(-1/lam) this
    returns ||R_lam - R_mu - (mu - lam) R_lam R_mu|| and the S analogue.  All
    quantities are in local coordinates about the basic solution's center.
    """
    lam, mu = complex(lam), complex(mu)
    for x in (lam, mu):
        if x == 0 or not basic.annulus.contains(-1.0 / x, margin):
            raise OutOfDomain(f"-1/{x} lies outside the annulus "
                              f"({basic.annulus.s}, {basic.annulus.r})")
    a0 = basic.local.a0

    def resolvent(x):
        return evaluate_closed_form(basic, basic.center - 1.0 / x).value

    r_l, r_m = resolvent(lam), resolvent(mu)
    big_r = (r_l @ a0) / lam, (r_m @ a0) / mu
    big_s = (a0 @ r_l) / lam, (a0 @ r_m) / mu
    d = mu - lam
    res_r = frob(big_r[0] - big_r[1] - d * big_r[0] @ big_r[1])
    res_s = frob(big_s[0] - big_s[1] - d * big_s[0] @ big_s[1])
    return res_r, res_s


def _node_inverses(pencil: LinearPencil, center: complex, rho: float, nodes: int):
    w = rho * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    local = pencil.shifted(center)
    a = local.a0[None, :, :] + w[:, None, None] * local.a1[None, :, :]
    cond = np.linalg.cond(a)
    bad = np.nonzero(~(cond < COND_LIMIT))[0]
    if bad.size:
        k = int(bad[0])
        raise NodeSingular(f"A(z) is numerically singular at contour node "
                           f"z = {center + w[k]:.6g} (cond {cond[k]:.3e})")
    eye = np.broadcast_to(np.eye(local.n, dtype=complex), a.shape)
    return w, np.linalg.solve(a, eye)


def contour_coefficients(pencil: LinearPencil, center: complex, rho: float,
                         js: Iterable[int], nodes: int = 128, adaptive: bool = True,
                         cap: int = 4096, tol: float = 1e-11) -> tuple[dict, int]:
    """Trapezoidal estimates of (1/2 pi i) \\oint R(w) w^{-j-1} dw on |w| = rho.

    With ``adaptive`` the node count is doubled until two successive estimates
    agree to ``tol`` (relative to max(1, ||R_j||)) or ``cap`` is reached.
    Returns the coefficients keyed by j and the node count used.
    """
    if nodes < 16:
        raise ValueError("at least 16 contour nodes are required")
    if not rho > 0:
        raise ValueError("contour radius must be positive")
    js = list(js)

    def estimate(count):
        w, inv = _node_inverses(pencil, complex(center), rho, count)
        return {j: np.sum(inv * (w ** (-j))[:, None, None], axis=0) / count for j in js}

    current = estimate(nodes)
    if not adaptive:
        return current, nodes
    while nodes < cap:
        nodes *= 2
        refined = estimate(nodes)
        done = all(frob(refined[j] - current[j]) <= tol * max(1.0, frob(refined[j]))
                   for j in js)
        current = refined
        if done:
            break
    return current, nodes


def contour_coefficient_oracle(pencil: LinearPencil, center: complex, rho: float,
                               nodes: int = 128, j: int = -1,
                               adaptive: bool = True) -> np.ndarray:
    coeffs, _ = contour_coefficients(pencil, center, rho, [j], nodes, adaptive)
    return coeffs[j]


def contour_series(pencil: LinearPencil, center: complex, rho: float, k_neg: int,
                   k_pos: int, nodes: int = 128, annulus=None) -> LaurentSeries:
    """A whole Laurent window by contour integration, for cross-checks."""
    js = list(range(-k_neg, k_pos + 1))
    coeffs, _ = contour_coefficients(pencil, center, rho, js, nodes)
    kwargs = {} if annulus is None else {"annulus": annulus}
    return LaurentSeries(neg=[coeffs[-j] for j in range(1, k_neg + 1)],
                         nonneg=[coeffs[j] for j in range(0, k_pos + 1)],
                         center=center, **kwargs)
