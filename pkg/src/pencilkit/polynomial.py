"""Polynomial pencils through their augmented linear pencil, and truncated
inverses of analytic pencils.

For A(z) = A_0 + A_1 z + ... + A_n z^n the augmented pencil lives in the
variable zeta = z^n: block (a, b) of its j-th Laurent coefficient is
R_{nj+a-b}.  Expansions about a center c are done by first rewriting A in
powers of w = z - c, so the augmented problem is always solved at zeta = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .core import Annulus, LaurentSeries, LinearPencil, as_matrix, frob
from .determining import basic_solution, solve_determining
from .errors import (BlockInconsistency, InputError, TruncationNotContractive,
                     WindowTooSmall)
from .laurent import coefficients_from_basic

#: duplicate block entries of one coefficient may disagree by this much
BLOCK_TOL = 1e-8
#: remainder terms used to estimate rho_m(z)
TAIL_TERMS = 16


@dataclass(frozen=True)
class PolynomialPencil:
    """A(z) = sum_i coeffs[i] z^i with a nonzero leading coefficient."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(as_matrix(c, f"A{i}") for i, c in enumerate(self.coeffs))
        if len(cs) < 2:
            raise InputError("a polynomial pencil needs degree at least 1")
        shape = cs[0].shape
        if shape[0] != shape[1]:
            raise InputError(f"coefficients must be square, got {shape}")
        for i, c in enumerate(cs):
            if c.shape != shape:
                raise InputError(f"A{i} has shape {c.shape}, expected {shape}")
        if not np.any(cs[-1]):
            raise InputError(f"leading coefficient A{len(cs) - 1} is zero")
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def base_dim(self) -> int:
        return self.coeffs[0].shape[0]

    def __call__(self, z: complex) -> np.ndarray:
        total = np.zeros_like(self.coeffs[0])
        for c in reversed(self.coeffs):
            total = total * z + c
        return total

    def shifted(self, center: complex) -> "PolynomialPencil":
        """Coefficients of the same pencil in powers of w = z - center."""
        if center == 0:
            return self
        n = self.degree
        out = []
        for i in range(n + 1):
            b = self.coeffs[i]
            for k in range(i + 1, n + 1):
                b = b + (comb(k, i) * center ** (k - i)) * self.coeffs[k]
            out.append(b)
        return PolynomialPencil(tuple(out))

    @classmethod
    def from_linear(cls, pencil: LinearPencil) -> "PolynomialPencil":
        return cls((pencil.a0, pencil.a1))


@dataclass(frozen=True)
class AugmentedPencil:
    inner: LinearPencil
    degree: int
    base_dim: int


def augment(pp: PolynomialPencil) -> AugmentedPencil:
    """Block Toeplitz linearisation.

    The first matrix is lower block triangular with A_{a-b} in block (a, b);
    the second is upper block triangular with A_{n-(b-a)} in block (a, b).
    """
    n, m = pp.degree, pp.base_dim
    if n == 1:
        return AugmentedPencil(LinearPencil(pp.coeffs[0], pp.coeffs[1]), 1, m)
    big0 = np.zeros((n * m, n * m), dtype=complex)
    big1 = np.zeros((n * m, n * m), dtype=complex)
    for a in range(n):
        for b in range(n):
            blk = (slice(a * m, (a + 1) * m), slice(b * m, (b + 1) * m))
            if a >= b:
                big0[blk] = pp.coeffs[a - b]
            else:
                big1[blk] = pp.coeffs[n - (b - a)]
            if a == b:
                big1[blk] = pp.coeffs[n]
    return AugmentedPencil(LinearPencil(big0, big1), n, m)


def pack_coefficients(coeffs: dict, n: int, j: int) -> np.ndarray:
    """Build the augmented coefficient j from base coefficients R_t (missing t are zero)."""
    sample = next(iter(coeffs.values()))
    m = sample.shape[0]
    zero = np.zeros_like(sample)
    out = np.zeros((n * m, n * m), dtype=complex)
    for a in range(n):
        for b in range(n):
            out[a * m:(a + 1) * m, b * m:(b + 1) * m] = coeffs.get(n * j + a - b, zero)
    return out


def extract_block_series(aug_series: LaurentSeries, degree: int, base_dim: int,
                         center: complex = 0j,
                         diagnostics: Optional[dict] = None) -> LaurentSeries:
    """Recover base coefficients R_t from an augmented window.

    Every block position holding a given R_t is read and averaged; the largest
    disagreement between duplicates is written to ``diagnostics`` under
    ``"block_disagreement"``.  The returned window contains every t covered by
    the augmented window, with the annulus mapped back from zeta = w^n to w.
    """
    n, m = degree, base_dim
    if aug_series.shape != (n * m, n * m):
        raise InputError(f"augmented coefficients must be {n * m}x{n * m}, "
                         f"got {aug_series.shape}")
    buckets: dict[int, list] = {}
    for j, big in aug_series.items():
        for a in range(n):
            for b in range(n):
                t = n * j + a - b
                buckets.setdefault(t, []).append(big[a * m:(a + 1) * m, b * m:(b + 1) * m])
    worst = 0.0
    values = {}
    for t, blocks in buckets.items():
        mean = sum(blocks) / len(blocks)
        spread = max(float(np.max(np.abs(blk - mean))) for blk in blocks)
        worst = max(worst, spread)
        values[t] = mean
    if diagnostics is not None:
        diagnostics["block_disagreement"] = worst
    if worst > BLOCK_TOL:
        raise BlockInconsistency(f"duplicate block entries disagree by {worst:.3e}")
    t_lo = min(values)
    t_hi = max(values)
    neg = [values[t] for t in range(-1, t_lo - 1, -1)]
    nonneg = [values[t] for t in range(0, t_hi + 1)]
    if not neg:
        neg = [np.zeros((m, m), dtype=complex)]
    ann = aug_series.annulus
    annulus = Annulus(ann.s ** (1.0 / n), ann.r ** (1.0 / n))
    return LaurentSeries(neg=neg, nonneg=nonneg, annulus=annulus, center=center)


@dataclass(frozen=True)
class PolyBasicSolution:
    """Base coefficients R_{-n} .. R_{n-1} about ``center`` and the augmented data."""

    coeffs: tuple
    degree: int
    center: complex
    aug_basic: object = field(repr=False)
    order: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def coeff(self, t: int) -> np.ndarray:
        n = self.degree
        if not -n <= t <= n - 1:
            raise WindowTooSmall(f"R_{t} is outside the basic range [{-n}, {n - 1}]")
        return self.coeffs[t + n]


def poly_basic_solution(pp: PolynomialPencil, center: complex = 0j,
                        max_order: Optional[int] = None,
                        tol: Optional[float] = None) -> PolyBasicSolution:
    """Solve the augmented pencil at the center and read off R_{-n} .. R_{n-1}.

    ``order`` is the pole order of the augmented resolvent in zeta.
    """
    center = complex(center)
    n, m = pp.degree, pp.base_dim
    if n == 1:
        linear = LinearPencil(pp.coeffs[0], pp.coeffs[1])
        ps = solve_determining(linear, center, max_order=max_order, tol=tol)
        basic = basic_solution(ps, linear, tol=tol)
    else:
        aug = augment(pp.shifted(center))
        ps = solve_determining(aug.inner, 0j, max_order=max_order, tol=tol)
        basic = basic_solution(ps, aug.inner, tol=tol)
    window = LaurentSeries(neg=[basic.r_m1], nonneg=[basic.r_0], annulus=basic.annulus)
    diag = {}
    series = extract_block_series(window, n, m, center, diag)
    coeffs = tuple(series[t] if series.has(t) else np.zeros((m, m), dtype=complex)
                   for t in range(-n, n))
    return PolyBasicSolution(coeffs=coeffs, degree=n, center=center, aug_basic=basic,
                             order=ps.order, diagnostics=diag)


def poly_series(pb: PolyBasicSolution, k_neg: int, k_pos: int) -> LaurentSeries:
    """Base window R_{-k_neg} .. R_{k_pos} generated through the augmented recurrences."""
    n = pb.degree
    jn = max(1, -(-(k_neg + n - 1) // n))
    jp = max(1, -(-k_pos // n) + 1)
    aug = coefficients_from_basic(pb.aug_basic, jn, jp)
    aug = LaurentSeries(neg=aug.neg, nonneg=aug.nonneg, annulus=aug.annulus)
    m = pb.coeffs[0].shape[0]
    full = extract_block_series(aug, n, m, pb.center)
    return LaurentSeries(neg=[full[-t] for t in range(1, k_neg + 1)],
                         nonneg=[full[t] for t in range(0, k_pos + 1)],
                         annulus=full.annulus, center=pb.center)


def poly_fundamental_residuals(series: LaurentSeries, pp: PolynomialPencil,
                               js: Iterable[int]) -> dict[int, tuple[float, float]]:
    """Residuals of sum_k R_{j-n+k} A_{n-k} = d_j0 I and its right analogue.

    The pencil is rewritten about the series center first.
    """
    local = pp.shifted(series.center)
    n = local.degree
    eye = np.eye(local.base_dim, dtype=complex)
    out = {}
    for j in js:
        left = np.zeros_like(eye)
        right = np.zeros_like(eye)
        for k in range(n + 1):
            r = series[j - n + k]
            left = left + r @ local.coeffs[n - k]
            right = right + local.coeffs[n - k] @ r
        if j == 0:
            left = left - eye
            right = right - eye
        out[j] = (frob(left), frob(right))
    return out


# --------------------------------------------------------------------------
# analytic pencils

CoefficientSource = Union[Sequence, Callable[[int], Optional[np.ndarray]]]


def _provider(source: CoefficientSource) -> Callable[[int], Optional[np.ndarray]]:
    if callable(source):
        return source
    coeffs = [as_matrix(c, f"A{i}") for i, c in enumerate(source)]

    def get(j):
        return coeffs[j] if j < len(coeffs) else None
    return get


@dataclass(frozen=True)
class TruncatedInverse:
    value: np.ndarray
    #: ||A_m(z)^{-1} rho_m(z)||_2
    contraction: float
    #: crude bound on the part of rho_m beyond the sampled tail
    tail_bound: float
    terms_used: int


def analytic_truncated_inverse(source: CoefficientSource, z: complex, m: int,
                               neumann_terms: int = 20,
                               tail: int = TAIL_TERMS) -> TruncatedInverse:
    """[I + A_m(z)^{-1} rho_m(z)]^{-1} A_m(z)^{-1} with a Neumann series.

    ``source`` is a finite list of coefficients or a function j -> A_j that
    returns None past the last one.  rho_m(z) is summed from the terms
    m+1 .. m+tail; a geometric bound on what lies beyond is reported.
    """
    if m < 0:
        raise InputError("truncation degree must be nonnegative")
    get = _provider(source)
    z = complex(z)
    a0 = get(0)
    if a0 is None:
        raise InputError("the coefficient source is empty")
    a0 = as_matrix(a0, "A0")
    partial = np.zeros_like(a0)
    for j in range(m, -1, -1):
        c = get(j)
        if c is None:
            continue
        partial = partial + as_matrix(c, f"A{j}") * z ** j
    rho = np.zeros_like(a0)
    last = []
    for j in range(m + 1, m + tail + 1):
        c = get(j)
        if c is None:
            break
        term = as_matrix(c, f"A{j}") * z ** j
        rho = rho + term
        last.append(frob(term))
    tail_bound = 0.0
    if len(last) >= 2 and last[-2] > 0:
        q = last[-1] / last[-2]
        tail_bound = math.inf if q >= 1 else last[-1] * q / (1 - q)

    am_inv = np.linalg.inv(partial)
    k = am_inv @ rho
    factor = float(np.linalg.norm(k, 2))
    if factor >= 1.0:
        raise TruncationNotContractive(factor)
    eye = np.eye(a0.shape[0], dtype=complex)
    term = eye
    total = eye.copy()
    for _ in range(1, neumann_terms):
        term = -(k @ term)
        total = total + term
    return TruncatedInverse(value=as_matrix(total @ am_inv), contraction=factor,
                            tail_bound=tail_bound, terms_used=len(last))
