"""Dense complex matrices, linear pencils and Laurent windows.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The containers
below freeze the arrays they hold so that every value is immutable once
built, which makes all operations in the package safe to share between
threads.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, WindowTooSmall

EPS = np.finfo(float).eps

#: base factor of the default residual tolerance
RES_TOL_BASE = 1e-10
#: entrywise comparison tolerances
ATOL = 1e-12
RTOL = 1e-9

TOL_ENV = "PENCILKIT_TOL"


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Return ``x`` as a finite 2-D complex array (a fresh, read-only copy)."""
    a = np.array(x, dtype=complex)
    if a.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    a.flags.writeable = False
    return a


def frob(a) -> float:
    return float(np.linalg.norm(a))


def residual_base() -> float:
    """Base factor of the residual tolerance, honouring ``PENCILKIT_TOL``."""
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return RES_TOL_BASE
    try:
        value = float(raw)
    except ValueError as exc:
        raise InputError(f"{TOL_ENV}={raw!r} is not a number") from exc
    if not value > 0:
        raise InputError(f"{TOL_ENV} must be positive")
    return value


def matrices_close(a, b, atol: float = ATOL, rtol: float = RTOL) -> bool:
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= atol + rtol * np.abs(b)))


def matrix_power_norms(m: np.ndarray, upto: int) -> list[float]:
    """Frobenius norms of m, m^2, ..., m^upto."""
    out = []
    p = np.eye(m.shape[0], dtype=complex)
    for _ in range(upto):
        p = p @ m
        out.append(frob(p))
    return out


@dataclass(frozen=True)
class LinearPencil:
    """The affine matrix family A(z) = a0 + a1 z."""

    a0: np.ndarray
    a1: np.ndarray

    def __post_init__(self):
        a0 = as_matrix(self.a0, "a0")
        a1 = as_matrix(self.a1, "a1")
        if a0.shape != a1.shape:
            raise InputError(f"a0 {a0.shape} and a1 {a1.shape} differ in shape")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a0.shape

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def is_square(self) -> bool:
        return self.a0.shape[0] == self.a0.shape[1]

    def require_square(self):
        if not self.is_square:
            raise InputError(f"pencil must be square, got {self.shape}")

    def shifted(self, center: complex) -> "LinearPencil":
        """The same pencil written in the local variable w = z - center."""
        if center == 0:
            return self
        return LinearPencil(self.a0 + center * self.a1, self.a1)

    def residual_tol(self) -> float:
        return residual_base() * max(1.0, frob(self.a0) + frob(self.a1))


def evaluate(pencil: LinearPencil, z: complex) -> np.ndarray:
    return pencil.a0 + z * pencil.a1


@dataclass(frozen=True)
class Annulus:
    """Open annulus s < |w| < r around the expansion center."""

    s: float = 0.0
    r: float = math.inf

    def __post_init__(self):
        s, r = float(self.s), float(self.r)
        if not (0.0 <= s < r) or math.isnan(r):
            raise InputError(f"invalid annulus ({s}, {r}): need 0 <= s < r")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "r", r)

    def contains(self, w: complex, margin: float = 0.0) -> bool:
        a = abs(w)
        return self.s + margin < a < self.r - margin


@dataclass(frozen=True)
class LaurentSeries:
    """A window of Laurent coefficients about ``center``.

    ``neg`` holds R_{-1}, R_{-2}, ... and ``nonneg`` holds R_0, R_1, ...; the
    powers are of the local variable w = z - center.
    """

    neg: Sequence[np.ndarray]
    nonneg: Sequence[np.ndarray]
    annulus: Annulus = field(default_factory=Annulus)
    center: complex = 0j

    def __post_init__(self):
        neg = tuple(as_matrix(m, "coefficient") for m in self.neg)
        nonneg = tuple(as_matrix(m, "coefficient") for m in self.nonneg)
        shapes = {m.shape for m in neg + nonneg}
        if len(shapes) > 1:
            raise InputError(f"coefficients disagree in shape: {sorted(shapes)}")
        if not shapes:
            raise InputError("empty Laurent window")
        object.__setattr__(self, "neg", neg)
        object.__setattr__(self, "nonneg", nonneg)
        object.__setattr__(self, "center", complex(self.center))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.neg + self.nonneg)[0].shape

    @property
    def k_neg(self) -> int:
        return len(self.neg)

    @property
    def k_pos(self) -> int:
        """Number of stored nonnegative coefficients (R_0 .. R_{k_pos-1})."""
        return len(self.nonneg)

    @property
    def j_min(self) -> int:
        return -len(self.neg)

    @property
    def j_max(self) -> int:
        return len(self.nonneg) - 1

    def has(self, j: int) -> bool:
        return self.j_min <= j <= self.j_max

    def __getitem__(self, j: int) -> np.ndarray:
        if not self.has(j):
            raise WindowTooSmall(f"R_{j} is outside the stored window [{self.j_min}, {self.j_max}]")
        return self.nonneg[j] if j >= 0 else self.neg[-j - 1]

    def items(self):
        for j in range(self.j_min, self.j_max + 1):
            yield j, self[j]


@dataclass(frozen=True)
class GeometricBoundEstimate:
    s_est: float
    r_est: float
    j_used: int
    c_d: float
    d_e: float
    #: fitted per-step growth of ||R_j|| (j >= 0) and ||R_{-j}|| (j >= 1)
    rate_pos: float = 0.0
    rate_neg: float = 0.0
    norm: str = "gelfand limit (norm-free); constants in Frobenius norm"


def fundamental_residuals(series: LaurentSeries, pencil: LinearPencil,
                          js: Iterable[int]) -> dict[int, tuple[float, float]]:
    """Left and right residuals of the fundamental equations for each j.

    The pencil is shifted to the series center first.  Returns
    ``{j: (||R_{j-1} A1 + R_j A0 - d_j0 I||, ||A1 R_{j-1} + A0 R_j - d_j0 I||)}``.
    """
    local = pencil.shifted(series.center)
    a0, a1 = local.a0, local.a1
    eye_l = np.eye(series.shape[0], dtype=complex)
    eye_r = np.eye(a0.shape[0], dtype=complex)
    out = {}
    for j in js:
        lo, hi = series[j - 1], series[j]
        left = lo @ a1 + hi @ a0
        right = a1 @ lo + a0 @ hi
        if j == 0:
            left = left - eye_l
            right = right - eye_r
        out[j] = (frob(left), frob(right))
    return out


def gelfand_radius(m: np.ndarray, zero_tol: float = 1e-10,
                   max_squarings: int = 64) -> tuple[float, int]:
    """Estimate lim ||m^j||^(1/j) and return it with the power it came from.

    Powers up to the dimension are formed first; if one of them is negligible
    (relative to ``max(1, ||m||)^j``) the matrix is treated as nilpotent and the
    limit is exactly zero.  Otherwise the normalised power sequence
    m, m^2, m^4, ... is formed by repeated squaring and the limit read off from
    the accumulated log norms.
    """
    m = np.asarray(m, dtype=complex)
    nm = frob(m)
    if nm == 0.0:
        return 0.0, 1
    scale = max(1.0, nm)
    p = np.eye(m.shape[0], dtype=complex)
    for j in range(1, m.shape[0] + 1):
        p = p @ m
        if frob(p) <= zero_tol * scale ** j:
            return 0.0, j

    x = m / nm
    log_acc = math.log(nm)
    weight = 1.0
    j = 1
    for _ in range(max_squarings):
        x = x @ x
        c = frob(x)
        j *= 2
        weight /= 2.0
        if c == 0.0:
            return 0.0, j
        step = weight * math.log(c)
        log_acc += step
        x = x / c
        if abs(step) <= 4 * EPS * max(1.0, abs(log_acc)):
            break
    return math.exp(log_acc), j


def _fit_bound(norms: list[tuple[int, float]]) -> tuple[float, float]:
    """Least squares fit of log ||R|| against j, lifted to a bound.

    Returns ``(constant, rate)`` with ``norm_j <= constant * rate**j`` for all
    supplied points.
    """
    pts = [(j, v) for j, v in norms if v > 0.0]
    if not pts:
        return 0.0, 0.0
    js = np.array([j for j, _ in pts], dtype=float)
    logs = np.log([v for _, v in pts])
    if len(pts) == 1:
        slope = 0.0
    else:
        slope, _ = np.polyfit(js, logs, 1)
    lift = float(np.max(logs - slope * js))
    return math.exp(lift), math.exp(slope)


def _tail_rate(norms: list[float], zero_tol: float) -> float:
    """Ratio of the last two norms; zero once the tail has vanished."""
    if norms[-1] <= zero_tol * max(1.0, norms[0]):
        return 0.0
    return norms[-1] / norms[-2] if norms[-2] > 0 else math.inf


def geometric_bound_estimate(series: LaurentSeries,
                             pencil: Optional[LinearPencil] = None,
                             zero_tol: float = 1e-10) -> GeometricBoundEstimate:
    """Estimate the inner and outer radii certified by a Laurent window.

    With a pencil, the radii come from the Gelfand limits of R_{-1} A0 and
    R_0 A1 (the limits bound s and 1/r).  Without one, they come from the
    ratio of the last two stored coefficient norms on each side; the fitted
    constants and rates describe the whole window.
    """
    if series.k_neg < 2 or series.k_pos < 2:
        raise WindowTooSmall("need at least two coefficients on each side of the window")

    pos = [(j, frob(series[j])) for j in range(0, series.j_max + 1)]
    neg = [(j, frob(series[-j])) for j in range(1, -series.j_min + 1)]
    c_d, rate_pos = _fit_bound(pos)
    d_e, rate_neg = _fit_bound(neg)

    if pencil is not None:
        local = pencil.shifted(series.center)
        s_est, j_in = gelfand_radius(series[-1] @ local.a0, zero_tol)
        inv_r, j_out = gelfand_radius(series[0] @ local.a1, zero_tol)
        j_used = max(j_in, j_out)
    else:
        s_est = _tail_rate([v for _, v in neg], zero_tol)
        inv_r = _tail_rate([v for _, v in pos], zero_tol)
        j_used = max(len(neg), len(pos))
    r_est = math.inf if inv_r == 0.0 else 1.0 / inv_r
    return GeometricBoundEstimate(s_est=s_est, r_est=r_est, j_used=j_used,
                                  c_d=c_d, d_e=d_e, rate_pos=rate_pos, rate_neg=rate_neg)
