"""Pole order and Laurent coefficients from the determining equations.

Near an isolated pole of order p the coefficients R_{-p}, ..., R_0 of the
resolvent solve a finite block system.  Writing X_i = R_{i-p} the right
fundamental equations become::

    [ A0             ] [X_0]   [0]
    [ A1  A0         ] [X_1]   [:]
    [     A1  A0     ] [X_2] = [I]   <- block row p
    [         .   .  ] [ : ]   [:]

i.e. a block lower bidiagonal Toeplitz matrix against the p-th block unit
column.  Column k of the right hand side is consistent exactly when the pole
order is at most k, and once the truncation has enough block rows the leading
k + 1 unknown blocks are uniquely determined even though the trailing ones are
not.  The solver eliminates block column by block column and reads off the
first consistent column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import (EPS, Annulus, LaurentSeries, LinearPencil, as_matrix, frob,
                   gelfand_radius)
from .errors import (BasicConditionViolated, IllConditioned, InputError,
                     NoPoleWithinBound, NotASingularityOrRegular)

#: leading unknowns must not couple to free columns beyond this
DETERMINACY_TOL = 1e-8
#: residuals within this factor above tolerance cannot be classified
AMBIGUITY_FACTOR = 1e3


@dataclass(frozen=True)
class PoleSolution:
    """Coefficients [R_{-p}, ..., R_{-1}, R_0] about ``center``."""

    order: int
    coeffs: tuple
    center: complex = 0j
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coeffs = tuple(as_matrix(c, "coefficient") for c in self.coeffs)
        if len(coeffs) != self.order + 1:
            raise InputError(f"order {self.order} needs {self.order + 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", complex(self.center))

    @property
    def r_m1(self) -> np.ndarray:
        if self.order == 0:
            return np.zeros_like(self.coeffs[0])
        return self.coeffs[-2]

    @property
    def r_0(self) -> np.ndarray:
        return self.coeffs[-1]

    def coeff(self, j: int) -> np.ndarray:
        """R_j for -order <= j <= 0, zero below the pole order."""
        if j > 0:
            raise IndexError("a pole solution only carries j <= 0")
        if j < -self.order:
            return np.zeros_like(self.coeffs[0])
        return self.coeffs[self.order + j]

    def as_series(self, annulus: Optional[Annulus] = None, pad: int = 0) -> LaurentSeries:
        """The stored coefficients as a window, padded with ``pad`` zero terms below."""
        zero = np.zeros_like(self.coeffs[0])
        neg = [self.coeff(-j) for j in range(1, self.order + 1)] + [zero] * pad
        if not neg:
            neg = [zero]
        return LaurentSeries(neg=neg, nonneg=[self.r_0], annulus=annulus or Annulus(),
                             center=self.center)


@dataclass(frozen=True)
class BasicSolution:
    """The pair (R_{-1}, R_0) that generates a whole Laurent expansion.

    ``pencil`` is the original (unshifted) pencil; everything about the
    solution is expressed in the local variable w = z - center.
    """

    r_m1: np.ndarray
    r_0: np.ndarray
    pencil: LinearPencil
    center: complex = 0j
    annulus: Annulus = field(default_factory=Annulus)

    def __post_init__(self):
        object.__setattr__(self, "r_m1", as_matrix(self.r_m1, "r_m1"))
        object.__setattr__(self, "r_0", as_matrix(self.r_0, "r_0"))
        object.__setattr__(self, "center", complex(self.center))
        if self.r_m1.shape != self.r_0.shape:
            raise InputError("R_-1 and R_0 differ in shape")
        if self.r_m1.shape != self.pencil.shape[::-1]:
            raise InputError("basic solution does not match the pencil shape")

    @property
    def local(self) -> LinearPencil:
        return self.pencil.shifted(self.center)


@dataclass
class _Reduction:
    solution: np.ndarray
    residual: float
    pivots: int
    depth: int
    defect: float
    smallest_pivot: float
    largest_rejected: float


def _determining_matrix(a0: np.ndarray, a1: np.ndarray, depth: int) -> np.ndarray:
    n = a0.shape[0]
    m = np.zeros((depth * n, depth * n), dtype=complex)
    for i in range(depth):
        m[i * n:(i + 1) * n, i * n:(i + 1) * n] = a0
        if i + 1 < depth:
            m[(i + 1) * n:(i + 2) * n, i * n:(i + 1) * n] = a1
    return m


def _rhs(n: int, column: int, depth: int) -> np.ndarray:
    b = np.zeros((depth * n, n), dtype=complex)
    b[column * n:(column + 1) * n] = np.eye(n)
    return b


def _reduce(a0, a1, column: int, depth: int, tau_pivot: float,
            rhs: Optional[np.ndarray] = None) -> _Reduction:
    """Gauss-Jordan reduction of the truncated system against one RHS column.

    Pivots are chosen by maximum modulus over the current block column and
    all unreduced rows; ties go to the lowest row, then lowest column.  The
    pivot sequence depends on the matrix only, so passing ``rhs`` reuses it
    for a correction solve.
    """
    n = a0.shape[0]
    m = _determining_matrix(a0, a1, depth)
    rows = depth * n
    b = _rhs(n, column, depth) if rhs is None else rhs.copy()

    pivot_row = {}
    free = []
    r = 0
    smallest = math.inf
    rejected = 0.0
    for c0 in range(0, rows, n):
        remaining = list(range(c0, c0 + n))
        while remaining and r < rows:
            sub = np.abs(m[r:, remaining])
            idx = int(np.argmax(sub))
            i, k = divmod(idx, len(remaining))
            val = sub[i, k]
            if val <= tau_pivot:
                break
            col = remaining.pop(k)
            if i:
                m[[r, r + i]] = m[[r + i, r]]
                b[[r, r + i]] = b[[r + i, r]]
            piv = m[r, col]
            m[r] /= piv
            b[r] /= piv
            f = m[:, col].copy()
            f[r] = 0.0
            nz = np.nonzero(f)[0]
            if nz.size:
                m[nz] -= np.outer(f[nz], m[r])
                b[nz] -= np.outer(f[nz], b[r])
            m[nz, col] = 0.0
            pivot_row[col] = r
            smallest = min(smallest, float(val))
            r += 1
        if remaining and r < rows:
            rejected = max(rejected, float(np.max(np.abs(m[r:, remaining]))))
        free.extend(remaining)

    x = np.zeros((rows, n), dtype=complex)
    for col, row in pivot_row.items():
        x[col] = b[row]
    residual = frob(b[r:]) if r < rows else 0.0

    lead = (column + 1) * n
    defect = 0.0
    if any(f < lead for f in free):
        defect = math.inf
    elif free:
        lead_rows = [pivot_row[c] for c in range(lead)]
        defect = float(np.max(np.abs(m[np.ix_(lead_rows, free)])))
    return _Reduction(solution=x, residual=residual, pivots=r, depth=depth,
                      defect=defect, smallest_pivot=smallest, largest_rejected=rejected)


@dataclass(frozen=True)
class ColumnProbe:
    column: int
    consistent: bool
    coeffs: tuple
    residual: float
    depth: int
    pivots: int
    defect: float
    smallest_pivot: float
    largest_rejected: float


def pivot_tolerance(local: LinearPencil) -> float:
    n = local.n
    return n * EPS * max(frob(local.a0), frob(local.a1))


def probe_column(local: LinearPencil, column: int, tol: float,
                 tau_pivot: Optional[float] = None,
                 depth: Optional[int] = None) -> ColumnProbe:
    """Test whether right hand side column ``column`` is consistent.

    ``local`` is the pencil already shifted to the expansion point.  The
    truncation uses ``column + n + 2`` block rows and is doubled once when
    the first attempt is inconsistent or leaves the leading blocks undetermined.
    """
    n = local.n
    if tau_pivot is None:
        tau_pivot = pivot_tolerance(local)
    depth = depth or column + n + 2
    red = _reduce(local.a0, local.a1, column, depth, tau_pivot)
    if red.residual > tol or red.defect > DETERMINACY_TOL:
        red = _reduce(local.a0, local.a1, column, 2 * depth, tau_pivot)
    consistent = red.residual <= tol and red.defect <= DETERMINACY_TOL
    if consistent:
        # one step of iterative refinement; trailing blocks can be large when
        # another singularity is close, which costs accuracy in the leading ones
        m = _determining_matrix(local.a0, local.a1, red.depth)
        r = _rhs(n, column, red.depth) - m @ red.solution
        fix = _reduce(local.a0, local.a1, column, red.depth, tau_pivot, rhs=r)
        red.solution = red.solution + fix.solution
    if red.residual <= tol and red.defect > DETERMINACY_TOL:
        raise IllConditioned(
            f"column {column} is consistent but its leading blocks are not determined "
            f"(coupling {red.defect:.3e}) at depth {red.depth}")
    if tol < red.residual < AMBIGUITY_FACTOR * tol and red.largest_rejected > 0.0:
        raise IllConditioned(
            f"column {column}: residual {red.residual:.3e} is within a factor "
            f"{AMBIGUITY_FACTOR:g} of the tolerance {tol:.3e}; consistency undecidable")
    coeffs = tuple(red.solution[i * n:(i + 1) * n].copy() for i in range(column + 1))
    return ColumnProbe(column=column, consistent=consistent, coeffs=coeffs,
                       residual=red.residual, depth=red.depth, pivots=red.pivots,
                       defect=red.defect, smallest_pivot=red.smallest_pivot,
                       largest_rejected=red.largest_rejected)


def _fundamental_max(local: LinearPencil, coeffs) -> float:
    """Largest residual of both fundamental equations for j = -p .. 0."""
    p = len(coeffs) - 1
    eye = np.eye(local.n, dtype=complex)
    zero = np.zeros_like(coeffs[0])
    worst = 0.0
    for j in range(-p, 1):
        lo = coeffs[p + j - 1] if j - 1 >= -p else zero
        hi = coeffs[p + j]
        d = eye if j == 0 else 0.0
        worst = max(worst, frob(lo @ local.a1 + hi @ local.a0 - d),
                    frob(local.a1 @ lo + local.a0 @ hi - d))
    return worst


def solve_determining(pencil: LinearPencil, center: complex = 0j,
                      max_order: Optional[int] = None, tol: Optional[float] = None,
                      require_singular: bool = False, scale: float = 1.0) -> PoleSolution:
    """Find the pole order at ``center`` and the coefficients R_{-p}, ..., R_0.

    A regular point is reported as order 0 with R_0 = A(center)^{-1} unless
    ``require_singular`` is set.

    ``scale`` solves in the variable u = (z - center) / scale.  A truncation of
    depth N cannot tell apart poles closer than about eps^(1/N), so when
    another singularity lies at distance d < 1, passing scale = d moves it to
    unit distance; the coefficients are mapped back before returning.
    """
    pencil.require_square()
    center = complex(center)
    if not scale > 0:
        raise InputError("scale must be positive")
    unscaled = pencil.shifted(center)
    local = unscaled if scale == 1.0 else LinearPencil(unscaled.a0, scale * unscaled.a1)
    n = local.n
    if max_order is None:
        max_order = n
    if max_order < 0:
        raise InputError("max_order must be nonnegative")
    tol = unscaled.residual_tol() if tol is None else tol
    tau_pivot = pivot_tolerance(local)

    probes = []
    for k in range(max_order + 1):
        probe = probe_column(local, k, tol, tau_pivot)
        probes.append(probe)
        if not probe.consistent:
            continue
        coeffs = probe.coeffs
        if scale != 1.0:
            coeffs = tuple(c * scale ** (k - i) for i, c in enumerate(coeffs))
        if k >= 1 and frob(coeffs[0]) <= tol:
            raise IllConditioned(f"column {k} is consistent but R_-{k} vanishes")
        diagnostics = {
            "pivots": probe.pivots,
            "depth": probe.depth,
            "determining_residual": probe.residual,
            "smallest_pivot": probe.smallest_pivot,
            "largest_rejected": probe.largest_rejected,
            "pivot_tolerance": tau_pivot,
            "residual_tolerance": tol,
            "inconsistent_residuals": [q.residual for q in probes[:-1]],
            "fundamental_residual": _fundamental_max(unscaled, coeffs),
            "depth_rule": "column + n + 2 block rows, doubled once",
            "variable_scale": scale,
        }
        if k == 0 and require_singular:
            raise NotASingularityOrRegular(f"A(z) is invertible at z = {center}")
        return PoleSolution(order=k, coeffs=coeffs, center=center,
                            diagnostics=diagnostics)
    raise NoPoleWithinBound(
        f"no pole of order <= {max_order} at z = {center} "
        f"(smallest inconsistency residual {min(q.residual for q in probes):.3e}). "
        "Either the pole order exceeds the bound, or the singularity is not a pole: "
        "isolated essential singularities have no known general solution procedure.")


def basic_conditions(r_m1, r_0, local: LinearPencil) -> dict[str, float]:
    """Residuals of the identities characterising a basic solution."""
    a0, a1 = local.a0, local.a1
    eye_h = np.eye(a0.shape[1], dtype=complex)
    eye_k = np.eye(a0.shape[0], dtype=complex)
    return {
        "R-1 A1 + R0 A0 = I": frob(r_m1 @ a1 + r_0 @ a0 - eye_h),
        "A1 R-1 + A0 R0 = I": frob(a1 @ r_m1 + a0 @ r_0 - eye_k),
        "R-1 A0 R0 = 0": frob(r_m1 @ a0 @ r_0),
        "R-1 A1 R0 = 0": frob(r_m1 @ a1 @ r_0),
        "R0 A0 R-1 = 0": frob(r_0 @ a0 @ r_m1),
        "R0 A1 R-1 = 0": frob(r_0 @ a1 @ r_m1),
    }


def check_basic(basic: BasicSolution, tol: Optional[float] = None) -> dict[str, float]:
    """Raise BasicConditionViolated on the first failing identity."""
    local = basic.local
    tol = local.residual_tol() if tol is None else tol
    res = basic_conditions(basic.r_m1, basic.r_0, local)
    for name, value in res.items():
        if not value <= tol:
            raise BasicConditionViolated(name, value, tol)
    return res


def basic_solution(ps: PoleSolution, pencil: LinearPencil,
                   other_singularities: Optional[Iterable[complex]] = None,
                   tol: Optional[float] = None) -> BasicSolution:
    """Extract and verify (R_{-1}, R_0) from a pole solution.

    The inner radius is 0 (isolated singularity).  The outer radius is the
    distance to the nearest of ``other_singularities`` when given, otherwise
    the reciprocal Gelfand limit of R_0 A1.
    """
    local = pencil.shifted(ps.center)
    if other_singularities is not None:
        dists = [abs(z - ps.center) for z in other_singularities if abs(z - ps.center) > 0]
        r = min(dists) if dists else math.inf
    else:
        inv_r, _ = gelfand_radius(ps.r_0 @ local.a1)
        r = math.inf if inv_r == 0.0 else 1.0 / inv_r
    basic = BasicSolution(r_m1=ps.r_m1, r_0=ps.r_0, pencil=pencil, center=ps.center,
                          annulus=Annulus(0.0, r))
    check_basic(basic, tol)
    return basic
