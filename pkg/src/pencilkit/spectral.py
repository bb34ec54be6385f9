"""Projections, singularity location and the global partial-fraction form."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev

from .core import EPS, Annulus, LaurentSeries, LinearPencil, as_matrix, frob
from .determining import BasicSolution, PoleSolution, basic_solution, solve_determining
from .errors import (BasicConditionViolated, DegenerateSeed, PencilError,
                     ProjectionDefect, SingularityFailure, SingularityInAnnulus,
                     SingularPencilEverywhere)

MERGE_TOL = 1e-7
#: relative backward accuracy assumed for the computed roots; an m-fold
#: defective root is split by about DET_ACCURACY^(1/m)
DET_ACCURACY = 1e-12


@dataclass(frozen=True)
class ProjectionPair:
    p: np.ndarray
    q: np.ndarray


def projection_residuals(basic: BasicSolution) -> dict[str, float]:
    local = basic.local
    p = basic.r_m1 @ local.a1
    q = local.a1 @ basic.r_m1
    eye_h = np.eye(p.shape[0])
    eye_k = np.eye(q.shape[0])
    return {
        "P^2 = P": frob(p @ p - p),
        "Q^2 = Q": frob(q @ q - q),
        "I - P = R0 A0": frob(eye_h - p - basic.r_0 @ local.a0),
        "I - Q = A0 R0": frob(eye_k - q - local.a0 @ basic.r_0),
    }


def projections(basic: BasicSolution, tol: Optional[float] = None) -> ProjectionPair:
    """P = R_{-1} A1 and Q = A1 R_{-1}, checked to be complementary projections."""
    tol = basic.local.residual_tol() if tol is None else tol
    for name, value in projection_residuals(basic).items():
        if not value <= tol:
            raise ProjectionDefect(name, value, tol)
    a1 = basic.pencil.a1
    return ProjectionPair(p=as_matrix(basic.r_m1 @ a1), q=as_matrix(a1 @ basic.r_m1))


def block_decomposition_residual(pencil: LinearPencil,
                                 pair: ProjectionPair) -> tuple[float, float, float, float]:
    """Off-diagonal blocks ||Q A0 (I-P)||, ||(I-Q) A0 P||, ||Q A1 (I-P)||, ||(I-Q) A1 P||.

    The blocks are invariant under shifting the pencil, so the unshifted
    coefficients may be used with projections from any expansion point.
    """
    p, q = pair.p, pair.q
    ip = np.eye(p.shape[0]) - p
    iq = np.eye(q.shape[0]) - q
    a0, a1 = pencil.a0, pencil.a1
    return (frob(q @ a0 @ ip), frob(iq @ a0 @ p), frob(q @ a1 @ ip), frob(iq @ a1 @ p))


def range_residuals(series: LaurentSeries, pair: ProjectionPair) -> dict[int, float]:
    """||P R_j Q - R_j|| for j < 0 and ||(I-P) R_j (I-Q) - R_j|| for j >= 0."""
    p, q = pair.p, pair.q
    ip = np.eye(p.shape[0]) - p
    iq = np.eye(q.shape[0]) - q
    out = {}
    for j, r in series.items():
        out[j] = frob(p @ r @ q - r) if j < 0 else frob(ip @ r @ iq - r)
    return out


# --------------------------------------------------------------------------
# singularity location

@dataclass(frozen=True)
class DeterminantPolynomial:
    """det A(z) as a Chebyshev series in t = z / scale."""

    cheb: np.ndarray
    scale: float

    def __call__(self, z):
        return chebyshev.chebval(np.asarray(z) / self.scale, self.cheb)

    @property
    def degree(self) -> int:
        return len(self.cheb) - 1


def _hadamard(a: np.ndarray) -> float:
    return float(np.prod(np.linalg.norm(a, axis=0)))


def determinant_polynomial(pencil: LinearPencil) -> DeterminantPolynomial:
    """Interpolate det(A0 + A1 z) at n + 1 scaled Chebyshev points."""
    pencil.require_square()
    n = pencil.n
    n1 = frob(pencil.a1)
    scale = max(1.0, frob(pencil.a0) / n1) if n1 > 0 else 1.0
    t = np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
    mats = [pencil.a0 + scale * tk * pencil.a1 for tk in t]
    dets = np.array([np.linalg.det(m) for m in mats])
    bounds = np.array([_hadamard(m) for m in mats])
    if np.all(np.abs(dets) <= 1e3 * n * EPS * np.maximum(bounds, EPS)):
        raise SingularPencilEverywhere("det(A0 + A1 z) vanishes at every sample point; "
                                       "the pencil is not regular")
    cheb = chebyshev.chebfit(t, dets, n)
    top = np.max(np.abs(cheb))
    k = len(cheb)
    while k > 1 and abs(cheb[k - 1]) <= 1e-12 * top:
        k -= 1
    return DeterminantPolynomial(cheb=cheb[:k], scale=scale)


def determinant_roots(pencil: LinearPencil) -> np.ndarray:
    """All roots of det A(z), with multiplicity, unmerged."""
    det = determinant_polynomial(pencil)
    if det.degree == 0:
        return np.zeros(0, dtype=complex)
    return chebyshev.chebroots(det.cheb).astype(complex) * det.scale


def _polish(z: complex, pencil: LinearPencil, steps: int = 4) -> complex:
    """Newton on log det A(z); keeps the best point seen."""
    best = z
    best_sigma = np.linalg.svd(pencil.a0 + z * pencil.a1, compute_uv=False)[-1]
    for _ in range(steps):
        a = pencil.a0 + z * pencil.a1
        try:
            tr = np.trace(np.linalg.solve(a, pencil.a1))
        except np.linalg.LinAlgError:
            break
        if tr == 0 or not np.isfinite(tr):
            break
        z = z - 1.0 / tr
        sigma = np.linalg.svd(pencil.a0 + z * pencil.a1, compute_uv=False)[-1]
        if sigma < best_sigma:
            best, best_sigma = z, sigma
        else:
            break
    return best


def _merge(roots: Sequence[complex], merge_tol: float, scale: float) -> list[tuple[complex, int]]:
    """Cluster numerically split multiple roots, largest clusters first.

    A root of multiplicity m is smeared over a circle of radius about
    DET_ACCURACY^(1/m) (in units of ``scale``).  A group of k roots is merged
    when its spread about its mean is within that radius; pairs always merge
    within ``merge_tol``.  The mean of a split cluster is well conditioned.
    """
    remaining = [complex(z) for z in roots]
    out = []
    while remaining:
        found = None
        pts = np.array(remaining)
        for k in range(len(remaining), 1, -1):
            allow = max(merge_tol if k == 2 else 0.0, 3.0 * DET_ACCURACY ** (1.0 / k)) * scale
            best = None
            for c in pts:
                idx = np.argsort(np.abs(pts - c), kind="stable")[:k]
                mean = pts[idx].mean()
                spread = float(np.max(np.abs(pts[idx] - mean)))
                limit = allow * max(1.0, abs(mean) / scale)
                if spread <= limit and (best is None or spread / limit < best[0]):
                    best = (spread / limit, idx)
            if best is not None:
                found = best[1]
                break
        if found is None:
            out.extend((z, 1) for z in remaining)
            break
        out.append((complex(pts[found].mean()), len(found)))
        keep = set(range(len(remaining))) - {int(i) for i in found}
        remaining = [remaining[i] for i in sorted(keep)]
    return out


def _snap(z: complex, scale: float) -> complex:
    re, im = z.real, z.imag
    tiny = 1e-13 * max(scale, abs(z))
    if abs(im) <= tiny:
        im = 0.0
    if abs(re) <= tiny:
        re = 0.0
    return complex(re, im)


def _sort_key(z: complex):
    return (round(abs(z), 9), round(cmath.phase(z), 9) if z != 0 else 0.0)


def _finite_eigenvalues(pencil: LinearPencil, count: int) -> np.ndarray:
    """The ``count`` finite generalized eigenvalues of (-A0, A1), by QZ."""
    alpha, beta = scipy.linalg.eigvals(-pencil.a0, pencil.a1, homogeneous_eigvals=True)
    weight = np.abs(beta) / np.maximum(np.abs(alpha) + np.abs(beta), np.finfo(float).tiny)
    idx = np.argsort(-weight, kind="stable")[:count]
    return alpha[idx] / beta[idx]


def find_singularities_with_multiplicity(pencil: LinearPencil,
                                         merge_tol: float = MERGE_TOL) -> list[tuple[complex, int]]:
    """Distinct roots of det A(z) and their root multiplicities.

    The interpolated determinant fixes how many finite roots there are; their
    locations come from the QZ generalized eigenvalues, which stay accurate
    where the monomial roots of the interpolant do not.
    """
    det = determinant_polynomial(pencil)
    if det.degree == 0:
        return []
    roots = _finite_eigenvalues(pencil, det.degree)
    merged = _merge(roots, merge_tol, det.scale)
    out = []
    for z, mult in merged:
        if mult == 1:
            z = _polish(z, pencil)
        out.append((_snap(z, det.scale), mult))
    out.sort(key=lambda zm: _sort_key(zm[0]))
    return out


def find_singularities(pencil: LinearPencil, merge_tol: float = MERGE_TOL) -> list[complex]:
    return [z for z, _ in find_singularities_with_multiplicity(pencil, merge_tol)]


# --------------------------------------------------------------------------
# global decomposition

@dataclass(frozen=True)
class SingularPoint:
    z: complex
    order: int
    residue: np.ndarray
    #: local coefficients R_{-p} .. R_0 about z
    coeffs: tuple
    p: np.ndarray
    q: np.ndarray
    basic: BasicSolution = field(repr=False, compare=False)

    def principal_part(self, z: complex) -> np.ndarray:
        w = complex(z) - self.z
        total = np.zeros_like(self.residue)
        for k in range(1, self.order + 1):
            total = total + self.coeffs[self.order - k] * w ** (-k)
        return total


@dataclass(frozen=True)
class SingularitySet:
    points: tuple
    p_inf: np.ndarray
    q_inf: np.ndarray
    #: coefficients E_0, E_1, ... of the entire remainder sum E_j z^j
    entire_part: tuple
    diagnostics: dict = field(default_factory=dict, compare=False)

    def entire(self, z: complex) -> np.ndarray:
        total = np.zeros_like(self.p_inf)
        for j, e in enumerate(self.entire_part):
            total = total + e * complex(z) ** j
        return total

    def evaluate(self, z: complex) -> np.ndarray:
        """Partial-fraction value of the resolvent at z."""
        total = self.entire(z)
        for pt in self.points:
            total = total + pt.principal_part(z)
        return total

    def annihilation(self) -> float:
        worst = 0.0
        for i, a in enumerate(self.points):
            for j, b in enumerate(self.points):
                if i != j:
                    worst = max(worst, frob(a.p @ b.p), frob(a.q @ b.q))
        return worst


def _fit_entire(pencil: LinearPencil, points, tol: float):
    n = pencil.n
    if n and np.linalg.cond(pencil.a1) < 1.0 / (1e3 * EPS):
        return (), 0.0
    radius = 2.0 * max([1.0] + [abs(pt.z) for pt in points])
    count = 4 * max(n, 1)
    degree = 2 * n
    zs = radius * np.exp(2j * np.pi * (np.arange(count) + 0.5) / count)
    values = []
    for z in zs:
        f = np.linalg.inv(pencil.a0 + z * pencil.a1)
        for pt in points:
            f = f - pt.principal_part(z)
        values.append(f.reshape(-1))
    values = np.array(values)
    vander = (zs / radius)[:, None] ** np.arange(degree + 1)[None, :]
    coef, *_ = np.linalg.lstsq(vander, values, rcond=None)
    fit_residual = float(np.max(np.abs(vander @ coef - values))) if values.size else 0.0
    mats = [coef[j].reshape(n, n) / radius ** j for j in range(degree + 1)]
    scaled = [frob(coef[j]) for j in range(degree + 1)]
    floor = tol * max(1.0, max(scaled))
    k = len(mats)
    while k > 0 and scaled[k - 1] <= floor:
        k -= 1
    mats = [np.where(np.abs(m) <= floor / radius ** j, 0.0, m) for j, m in enumerate(mats[:k])]
    return tuple(as_matrix(m) for m in mats), fit_residual


def _solve_point(pencil, z, others, tol, scale):
    ps = solve_determining(pencil, z, tol=tol, scale=scale)
    if ps.order == 0:
        raise PencilError("determinant root is a regular point of the resolvent")
    basic = basic_solution(ps, pencil, others, tol=tol)
    return ps, basic, projections(basic, tol=tol)


def global_decomposition(pencil: LinearPencil, merge_tol: float = MERGE_TOL,
                         tol: Optional[float] = None) -> SingularitySet:
    """Locate every finite singularity and split the resolvent into parts.

    Returns the local pole data, projections P_k, Q_k, the remainder
    projections and the entire remainder, so that
    R(z) = sum_k principal_part_k(z) + entire(z).

    Each point is solved in its natural variable first; if the result fails
    verification it is solved again with the variable scaled by the distance
    to its nearest neighbour (see ``solve_determining``).
    """
    pencil.require_square()
    zs = find_singularities(pencil, merge_tol)
    points = []
    for z in zs:
        others = [x for x in zs if x != z]
        near = min([abs(x - z) for x in others] + [1.0])
        try:
            ps, basic, pair = _solve_point(pencil, z, others, tol, 1.0)
        except PencilError as exc:
            if near == 1.0:
                raise SingularityFailure(z, exc) from exc
            try:
                ps, basic, pair = _solve_point(pencil, z, others, tol, near)
            except PencilError:
                raise SingularityFailure(z, exc) from exc
        points.append(SingularPoint(z=z, order=ps.order, residue=ps.r_m1, coeffs=ps.coeffs,
                                    p=pair.p, q=pair.q, basic=basic))
    n = pencil.n
    eye = np.eye(n, dtype=complex)
    p_inf = eye - sum((pt.p for pt in points), np.zeros((n, n), dtype=complex))
    q_inf = eye - sum((pt.q for pt in points), np.zeros((n, n), dtype=complex))
    res_tol = pencil.residual_tol() if tol is None else tol
    entire, fit_residual = _fit_entire(pencil, points, res_tol)
    ss = SingularitySet(points=tuple(points), p_inf=as_matrix(p_inf), q_inf=as_matrix(q_inf),
                        entire_part=entire, diagnostics={"entire_fit_residual": fit_residual})
    worst = ss.annihilation()
    ss.diagnostics["annihilation"] = worst
    scale = max([1.0] + [frob(pt.p) * frob(pt.p) for pt in points])
    if worst > 10 * res_tol * scale:
        raise ProjectionDefect("P_k P_l = 0 and Q_k Q_l = 0", worst, 10 * res_tol * scale)
    return ss


def expand_in_annulus(ss: SingularitySet, s: float, r: float, k_neg: int,
                      k_pos: int) -> LaurentSeries:
    """Laurent window about 0 on s < |z| < r from the partial fractions.

    Each principal part is expanded in powers of 1/z when its singularity is
    inside (|z_k| <= s) and in powers of z when outside (|z_k| >= r).
    """
    annulus = Annulus(s, r)
    for pt in ss.points:
        if annulus.s < abs(pt.z) < annulus.r:
            raise SingularityInAnnulus(f"singularity z = {pt.z:.6g} lies inside ({s}, {r})")
    shape = ss.p_inf.shape
    neg = [np.zeros(shape, dtype=complex) for _ in range(k_neg)]
    pos = [np.zeros(shape, dtype=complex) for _ in range(k_pos + 1)]
    for pt in ss.points:
        zk = pt.z
        for q in range(1, pt.order + 1):
            c = pt.coeffs[pt.order - q]
            if abs(zk) <= annulus.s:
                # (z - zk)^-q = sum_m C(q+m-1, m) zk^m z^(-q-m)
                for m in range(0, k_neg - q + 1):
                    neg[q + m - 1] += comb(q + m - 1, m) * zk ** m * c
            else:
                # (z - zk)^-q = (-zk)^-q sum_m C(q+m-1, m) (z/zk)^m
                lead = (-zk) ** (-q)
                for m in range(0, k_pos + 1):
                    pos[m] += lead * comb(q + m - 1, m) * zk ** (-m) * c
    for j, e in enumerate(ss.entire_part[:k_pos + 1]):
        pos[j] += e
    return LaurentSeries(neg=neg, nonneg=pos, annulus=annulus, center=0j)


# --------------------------------------------------------------------------
# Jordan chains and the weighted shift

@dataclass(frozen=True)
class JordanChain:
    vectors: tuple
    seed: np.ndarray
    residuals: tuple

    def __len__(self):
        return len(self.vectors)


def _chain(ps: PoleSolution, local: LinearPencil, phi: np.ndarray, length: int, tol: float):
    m = ps.r_m1 @ local.a0
    base = ps.r_m1 @ phi
    powers = [base]
    for _ in range(length):
        powers.append(m @ powers[-1])
    scale = max(1.0, float(np.linalg.norm(phi)))
    if np.linalg.norm(powers[length - 1]) <= tol * scale:
        raise DegenerateSeed("chain head (R_-1 A0)^(L-1) R_-1 phi vanishes")
    if length < ps.order and np.linalg.norm(powers[length]) > tol * scale:
        raise DegenerateSeed(f"seed does not terminate after {length} links")
    vectors = tuple((-1) ** (length - j - 1) * powers[length - j - 1] for j in range(length))
    res = [float(np.linalg.norm(local.a0 @ vectors[0]))]
    for j in range(1, length):
        res.append(float(np.linalg.norm(local.a1 @ vectors[j - 1] + local.a0 @ vectors[j])))
    return vectors, tuple(res)


def jordan_chain(ps: PoleSolution, pencil: LinearPencil, phi=None,
                 length: Optional[int] = None, tol: Optional[float] = None) -> JordanChain:
    """Jordan chain x_0 .. x_{L-1} with x_j = (-1)^(L-j-1) (R_-1 A0)^(L-j-1) R_-1 phi.

    ``length`` defaults to the pole order.  Without ``phi`` the canonical basis
    vectors are tried in index order and the first non-degenerate one is used.
    """
    if ps.order < 1:
        raise DegenerateSeed("a regular point has no Jordan chain")
    local = pencil.shifted(ps.center)
    tol = local.residual_tol() if tol is None else tol
    length = ps.order if length is None else length
    if not 1 <= length <= ps.order:
        raise ValueError(f"chain length must lie in 1..{ps.order}")
    if phi is None:
        for k in range(local.a0.shape[0]):
            e = np.zeros(local.a0.shape[0], dtype=complex)
            e[k] = 1.0
            try:
                return jordan_chain(ps, pencil, e, length, tol)
            except DegenerateSeed:
                continue
        raise DegenerateSeed("no canonical basis vector seeds a chain of that length")
    phi = np.asarray(phi, dtype=complex)
    vectors, res = _chain(ps, local, phi, length, tol)
    scale = max(1.0, float(np.linalg.norm(phi)))
    for j, v in enumerate(res):
        if v > tol * scale:
            raise BasicConditionViolated(f"Jordan chain identity {j}", v, tol * scale)
    return JordanChain(vectors=vectors, seed=phi, residuals=res)


def weighted_shift(delta: float, dim: int) -> np.ndarray:
    """dim x dim truncation of the shift with weights delta^(2^(i-1)) on the superdiagonal."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if dim < 2:
        raise ValueError("dim must be at least 2")
    w = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        w[i, i + 1] = delta ** (2 ** i)
    return w


def weighted_shift_power_norm(delta: float, n: int) -> float:
    """Spectral norm of W^n for the untruncated shift (valid below the truncation)."""
    return delta ** (2 ** n - 1)


def shift_pencil(delta: float, dim: int) -> LinearPencil:
    """The pencil I z - W."""
    w = weighted_shift(delta, dim)
    return LinearPencil(-w, np.eye(dim))
