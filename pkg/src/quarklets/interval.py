"""Boundary-adapted quarklet system on the unit interval.

Knots with full-multiplicity endpoints, Schoenberg B-splines, boundary
quarks, and the quarklet system with optional homogeneous boundary
conditions.  Strictly inner elements are dilated copies of the
shift-invariant quarklets; elements whose support would cross an endpoint
are built from a window of m_tilde + 1 consecutive quarks one level finer,
with coefficients taken from the kernel of their moment matrix so that all
m_tilde vanishing moments survive at the boundary.
"""

from __future__ import annotations

import json
import math
import threading
from bisect import bisect_left
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .algebra import PiecewisePolynomial, SplineParams, indicator, linear_combination
from .errors import (
    ConstructionFailedError,
    FrameIndexError,
    InvalidParameterError,
    LevelError,
)
from .shiftinv import MAX_QUARK_DEGREE, scaled_element, shift_quarklet

__all__ = [
    "BoundaryCondition",
    "QuarkletIndex",
    "IntervalSystem",
    "knots",
    "schoenberg_bspline",
    "boundary_quark",
    "left_limit",
]


class BoundaryCondition(NamedTuple):
    """Orders of homogeneous boundary conditions at 0 and 1."""

    sigma_l: int = 0
    sigma_r: int = 0

    def validated(self) -> "BoundaryCondition":
        for v in self:
            if v != int(v) or v < 0:
                raise InvalidParameterError(
                    f"boundary condition orders must be non-negative integers, got {self}"
                )
        return BoundaryCondition(int(self.sigma_l), int(self.sigma_r))

    def check_smoothness_bound(self, s: float, r: float) -> None:
        """Each order must satisfy sigma <= floor(s + 1 - 1/r - eps)."""
        bound = math.floor(s + 1.0 - 1.0 / r - 1e-9)
        if max(self.sigma_l, self.sigma_r) > bound:
            raise InvalidParameterError(
                f"boundary condition order {max(self)} violates "
                f"sigma <= floor(s + 1 - 1/r) = {bound} for s={s}, r={r}"
            )


class QuarkletIndex(NamedTuple):
    p: int
    j: int
    k: int


def knots(params: SplineParams, j: int):
    """Level-j knot list for k = -m+1, ..., 2^j + m - 1.

    Endpoint knots carry multiplicity m; entry k lives at list position
    k + m - 1.  Values are exact dyadic rationals.
    """
    if j < params.j0:
        raise LevelError(f"level {j} is below the coarsest level {params.j0}")
    m = params.m
    n = 2**j
    seq = [Fraction(0)] * m
    seq += [Fraction(k, n) for k in range(1, n)]
    seq += [Fraction(1)] * m
    return seq


def schoenberg_bspline(params: SplineParams, j: int, k: int) -> PiecewisePolynomial:
    """Schoenberg B-spline of order m on the level-j interval knots."""
    m = params.m
    if j < params.j0:
        raise LevelError(f"level {j} is below the coarsest level {params.j0}")
    if not -m + 1 <= k <= 2**j - 1:
        raise FrameIndexError(f"k={k} outside the scaling range [-m+1, 2^j - 1] at j={j}")
    t = knots(params, j)

    def tt(i):
        return t[i + m - 1]

    funcs = {
        i: indicator(tt(i), tt(i + 1)) if tt(i) < tt(i + 1) else None
        for i in range(k, k + m)
    }
    for order in range(2, m + 1):
        nxt = {}
        for i in range(k, k + m - order + 1):
            terms = []
            den = tt(i + order - 1) - tt(i)
            if den > 0 and funcs[i] is not None:
                terms.append(funcs[i].multiply_affine(Fraction(1) / den, -tt(i) / den))
            den = tt(i + order) - tt(i + 1)
            if den > 0 and funcs[i + 1] is not None:
                terms.append(funcs[i + 1].multiply_affine(-Fraction(1) / den, tt(i + order) / den))
            nxt[i] = linear_combination([(1.0, f) for f in terms]) if terms else None
        funcs = nxt
    out = funcs[k]
    if out is None:
        raise ConstructionFailedError(f"empty B-spline support at j={j}, k={k}")
    return out.trim()


def boundary_quark(params: SplineParams, p: int, j: int, k: int) -> PiecewisePolynomial:
    """L2-normalized Schoenberg B-spline times the position-adapted monomial.

    Left functions use (2^j x / (k+m))^p so the factor is 0 at the origin and
    1 at the right end of the support; inner functions use the same centered
    monomial as on the line; right functions are reflections of their left
    partners.
    """
    m = params.m
    if p < 0 or p != int(p):
        raise InvalidParameterError(f"polynomial degree must be >= 0, got {p}")
    if p > MAX_QUARK_DEGREE:
        raise InvalidParameterError(
            f"polynomial degree capped at p <= {MAX_QUARK_DEGREE}, got {p}"
        )
    n = 2**j
    if k > n - m:
        if k > n - 1:
            raise FrameIndexError(f"k={k} outside the scaling range at j={j}")
        return boundary_quark(params, p, j, n - m - k).reflect(1)
    base = schoenberg_bspline(params, j, k).scale_shift(0, 0, 2.0 ** (j / 2.0))
    if p == 0:
        return base
    if k <= -1:
        return base.monomial_multiply(p, 0, Fraction(k + m, n))
    return base.monomial_multiply(p, Fraction(k + params.offset, n), Fraction(params.quark_scale, n))


def left_limit(f: PiecewisePolynomial, x) -> float:
    """Value of f at x taken as the limit from the left."""
    bps = f.breakpoints
    x = Fraction(x)
    if x <= bps[0] or x > bps[-1]:
        return 0.0
    i = bisect_left(bps, x) - 1
    u = float(x - bps[i])
    return float(np.polynomial.polynomial.polyval(u, f.pieces[i]))


class IntervalSystem:
    """Quarklet frame elements on (0, 1) for fixed spline parameters and
    boundary conditions.  Elements are cached; cache fills lazily and reads
    are safe from multiple threads once constructed."""

    def __init__(self, params: SplineParams, sigma: BoundaryCondition = BoundaryCondition()):
        self.params = params
        self.sigma = BoundaryCondition(*sigma).validated()
        self._cache: dict[QuarkletIndex, PiecewisePolynomial] = {}
        self._lock = threading.Lock()

    # -- index sets ---------------------------------------------------------

    def delta(self, j: int) -> range:
        """Scaling indices at level j, trimmed by active boundary conditions."""
        if j < self.params.j0:
            raise LevelError(f"level {j} is below the coarsest level {self.params.j0}")
        sl, sr = self._sgn()
        return range(-self.params.m + 1 + sl, 2**j - sr)

    def nabla(self, j: int) -> range:
        """Quarklet position indices at level j; j0 - 1 addresses the quarks."""
        j0 = self.params.j0
        if j < j0 - 1:
            raise LevelError(f"level {j} is below the quark level {j0 - 1}")
        if j == j0 - 1:
            return self.delta(j0)
        sl, sr = self._sgn()
        return range(sl, 2**j - sr)

    def _sgn(self):
        return (1 if self.sigma.sigma_l else 0), (1 if self.sigma.sigma_r else 0)

    def _transition_width(self) -> int:
        return (self.params.m_tilde - self.params.m) // 2

    # -- constructors -------------------------------------------------------

    def inner_quarklet(self, p: int, j: int, k: int) -> PiecewisePolynomial:
        """Quarklet for positions away from both boundary blocks."""
        m = self.params.m
        n = 2**j
        if not m - 1 <= k <= n - m:
            raise FrameIndexError(
                f"k={k} is a boundary position at j={j}; use the boundary constructor"
            )
        d = self._transition_width()
        if m - 1 + d <= k <= n - m - d:
            return scaled_element(shift_quarklet(self.params, p), j, k)
        # support of the dilated translate would cross an endpoint: fall back
        # to the windowed moment construction
        if k < m - 1 + d:
            return self.boundary_quarklet(p, j, "left", k)
        return self.boundary_quarklet(p, j, "right", n - 1 - k)

    def boundary_moment_matrix(self, p: int, j: int, side: str, k: int) -> np.ndarray:
        """Moments of the m_tilde + 1 windowed quarks one level finer.

        Row q of the left matrix holds q-th moments about 0; the right matrix
        takes moments about 1, which makes it the column-reversed left matrix
        of the mirrored problem with signs alternating in q.
        """
        window = self._quark_window(p, j, side, k)
        mt = self.params.m_tilde
        center = 0 if side == "left" else 1
        mat = np.empty((mt, mt + 1))
        for c, quark in enumerate(window):
            for q in range(mt):
                mat[q, c] = quark.moment(q, center)
        return mat

    def _quark_window(self, p, j, side, k):
        if side not in ("left", "right"):
            raise InvalidParameterError(f"side must be 'left' or 'right', got {side!r}")
        if j < self.params.j0:
            raise LevelError(f"level {j} is below the coarsest level {self.params.j0}")
        m, mt = self.params.m, self.params.m_tilde
        if not 0 <= k <= m - 2 + self._transition_width():
            raise FrameIndexError(f"k={k} outside the boundary block at j={j}")
        sl, sr = self._sgn()
        if side == "left":
            l0 = -m + 1 + sl + k
            return [boundary_quark(self.params, p, j + 1, l) for l in range(l0, l0 + mt + 1)]
        # The right window reflects the left window of the mirrored problem.
        # For odd m the inner-quark monomial is not symmetric about its
        # B-spline, so windows assembled from unreflected quarks would break
        # the left-right symmetry of the system.
        l0 = -m + 1 + sr + k
        win = [boundary_quark(self.params, p, j + 1, l) for l in range(l0, l0 + mt + 1)]
        return [f.reflect(1) for f in reversed(win)]

    def boundary_quarklet(self, p: int, j: int, side: str, k: int) -> PiecewisePolynomial:
        """Kernel-weighted quark window with all m_tilde moments vanishing.

        The kernel vector is normalized to unit length with its first
        significant entry positive, so the construction is reproducible.
        """
        window = self._quark_window(p, j, side, k)
        mat = self.boundary_moment_matrix(p, j, side, k)
        scales = np.max(np.abs(mat), axis=1)
        scales[scales == 0.0] = 1.0
        _, svals, vh = np.linalg.svd(mat / scales[:, None])
        vec = vh[-1]
        residual = np.max(np.abs((mat / scales[:, None]) @ vec))
        if residual > 1e-8:
            raise ConstructionFailedError(
                f"no vanishing-moment kernel for p={p}, j={j}, side={side}, k={k} "
                f"(residual {residual:.2e}); invalid parameter combination"
            )
        vec = vec / np.linalg.norm(vec)
        lead = np.nonzero(np.abs(vec) > 1e-12 * np.max(np.abs(vec)))[0][0]
        if vec[lead] < 0:
            vec = -vec
        return linear_combination(list(zip(vec, window))).trim()

    # -- the assembled system ------------------------------------------------

    def element(self, index) -> PiecewisePolynomial:
        """Quarklet (or quark, at j = j0 - 1) addressed by (p, j, k)."""
        index = QuarkletIndex(*index)
        p, j, k = index
        if p < 0 or p > MAX_QUARK_DEGREE:
            raise InvalidParameterError(
                f"polynomial degree must be in [0, {MAX_QUARK_DEGREE}], got {p}"
            )
        if k not in self.nabla(j):
            raise FrameIndexError(f"k={k} not in the level-{j} index set {self.nabla(j)}")
        with self._lock:
            cached = self._cache.get(index)
            if cached is None:
                cached = self._build(p, j, k)
                self._cache[index] = cached
        return cached

    def _build(self, p, j, k):
        params = self.params
        if j == params.j0 - 1:
            return boundary_quark(params, p, params.j0, k)
        m = params.m
        d = self._transition_width()
        n = 2**j
        if k <= m - 2 + d:
            return self.boundary_quarklet(p, j, "left", k)
        if k >= n - m - d + 1:
            return self.boundary_quarklet(p, j, "right", n - 1 - k)
        return self.inner_quarklet(p, j, k)

    def to_json(self) -> str:
        """Serialize parameters and all cached elements.

        Breakpoints are [numerator, denominator] pairs; pieces are coefficient
        lists in increasing degree, local to each subinterval.
        """
        elements = []
        for idx in sorted(self._cache):
            f = self._cache[idx]
            elements.append(
                {
                    "p": idx.p,
                    "j": idx.j,
                    "k": idx.k,
                    "breakpoints": [[b.numerator, b.denominator] for b in f.breakpoints],
                    "pieces": [[float(c) for c in piece] for piece in f.pieces],
                }
            )
        doc = {
            "m": self.params.m,
            "m_tilde": self.params.m_tilde,
            "j0": self.params.j0,
            "sigma": [self.sigma.sigma_l, self.sigma.sigma_r],
            "elements": elements,
        }
        return json.dumps(doc, sort_keys=True)
