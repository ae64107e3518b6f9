"""Exact piecewise-polynomial arithmetic and B-spline generators.

Functions here are the computational substrate for everything else: cardinal
B-splines built by convolution, their symmetrized translates, and polynomially
enriched variants ("quarks").  Pieces live on half-open intervals [a, b) with
dyadic rational endpoints, coefficients are stored in the local variable
x - a (lowest degree first), and all integral operations (moments, inner
products, Lr norms) are evaluated piece by piece, exactly where the integrand
is polynomial.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "PiecewisePolynomial",
    "SplineParams",
    "as_dyadic",
    "indicator",
    "linear_combination",
    "cardinal_bspline",
    "symmetrized_generator",
    "cardinal_quark",
]


def as_dyadic(x) -> Fraction:
    """Coerce x to a Fraction with a power-of-two denominator."""
    f = Fraction(x)
    den = f.denominator
    if den & (den - 1):
        raise InvalidParameterError(
            f"breakpoint {x} is not dyadic (denominator {den} is not a power of two)"
        )
    return f


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, lowest degree first)

def _poly_affine_arg(coeffs, alpha, beta):
    """Coefficients of p(alpha*u + beta) given those of p."""
    out = np.zeros(len(coeffs))
    # Horner in the transformed variable: result = c_n, then *(alpha u + beta) + c_{n-1}
    deg = 0
    for c in coeffs[::-1]:
        if deg:
            shifted = np.zeros(deg + 1)
            shifted[1 : deg + 1] = alpha * out[:deg]
            shifted[:deg] += beta * out[:deg]
            out[: deg + 1] = shifted
        out[0] += c
        deg += 1
    return out


def _poly_antiderivative(coeffs):
    out = np.zeros(len(coeffs) + 1)
    out[1:] = np.asarray(coeffs) / np.arange(1, len(coeffs) + 1)
    return out


def _poly_definite_integral(coeffs, length):
    anti = _poly_antiderivative(coeffs)
    return float(np.polyval(anti[::-1], length))


def _real_roots_inside(coeffs, length):
    """Real roots of the piece polynomial strictly inside (0, length)."""
    c = np.asarray(coeffs, float)
    nz = np.nonzero(np.abs(c) > 0)[0]
    if len(nz) == 0 or nz[-1] == 0:
        return []
    c = c[: nz[-1] + 1]
    roots = np.roots(c[::-1])
    scale = max(1.0, abs(length))
    out = []
    for z in roots:
        if abs(z.imag) <= 1e-10 * scale and 1e-12 * scale < z.real < length - 1e-12 * scale:
            out.append(float(z.real))
    out.sort()
    merged = []
    for t in out:
        if not merged or t - merged[-1] > 1e-12 * scale:
            merged.append(t)
    return merged


@lru_cache(maxsize=None)
def _gauss_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Compactly supported piecewise polynomial on half-open dyadic pieces.

    breakpoints: strictly increasing dyadic rationals b_0 < ... < b_n.
    pieces: n coefficient arrays; piece i is evaluated in u = x - b_i on
    [b_i, b_{i+1}).  The function is 0 outside [b_0, b_n] and, by the
    half-open convention, also at x = b_n.
    """

    breakpoints: tuple
    pieces: tuple

    def __post_init__(self):
        bps = tuple(as_dyadic(b) for b in self.breakpoints)
        pcs = tuple(np.atleast_1d(np.asarray(p, dtype=float)) for p in self.pieces)
        if len(bps) < 2:
            raise InvalidParameterError("need at least two breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise InvalidParameterError("breakpoints must be strictly increasing")
        if len(pcs) != len(bps) - 1:
            raise InvalidParameterError("need exactly one piece per interval")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pcs)
        object.__setattr__(self, "_bp", np.array([float(b) for b in bps]))

    # -- basic queries ------------------------------------------------------

    @property
    def support(self):
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self):
        return max(len(p) - 1 for p in self.pieces)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        x_flat = np.atleast_1d(x_arr)
        out = np.zeros_like(x_flat, dtype=float)
        idx = np.searchsorted(self._bp, x_flat, side="right") - 1
        for i, coeffs in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                u = x_flat[mask] - self._bp[i]
                out[mask] = np.polyval(coeffs[::-1], u)
        if scalar:
            return float(out[0])
        return out.reshape(x_arr.shape)

    def trim(self):
        """Drop leading/trailing pieces whose coefficients are exactly zero."""
        lo, hi = 0, len(self.pieces)
        while lo < hi - 1 and not self.pieces[lo].any():
            lo += 1
        while hi - lo > 1 and not self.pieces[hi - 1].any():
            hi -= 1
        if lo == 0 and hi == len(self.pieces):
            return self
        return PiecewisePolynomial(self.breakpoints[lo : hi + 1], self.pieces[lo:hi])

    # -- calculus -----------------------------------------------------------

    def derivative(self):
        pcs = []
        for p in self.pieces:
            if len(p) == 1:
                pcs.append(np.zeros(1))
            else:
                pcs.append(p[1:] * np.arange(1, len(p)))
        return PiecewisePolynomial(self.breakpoints, pcs)

    def moment(self, q, center=0):
        """Exact integral of (x - center)^q times this function."""
        if q < 0 or q != int(q):
            raise InvalidParameterError(f"moment order must be a nonnegative integer, got {q}")
        q = int(q)
        center = Fraction(center)
        total = 0.0
        for i, p in enumerate(self.pieces):
            t0 = float(self.breakpoints[i] - center)
            # (u + t0)^q expanded, then multiplied against the piece
            base = np.array([math.comb(q, n) * t0 ** (q - n) for n in range(q + 1)])
            prod = np.convolve(base, p)
            length = float(self.breakpoints[i + 1] - self.breakpoints[i])
            total += _poly_definite_integral(prod, length)
        return total

    def inner_product(self, other: "PiecewisePolynomial") -> float:
        lo = max(self.breakpoints[0], other.breakpoints[0])
        hi = min(self.breakpoints[-1], other.breakpoints[-1])
        if lo >= hi:
            return 0.0
        cuts = sorted(
            {b for b in self.breakpoints if lo <= b <= hi}
            | {b for b in other.breakpoints if lo <= b <= hi}
            | {lo, hi}
        )
        total = 0.0
        for a, b in zip(cuts, cuts[1:]):
            pf = self._local_poly(a)
            pg = other._local_poly(a)
            if pf is None or pg is None:
                continue
            total += _poly_definite_integral(np.convolve(pf, pg), float(b - a))
        return total

    def l2_norm(self):
        return math.sqrt(max(self.inner_product(self), 0.0))

    def lr_norm(self, r):
        """(integral of |f|^r)^(1/r) by per-piece Gauss quadrature.

        Pieces are split at the real roots of the local polynomial so the
        integrand is smooth on every panel; the node count makes the rule
        exact whenever r is an even integer.
        """
        if r <= 0:
            raise InvalidParameterError(f"Lebesgue exponent must satisfy r > 0, got {r}")
        deg = self.degree
        n_nodes = max(2, math.ceil((deg * r + 8) / 2))
        xg, wg = _gauss_nodes(n_nodes)
        total = 0.0
        for i, p in enumerate(self.pieces):
            length = float(self.breakpoints[i + 1] - self.breakpoints[i])
            cuts = [0.0] + _real_roots_inside(p, length) + [length]
            for a, b in zip(cuts, cuts[1:]):
                half = 0.5 * (b - a)
                u = a + half * (xg + 1.0)
                vals = np.abs(np.polyval(p[::-1], u))
                total += half * float(np.dot(wg, vals**r))
        return total ** (1.0 / r)

    # -- geometry -----------------------------------------------------------

    def scale_shift(self, j, k, normalization=1.0):
        """normalization * f(2^j x - k) with exact dyadic breakpoints."""
        two_j = Fraction(2) ** j
        bps = [(b + k) / two_j for b in self.breakpoints]
        factor = float(two_j)
        pcs = [normalization * p * factor ** np.arange(len(p)) for p in self.pieces]
        return PiecewisePolynomial(bps, pcs)

    def multiply_affine(self, alpha, beta):
        """(alpha*x + beta) * f(x), alpha/beta exact rationals or floats."""
        alpha_f = Fraction(alpha)
        beta_f = Fraction(beta)
        pcs = []
        for b, p in zip(self.breakpoints, self.pieces):
            const = float(alpha_f * b + beta_f)
            pcs.append(np.convolve(np.array([const, float(alpha_f)]), p))
        return PiecewisePolynomial(self.breakpoints, pcs)

    def monomial_multiply(self, p, center, scale):
        """((x - center)/scale)^p * f(x)."""
        if p < 0 or p != int(p):
            raise InvalidParameterError(f"monomial power must be a nonnegative integer, got {p}")
        p = int(p)
        center = Fraction(center)
        scale_f = float(scale)
        if scale_f == 0:
            raise InvalidParameterError("monomial scale must be nonzero")
        pcs = []
        for b, piece in zip(self.breakpoints, self.pieces):
            t0 = float(b - center)
            base = np.array([math.comb(p, i) * t0 ** (p - i) for i in range(p + 1)])
            pcs.append(np.convolve(base, piece) / scale_f**p)
        return PiecewisePolynomial(self.breakpoints, pcs)

    def reflect(self, center=1):
        """f(center - x).  Assumes continuity at interior breakpoints, so the
        half-open convention flip at piece edges does not change values."""
        c = as_dyadic(center)
        bps = [c - b for b in reversed(self.breakpoints)]
        pcs = []
        for i in reversed(range(len(self.pieces))):
            length = float(self.breakpoints[i + 1] - self.breakpoints[i])
            pcs.append(_poly_affine_arg(self.pieces[i], -1.0, length))
        return PiecewisePolynomial(bps, pcs)

    # -- internal -----------------------------------------------------------

    def _local_poly(self, left):
        """Piece coefficients re-expanded at a new left endpoint, or None."""
        if left < self.breakpoints[0] or left >= self.breakpoints[-1]:
            return None
        i = bisect_right(self.breakpoints, left) - 1
        t = float(left - self.breakpoints[i])
        if t == 0.0:
            return self.pieces[i]
        return _poly_affine_arg(self.pieces[i], 1.0, t)


def indicator(a, b):
    """Characteristic function of [a, b)."""
    return PiecewisePolynomial((a, b), (np.array([1.0]),))


def linear_combination(terms: Iterable[tuple]) -> PiecewisePolynomial:
    """sum of coef * pp over (coef, pp) pairs, on the merged breakpoint grid."""
    terms = [(float(c), f) for c, f in terms]
    if not terms:
        raise InvalidParameterError("linear_combination needs at least one term")
    cuts = sorted({b for _, f in terms for b in f.breakpoints})
    pcs = []
    for a in cuts[:-1]:
        acc = np.zeros(1)
        for coef, f in terms:
            local = f._local_poly(a)
            if local is None or coef == 0.0:
                continue
            if len(local) > len(acc):
                acc = np.pad(acc, (0, len(local) - len(acc)))
            acc[: len(local)] += coef * local
        pcs.append(acc)
    return PiecewisePolynomial(cuts, pcs).trim()


# ---------------------------------------------------------------------------
# cardinal B-splines and quarks


def _convolve_unit(f: PiecewisePolynomial) -> PiecewisePolynomial:
    """f convolved with the unit indicator: g(x) = F(x) - F(x - 1)."""
    old = f.breakpoints
    integrals = [0.0]
    for i, p in enumerate(f.pieces):
        integrals.append(integrals[-1] + _poly_definite_integral(p, float(old[i + 1] - old[i])))
    total = integrals[-1]

    def antiderivative_on(a):
        # polynomial of F on the cell starting at a, in u = x - a; the cell
        # never straddles an old breakpoint because the new grid contains
        # both old breakpoints and their unit shifts
        if a < old[0]:
            return np.zeros(1)
        if a >= old[-1]:
            return np.array([total])
        i = bisect_right(old, a) - 1
        anti = _poly_antiderivative(f.pieces[i])
        out = _poly_affine_arg(anti, 1.0, float(a - old[i]))
        out[0] += integrals[i]
        return out

    cuts = sorted({b for b in old} | {b + 1 for b in old})
    pcs = []
    for a in cuts[:-1]:
        hi = antiderivative_on(a)
        lo = antiderivative_on(a - 1)
        n = max(len(hi), len(lo))
        acc = np.zeros(n)
        acc[: len(hi)] += hi
        acc[: len(lo)] -= lo
        pcs.append(acc)
    return PiecewisePolynomial(cuts, pcs).trim()


def cardinal_bspline(m: int) -> PiecewisePolynomial:
    """Cardinal B-spline of order m (degree m-1) supported on [0, m]."""
    if m < 1 or m != int(m):
        raise InvalidParameterError(f"B-spline order must satisfy m >= 1, got {m}")
    f = indicator(0, 1)
    for _ in range(int(m) - 1):
        f = _convolve_unit(f)
    return f


@dataclass(frozen=True)
class SplineParams:
    """Order pair (m, m_tilde) plus the coarsest level j0.

    m_tilde >= m with m + m_tilde even; 2^j0 >= 2(m + m_tilde) so that at
    every constructed level the boundary, transition, and interior index
    zones are disjoint.
    """

    m: int
    m_tilde: int
    j0: int = None

    def __post_init__(self):
        if self.m < 2:
            raise InvalidParameterError(f"spline order must satisfy m >= 2, got m={self.m}")
        if self.m_tilde < self.m:
            raise InvalidParameterError(
                f"dual order must satisfy m_tilde >= m, got m_tilde={self.m_tilde} < m={self.m}"
            )
        if (self.m + self.m_tilde) % 2:
            raise InvalidParameterError(
                f"m + m_tilde must be even, got m={self.m}, m_tilde={self.m_tilde}"
            )
        j0 = self.j0
        if j0 is None:
            j0 = max(1, math.ceil(math.log2(2 * (self.m + self.m_tilde))))
        if 2**j0 < 2 * (self.m + self.m_tilde):
            raise InvalidParameterError(
                f"coarsest level must satisfy 2^j0 >= 2(m + m_tilde), got j0={j0}"
            )
        object.__setattr__(self, "j0", int(j0))

    @property
    def offset(self):
        """Symmetrization shift floor(m/2)."""
        return self.m // 2

    @property
    def quark_scale(self):
        """Normalizing width ceil(m/2) of the quark monomial."""
        return (self.m + 1) // 2


def symmetrized_generator(params: SplineParams) -> PiecewisePolynomial:
    """Generator N_m(. + floor(m/2)), supported on [-floor(m/2), ceil(m/2)]."""
    return cardinal_bspline(params.m).scale_shift(0, -params.offset)


def cardinal_quark(params: SplineParams, p: int) -> PiecewisePolynomial:
    """(x / ceil(m/2))^p N_m(x + floor(m/2)); p = 0 is the plain generator."""
    if p < 0:
        raise InvalidParameterError(f"quark degree must satisfy p >= 0, got {p}")
    phi = symmetrized_generator(params)
    if p == 0:
        return phi
    return phi.monomial_multiply(p, 0, params.quark_scale)
