"""Shift-invariant biorthogonal machinery on the real line.

Builds the compactly supported spline filter pairs (primal binomial mask,
minimal-degree dual mask), the polynomially enriched wavelets
psi_p = sum_k b_k phi_p(2x - k), and grid realizations of the dual
generator/wavelet through the cascade iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import PiecewisePolynomial, SplineParams, cardinal_quark, linear_combination
from .errors import DivergenceError, InvalidParameterError

__all__ = [
    "Mask",
    "FilterPair",
    "SampledFunction",
    "cdf_filters",
    "shift_quarklet",
    "scaled_element",
    "cascade",
    "refine_combination",
    "dilate_samples",
    "sample_pp",
    "sampled_inner",
]

MAX_QUARK_DEGREE = 16


@dataclass(frozen=True)
class Mask:
    """Finite filter: taps[i] multiplies the shift k = offset + i."""

    offset: int
    taps: tuple

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(float(t) for t in self.taps))

    @property
    def support(self):
        return self.offset, self.offset + len(self.taps) - 1

    def items(self):
        return [(self.offset + i, t) for i, t in enumerate(self.taps)]

    def __getitem__(self, k):
        i = k - self.offset
        if 0 <= i < len(self.taps):
            return self.taps[i]
        return 0.0

    def sum(self):
        return sum(self.taps)


@dataclass(frozen=True)
class FilterPair:
    """Primal/dual refinement masks and the induced wavelet masks.

    Both refinement masks sum to 2 and satisfy the discrete biorthogonality
    sum_k a_k adual_{k+2n} = 2 delta_{n,0}; the wavelet masks follow the
    alternating-flip convention b_k = (-1)^k adual_{1-k},
    bdual_k = (-1)^k a_{1-k}.
    """

    params: SplineParams
    primal: Mask
    dual: Mask
    wavelet: Mask
    dual_wavelet: Mask


def _dual_mask_exact(m, m_tilde):
    """Dual refinement mask as exact rationals, keyed by shift."""
    big_l = (m + m_tilde) // 2
    s_t = m_tilde // 2
    acc = {}
    binom_dual = [math.comb(m_tilde, i) for i in range(m_tilde + 1)]
    for n in range(big_l):
        coef = (
            Fraction((-1) ** n * math.comb(big_l - 1 + n, n), 4**n * 2**m_tilde)
        )
        # (1 - w)^(2n), lowest degree first
        factor = [(-1) ** i * math.comb(2 * n, i) for i in range(2 * n + 1)]
        conv = [0] * (m_tilde + 2 * n + 1)
        for i, bi in enumerate(binom_dual):
            for jj, fj in enumerate(factor):
                conv[i + jj] += bi * fj
        shift = -s_t - n
        for i, ci in enumerate(conv):
            if ci:
                acc[i + shift] = acc.get(i + shift, Fraction(0)) + 2 * coef * ci
    return acc


def cdf_filters(params: SplineParams) -> FilterPair:
    """Biorthogonal spline filter pair for (m, m_tilde)."""
    m, m_tilde = params.m, params.m_tilde
    s = params.offset
    primal_exact = {k: Fraction(math.comb(m, k + s), 2 ** (m - 1)) for k in range(-s, m - s + 1)}
    dual_exact = _dual_mask_exact(m, m_tilde)

    # construction-time checks, in exact arithmetic
    if sum(primal_exact.values()) != 2 or sum(dual_exact.values()) != 2:
        raise InvalidParameterError("refinement masks must sum to 2")
    shifts = range(-(m + m_tilde), m + m_tilde + 1)
    for n in shifts:
        acc = Fraction(0)
        for k, ak in primal_exact.items():
            acc += ak * dual_exact.get(k + 2 * n, Fraction(0))
        if acc != (2 if n == 0 else 0):
            raise InvalidParameterError(
                f"mask pair fails discrete biorthogonality at shift {2 * n}"
            )

    def to_mask(d):
        kmin, kmax = min(d), max(d)
        return Mask(kmin, tuple(float(d.get(k, 0)) for k in range(kmin, kmax + 1)))

    primal = to_mask(primal_exact)
    dual = to_mask(dual_exact)
    wavelet = to_mask({1 - k: (-1) ** (1 - k) * v for k, v in dual_exact.items()})
    dual_wavelet = to_mask({1 - k: (-1) ** (1 - k) * v for k, v in primal_exact.items()})
    return FilterPair(params, primal, dual, wavelet, dual_wavelet)


_quarklet_cache = {}


def shift_quarklet(params: SplineParams, p: int, max_degree: int = MAX_QUARK_DEGREE) -> PiecewisePolynomial:
    """psi_p = sum_k b_k phi_p(2x - k) on the line; p = 0 is the wavelet."""
    if p < 0 or p > max_degree:
        raise InvalidParameterError(
            f"quarklet degree must satisfy 0 <= p <= {max_degree}, got {p}"
        )
    key = (params.m, params.m_tilde, p)
    if key not in _quarklet_cache:
        mask = cdf_filters(params).wavelet
        quark = cardinal_quark(params, p)
        terms = [(w, quark.scale_shift(1, k)) for k, w in mask.items()]
        _quarklet_cache[key] = linear_combination(terms)
    return _quarklet_cache[key]


def scaled_element(f: PiecewisePolynomial, j: int, k: int) -> PiecewisePolynomial:
    """2^{j/2} f(2^j x - k) for j >= 0; at j = -1 the plain translate f(x - k)."""
    if j == -1:
        return f.scale_shift(0, k)
    if j < -1:
        raise InvalidParameterError(f"scale index must satisfy j >= -1, got {j}")
    return f.scale_shift(j, k, normalization=2.0 ** (j / 2))


# ---------------------------------------------------------------------------
# grid realizations


@dataclass(frozen=True)
class SampledFunction:
    """Samples on the dyadic grid start + i * 2^-level, i = 0..n-1."""

    level: int
    start: Fraction
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start", Fraction(self.start))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def grid(self):
        h = 2.0**-self.level
        return float(self.start) + h * np.arange(len(self.values))

    def integral(self):
        return float(np.sum(self.values)) * 2.0**-self.level


def cascade(mask: Mask, level: int, max_iter: int = 300) -> SampledFunction:
    """Fixed point of f(x) = sum_k mask_k f(2x - k) on the level grid.

    Starts from the unit hat centered in the mask support; the limit samples
    the refinable function normalized to unit integral.
    """
    if level < 6:
        raise InvalidParameterError(f"cascade level must satisfy level >= 6, got {level}")
    kmin, kmax = mask.support
    if kmax <= kmin:
        raise InvalidParameterError(
            "mask support must span at least two taps (degenerate refinement)"
        )
    if abs(mask.sum() - 2.0) > 1e-9:
        raise InvalidParameterError(f"mask must sum to 2, got {mask.sum()!r}")

    n = (kmax - kmin) * 2**level + 1
    x = kmin + np.arange(n) * 2.0**-level
    center = 0.5 * (kmin + kmax)
    width = 0.5 * (kmax - kmin)
    f = np.maximum(0.0, 1.0 - np.abs(x - center) / min(1.0, width))
    f /= f.sum() * 2.0**-level

    sup0 = float(np.max(np.abs(f)))
    taps = [(k, w) for k, w in mask.items() if w != 0.0]
    for it in range(max_iter):
        new = np.zeros_like(f)
        for k, w in taps:
            j0 = (kmin - k) * 2**level
            i_lo = max(0, math.ceil(-j0 / 2))
            i_hi = min(n - 1, (n - 1 - j0) // 2)
            if i_hi < i_lo:
                continue
            new[i_lo : i_hi + 1] += w * f[j0 + 2 * i_lo : j0 + 2 * i_hi + 1 : 2]
        diff = float(np.max(np.abs(new - f)))
        f = new
        sup = float(np.max(np.abs(f)))
        if it >= 50 and sup > 1e3 * max(sup0, 1.0):
            raise DivergenceError(
                f"cascade iteration diverging (sup {sup:.3e} after {it + 1} steps)"
            )
        if diff <= 1e-13 * max(1.0, sup):
            break
    else:
        if float(np.max(np.abs(f))) > 1e3 * max(sup0, 1.0):
            raise DivergenceError("cascade iteration failed to converge")
    return SampledFunction(level, Fraction(kmin), f)


def refine_combination(g: SampledFunction, mask: Mask) -> SampledFunction:
    """Samples of sum_k mask_k g(2x - k) on the same dyadic level."""
    kmin, kmax = mask.support
    level = g.level
    n_g = len(g.values)
    start = (g.start + kmin) / 2
    width_units = (n_g - 1) + (kmax - kmin) * 2**level
    n = width_units // 2 + 1
    out = np.zeros(n)
    for k, w in mask.items():
        if w == 0.0:
            continue
        # index into g of (2x_i - k): 2i + (kmin - k) * 2^level
        j0 = (kmin - k) * 2**level
        i_lo = max(0, math.ceil(-j0 / 2))
        i_hi = min(n - 1, (n_g - 1 - j0) // 2)
        if i_hi < i_lo:
            continue
        out[i_lo : i_hi + 1] += w * g.values[j0 + 2 * i_lo : j0 + 2 * i_hi + 1 : 2]
    return SampledFunction(level, start, out)


def dilate_samples(g: SampledFunction, j: int, k: int) -> SampledFunction:
    """Samples of 2^{j/2} g(2^j x - k) on the step-2^-level x grid.

    At j = -1 this is the plain translate g(x - k) (generator convention)."""
    if j == -1:
        return SampledFunction(g.level, g.start + k, g.values)
    if j < 0:
        raise InvalidParameterError(f"scale index must satisfy j >= -1, got {j}")
    stride = 2**j
    vals = 2.0 ** (j / 2) * g.values[::stride]
    return SampledFunction(g.level, (g.start + k) / Fraction(stride), vals)


def sample_pp(f: PiecewisePolynomial, level: int) -> SampledFunction:
    lo, hi = f.support
    width = (hi - lo) * 2**level
    if width.denominator != 1:
        raise InvalidParameterError("support is finer than the sampling grid")
    n = int(width) + 1
    xs = float(lo) + np.arange(n) * 2.0**-level
    return SampledFunction(level, lo, f(xs))


def sampled_inner(f: SampledFunction, g: SampledFunction) -> float:
    """Trapezoid integral of f * g; both on the same dyadic resolution."""
    if f.level != g.level:
        raise InvalidParameterError("sampled inner product needs matching grid levels")
    h = 2.0**-f.level
    off = (g.start - f.start) * 2**f.level
    if off.denominator != 1:
        raise InvalidParameterError("sampled grids are not aligned")
    off = int(off)
    lo = max(0, off)
    hi = min(len(f.values), off + len(g.values))
    if hi <= lo:
        return 0.0
    prod = f.values[lo:hi] * g.values[lo - off : hi - off]
    if len(prod) < 2:
        return 0.0
    return h * float(np.sum(prod) - 0.5 * (prod[0] + prod[-1]))
