"""Analysis and synthesis against the interval system.

Coefficients come from a Gram solve against exact element inner products:
for functions inside the truncated span this reproduces the expansion
exactly, and otherwise yields the L2-best representation, which is all the
norm-equivalence experiments need.  The infimum over all representations is
never searched; estimates computed here are canonical upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import PiecewisePolynomial, linear_combination
from .errors import IllConditionedError, InvalidParameterError, LevelError
from .interval import IntervalSystem, QuarkletIndex
from .seqnorm import CoefficientField, NormParams, seq_norm_1d

__all__ = [
    "TruncationSpec",
    "frame_indices",
    "gram_matrix",
    "sample_matrix",
    "analyze_p0",
    "synthesize",
    "synthesize_pp",
    "quarklet_norm_estimate",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class TruncationSpec:
    """Finest level J and maximal polynomial degree P of a truncated frame."""

    J: int
    P: int = 0

    def __post_init__(self):
        if self.P < 0:
            raise InvalidParameterError(f"degree bound must satisfy P >= 0, got {self.P}")


def frame_indices(system: IntervalSystem, spec: TruncationSpec) -> list[QuarkletIndex]:
    """All indices with j <= J and p <= P, ordered by (j, k, p)."""
    j0 = system.params.j0
    if spec.J < j0 - 1:
        raise LevelError(f"truncation level {spec.J} is below the quark level {j0 - 1}")
    out = []
    for j in range(j0 - 1, spec.J + 1):
        for k in system.nabla(j):
            for p in range(spec.P + 1):
                out.append(QuarkletIndex(p, j, k))
    return out


def _overlap(a: PiecewisePolynomial, b: PiecewisePolynomial) -> bool:
    return a.breakpoints[0] < b.breakpoints[-1] and b.breakpoints[0] < a.breakpoints[-1]


def gram_matrix(system: IntervalSystem, spec: TruncationSpec) -> np.ndarray:
    """Exact pairwise inner products of the truncated frame."""
    cache = getattr(system, "_gram_cache", None)
    if cache is None:
        cache = {}
        system._gram_cache = cache
    key = (spec.J, spec.P)
    if key in cache:
        return cache[key]
    idx = frame_indices(system, spec)
    els = [system.element(i) for i in idx]
    n = len(els)
    G = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            if _overlap(els[a], els[b]):
                G[a, b] = G[b, a] = els[a].inner_product(els[b])
    cache[key] = G
    return G


def sample_matrix(system: IntervalSystem, spec: TruncationSpec):
    """Quadrature nodes, weights, and element values on the global grid.

    The grid is composite Gauss over all dyadic cells of level J+1 with
    2(m+P)+8 nodes per cell; every element piece is a union of such cells,
    so integrals of element times any in-span function are exact.
    """
    cache = getattr(system, "_sample_cache", None)
    if cache is None:
        cache = {}
        system._sample_cache = cache
    key = (spec.J, spec.P)
    if key in cache:
        return cache[key]
    q = 2 * (system.params.m + spec.P) + 8
    base, wts = np.polynomial.legendre.leggauss(q)
    ncell = 2 ** (spec.J + 1)
    width = 1.0 / ncell
    starts = np.arange(ncell) * width
    nodes = (starts[:, None] + 0.5 * width * (base[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * width * wts, ncell)
    idx = frame_indices(system, spec)
    E = np.vstack([system.element(i)(nodes) for i in idx])
    cache[key] = (nodes, weights, E)
    return cache[key]


def _solve_gram(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            f"frame Gram matrix condition {cond:.3e} exceeds {COND_LIMIT:.0e}"
        )
    return np.linalg.solve(G, rhs)


def analyze_p0(system: IntervalSystem, f, spec: TruncationSpec) -> CoefficientField:
    """Canonical p=0 coefficients of f on levels up to J via the Gram solve."""
    if spec.P != 0:
        raise InvalidParameterError(f"analysis uses the p=0 frame only; got P={spec.P}")
    idx = frame_indices(system, spec)
    nodes, weights, E = sample_matrix(system, spec)
    rhs = E @ (weights * np.asarray(f(nodes), dtype=float))
    coeffs = _solve_gram(gram_matrix(system, spec), rhs)
    return CoefficientField({i: c for i, c in zip(idx, coeffs)})


def synthesize(system: IntervalSystem, coeffs: CoefficientField, points) -> np.ndarray:
    """Pointwise values of the expansion with the given coefficients."""
    pts = np.asarray(points, dtype=float)
    out = np.zeros_like(pts)
    for index, c in coeffs.items():
        if c != 0.0:
            out += c * system.element(index)(pts)
    return out


def synthesize_pp(system: IntervalSystem, coeffs: CoefficientField) -> PiecewisePolynomial | None:
    """The expansion as an exact piecewise polynomial (None when empty)."""
    terms = [(c, system.element(i)) for i, c in coeffs.items() if c != 0.0]
    if not terms:
        return None
    return linear_combination(terms)


def quarklet_norm_estimate(
    system: IntervalSystem, f, spec: TruncationSpec, norm_params: NormParams
) -> float:
    """Sequence norm of the canonical representation: an upper bound for the
    representation infimum."""
    norm_params.check_smoothness_range()
    if not 1.0 < norm_params.r:
        raise InvalidParameterError(f"integrability must satisfy 1 < r, got {norm_params.r}")
    system.sigma.check_smoothness_bound(norm_params.s, norm_params.r)
    return seq_norm_1d(analyze_p0(system, f, spec), norm_params)
