"""Reference norms computed directly from function samples.

The smoothness norm pairs the plain L_r norm with a square-function of
N-th order differences averaged over admissible step sets, evaluated with
fixed midpoint quadrature in all variables.  Every downstream comparison
against these values is a two-sided ratio check; absolute accuracy beyond
quadrature stability is never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError

__all__ = [
    "OracleParams",
    "difference",
    "hsr_norm_oracle",
    "lr_norm_oracle",
    "resolve_function",
]


@dataclass(frozen=True)
class OracleParams:
    s: float
    r: float
    v: float = 1.0
    N: int | None = None
    d: int = 1
    grid_level: int = 9
    t_levels: int = 10
    h_nodes: int = 8

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InvalidParameterError(f"dimension must be 1 or 2, got {self.d}")
        if self.s <= 0:
            raise InvalidParameterError(f"smoothness must satisfy s > 0, got {self.s}")
        if self.r < 1:
            raise InvalidParameterError(f"integrability must satisfy r >= 1, got {self.r}")
        if self.v < 1:
            raise InvalidParameterError(f"inner exponent must satisfy v >= 1, got {self.v}")
        smallest = math.floor(self.s) + 1
        if self.N is None:
            object.__setattr__(self, "N", smallest)
        elif self.N != smallest:
            raise InvalidParameterError(
                f"difference order must be as small as possible with N > s: "
                f"expected N={smallest} for s={self.s}, got {self.N}"
            )
        lower = self.d * max(0.0, 1.0 / self.r - 1.0 / self.v, 0.5 - 1.0 / self.v)
        if not lower < self.s:
            raise InvalidParameterError(
                f"admissibility requires d * max(0, 1/r - 1/v, 1/2 - 1/v) < s; "
                f"got {lower} >= {self.s}"
            )
        if self.grid_level < 1 or self.t_levels < 1 or self.h_nodes < 1:
            raise InvalidParameterError("discretization parameters must be positive")


def difference(f, N: int, x, h):
    """N-th order forward difference of f at x with step h.

    x and h are scalars in 1D or length-2 sequences in 2D; every evaluation
    point must stay inside the closed unit cube.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ha = np.atleast_1d(np.asarray(h, dtype=float))
    if xa.shape != ha.shape:
        raise InvalidParameterError("point and step must have matching shapes")
    total = 0.0
    for n in range(N + 1):
        pt = xa + n * ha
        if np.any(pt < 0.0) or np.any(pt > 1.0):
            raise DomainError(
                f"difference stencil leaves the unit cube at x={x}, h={h}, n={n}"
            )
        total += (-1.0) ** (N - n) * math.comb(N, n) * float(f(*pt))
    return total


def _midpoints(level: int) -> np.ndarray:
    n = 2**level
    return (np.arange(n) + 0.5) / n


def lr_norm_oracle(f, r: float, d: int, grid_level: int) -> float:
    """Tensor midpoint quadrature of the L_r norm on the unit cube."""
    xs = _midpoints(grid_level)
    if d == 1:
        vals = np.abs(np.asarray(f(xs), dtype=float))
    elif d == 2:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        vals = np.abs(np.asarray(f(X, Y), dtype=float))
    else:
        raise InvalidParameterError(f"dimension must be 1 or 2, got {d}")
    return float((np.sum(vals**r) * 2.0 ** (-grid_level * d)) ** (1.0 / r))


def _square_function_1d(f, params: OracleParams, xs: np.ndarray) -> np.ndarray:
    N, v, Q = params.N, params.v, params.h_nodes
    binom = np.array([(-1.0) ** (N - n) * math.comb(N, n) for n in range(N + 1)])
    acc = np.zeros_like(xs)
    for i in range(params.t_levels):
        t = 0.75 * 2.0**-i
        shell = 0.5 * 2.0**-i
        lo = np.maximum(-t, -xs / N)
        hi = np.minimum(t, (1.0 - xs) / N)
        step = (hi - lo) / Q
        inner = np.zeros_like(xs)
        for q in range(Q):
            h = lo + (q + 0.5) * step
            diff = np.zeros_like(xs)
            for n in range(N + 1):
                diff += binom[n] * f(xs + n * h)
            if v == math.inf:
                inner = np.maximum(inner, np.abs(diff))
            else:
                inner += np.abs(diff) ** v * step
        if v == math.inf:
            avg = inner**2
        else:
            avg = (inner / t) ** (2.0 / v)
        acc += t ** (-2.0 * params.s) * avg * shell / t
    return acc


def _square_function_2d(f, params: OracleParams, X, Y):
    N, v, Q = params.N, params.v, params.h_nodes
    binom = np.array([(-1.0) ** (N - n) * math.comb(N, n) for n in range(N + 1)])
    acc = np.zeros_like(X)
    for i in range(params.t_levels):
        t = 0.75 * 2.0**-i
        shell = 0.5 * 2.0**-i
        lo1 = np.maximum(-t, -X / N)
        hi1 = np.minimum(t, (1.0 - X) / N)
        lo2 = np.maximum(-t, -Y / N)
        hi2 = np.minimum(t, (1.0 - Y) / N)
        d1 = (hi1 - lo1) / Q
        d2 = (hi2 - lo2) / Q
        inner = np.zeros_like(X)
        for a in range(Q):
            h1 = lo1 + (a + 0.5) * d1
            for b in range(Q):
                h2 = lo2 + (b + 0.5) * d2
                mask = h1 * h1 + h2 * h2 < t * t
                diff = np.zeros_like(X)
                for n in range(N + 1):
                    diff += binom[n] * f(X + n * h1, Y + n * h2)
                if v == math.inf:
                    inner = np.maximum(inner, np.abs(diff) * mask)
                else:
                    inner += np.abs(diff) ** v * mask * d1 * d2
        if v == math.inf:
            avg = inner**2
        else:
            avg = (inner / t**2) ** (2.0 / v)
        acc += t ** (-2.0 * params.s) * avg * shell / t
    return acc


def hsr_norm_oracle(f, params: OracleParams) -> float:
    """Difference-based smoothness norm on the unit interval or square."""
    L = params.grid_level
    xs = _midpoints(L)
    if params.d == 1:
        lr = lr_norm_oracle(f, params.r, 1, L)
        sq = _square_function_1d(f, params, xs)
        tail = (np.sum(sq ** (params.r / 2.0)) * 2.0**-L) ** (1.0 / params.r)
    else:
        lr = lr_norm_oracle(f, params.r, 2, L)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        sq = _square_function_2d(f, params, X, Y)
        tail = (np.sum(sq ** (params.r / 2.0)) * 2.0 ** (-2 * L)) ** (1.0 / params.r)
    return float(lr + tail)


# ---------------------------------------------------------------------------
# named test functions


def _base_function(name: str):
    if name == "sinpi":
        return lambda x: np.sin(np.pi * x)
    if name == "bubble":
        return lambda x: x * (1.0 - x)
    if name.startswith("xalpha:"):
        try:
            alpha = float(name.split(":", 1)[1])
        except ValueError:
            raise InvalidParameterError(f"malformed exponent in {name!r}") from None
        if alpha <= 0:
            raise InvalidParameterError(f"xalpha exponent must be positive, got {alpha}")
        return lambda x: x**alpha * (1.0 - x)
    raise InvalidParameterError(
        f"unknown test function {name!r}; expected sinpi, bubble, xalpha:<a>, "
        f"or a tensor combination joined by '*'"
    )


def resolve_function(name: str):
    """Look up a named test function; returns (callable, dimension).

    Tensor products of two 1D names are written 'a*b'.
    """
    name = name.strip()
    sep = "*" if "*" in name else ("⊗" if "⊗" in name else None)
    if sep:
        left, right = (part.strip() for part in name.split(sep, 1))
        fa, fb = _base_function(left), _base_function(right)
        return (lambda x, y: fa(x) * fb(y)), 2
    return _base_function(name), 1
