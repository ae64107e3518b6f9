"""Weighted sequence norms for quarklet coefficient fields on (0, 1).

The bracket sum is piecewise constant on the finest dyadic grid present in
the field, so the L_r integral is evaluated exactly; no quadrature error
enters here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .interval import QuarkletIndex

__all__ = ["CoefficientField", "NormParams", "chi_tilde", "weight", "seq_norm_1d"]


@dataclass(frozen=True)
class NormParams:
    """Smoothness / integrability / weight parameters for the sequence norm."""

    s: float
    r: float
    delta: float
    m: int

    def __post_init__(self):
        if self.s < 0:
            raise InvalidParameterError(f"smoothness must satisfy s >= 0, got {self.s}")
        if not 1.0 < self.r < float("inf"):
            raise InvalidParameterError(f"integrability must satisfy 1 < r < inf, got {self.r}")
        if not self.delta > 1.0:
            raise InvalidParameterError(f"weight exponent must satisfy delta > 1, got {self.delta}")
        if self.m < 2 or self.m != int(self.m):
            raise InvalidParameterError(f"spline order must satisfy m >= 2, got {self.m}")

    def check_smoothness_range(self):
        """Norm equivalence requires 0 < s < m - 1."""
        if not 0.0 < self.s < self.m - 1:
            raise InvalidParameterError(
                f"smoothness s={self.s} outside the valid range 0 < s < m - 1 for m={self.m}"
            )


class CoefficientField:
    """Finitely supported map from quarklet indices to real coefficients."""

    def __init__(self, entries=None):
        self.entries: dict[QuarkletIndex, float] = {}
        if entries:
            for key, val in dict(entries).items():
                self.entries[QuarkletIndex(*key)] = float(val)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries.get(QuarkletIndex(*key), 0.0)

    def __setitem__(self, key, val):
        self.entries[QuarkletIndex(*key)] = float(val)

    def items(self):
        return self.entries.items()

    def scaled(self, factor: float) -> "CoefficientField":
        return CoefficientField({k: factor * v for k, v in self.entries.items()})

    @property
    def p_max(self):
        return max((k.p for k in self.entries), default=0)

    @property
    def j_max(self):
        return max((k.j for k in self.entries), default=0)


def chi_tilde(j: int, k: int, x):
    """Indicator of the k-th dyadic level-j cell, with k clamped to the
    interval so out-of-range positions charge the nearest edge cell."""
    if j < 1:
        raise InvalidParameterError(f"cell level must satisfy j >= 1, got {j}")
    n = 2**j
    kc = min(max(k, 0), n - 1)
    x = np.asarray(x, dtype=float)
    inside = (x >= kc / n) & (x < (kc + 1) / n)
    if inside.ndim == 0:
        return int(inside)
    return inside.astype(int)


def weight(p: int, j: int, params: NormParams):
    """Squared-coefficient weight: (p+1)^(sgn(s)*4m + 2*delta) * 2^(2js) * 2^j."""
    sgn = 1 if params.s > 0 else 0
    return (p + 1) ** (sgn * 4 * params.m + 2 * params.delta) * 2.0 ** (
        2 * j * params.s
    ) * 2.0**j


def seq_norm_1d(coeffs: CoefficientField, params: NormParams) -> float:
    """L_r norm over (0,1) of the square-rooted weighted bracket sum."""
    if len(coeffs) == 0:
        return 0.0
    jmax = max(1, coeffs.j_max)
    ncells = 2**jmax
    bracket = np.zeros(ncells)
    for (p, j, k), c in coeffs.items():
        if c == 0.0:
            continue
        lvl = max(1, j)
        kc = min(max(k, 0), 2**lvl - 1)
        width = 2 ** (jmax - lvl)
        start = kc * width
        bracket[start : start + width] += weight(p, j, params) * c * c
    half_r = params.r / 2.0
    return float((2.0**-jmax * np.sum(bracket**half_r)) ** (1.0 / params.r))
