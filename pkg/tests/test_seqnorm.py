"""Tests for the weighted sequence norms."""

import numpy as np
import pytest

from quarklets.errors import InvalidParameterError
from quarklets.seqnorm import CoefficientField, NormParams, chi_tilde, seq_norm_1d, weight


def test_params_validation():
    with pytest.raises(InvalidParameterError, match="s >= 0"):
        NormParams(-0.1, 2.0, 1.5, 2)
    with pytest.raises(InvalidParameterError, match="1 < r"):
        NormParams(0.5, 1.0, 1.5, 2)
    with pytest.raises(InvalidParameterError, match="delta > 1"):
        NormParams(0.5, 2.0, 1.0, 2)


def test_smoothness_range_gate():
    NormParams(0.5, 2.0, 1.5, 2).check_smoothness_range()
    with pytest.raises(InvalidParameterError, match="0 < s < m - 1"):
        NormParams(1.2, 2.0, 1.5, 2).check_smoothness_range()
    with pytest.raises(InvalidParameterError, match="0 < s < m - 1"):
        NormParams(0.0, 2.0, 1.5, 2).check_smoothness_range()


def test_chi_tilde_clamping():
    assert chi_tilde(3, -2, 0.05) == 1
    assert chi_tilde(3, -2, 0.2) == 0
    assert chi_tilde(3, 9, 0.95) == 1
    assert chi_tilde(3, 9, 0.5) == 0
    assert chi_tilde(2, 1, 0.3) == 1
    with pytest.raises(InvalidParameterError):
        chi_tilde(0, 0, 0.5)


def test_chi_tilde_vectorized():
    xs = np.array([0.1, 0.3, 0.6, 0.9])
    assert list(chi_tilde(2, 2, xs)) == [0, 0, 1, 0]


def test_weight_zero_smoothness():
    params = NormParams(0.0, 2.0, 1.5, 2)
    assert weight(3, 2, params) == pytest.approx(4**3 * 4, rel=1e-14)


def test_weight_positive_smoothness_example():
    params = NormParams(0.5, 2.0, 1.5, 2)
    assert weight(1, 2, params) == pytest.approx(2**11 * 2**2 * 2**2, rel=1e-14)


def test_weight_p_zero():
    params = NormParams(0.7, 3.0, 2.0, 3)
    assert weight(0, 4, params) == pytest.approx(2 ** (8 * 0.7) * 2**4, rel=1e-14)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
def test_single_entry_closed_form(r):
    params = NormParams(0.5, r, 1.5, 2)
    for p, j, k in [(0, 3, 2), (2, 4, 0), (1, 5, 31)]:
        field = CoefficientField({(p, j, k): 1.0})
        expect = weight(p, j, params) ** 0.5 * 2 ** (-j / r)
        assert seq_norm_1d(field, params) == pytest.approx(expect, rel=1e-12)


def test_two_disjoint_entries_r2():
    params = NormParams(0.5, 2.0, 1.5, 2)
    a = CoefficientField({(0, 3, 1): 1.0})
    b = CoefficientField({(1, 3, 5): 2.0})
    both = CoefficientField({(0, 3, 1): 1.0, (1, 3, 5): 2.0})
    na, nb = seq_norm_1d(a, params), seq_norm_1d(b, params)
    assert seq_norm_1d(both, params) == pytest.approx(np.hypot(na, nb), rel=1e-12)


def test_homogeneity():
    rng = np.random.default_rng(7)
    params = NormParams(0.8, 1.5, 1.2, 3)
    for _ in range(100):
        entries = {
            (int(rng.integers(0, 4)), int(rng.integers(2, 6)), int(rng.integers(-2, 20))): float(
                rng.normal()
            )
            for _ in range(6)
        }
        field = CoefficientField(entries)
        alpha = float(rng.normal())
        assert seq_norm_1d(field.scaled(alpha), params) == pytest.approx(
            abs(alpha) * seq_norm_1d(field, params), rel=1e-12, abs=1e-300
        )


def test_monotone_in_smoothness():
    rng = np.random.default_rng(11)
    entries = {
        (int(rng.integers(0, 3)), int(rng.integers(1, 6)), int(rng.integers(0, 8))): float(
            rng.normal()
        )
        for _ in range(8)
    }
    field = CoefficientField(entries)
    values = [
        seq_norm_1d(field, NormParams(s, 2.0, 1.5, 2)) for s in np.linspace(0.0, 0.9, 10)
    ]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(values, values[1:]))


def test_clamped_entry_charges_edge_cell():
    params = NormParams(0.5, 2.0, 1.5, 2)
    field = CoefficientField({(0, 3, -2): 1.0})
    inner = CoefficientField({(0, 3, 0): 1.0})
    assert seq_norm_1d(field, params) == pytest.approx(
        seq_norm_1d(inner, params), rel=1e-14
    )


def test_empty_field():
    assert seq_norm_1d(CoefficientField(), NormParams(0.5, 2.0, 1.5, 2)) == 0.0


def test_field_accessors():
    field = CoefficientField({(0, 3, 1): 2.0})
    field[(1, 4, 2)] = 3.0
    assert field[(0, 3, 1)] == 2.0
    assert field[(9, 9, 9)] == 0.0
    assert field.p_max == 1 and field.j_max == 4
    assert len(field) == 2
