"""Tests for analysis and synthesis against the interval system."""

import numpy as np
import pytest

from quarklets.algebra import SplineParams, linear_combination
from quarklets.errors import (
    IllConditionedError,
    InvalidParameterError,
    LevelError,
)
from quarklets.expansion import (
    TruncationSpec,
    analyze_p0,
    frame_indices,
    gram_matrix,
    quarklet_norm_estimate,
    sample_matrix,
    synthesize,
    synthesize_pp,
    _solve_gram,
)
from quarklets.interval import BoundaryCondition, IntervalSystem
from quarklets.seqnorm import CoefficientField, NormParams, seq_norm_1d, weight


@pytest.fixture(scope="module")
def sys22():
    return IntervalSystem(SplineParams(2, 2))


def test_frame_indices_order_and_count(sys22):
    j0 = sys22.params.j0
    idx = frame_indices(sys22, TruncationSpec(j0, P=1))
    count = 2 * (len(sys22.nabla(j0 - 1)) + len(sys22.nabla(j0)))
    assert len(idx) == count
    assert idx[0] == (0, j0 - 1, -1)
    assert idx[1] == (1, j0 - 1, -1)
    assert [i for i in idx if i.j == j0][0].k == 0


def test_frame_indices_level_error(sys22):
    with pytest.raises(LevelError):
        frame_indices(sys22, TruncationSpec(sys22.params.j0 - 2))


def test_gram_diagonal_positive_and_symmetric(sys22):
    G = gram_matrix(sys22, TruncationSpec(sys22.params.j0))
    assert np.all(np.diag(G) > 0)
    assert np.max(np.abs(G - G.T)) == 0.0


def test_gram_disjoint_supports_exact_zero(sys22):
    j0 = sys22.params.j0
    spec = TruncationSpec(j0 + 1)
    idx = frame_indices(sys22, spec)
    G = gram_matrix(sys22, spec)
    a = idx.index((0, j0 + 1, 2))
    b = idx.index((0, j0 + 1, 2 ** (j0 + 1) - 3))
    assert G[a, b] == 0.0


def test_gram_condition_bounded():
    for m, mt, cap in ((2, 2, 20.0), (3, 3, 400.0)):
        system = IntervalSystem(SplineParams(m, mt))
        for J in range(system.params.j0, system.params.j0 + 3):
            cond = np.linalg.cond(gram_matrix(system, TruncationSpec(J)))
            assert cond <= cap


def test_gram_cache_reuse(sys22):
    spec = TruncationSpec(sys22.params.j0)
    assert gram_matrix(sys22, spec) is gram_matrix(sys22, spec)


def test_analyze_requires_p0(sys22):
    with pytest.raises(InvalidParameterError, match="p=0"):
        analyze_p0(sys22, lambda x: x, TruncationSpec(sys22.params.j0, P=1))


def test_analyze_reproduces_basis_element(sys22):
    j0 = sys22.params.j0
    target = sys22.element((0, j0, 2))
    field = analyze_p0(sys22, target, TruncationSpec(j0 + 1))
    for (p, j, k), v in field.items():
        expect = 1.0 if (p, j, k) == (0, j0, 2) else 0.0
        assert abs(v - expect) <= 1e-9


def test_analyze_linearity(sys22):
    j0 = sys22.params.j0
    a = sys22.element((0, j0 - 1, 1))
    b = sys22.element((0, j0 + 1, 5))
    f = lambda x: 2.0 * a(x) - 3.0 * b(x)
    field = analyze_p0(sys22, f, TruncationSpec(j0 + 1))
    assert field[(0, j0 - 1, 1)] == pytest.approx(2.0, abs=1e-8)
    assert field[(0, j0 + 1, 5)] == pytest.approx(-3.0, abs=1e-8)
    others = [v for key, v in field.items() if key not in ((0, j0 - 1, 1), (0, j0 + 1, 5))]
    assert max(abs(v) for v in others) <= 1e-8


def test_roundtrip_in_span(sys22):
    j0 = sys22.params.j0
    rng = np.random.default_rng(3)
    idx = frame_indices(sys22, TruncationSpec(j0))
    coeffs = CoefficientField({i: rng.normal() for i in idx})
    f = synthesize_pp(sys22, coeffs)
    field = analyze_p0(sys22, f, TruncationSpec(j0))
    xs = np.linspace(0, 1, 700)
    assert np.max(np.abs(synthesize(sys22, field, xs) - f(xs))) <= 1e-8


def test_quadratic_reproduced_exactly_m3():
    system = IntervalSystem(SplineParams(3, 3), BoundaryCondition(1, 1))
    j0 = system.params.j0
    f = lambda x: x * (1.0 - x)
    prev = None
    for J in range(j0, j0 + 3):
        field = analyze_p0(system, f, TruncationSpec(J))
        g = synthesize_pp(system, field)
        xs = np.linspace(0, 1, 500)
        res = np.max(np.abs(g(xs) - f(xs)))
        assert res <= 1e-10
        if prev is not None:
            assert res <= prev + 1e-12
        prev = res


def test_out_of_span_residual_decreases():
    system = IntervalSystem(SplineParams(2, 2))
    j0 = system.params.j0
    f = lambda x: np.sin(np.pi * x)
    xs = np.linspace(0, 1, 3000)
    prev = None
    for J in range(j0, j0 + 3):
        g = synthesize_pp(system, analyze_p0(system, f, TruncationSpec(J)))
        res = float(np.sqrt(np.mean((g(xs) - f(xs)) ** 2)))
        if prev is not None:
            assert res < prev
        prev = res


def test_boundary_conditions_respected_by_synthesis():
    system = IntervalSystem(SplineParams(3, 3), BoundaryCondition(1, 1))
    j0 = system.params.j0
    field = analyze_p0(system, lambda x: np.sin(np.pi * x), TruncationSpec(j0 + 1))
    assert synthesize(system, field, np.array([0.0]))[0] == 0.0
    g = synthesize_pp(system, field)
    from quarklets.interval import left_limit

    assert abs(left_limit(g, 1)) <= 1e-12


def test_synthesize_empty(sys22):
    xs = np.linspace(0, 1, 11)
    assert np.all(synthesize(sys22, CoefficientField(), xs) == 0.0)
    assert synthesize_pp(sys22, CoefficientField()) is None


def test_solve_gram_rejects_singular():
    with pytest.raises(IllConditionedError, match="condition"):
        _solve_gram(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))


def test_sample_matrix_cell_structure(sys22):
    spec = TruncationSpec(sys22.params.j0)
    nodes, wts, E = sample_matrix(sys22, spec)
    q = 2 * (sys22.params.m + spec.P) + 8
    assert len(nodes) == 2 ** (spec.J + 1) * q
    assert wts.sum() == pytest.approx(1.0, rel=1e-13)
    assert E.shape == (len(frame_indices(sys22, spec)), len(nodes))


def test_norm_estimate_single_element(sys22):
    j0 = sys22.params.j0
    params = NormParams(0.5, 2.0, 1.5, 2)
    target = sys22.element((0, j0, 3))
    est = quarklet_norm_estimate(sys22, target, TruncationSpec(j0 + 1), params)
    expect = weight(0, j0, params) ** 0.5 * 2 ** (-j0 / 2.0)
    assert est == pytest.approx(expect, rel=1e-7)


def test_norm_estimate_zero(sys22):
    params = NormParams(0.5, 2.0, 1.5, 2)
    zero = lambda x: np.zeros_like(x)
    est = quarklet_norm_estimate(sys22, zero, TruncationSpec(sys22.params.j0), params)
    assert est <= 1e-12


def test_norm_estimate_smoothness_gate(sys22):
    with pytest.raises(InvalidParameterError, match="0 < s < m - 1"):
        quarklet_norm_estimate(
            sys22,
            lambda x: x,
            TruncationSpec(sys22.params.j0),
            NormParams(1.5, 2.0, 1.5, 2),
        )


def test_norm_estimate_self_convergence(sys22):
    params = NormParams(0.5, 2.0, 1.5, 2)
    f = lambda x: np.sin(np.pi * x)
    j0 = sys22.params.j0
    vals = [
        quarklet_norm_estimate(sys22, f, TruncationSpec(J), params)
        for J in (j0 + 2, j0 + 3)
    ]
    assert abs(vals[1] - vals[0]) <= 0.10 * vals[1]
