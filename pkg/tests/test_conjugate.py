import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from wspace.conjugate import (ConjugateTable, SampledFunction, biconjugate, conjugate_1d,
                              conjugate_at, conjugate_nd, default_dual_axis, psi_star_table,
                              read_csv, write_csv)
from wspace.weights import builtin_family

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def _axis(n):
    return np.linspace(-3.0, 3.0, n)


def _psi_star_quadratic(alpha, c=4.0):
    # sup_t alpha t - c e^{2t}
    return 0.0 if alpha == 0 else alpha / 2 * math.log(alpha / (2 * c)) - alpha / 2


@st.composite
def samples_1d(draw, min_size=2, max_size=40):
    size = draw(st.integers(min_size, max_size))
    vals = draw(arrays(float, size, elements=finite))
    return SampledFunction((_axis(size),), vals)


@st.composite
def samples_2d(draw):
    a, b = draw(st.integers(2, 9)), draw(st.integers(2, 9))
    vals = draw(arrays(float, (a, b), elements=finite))
    return SampledFunction((_axis(a), np.linspace(-1, 2, b)), vals)


def _tol(g):
    return 1e-12 * max(1.0, float(np.max(np.abs(g.values[np.isfinite(g.values)]))) * 10)


@given(samples_1d(), arrays(float, 15, elements=st.floats(-50, 50)))
def test_1d_matches_brute_force(g, dual):
    dual = np.unique(dual)
    fast = conjugate_1d(g, dual).values
    np.testing.assert_allclose(fast, conjugate_at(g, dual), rtol=0, atol=_tol(g) * 50)


@given(samples_2d())
def test_nd_matches_brute_force(g):
    dual = (np.linspace(-20, 20, 7), np.linspace(-5, 9, 6))
    fast = conjugate_nd(g, dual)
    pts = fast.nodes()
    ref = conjugate_at(g, pts).reshape(fast.values.shape)
    np.testing.assert_allclose(fast.values, ref, rtol=0, atol=_tol(g) * 100)


@given(samples_1d())
def test_fenchel_young(g):
    gs = conjugate_1d(g)
    x, y = gs.axes[0], g.axes[0]
    gap = g.values[None, :] + gs.values[:, None] - np.multiply.outer(x, y)
    assert gap.min() >= -_tol(g) * 100


@given(samples_1d(), arrays(float, 40, elements=st.floats(0, 100)))
def test_order_reversal(g, bump):
    h = SampledFunction(g.axes, g.values + bump[: len(g.values)])
    dual = np.linspace(-30, 30, 61)
    assert np.all(conjugate_1d(h, dual).values <= conjugate_1d(g, dual).values)


@given(samples_1d(), st.sampled_from([0.5, 2.0, 4.0]))
def test_scaling(g, lam):
    base = np.linspace(-10, 10, 21)
    lhs = conjugate_1d(SampledFunction(g.axes, lam * g.values), lam * base).values
    rhs = lam * conjugate_1d(g, base).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=_tol(g) * 100 * lam)


@given(samples_1d())
def test_biconjugate_below_and_idempotent(g):
    once = biconjugate(g)
    assert np.all(once.values <= g.values + _tol(g) * 100)
    twice = biconjugate(once)
    np.testing.assert_allclose(twice.values, once.values, rtol=0, atol=_tol(g) * 100)


def test_biconjugate_of_convex_is_identity():
    y = np.linspace(-4, 4, 401)
    g = SampledFunction((y,), np.cosh(y))
    np.testing.assert_allclose(biconjugate(g).values[1:-1], g.values[1:-1], atol=1e-12)


def test_biconjugate_fills_nonconvex_dip():
    y = np.linspace(-2, 2, 5)
    g = SampledFunction((y,), np.array([4.0, 0.0, 3.0, 0.0, 4.0]))
    np.testing.assert_allclose(biconjugate(g).values, [4, 0, 0, 0, 4], atol=1e-14)


def test_quadratic_self_dual():
    y = np.linspace(-5, 5, 2001)
    g = SampledFunction((y,), y * y / 2)
    x = np.linspace(-5, 5, 2001)
    err = np.max(np.abs(conjugate_1d(g, x).values - x * x / 2))
    assert err <= 1e-5


def test_zero_on_interval_gives_abs():
    y = np.linspace(-5, 5, 11)
    g = SampledFunction((y,), np.zeros(11))
    gs = conjugate_1d(g)
    np.testing.assert_array_equal(gs.axes[0], y)
    np.testing.assert_array_equal(gs.values, 5 * np.abs(y))


def test_default_dual_axis_spans_slopes():
    y = np.linspace(0, 2, 3)
    g = SampledFunction((y,), y ** 2)
    np.testing.assert_array_equal(default_dual_axis(g), [1.0, 2.0, 3.0])


def test_separable_2d():
    a = np.linspace(-3, 3, 61)
    g = SampledFunction.from_callable(lambda p: p[..., 0] ** 2 / 2 + np.abs(p[..., 1]), (a, a))
    dual = (np.linspace(-2, 2, 9), np.linspace(-0.5, 0.5, 5))
    got = conjugate_nd(g, dual).values
    g1 = conjugate_1d(SampledFunction((a,), a ** 2 / 2), dual[0]).values
    g2 = conjugate_1d(SampledFunction((a,), np.abs(a)), dual[1]).values
    np.testing.assert_allclose(got, g1[:, None] + g2[None, :], atol=1e-12)


def test_infinite_values_are_excluded():
    y = np.linspace(-1, 1, 5)
    g = SampledFunction((y,), np.array([np.inf, 0.0, 0.0, 0.0, np.inf]))
    np.testing.assert_array_equal(conjugate_1d(g, [-1.0, 1.0]).values, [0.5, 0.5])


def test_sampled_function_validation():
    with pytest.raises(ValueError):
        SampledFunction((np.array([0.0, 0.0]),), np.zeros(2))
    with pytest.raises(ValueError):
        SampledFunction((np.array([0.0, 1.0]),), np.array([np.nan, 0.0]))
    with pytest.raises(ValueError):
        SampledFunction((np.array([0.0, 1.0]),), np.full(2, np.inf))


def test_psi_star_table_closed_form():
    table = psi_star_table(builtin_family("quadratic").psi(1), 30)
    assert table[0] == 0.0
    err = max(abs(table[a] - _psi_star_quadratic(a)) for a in range(1, 31))
    assert err <= 1e-8
    assert not table.inconclusive
    assert table.line_convexity_defect() >= -1e-9
    with pytest.raises(KeyError):
        table[31]


def test_psi_star_table_two_dimensional():
    table = psi_star_table(builtin_family("quadratic", n=2).psi(1), 8)
    assert table[(0, 0)] == 0.0
    for a in [(3, 5), (0, 4), (2, 0)]:
        want = _psi_star_quadratic(a[0]) + _psi_star_quadratic(a[1])
        assert table[a] == pytest.approx(want, abs=1e-8)
    assert table.line_convexity_defect() >= -1e-8
    assert len(table.indices(2)) == 6


def test_csv_round_trip(tmp_path):
    a = np.array([-0.1, 0.3, 1 / 3])
    g = SampledFunction((a, np.array([0.0, 2.0])), np.array([[1 / 7, np.inf], [0.1, 2.0], [3.0, 1e-300]]))
    path = tmp_path / "g.csv"
    write_csv(g, path, ["u", "v"])
    back, names = read_csv(path)
    assert names == ["u", "v"]
    for s, t in zip(back.axes, g.axes):
        np.testing.assert_array_equal(s, t)
    np.testing.assert_array_equal(back.values, g.values)


def test_csv_incomplete_grid_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("u,v,value\n0,0,1\n0,1,2\n1,0,3\n")
    with pytest.raises(ValueError):
        read_csv(path)
