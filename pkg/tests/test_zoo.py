import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wspace.fourier import fourier_transform
from wspace.zoo import (NON_MEMBERS, THEOREM_MEMBERS, RationalProbe, cauchy_riemann_probe,
                        constant, exact_fourier, exponential, from_id, gaussian, hermite,
                        moment, zero)

ALL_IDS = THEOREM_MEMBERS + NON_MEMBERS + ("gaussian:a=1/32", "shifted:a=1,s=1/2",
                                          "modulated:a=1,w=2", "anisotropic:a1=1,a2=2",
                                          "exponential:c=-1", "gaussian:a=1,n=2")


def test_gaussian_values():
    f = gaussian(1.0)
    assert f.evaluate(0.0) == 1.0
    assert f.evaluate(1j) == pytest.approx(math.e, rel=1e-15)


def test_hermite_is_physicists_polynomial():
    f = hermite(2, 1.0)
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(f.evaluate(x), (4 * x * x - 2) * np.exp(-x * x), atol=1e-15)


def test_second_derivative_of_gaussian_at_zero():
    assert gaussian(1.0).derivative(2, 0.0) == pytest.approx(-2.0, abs=1e-15)


@pytest.mark.parametrize("fid", THEOREM_MEMBERS + ("shifted:a=1,s=1/2", "modulated:a=1,w=2"))
@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_match_finite_differences(fid, order):
    f = from_id(fid)
    x = np.linspace(-1.5, 1.5, 7)
    h = 1e-3
    lower = np.array([f.derivative(order - 1, xi + h) - f.derivative(order - 1, xi - h) for xi in x])
    fd = lower / (2 * h)
    exact = np.array([f.derivative(order, xi) for xi in x])
    np.testing.assert_allclose(exact, fd, atol=1e-5 * max(1.0, np.max(np.abs(exact))))


def test_mixed_derivative_anisotropic():
    f = from_id("anisotropic:a1=1,a2=2")
    x = np.array([0.3, -0.4])
    # d/dx1 d/dx2 e^{-x1^2 - 2 x2^2} = (-2 x1)(-4 x2) e^{...}
    want = (-2 * x[0]) * (-4 * x[1]) * math.exp(-x[0] ** 2 - 2 * x[1] ** 2)
    assert f.derivative((1, 1), x).real == pytest.approx(want, rel=1e-14)


def test_log_abs_agrees_with_direct_where_safe():
    rng = np.random.default_rng(3)
    z = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-3, 3, 200)
    for fid in THEOREM_MEMBERS:
        f = from_id(fid)
        np.testing.assert_allclose(f.log_abs(z), np.log(np.abs(f.evaluate(z))), rtol=1e-10)


def test_log_abs_does_not_overflow():
    assert gaussian(1.0).log_abs(40j) == pytest.approx(1600.0, rel=1e-15)


def test_log_abs_derivative_grid_matches_pointwise():
    f = hermite(2, 1.0)
    x = np.linspace(-2, 2, 5)
    grid = f.log_abs_derivative_grid([(0,), (3,)], [x])
    for j, a in enumerate((0, 3)):
        with np.errstate(divide="ignore"):
            direct = np.log(np.abs([f.derivative(a, xi) for xi in x]))
        np.testing.assert_allclose(grid[j], direct, rtol=1e-12)


def test_zero_function():
    f = zero()
    assert f.is_zero and f.evaluate(1.0) == 0
    assert np.all(f.log_abs_derivative_grid([(0,), (1,)], [np.zeros(3)]) == -np.inf)
    assert exact_fourier(f).is_zero


def test_non_members_flagged():
    assert not constant(1.0).member and not constant(1.0).decaying
    assert not exponential(-1.0).decaying
    assert exact_fourier(constant(1.0)) is None


def test_exact_fourier_values():
    assert exact_fourier(gaussian(1.0)).evaluate(0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert exact_fourier(moment(1, 1.0)).evaluate(0.0) == 0
    # sqrt(pi) e^{-1/4 * 4}
    assert exact_fourier(gaussian(1.0)).evaluate(2.0).real == pytest.approx(
        math.sqrt(math.pi) * math.exp(-1.0), rel=1e-15)


@pytest.mark.parametrize("fid", THEOREM_MEMBERS + ("shifted:a=1,s=1/2", "modulated:a=1,w=2",
                                                   "anisotropic:a1=1,a2=2"))
def test_transform_of_transform_reflects(fid):
    f = from_id(fid)
    g = exact_fourier(f)
    axis = np.linspace(-1.5, 1.5, 7 if f.n == 1 else 4)
    x = np.stack([m.ravel() for m in np.meshgrid(*[axis] * f.n, indexing="ij")], axis=-1)
    back, _ = fourier_transform(g, x)
    np.testing.assert_allclose(back / (2 * math.pi) ** f.n, f.evaluate(-x), atol=1e-6)


@pytest.mark.parametrize("fid", ALL_IDS)
def test_cauchy_riemann_for_entire_members(fid):
    f = from_id(fid)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-2, 2, (100, f.n)) + 1j * rng.uniform(-2, 2, (100, f.n))
    assert np.max(cauchy_riemann_probe(f, pts)) < 1e-6


def test_cauchy_riemann_flags_rational_probe_near_poles():
    pts = np.array([1j + 1e-5, -1j + 1e-5j, 0.5 + 0.5j])
    res = cauchy_riemann_probe(RationalProbe(), pts)
    assert res[0] > 1e-6 and res[1] > 1e-6
    assert res[2] < 1e-6


@given(st.sampled_from(THEOREM_MEMBERS), st.complex_numbers(max_magnitude=10), st.floats(-3, 3))
def test_linearity_of_algebra(fid, s, x):
    f = from_id(fid)
    g = f + gaussian(2.0)
    assert g.evaluate(x) == pytest.approx(f.evaluate(x) + gaussian(2.0).evaluate(x), abs=1e-14)
    assert (s * f).evaluate(x) == pytest.approx(s * f.evaluate(x), abs=1e-12)


def test_from_id_parsing():
    assert from_id("gaussian:a=1/32").id == "gaussian:a=0.03125"
    assert from_id("gaussian:a=1,n=2").n == 2
    for bad in ("nosuch:a=1", "gaussian:b=1", "gaussian:a"):
        with pytest.raises(ValueError):
            from_id(bad)


def test_order_cap_enforced():
    with pytest.raises(ValueError):
        gaussian(1.0).derivative(61, 0.0)
