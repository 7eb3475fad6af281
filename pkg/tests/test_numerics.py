import numpy as np
import pytest
from scipy import integrate

from ldma.numerics import (
    SingularMatrixError,
    complex_normal,
    dirichlet_sinc,
    fresnel_c,
    fresnel_ratio,
    fresnel_s,
    hermitian_inverse,
    seeded_stream,
    sinc_integral_ratio,
    sine_integral,
)


def _trapezoid(f, x, n=1_000_001):
    t = np.linspace(0.0, x, n)
    return integrate.trapezoid(f(t), t)


def test_fresnel_at_zero():
    assert fresnel_c(0.0) == 0.0
    assert fresnel_s(0.0) == 0.0


@pytest.mark.parametrize("fn", [fresnel_c, fresnel_s])
def test_fresnel_tends_to_half(fn):
    assert abs(fn(50.0) - 0.5) < 1e-2


def test_fresnel_matches_trapezoid_oracle():
    c_ref = _trapezoid(lambda t: np.cos(np.pi * t**2 / 2), 1.0)
    s_ref = _trapezoid(lambda t: np.sin(np.pi * t**2 / 2), 1.0)
    assert abs(fresnel_c(1.0) - c_ref) < 1e-8
    assert abs(fresnel_s(1.0) - s_ref) < 1e-8


def test_fresnel_arrays_and_oddness():
    x = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(fresnel_c(-x), -fresnel_c(x))
    np.testing.assert_array_equal(fresnel_s(-x), -fresnel_s(x))


def test_fresnel_rejects_nan():
    with pytest.raises(ValueError):
        fresnel_c(np.nan)


def test_fresnel_ratio_series_joins_closed_form():
    # Both branches agree near the cutoff.
    b = np.array([0.99e-4, 1.01e-4])
    direct = (fresnel_c(b) + 1j * fresnel_s(b)) / b
    np.testing.assert_allclose(fresnel_ratio(b), direct, atol=1e-12)
    assert fresnel_ratio(0.0) == 1.0


def test_sine_integral_small_and_quadrature():
    assert sine_integral(0.0) == 0.0
    assert abs(sinc_integral_ratio(1e-6) - 1.0) < 1e-9
    ref, _ = integrate.quad(lambda t: np.sinc(t / np.pi), 0.0, 0.96, epsabs=1e-14)
    assert abs(sine_integral(0.96) - ref) < 1e-12
    assert abs(sinc_integral_ratio(0.96) - 0.95) < 0.002


def test_dirichlet_trivial_points():
    assert dirichlet_sinc(7, 0.0) == 1.0
    assert abs(dirichlet_sinc(8, 2 * np.pi / 8)) < 1e-15


def test_dirichlet_matches_direct_sum():
    n, a = 512, 0.01
    ref = abs(np.sum(np.exp(1j * np.arange(n) * a))) / n
    assert abs(abs(dirichlet_sinc(n, a)) - ref) < 1e-10


def test_dirichlet_rejects_bad_n():
    with pytest.raises(ValueError):
        dirichlet_sinc(0, 0.1)


def test_hermitian_inverse_examples():
    np.testing.assert_allclose(hermitian_inverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(hermitian_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_hermitian_inverse_residual():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    m = a @ a.conj().T + 0.5 * np.eye(8)
    inv = hermitian_inverse(m)
    np.testing.assert_allclose(m @ inv, np.eye(8), atol=1e-10)


def test_hermitian_inverse_singular():
    with pytest.raises(SingularMatrixError):
        hermitian_inverse(np.ones((2, 2)))


def test_seeded_streams():
    a = seeded_stream(11, 0).standard_normal(1000)
    b = seeded_stream(11, 0).standard_normal(1000)
    c = seeded_stream(11, 1).standard_normal(1000)
    np.testing.assert_array_equal(a, b)
    assert np.all(a != c)


def test_complex_normal_variance():
    z = complex_normal(seeded_stream(5, 0), 100_000)
    assert abs(np.var(z) - 1.0) < 0.02
