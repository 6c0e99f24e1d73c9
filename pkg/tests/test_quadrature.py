import numpy as np

from radial_nls.quadrature import adaptive_simpson, simpson_integral


def test_vectorised_intervals():
    a = np.array([0.0, 1.0, -2.0])
    b = np.array([1.0, 3.0, 0.5])
    got = adaptive_simpson(lambda x, i: np.exp(x), a, b, tol=1e-13)
    assert np.allclose(got, np.exp(b) - np.exp(a), rtol=0, atol=1e-12)


def test_reversed_interval_changes_sign():
    got = adaptive_simpson(lambda x, i: np.sin(x), np.array([np.pi]), np.array([0.0]))
    assert abs(got[0] + 2.0) < 1e-11


def test_peaked_integrand():
    val = simpson_integral(lambda x: 1.0 / (1e-4 + x**2), -1.0, 1.0, tol=1e-10)
    exact = 2 * np.arctan(1 / 1e-2) / 1e-2
    assert abs(val - exact) / exact < 1e-9
