import numpy as np
import pytest

from pbfem import InputError, gauss_legendre, integrate_on_mesh, uniform_mesh
from pbfem.errors import EvaluationError


def test_midpoint_rule():
    rule = gauss_legendre(1)
    assert np.allclose(rule.nodes, [0.0])
    assert np.allclose(rule.weights, [2.0])
    assert rule.degree == 1


def test_two_point_rule():
    rule = gauss_legendre(2)
    assert np.allclose(np.sort(rule.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    assert np.allclose(rule.weights, [1.0, 1.0])


def test_quartic_with_three_points():
    rule = gauss_legendre(3)
    val = float(rule.weights @ rule.nodes**4)
    assert abs(val - 2.0 / 5.0) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
def test_exactness_random_polynomials(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        deg = 2 * n - 1
        coeffs = rng.standard_normal(deg + 1)
        rule = gauss_legendre(n)
        quad = float(rule.weights @ np.polyval(coeffs, rule.nodes))
        exact = float(np.diff(np.polyval(np.polyint(coeffs), [-1.0, 1.0]))[0])
        assert abs(quad - exact) <= 1e-12 * (1.0 + abs(exact))


@pytest.mark.parametrize("n", range(1, 33))
def test_weights_positive_symmetric(n):
    rule = gauss_legendre(n)
    assert np.all(rule.weights > 0)
    assert abs(np.sum(rule.weights) - 2.0) < 1e-13
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)
    assert np.allclose(rule.weights, rule.weights[::-1], atol=1e-14)


def test_integrate_constant():
    mesh = uniform_mesh(0.0, 4.0, 7)
    assert np.isclose(integrate_on_mesh(mesh, gauss_legendre(2), lambda t: np.ones_like(t)), 4.0)


def test_composite_consistency():
    coeffs = [0.3, -1.2, 0.5, 2.0]
    rule = gauss_legendre(3)
    whole = integrate_on_mesh(uniform_mesh(0.0, 1.0, 1), rule, lambda t: np.polyval(coeffs, t))
    split = integrate_on_mesh(uniform_mesh(0.0, 1.0, 2), rule, lambda t: np.polyval(coeffs, t))
    assert abs(whole - split) < 1e-14


def sawtooth(t, n):
    """Piecewise linear, -1/2 at mesh nodes rising to +1/2, crossing zero
    at every interval midpoint (mesh of n intervals on (0, 1))."""
    s = np.mod(t * n, 1.0)
    return s - 0.5


def test_sawtooth_midpoint_blindspot():
    mesh = uniform_mesh(0.0, 1.0, 8)
    coarse = integrate_on_mesh(mesh, gauss_legendre(1),
                               lambda t: np.sin(np.pi * sawtooth(t, 8)) ** 2)
    exact = integrate_on_mesh(mesh, gauss_legendre(20),
                              lambda t: np.sin(np.pi * sawtooth(t, 8)) ** 2)
    assert abs(coarse) < 1e-28
    assert abs(exact - 0.5) < 1e-6


def test_invalid_points():
    with pytest.raises(InputError):
        gauss_legendre(0)


def test_nonfinite_integrand_reports_node():
    mesh = uniform_mesh(0.0, 1.0, 2)
    with pytest.raises(EvaluationError) as err:
        integrate_on_mesh(mesh, gauss_legendre(1), lambda t: 1.0 / (t - t))
    assert err.value.node is not None
