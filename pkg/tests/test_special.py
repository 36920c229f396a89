import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdcfie.errors import InvalidStencil
from tdcfie.special import (
    gauss_legendre_rule,
    lagrange_integral_weights,
    lagrange_value_weights,
    legendre_pair,
    legendre_pair_array,
)

CLOSED = [
    (lambda z: 1.0, lambda z: 0.0),
    (lambda z: z, lambda z: 1.0),
    (lambda z: (3 * z * z - 1) / 2, lambda z: 3 * z),
    (lambda z: (5 * z**3 - 3 * z) / 2, lambda z: (15 * z * z - 3) / 2),
    (lambda z: (35 * z**4 - 30 * z * z + 3) / 8, lambda z: (140 * z**3 - 60 * z) / 8),
]


def test_legendre_examples():
    assert legendre_pair(0, 0.37) == (1.0, 0.0)
    p, dp = legendre_pair(3, 1.0)
    assert p == 1.0 and dp == pytest.approx(6.0)
    assert legendre_pair(2, 0.0) == pytest.approx((-0.5, 0.0))


@pytest.mark.parametrize("n", range(8))
def test_legendre_endpoint_normalization(n):
    assert legendre_pair(n, 1.0)[0] == 1.0
    assert legendre_pair(n, -1.0)[0] == (-1.0) ** n
    # P_n'(1) = n(n+1)/2
    assert legendre_pair(n, 1.0)[1] == pytest.approx(n * (n + 1) / 2, abs=1e-12)


def test_legendre_matches_closed_forms():
    rng = np.random.default_rng(0)
    for z in rng.uniform(-1, 1, 100):
        for n, (p, dp) in enumerate(CLOSED):
            got = legendre_pair(n, z)
            assert got[0] == pytest.approx(p(z), abs=1e-13)
            assert got[1] == pytest.approx(dp(z), abs=1e-13)


@given(st.integers(0, 12), st.floats(-0.99, 0.99))
def test_legendre_derivative_matches_finite_difference(n, z):
    h = 1e-5
    fd = (legendre_pair(n, z + h)[0] - legendre_pair(n, z - h)[0]) / (2 * h)
    assert legendre_pair(n, z)[1] == pytest.approx(fd, abs=1e-6)


def test_legendre_array_agrees_with_scalar():
    z = np.linspace(-1, 1, 41)
    p, dp = legendre_pair_array(6, z)
    for zi, pi, dpi in zip(z, p, dp):
        assert (pi, dpi) == pytest.approx(legendre_pair(6, zi), abs=1e-14)


def test_gauss_examples():
    r1 = gauss_legendre_rule(1)
    assert list(r1.nodes) == [0.0] and list(r1.weights) == [2.0]
    assert gauss_legendre_rule(2).integrate(lambda x: x * x) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8, 13, 20, 32])
def test_gauss_rule_invariants(m):
    r = gauss_legendre_rule(m)
    assert len(r) == m
    assert abs(np.sum(r.weights) - 2.0) <= 1e-14
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(r.weights > 0)
    assert np.all(np.abs(r.nodes) < 1)
    for deg in range(2 * m):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        got = float(r.weights @ r.nodes**deg)
        assert got == pytest.approx(exact, rel=1e-13, abs=1e-14)


def test_gauss_mapped_interval():
    r = gauss_legendre_rule(12)
    assert r.integrate(np.exp, 0.0, 2.0) == pytest.approx(math.exp(2) - 1, rel=1e-14)


def test_value_weights_examples():
    nodes = np.arange(6.0)
    assert np.array_equal(lagrange_value_weights(nodes, 2.0), [0, 0, 1, 0, 0, 0])
    assert lagrange_value_weights(nodes, 2.5) @ nodes**5 == pytest.approx(97.65625, rel=1e-14)


@settings(max_examples=50)
@given(
    st.lists(st.floats(-3, 3), min_size=6, max_size=6),
    st.floats(-1.0, 6.0),
)
def test_value_weights_reproduce_quintics(coef, t):
    nodes = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    w = lagrange_value_weights(nodes, t)
    poly = np.polynomial.Polynomial(coef)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    scale = max(1.0, float(np.max(np.abs(poly(np.linspace(-1, 6, 50))))))
    assert abs(w @ poly(nodes) - poly(t)) <= 1e-12 * scale


def test_integral_weights_examples():
    nodes = np.arange(6.0)
    assert lagrange_integral_weights(nodes, 0.0, 1.0) @ nodes**5 == pytest.approx(1 / 6, rel=1e-13)
    assert np.all(lagrange_integral_weights(nodes, 0.7, 0.7) == 0)
    assert lagrange_integral_weights(nodes, -0.3, 2.2).sum() == pytest.approx(2.5, rel=1e-14)


@pytest.mark.parametrize("size", [2, 4, 6])
def test_integral_weights_exact_for_stencil_degree(size):
    nodes = np.linspace(-1.0, 1.5, size)
    a, b = -0.4, 2.0
    for deg in range(size):
        exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
        assert lagrange_integral_weights(nodes, a, b) @ nodes**deg == pytest.approx(exact, rel=1e-12, abs=1e-13)


def test_duplicate_nodes_rejected():
    with pytest.raises(InvalidStencil):
        lagrange_value_weights([0, 1, 1, 2, 3, 4], 0.5)
    with pytest.raises(InvalidStencil):
        lagrange_integral_weights([0, 0], 0, 1)
