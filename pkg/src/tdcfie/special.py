"""Legendre polynomials, Gauss-Legendre rules and Lagrange stencil weights.

Everything here is small, pure and deterministic.  The Lagrange routines
accept any number of distinct nodes; the time stepper uses 2, 4 or 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidStencil

__all__ = [
    "QuadratureRule",
    "legendre_pair",
    "legendre_pair_array",
    "gauss_legendre_rule",
    "lagrange_value_weights",
    "lagrange_integral_weights",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely mapped to [a, b]."""
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights

    def integrate(self, func, a: float = -1.0, b: float = 1.0):
        x, w = self.mapped(a, b)
        return np.dot(w, func(x))


def legendre_pair(n: int, z: float) -> tuple[float, float]:
    """Return ``(P_n(z), P_n'(z))``.

    Values come from the three-term recurrence and the derivative from
    ``P'_{k+1} = P'_{k-1} + (2k+1) P_k``, which stays accurate at z = +-1
    (no division by 1 - z**2).
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    p_prev, p = 1.0, float(z)
    d_prev, d = 0.0, 1.0
    if n == 0:
        return 1.0, 0.0
    for k in range(1, n):
        p_next = ((2 * k + 1) * z * p - k * p_prev) / (k + 1)
        d_next = d_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d


def legendre_pair_array(n: int, z) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`legendre_pair`."""
    z = np.asarray(z, dtype=float)
    if n == 0:
        return np.ones_like(z), np.zeros_like(z)
    p_prev, p = np.ones_like(z), z.copy()
    d_prev, d = np.zeros_like(z), np.ones_like(z)
    for k in range(1, n):
        p_next = ((2 * k + 1) * z * p - k * p_prev) / (k + 1)
        d_next = d_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d


@lru_cache(maxsize=128)
def _gauss_legendre(m: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    nodes = np.empty(m)
    weights = np.empty(m)
    for i in range(m):
        # Chebyshev-like initial guess, ascending order
        x = -math.cos(math.pi * (i + 0.75) / (m + 0.5))
        for _ in range(100):
            p, dp = legendre_pair(m, x)
            dx = p / dp
            x -= dx
            if abs(dx) <= 1e-15:
                break
        p, dp = legendre_pair(m, x)
        nodes[i] = x
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp)
    if m % 2 == 1:
        nodes[m // 2] = 0.0
    # enforce exact antisymmetry of the nodes / symmetry of the weights
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return tuple(nodes), tuple(weights)


def gauss_legendre_rule(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [-1, 1], exact for degree <= 2m - 1."""
    if m < 1:
        raise ValueError("a quadrature rule needs at least one node")
    nodes, weights = _gauss_legendre(int(m))
    x = np.array(nodes)
    w = np.array(weights)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(x, w)


def _check_nodes(nodes) -> np.ndarray:
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise InvalidStencil("stencil must be a non-empty 1-d sequence")
    diff = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(diff, np.inf)
    if np.any(diff == 0.0):
        raise InvalidStencil(f"stencil nodes must be distinct, got {x.tolist()}")
    return x


def _value_weights(x: np.ndarray, t) -> np.ndarray:
    """Cardinal polynomials of nodes ``x`` at points ``t`` (shape t.shape + (len(x),))."""
    t = np.asarray(t, dtype=float)
    m = len(x)
    out = np.ones(t.shape + (m,))
    for i in range(m):
        for j in range(m):
            if j != i:
                out[..., i] *= (t - x[j]) / (x[i] - x[j])
    return out


def lagrange_value_weights(nodes, t: float) -> np.ndarray:
    """Weights ``w`` with ``w @ f(nodes)`` equal to the interpolant at ``t``."""
    x = _check_nodes(nodes)
    w = _value_weights(x, float(t))
    hit = np.flatnonzero(x == t)
    if hit.size:
        w = np.zeros(len(x))
        w[hit[0]] = 1.0
    return w


def lagrange_integral_weights(nodes, a: float, b: float) -> np.ndarray:
    """Weights ``v`` with ``v @ f(nodes)`` equal to the integral of the interpolant over [a, b]."""
    x = _check_nodes(nodes)
    if a == b:
        return np.zeros(len(x))
    # cardinal polynomials have degree len(x) - 1
    rule = gauss_legendre_rule(max(1, (len(x) + 1) // 2))
    tq, wq = rule.mapped(a, b)
    return wq @ _value_weights(x, tq)
