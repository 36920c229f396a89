"""Reference solutions used to check the marching solver.

``series_solution_beta1`` is exact for mode 0 with ``beta = 1``; there the
equation reduces to the pure delay recurrence

    a_plus f(t) + a_minus f(t - 2) = g(t).

``dense_volterra_solve`` is a deliberately different discretization: an
implicit product-trapezoid rule on a grid that divides the delay exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError, HistoryError, SingularStep
from .history import HistoryBuffer, grid_count
from .mode import BoundarySignal, ModeParams, apply_operator, delay_coefficients, eval_signal, kernel_q_array
from .special import gauss_legendre_rule

__all__ = ["series_solution_beta1", "dense_volterra_solve", "dense_volterra_extrapolated", "residual_norm"]


def series_solution_beta1(alpha: float, sig: BoundarySignal, t):
    """``f(t) = 2/(1+alpha) * sum_j (-lam)^j g(t - 2j)`` with ``lam = (1-alpha)/(1+alpha)``.

    Only terms with ``t - 2j > 0`` contribute, so the sum is finite.

    Parameters
    ----------
    alpha : float
        In ``(0, 1]``.
    sig : BoundarySignal
        Causal data.
    t : float or array_like
        Evaluation time(s).
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError("series solution needs alpha in (0, 1]")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam = (1.0 - alpha) / (1.0 + alpha)
    out = np.zeros_like(t)
    jmax = int(math.ceil(max(0.0, float(t.max())) / 2.0)) if t.size else 0
    for j in range(jmax + 1):
        shifted = t - 2.0 * j
        live = shifted > 0
        if not np.any(live):
            break
        out[live] += (-lam) ** j * eval_signal(sig, shifted[live])
        if lam == 0.0:
            break
    out *= 2.0 / (1.0 + alpha)
    return float(out[0]) if scalar else out


def _delay_steps(fine_dt) -> tuple[int, float]:
    x = Fraction(fine_dt) if isinstance(fine_dt, (str, Fraction, int)) else None
    if x is not None:
        ratio = Fraction(2) / x
        if ratio.denominator != 1:
            raise ConfigError(f"fine_dt={fine_dt} does not divide the delay 2")
        return int(ratio), float(x)
    h = float(fine_dt)
    if not h > 0:
        raise ConfigError("fine_dt must be positive")
    n = round(2.0 / h)
    if n < 1 or abs(n * h - 2.0) > 1e-12:
        raise ConfigError(f"fine_dt={fine_dt} does not divide the delay 2")
    return int(n), 2.0 / n


def _trapezoid_weights(p: ModeParams, n_delay: int) -> np.ndarray:
    """``w[m] = int_0^2 Q_n(s) hat_m(s) ds`` for the hat functions at ``s = m h``."""
    h = 2.0 / n_delay
    rule = gauss_legendre_rule(p.n + 2)
    m = np.arange(n_delay)
    s = (m[:, None] + 0.5 * (rule.nodes + 1.0)) * h
    x = 0.5 * (rule.nodes + 1.0)
    q = kernel_q_array(p, s.ravel()).reshape(s.shape) * (0.5 * h * rule.weights)
    w = np.zeros(n_delay + 1)
    w[:-1] += q @ (1.0 - x)
    w[1:] += q @ x
    return w


def dense_volterra_solve(p: ModeParams, sig: BoundarySignal, fine_dt, t_end: float) -> HistoryBuffer:
    """Implicit product-trapezoid solution on the grid ``fine_dt = 2/N``.

    Second-order accurate.  Raises :class:`SingularStep` when the newest
    value drops out of the discrete equation.
    """
    n_delay, h = _delay_steps(fine_dt)
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    steps = grid_count(t_end, h)
    c = delay_coefficients(p)
    w = _trapezoid_weights(p, n_delay)
    denom = c.a_plus - w[0]
    if abs(denom) <= 1e-14 * max(1.0, abs(c.a_plus)):
        raise SingularStep(f"implicit step is singular: a_plus - w0 = {denom:.3g}")
    coef = w[1:].copy()
    coef[-1] -= c.a_minus
    rhs = np.ascontiguousarray(eval_signal(sig, np.arange(steps + 1) * h), dtype=float)
    f = np.zeros(steps + 1)
    kernels.march_implicit(f, rhs, coef, float(denom), 0, steps + 1)
    return HistoryBuffer(h, f, order=2)


def dense_volterra_extrapolated(p: ModeParams, sig: BoundarySignal, fine_dt, t_end: float) -> HistoryBuffer:
    """Richardson combination ``(4 f_{h/2} - f_h) / 3`` on the ``fine_dt`` grid."""
    n_delay, _ = _delay_steps(fine_dt)
    coarse = dense_volterra_solve(p, sig, Fraction(2, n_delay), t_end)
    fine = dense_volterra_solve(p, sig, Fraction(1, n_delay), t_end)
    m = len(coarse)
    vals = (4.0 * fine.values[: 2 * m - 1 : 2] - coarse.values) / 3.0
    return HistoryBuffer(coarse.dt, vals, order=6)


def residual_norm(p: ModeParams, f: HistoryBuffer, sig: BoundarySignal, subpanels: int = 4) -> float:
    """``max |apply_operator(f)(t) - g(t)|`` over grid points ``t`` in ``[2, t_end]``.

    Each cell of the operator integral is split into ``subpanels`` Gauss
    panels so the quadrature is finer than the solver's grid.
    """
    if subpanels < 1:
        raise ConfigError("subpanels must be >= 1")
    first = int(math.ceil(2.0 / f.dt - 1e-9))
    if f.last_index < max(first, f.start_index):
        raise HistoryError(f"series ends at t={f.last_time:.6g}, before t=2")
    idx = np.arange(max(first, f.start_index), f.last_index + 1)
    t = idx * f.dt
    r = apply_operator(p, f, t, subpanels=subpanels) - eval_signal(sig, t)
    return float(np.max(np.abs(r)))
