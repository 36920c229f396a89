"""Adams-Bashforth-Moulton marching for the mode equation.

Both solvers advance the equation in correction form, i.e. the difference
of the equation at ``t + dt`` and at ``t``:

    a_plus (f(t+dt) - f(t)) = g(t+dt) - g(t) - [O(t+dt) - O(t)],
    O(t) = a_minus f(t-2) - int_0^2 Q_n(s) f(t-s) ds.

Past values come from the piecewise degree-5 history interpolant; the
newest cell ``(t, t+dt]`` is handled by an Adams-Bashforth predictor
(stencil ``t - k dt``, k = 0..5) followed by an Adams-Moulton corrector
(stencil ``t + dt - k dt``, k = 0..5).  Orders 2 and 4 use 2- and 4-node
stencils.  During the first steps the stencils grow with the available
history.

:func:`solve_mode0_correction_form` is a literal, step-by-step rendering of
the normalized mode-0 recursion; :func:`solve_mode` handles any ``n`` and
hands the steady-state part of the march to the compiled kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConfigError
from .history import HistoryBuffer, cardinal_weights, grid_count, stencil_back, stencil_lower
from .mode import BoundarySignal, ModeParams, _pieces, delay_coefficients, eval_signal, kernel_q_array
from .special import gauss_legendre_rule, lagrange_integral_weights

__all__ = [
    "SolverConfig",
    "ModeStepper",
    "step",
    "solve_mode",
    "solve_mode0_correction_form",
    "interpolate_history",
]

from .history import interpolate_history  # noqa: E402  (re-export)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    order: int = 6
    corrector_iterations: int = 1
    aligned: bool = False

    def __post_init__(self):
        dt = float(Fraction(self.dt)) if isinstance(self.dt, (str, Fraction)) else float(self.dt)
        if not (math.isfinite(dt) and dt > 0):
            raise ConfigError(f"time step must be positive, got {self.dt!r}")
        if self.aligned:
            dt = 2.0 / max(1, round(2.0 / dt))
        object.__setattr__(self, "dt", dt)
        if self.order not in (2, 4, 6):
            raise ConfigError(f"order must be 2, 4 or 6, got {self.order!r}")
        if not dt < 2.0:
            raise ConfigError("time step must be smaller than the delay 2")
        if 2.0 / dt < self.order + 2:
            raise ConfigError(f"order {self.order} needs dt <= {2.0 / (self.order + 2):.6g}")
        if not self.t_end >= dt:
            raise ConfigError("t_end must be at least one time step")
        if int(self.corrector_iterations) < 1:
            raise ConfigError("corrector_iterations must be >= 1")

    @property
    def steps(self) -> int:
        return grid_count(self.t_end, self.dt)


# ---------------------------------------------------------------------------
# weight construction


@lru_cache(maxsize=64)
def _lag_table(p: ModeParams, dt: float, order: int) -> np.ndarray:
    """Weights of full, unclamped cells, indexed by lag.

    Row ``L`` holds ``-int Q(s) l_k(u) dt du`` over the cell ``[e-L, e-L+1]``
    for the stencil nodes ``e - L - back + k``.
    """
    rule = gauss_legendre_rule(p.n + 3)
    lags = np.arange(int(math.ceil(2.0 / dt)) + 2)
    x = 0.5 + 0.5 * rule.nodes  # position inside the cell
    s = (lags[:, None] - x) * dt
    wq = 0.5 * rule.weights * dt * kernel_q_array(p, s)
    cw = cardinal_weights(order, x + stencil_back(order))
    table = -wq @ cw
    table.flags.writeable = False
    return table


def _history_functional(p: ModeParams, dt: float, e: int, last: int, skip_cells: int, order: int):
    """Weights for ``a_minus f(E-2) - int_{skip dt}^{2} Q(s) f(E-s) ds``, ``E = e dt``.

    Only samples ``0..last`` are used.  Returns ``(first, w)`` with ``w[k]``
    multiplying sample ``first + k``.
    """
    c = delay_coefficients(p)
    D = 2.0 / dt
    lo, hi, cell = _pieces(e - skip_cells, D - skip_cells)
    acc = np.zeros(last + 1)
    if len(lo):
        back = stencil_back(order)
        full = (lo == cell) & (hi == cell + 1)
        plain = full & (cell - back >= 0) & (cell - back + order - 1 <= last) & (last + 1 >= order)
        if np.any(plain):
            table = _lag_table(p, dt, order)
            lag = e - cell[plain]
            idx = (cell[plain] - back)[:, None] + np.arange(order)
            acc += np.bincount(idx.ravel(), weights=table[lag].ravel(), minlength=last + 1)
        odd = ~plain
        if np.any(odd):
            rule = gauss_legendre_rule(p.n + 3)
            lo, hi, cell = lo[odd], hi[odd], cell[odd]
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            u = mid[:, None] + half[:, None] * rule.nodes
            wq = half[:, None] * rule.weights * dt * kernel_q_array(p, (e - u) * dt)
            lower, size = stencil_lower(cell, order, last)
            cw = cardinal_weights(size, u - lower[:, None])
            contrib = -np.einsum("pq,pqk->pk", wq, cw)
            idx = lower[:, None] + np.arange(size)
            acc += np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=last + 1)
    ud = e - D
    if c.a_minus != 0.0 and ud > -1e-9:
        ud = max(ud, 0.0)
        near = round(ud)
        if abs(ud - near) <= 1e-9:
            acc[near] += c.a_minus
        else:
            j = math.floor(ud)
            lower, size = stencil_lower(j, order, last)
            acc[lower : lower + size] += c.a_minus * cardinal_weights(size, ud - lower)
    nz = np.flatnonzero(acc)
    first = int(nz[0]) if nz.size else last
    return first, acc[first:]


def _newest_cell_weights(p: ModeParams, dt: float, i: int, order: int):
    """Predictor/corrector weights for ``int_0^dt Q(s) f(t_{i+1} - s) ds``.

    ``pred[k]`` multiplies ``f[i-k]``; ``corr[k]`` multiplies ``f[i+1-k]``.
    """
    rule = gauss_legendre_rule(p.n + 3)
    u = i + 0.5 + 0.5 * rule.nodes
    wq = 0.5 * rule.weights * dt * kernel_q_array(p, (i + 1 - u) * dt)
    sp = min(order, i + 1)
    sc = min(order, i + 2)
    # predictor nodes i, i-1, ..., i-sp+1 ; local coordinate x = u - (i - sp + 1)
    pw = wq @ cardinal_weights(sp, u - (i - sp + 1))
    cw = wq @ cardinal_weights(sc, u - (i + 1 - sc + 1))
    return pw[::-1].copy(), cw[::-1].copy()


def _step_weights(p: ModeParams, dt: float, i: int, order: int):
    """All weights for the step ``i -> i + 1`` as dense vectors over ``f[0..i]``.

    Returns ``(d, pred, corr)`` with ``d[m]`` multiplying ``f[i - m]``.
    """
    f1, w1 = _history_functional(p, dt, i + 1, i, 1, order)
    f0, w0 = _history_functional(p, dt, i, i, 0, order)
    first = min(f1, f0)
    diff = np.zeros(i + 1 - first)
    diff[f1 - first :] += w1
    diff[f0 - first :] -= w0
    pred, corr = _newest_cell_weights(p, dt, i, order)
    return diff[::-1].copy(), pred, corr


def _steady_index(dt: float, order: int) -> int:
    """First step index from which the step weights are translation invariant."""
    return int(math.ceil(2.0 / dt)) + stencil_back(order) + 3


@lru_cache(maxsize=64)
def _steady_weights(p: ModeParams, dt: float, order: int):
    i0 = _steady_index(dt, order)
    d, pred, corr = _step_weights(p, dt, i0, order)
    # trailing entries beyond the stencil reach are exact zeros; trim them
    nz = np.flatnonzero(d)
    d = d[: nz[-1] + 1] if nz.size else d[:1]
    for a in (d, pred, corr):
        a.flags.writeable = False
    return i0, d, pred, corr


class ModeStepper:
    """Marches one mode equation on a fixed grid."""

    def __init__(self, p: ModeParams, cfg: SolverConfig):
        self.p = p
        self.cfg = cfg
        self.coef = delay_coefficients(p)
        self.i0, self.d, self.pred, self.corr = _steady_weights(p, cfg.dt, cfg.order)

    def weights(self, i: int):
        if i >= self.i0:
            return self.d, self.pred, self.corr
        return _step_weights(self.p, self.cfg.dt, i, self.cfg.order)

    def advance(self, f: np.ndarray, i: int, g_now: float, g_next: float) -> float:
        """Return ``f[i+1]`` given samples ``f[0..i]`` and ``g`` at ``t_i``, ``t_{i+1}``."""
        d, pred, corr = self.weights(i)
        ap = self.coef.a_plus
        hist = np.dot(d, f[i - len(d) + 1 : i + 1][::-1])
        base = f[i] + (g_next - g_now - hist) / ap
        fn = base + np.dot(pred, f[i - len(pred) + 1 : i + 1][::-1]) / ap
        tail = np.dot(corr[1:], f[i - len(corr) + 2 : i + 1][::-1]) if len(corr) > 1 else 0.0
        for _ in range(self.cfg.corrector_iterations):
            fn = base + (corr[0] * fn + tail) / ap
        return float(fn)

    def run(self, g: np.ndarray, f0: float | None = None) -> np.ndarray:
        """March over grid data ``g[0..N]``; returns ``f[0..N]``."""
        n = len(g) - 1
        f = np.zeros(n + 1)
        f[0] = g[0] / self.coef.a_plus if f0 is None else f0
        top = min(self.i0, n)
        for i in range(top):
            f[i + 1] = self.advance(f, i, g[i], g[i + 1])
        if n > self.i0:
            kernels.march_pece(
                f, np.ascontiguousarray(g, dtype=float), self.d, self.pred, self.corr,
                self.coef.a_plus, self.i0, n, int(self.cfg.corrector_iterations),
            )
        return f


def step(p: ModeParams, h: HistoryBuffer, g: BoundarySignal, cfg: SolverConfig) -> float:
    """Append ``f(t + dt)`` to ``h`` (history through index ``i``) and return it."""
    if abs(h.dt - cfg.dt) > 1e-15 * cfg.dt or h.start_index != 0 or len(h) == 0:
        raise ConfigError("history must start at t = 0 on the solver grid")
    i = h.last_index
    g_now, g_next = eval_signal(g, np.array([i, i + 1]) * cfg.dt)
    fn = ModeStepper(p, cfg).advance(h.values, i, g_now, g_next)
    h.append(fn)
    return fn


def solve_mode(p: ModeParams, sig: BoundarySignal, cfg: SolverConfig) -> HistoryBuffer:
    """March the mode equation from ``t = 0`` to ``cfg.t_end``."""
    n = cfg.steps
    g = eval_signal(sig, np.arange(n + 1) * cfg.dt)
    f = ModeStepper(p, cfg).run(g)
    return HistoryBuffer(cfg.dt, f, order=cfg.order)


# ---------------------------------------------------------------------------
# literal mode-0 recursion


def solve_mode0_correction_form(alpha: float, beta: float, sig: BoundarySignal, cfg: SolverConfig) -> HistoryBuffer:
    """Normalized mode-0 recursion, one step at a time.

    ``mu(t+dt) = mu(t) - lam [mu(t+dt-2) - mu(t-2)] + nu int_t^{t+dt} mu
    - nu int_{t-2}^{t+dt-2} mu + c [g(t+dt) - g(t)]`` with
    ``lam = (1-alpha)/(1+alpha)``, ``nu = (1-beta)/(1+alpha)``, ``c = 2/(1+alpha)``.
    """
    if not alpha > -1.0:
        raise ConfigError("alpha must exceed -1")
    dt, S = cfg.dt, cfg.order
    lam = (1.0 - alpha) / (1.0 + alpha)
    nu = (1.0 - beta) / (1.0 + alpha)
    c = 2.0 / (1.0 + alpha)
    n = cfg.steps
    gv = eval_signal(sig, np.arange(n + 1) * dt)
    h = HistoryBuffer(dt, order=S, capacity=n + 1)
    h.append(c * gv[0])
    D = 2.0 / dt
    for i in range(n):
        mu = h.values
        t, T = i * dt, (i + 1) * dt
        delay_jump = h(T - 2.0) - h(t - 2.0)
        # int_{t-2}^{T-2} mu, split at grid points, cell-wise interpolants
        past = 0.0
        lo, hi, cell = _pieces(i + 1 - D, 1.0)
        for a, b, j in zip(lo, hi, cell):
            lower, size = stencil_lower(j, S, i)
            nodes = np.arange(size, dtype=float)
            past += dt * lagrange_integral_weights(nodes, a - lower, b - lower) @ mu[lower : lower + size]
        # int_t^T mu: predictor on f(t - k dt), k = 0..sp-1
        sp = min(S, i + 1)
        pnodes = np.arange(sp, dtype=float)  # local coordinate of f[i-sp+1+k]
        pw = dt * lagrange_integral_weights(pnodes, sp - 1, sp)
        future = pw @ mu[i - sp + 1 : i + 1]
        base = mu[i] - lam * delay_jump - nu * past + c * (gv[i + 1] - gv[i])
        mu_next = base + nu * future
        # corrector on mu(T) and f(t - k dt), k = 0..sc-2
        sc = min(S, i + 2)
        cw = dt * lagrange_integral_weights(np.arange(sc, dtype=float), sc - 2, sc - 1)
        for _ in range(cfg.corrector_iterations):
            future = cw[:-1] @ mu[i - sc + 2 : i + 1] + cw[-1] * mu_next
            mu_next = base + nu * future
        h.append(mu_next)
    return h
