"""One spherical-harmonic mode of the time-domain combined-field equation.

On the unit sphere with constant coefficients ``a = alpha`` and ``b = beta``
the degree-``n`` component ``f(t)`` of the density satisfies

    a_plus f(t) + a_minus f(t - 2) - int_0^2 Q_n(s) f(t - s) ds = g(t)

with ``a_plus = (1 + alpha)/2``, ``a_minus = (-1)^n (1 - alpha)/2`` and

    Q_n(s) = [(2 - 2 beta) P_n(z) - s (s - 2 alpha) P_n'(z)] / 4,   z = 1 - s^2/2.

This unnormalized form is the canonical one used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, HistoryError
from .history import HistoryBuffer
from .special import QuadratureRule, gauss_legendre_rule, legendre_pair, legendre_pair_array

__all__ = [
    "ModeParams",
    "DelayCoefficients",
    "BoundarySignal",
    "delay_coefficients",
    "kernel_q",
    "kernel_q_array",
    "eval_signal",
    "apply_operator",
]


@dataclass(frozen=True)
class ModeParams:
    n: int = 0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ConfigError(f"mode index must be a nonnegative integer, got {self.n!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ConfigError(f"beta must be finite and >= 0, got {self.beta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class DelayCoefficients:
    a_plus: float
    a_minus: float
    lam: float
    nu: float


def delay_coefficients(p: ModeParams) -> DelayCoefficients:
    sign = -1.0 if p.n % 2 else 1.0
    a_plus = (1.0 + p.alpha) / 2.0
    # 1 - a_plus is exact for alpha <= 3, which makes a_plus + (-1)^n a_minus == 1 exactly
    return DelayCoefficients(
        a_plus=a_plus,
        a_minus=sign * (1.0 - a_plus),
        lam=(1.0 - p.alpha) / (1.0 + p.alpha),
        nu=(1.0 - p.beta) / (1.0 + p.alpha),
    )


def kernel_q(p: ModeParams, s: float) -> float:
    if not 0.0 <= s <= 2.0:
        raise DomainError(f"kernel argument must lie in [0, 2], got {s!r}")
    P, dP = legendre_pair(p.n, 1.0 - 0.5 * s * s)
    return 0.25 * ((2.0 - 2.0 * p.beta) * P - s * (s - 2.0 * p.alpha) * dP)


def kernel_q_array(p: ModeParams, s) -> np.ndarray:
    """Vectorized :func:`kernel_q` without the domain check."""
    s = np.asarray(s, dtype=float)
    P, dP = legendre_pair_array(p.n, 1.0 - 0.5 * s * s)
    return 0.25 * ((2.0 - 2.0 * p.beta) * P - s * (s - 2.0 * p.alpha) * dP)


@dataclass(frozen=True)
class BoundarySignal:
    """Causal Dirichlet data ``g(t)``, identically zero for ``t <= 0``.

    ``width`` is the Gaussian rate: the envelope is ``exp(-width (t - center)^2)``.
    For ``kind == "samples"`` the signal is the piecewise-linear interpolant
    of ``(sample_times, sample_values)`` and zero outside the table.
    """

    kind: str = "gaussian_pulse"
    amplitude: float = 8.0
    frequency: float = 0.0
    width: float = 40.0
    center: float = 1.0
    sample_times: tuple = field(default=())
    sample_values: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("gaussian_pulse", "modulated_pulse", "samples"):
            raise ConfigError(f"unknown signal kind {self.kind!r}")
        if self.kind != "samples" and not self.width > 0:
            raise ConfigError("pulse width must be positive")
        if len(self.sample_times) != len(self.sample_values):
            raise ConfigError("sample table columns differ in length")
        if np.any(np.diff(self.sample_times) <= 0):
            raise ConfigError("sample times must be strictly increasing")

    @classmethod
    def gaussian_pulse(cls, amplitude=8.0, width=40.0, center=1.0):
        return cls("gaussian_pulse", amplitude, 0.0, width, center)

    @classmethod
    def modulated_pulse(cls, amplitude=8.0, frequency=50.0, width=40.0, center=1.0):
        return cls("modulated_pulse", amplitude, frequency, width, center)

    @classmethod
    def samples(cls, times, values):
        return cls("samples", 0.0, 0.0, 1.0, 0.0, tuple(map(float, times)), tuple(map(float, values)))

    @classmethod
    def unit_sample(cls, t0: float, dt: float):
        """Hat of height one at ``t0`` and half-width ``dt``; for hand checks only."""
        return cls.samples([t0 - dt, t0, t0 + dt], [0.0, 1.0, 0.0])

    @classmethod
    def zero(cls):
        return cls.samples([], [])

    @classmethod
    def oscillatory(cls):
        """``8 sin(50 t) exp(-40 (t - 1)^2)``."""
        return cls.modulated_pulse(8.0, 50.0, 40.0, 1.0)

    @classmethod
    def non_oscillatory(cls):
        """``8 exp(-40 (t - 1)^2)``."""
        return cls.gaussian_pulse(8.0, 40.0, 1.0)

    def __call__(self, t):
        return eval_signal(self, t)

    def sup_norm(self) -> float:
        if self.kind == "gaussian_pulse":
            return abs(self.amplitude)
        if self.kind == "samples":
            return float(np.max(np.abs(self.sample_values), initial=0.0))
        half = 6.0 / math.sqrt(self.width)
        t = np.linspace(max(0.0, self.center - half), self.center + half, 200001)
        return float(np.max(np.abs(eval_signal(self, t))))


def eval_signal(sig: BoundarySignal, t):
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if sig.kind == "samples":
        if len(sig.sample_times) == 0:
            val = np.zeros_like(t)
        else:
            val = np.interp(t, sig.sample_times, sig.sample_values, left=0.0, right=0.0)
    else:
        val = sig.amplitude * np.exp(-sig.width * (t - sig.center) ** 2)
        if sig.kind == "modulated_pulse":
            val = val * np.sin(sig.frequency * t)
    val = np.where(t > 0.0, val, 0.0)
    return float(val) if scalar else val


def _pieces(u_end: float, u_len: float):
    """Split the index interval [u_end - u_len, u_end] at integers.

    Returns arrays (lo, hi, cell) of the pieces lying at nonnegative times.
    """
    u_lo = u_end - u_len
    first = max(0, math.floor(u_lo))
    inner = np.arange(first + 1, math.ceil(u_end))
    inner = inner[(inner > u_lo) & (inner < u_end)]
    edges = np.concatenate(([max(u_lo, 0.0)], inner, [u_end]))
    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    cell = np.floor(0.5 * (lo + hi)).astype(np.int64)
    return lo, hi, cell


def apply_operator(p: ModeParams, f: HistoryBuffer, t, quad: QuadratureRule | None = None, subpanels: int = 1):
    """Apply the mode operator to the stored history at time(s) ``t``.

    The delay integral is split at grid points; each piece (optionally cut
    into ``subpanels`` equal parts) gets the Gauss rule ``quad`` and the
    history interpolant of its cell.
    """
    if quad is None:
        quad = gauss_legendre_rule(p.n + 3)
    if len(quad) < p.n + 2:
        raise ConfigError(f"mode {p.n} needs at least {p.n + 2} nodes per panel, got {len(quad)}")
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < f.start_index * f.dt) or np.any(ts / f.dt > f.last_index + 1e-9):
        raise HistoryError("operator evaluation needs stored history covering [t - 2, t]")
    c = delay_coefficients(p)
    dt = f.dt
    u_len = 2.0 / dt
    sub = np.arange(subpanels)
    out = np.empty(len(ts))
    for k, tk in enumerate(ts):
        u_end = tk / dt
        lo, hi, cell = _pieces(u_end, u_len)
        width = (hi - lo) / subpanels
        plo = (lo[:, None] + width[:, None] * sub).ravel()
        phi = plo + np.repeat(width, subpanels)
        pcell = np.repeat(cell, subpanels)
        mid = 0.5 * (plo + phi)
        half = 0.5 * (phi - plo)
        u = mid[:, None] + half[:, None] * quad.nodes
        w = half[:, None] * quad.weights * dt
        vals = f.in_cell(u, pcell[:, None])
        q = kernel_q_array(p, (u_end - u) * dt)
        integral = float(np.sum(w * q * vals))
        out[k] = c.a_plus * f(tk) + c.a_minus * f(tk - 2.0) - integral
    return float(out[0]) if scalar else out
