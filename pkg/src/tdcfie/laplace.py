"""Laplace symbol of a mode equation, its zeros, and decay-rate estimates.

Convention: ``F(sigma) = int_0^inf f(t) exp(-sigma t) dt``, so decay of the
density corresponds to symbol zeros with ``Re sigma < 0``.  The time-harmonic
wavenumber used elsewhere is ``k = i sigma``.

For mode ``n`` the symbol is

    Gamma_n(sigma) = a_plus + a_minus exp(-2 sigma) - int_0^2 Q_n(s) exp(-sigma s) ds.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericalFailure, RootCountMismatch
from .history import HistoryBuffer
from .mode import ModeParams, delay_coefficients, kernel_q_array
from .special import gauss_legendre_rule

log = logging.getLogger(__name__)

__all__ = [
    "Rectangle",
    "SymbolRoot",
    "DecayFit",
    "symbol",
    "symbol_derivative",
    "closed_form_multiplier",
    "winding_number",
    "find_roots",
    "predicted_decay_rate",
    "fit_decay_rate",
    "impedance_pole_free",
    "axis_eigenvalue_possible",
]

_SERIES_RADIUS = 1e-2
# (1 - exp(-w)) / w = sum_k (-w)^k / (k+1)!, k = 0..8
_PHI_COEF = np.array([(-1.0) ** k / math.factorial(k + 1) for k in range(9)])


class Rectangle(NamedTuple):
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z, slack: float = 0.0) -> bool:
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)

    def expanded(self, delta: float) -> "Rectangle":
        return Rectangle(self.re_min - delta, self.re_max + delta, self.im_min - delta, self.im_max + delta)

    @property
    def size(self) -> float:
        return max(self.re_max - self.re_min, self.im_max - self.im_min)


DEFAULT_RECT = Rectangle(-4.0, 1.0, -30.0, 30.0)


@dataclass(frozen=True)
class SymbolRoot:
    location: complex
    residual: float
    newton_iterations: int
    multiplicity: int = 1


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    fit_residual: float
    window: tuple
    points: int


def _phi(w):
    """``(1 - exp(-w)) / w`` with the removable singularity at 0."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) < 2 * _SERIES_RADIUS
    if np.any(small):
        ws = w[small]
        out[small] = _taylor(ws)
    big = ~small
    if np.any(big):
        wb = w[big]
        out[big] = -np.expm1(-wb) / wb
    return out


def _taylor(w):
    acc = np.zeros_like(w)
    for c in _PHI_COEF[::-1]:
        acc = acc * w + c
    return acc


def _kernel_laplace(p: ModeParams, sigma: np.ndarray, moment: int = 0) -> np.ndarray:
    """``int_0^2 s^moment Q_n(s) exp(-sigma s) ds`` by panel Gauss quadrature."""
    rule = gauss_legendre_rule(p.n + 16)
    panels = max(2, int(math.ceil(2.0 * float(np.max(np.abs(sigma), initial=0.0)))))
    edges = np.linspace(0.0, 2.0, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * rule.nodes
    w = (half[:, None] * rule.weights).ravel()
    s = s.ravel()
    q = kernel_q_array(p, s) * w * s**moment
    return np.exp(-np.multiply.outer(sigma, s)) @ q


def symbol(p: ModeParams, sigma, force_quadrature: bool = False):
    """Evaluate ``Gamma_n(sigma)`` (scalar or array)."""
    scalar = np.ndim(sigma) == 0
    z = np.atleast_1d(np.asarray(sigma, dtype=complex))
    c = delay_coefficients(p)
    val = c.a_plus + c.a_minus * np.exp(-2.0 * z)
    if p.n == 0 and not force_quadrature:
        val = val - (1.0 - p.beta) * _phi(2.0 * z)
    else:
        val = val - _kernel_laplace(p, z)
    return complex(val[0]) if scalar else val


def symbol_derivative(p: ModeParams, sigma, force_quadrature: bool = False):
    """``d Gamma_n / d sigma``."""
    scalar = np.ndim(sigma) == 0
    z = np.atleast_1d(np.asarray(sigma, dtype=complex))
    c = delay_coefficients(p)
    val = -2.0 * c.a_minus * np.exp(-2.0 * z)
    if p.n == 0 and not force_quadrature:
        val = val - 2.0 * (1.0 - p.beta) * _dphi(2.0 * z)
    else:
        val = val + _kernel_laplace(p, z, moment=1)
    return complex(val[0]) if scalar else val


def _dphi(w):
    """Derivative of ``(1 - exp(-w)) / w``."""
    out = np.empty_like(w)
    small = np.abs(w) < 2 * _SERIES_RADIUS
    if np.any(small):
        ws = w[small]
        acc = np.zeros_like(ws)
        for k in range(9, 0, -1):
            acc = acc * ws + k * (-1.0) ** k / math.factorial(k + 1)
        out[small] = acc
    big = ~small
    if np.any(big):
        wb = w[big]
        out[big] = (np.exp(-wb) * (wb + 1.0) - 1.0) / wb**2
    return out


def closed_form_multiplier(alpha: float, sigma: complex) -> complex:
    """Closed-form mode-0 multiplier for beta = 0, written with ``1/sigma``."""
    e = cmath.exp(-2.0 * sigma)
    return 0.5 * (1.0 + e + (alpha - 1.0 / sigma) * (-np.expm1(-2.0 * sigma)))


# ---------------------------------------------------------------------------
# argument principle


class _BoundaryRoot(Exception):
    pass


def _edge_phase(func, a: complex, b: complex, n0: int, max_points: int = 200_000) -> float:
    """Total change of arg(func) along the segment a -> b, refining where it jumps."""
    t = np.linspace(0.0, 1.0, n0 + 1)
    vals = func(a + (b - a) * t)
    while True:
        if np.any(vals == 0):
            raise _BoundaryRoot
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) > math.pi / 6
        if not np.any(bad):
            return float(np.sum(dphi))
        if len(t) > max_points or np.min(np.diff(t)[bad]) < 1e-12:
            raise _BoundaryRoot
        tm = 0.5 * (t[:-1][bad] + t[1:][bad])
        vm = func(a + (b - a) * tm)
        t = np.concatenate([t, tm])
        vals = np.concatenate([vals, vm])
        order = np.argsort(t, kind="stable")
        t, vals = t[order], vals[order]


def winding_number(func, rect: Rectangle, density: float = 16.0) -> int:
    """Number of zeros of ``func`` inside ``rect`` (counted with multiplicity)."""
    corners = [
        complex(rect.re_min, rect.im_min),
        complex(rect.re_max, rect.im_min),
        complex(rect.re_max, rect.im_max),
        complex(rect.re_min, rect.im_max),
    ]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        n0 = max(32, int(math.ceil(abs(b - a) * density)))
        total += _edge_phase(func, a, b, n0)
    w = total / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 0.05:
        raise NumericalFailure(f"winding number not integral ({w:.4f})")
    return int(k)


def _circle_count(func, z0: complex, r: float, n: int = 256) -> int:
    pts = z0 + r * np.exp(2j * math.pi * np.arange(n + 1) / n)
    vals = func(pts)
    w = float(np.sum(np.angle(vals[1:] / vals[:-1]))) / (2 * math.pi)
    return int(round(w))


def _newton(p: ModeParams, z: complex, box: Rectangle, maxit: int = 60):
    for it in range(1, maxit + 1):
        g = symbol(p, z)
        if g == 0:
            return z, it
        dg = symbol_derivative(p, z)
        if dg == 0 or not np.isfinite(dg):
            return z, -1
        step = g / dg
        z = z - step
        if not box.contains(z):
            return z, -1
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            return z, it
    return z, maxit


def find_roots(p: ModeParams, rect: Rectangle = DEFAULT_RECT, tol: float = 1e-10,
               seed_spacing: float = 0.5, max_refinements: int = 4) -> list[SymbolRoot]:
    """All zeros of the symbol inside ``rect``, checked against the argument principle.

    Edges passing through a zero are pushed outward by a small amount first.
    Raises :class:`RootCountMismatch` if Newton cannot find as many zeros as
    the winding number predicts.
    """
    rect = Rectangle(*map(float, rect))
    if not (rect.re_max > rect.re_min and rect.im_max > rect.im_min):
        raise DomainError("empty search rectangle")
    func = lambda z: symbol(p, z)  # noqa: E731
    count = None
    for attempt in range(6):
        try:
            count = winding_number(func, rect)
            break
        except _BoundaryRoot:
            delta = 1e-3 * rect.size * (1.7**attempt)
            log.warning("symbol vanishes on the search boundary; enlarging rectangle by %.3g", delta)
            rect = rect.expanded(delta)
    if count is None:
        raise NumericalFailure("could not place the search boundary away from symbol zeros")
    if count == 0:
        return []

    found: list[list] = []
    box = rect.expanded(1.0)
    spacing = seed_spacing
    for _ in range(max_refinements + 1):
        nx = max(2, int(math.ceil((rect.re_max - rect.re_min) / spacing)) + 1)
        ny = max(2, int(math.ceil((rect.im_max - rect.im_min) / spacing)) + 1)
        xs = np.linspace(rect.re_min, rect.re_max, nx)
        ys = np.linspace(rect.im_min, rect.im_max, ny)
        for x in xs:
            for y in ys:
                z, it = _newton(p, complex(x, y), box)
                if it < 0 or not rect.contains(z, 1e-9):
                    continue
                res = abs(symbol(p, z))
                if res > tol:
                    continue
                if any(abs(z - r[0]) <= 1e-6 * max(1.0, abs(z)) for r in found):
                    continue
                found.append([z, res, it])
        total = 0
        roots = []
        for z, res, it in found:
            others = [abs(z - o[0]) for o in found if o[0] != z]
            radius = min([1e-3 * max(1.0, abs(z))] + [0.3 * d for d in others])
            m = _circle_count(func, z, radius)
            roots.append(SymbolRoot(complex(z), float(res), int(it), max(1, m)))
            total += max(1, m)
        if total == count:
            roots.sort(key=lambda r: (-r.location.real, r.location.imag))
            return roots
        spacing /= 2
    raise RootCountMismatch(
        f"argument principle counts {count} zeros in {tuple(rect)}, Newton located {total}",
        expected=count, found=total,
    )


def predicted_decay_rate(p: ModeParams, rect: Rectangle = DEFAULT_RECT) -> float:
    """``-max Re sigma`` over the symbol zeros in ``rect``; ``inf`` when there are none."""
    roots = find_roots(p, rect)
    if not roots:
        return math.inf
    lead = max(roots, key=lambda r: r.location.real)
    margin = 0.1 * (rect.im_max - rect.im_min)
    if lead.location.imag > rect.im_max - margin or lead.location.imag < rect.im_min + margin:
        log.warning("rightmost zero %s lies near the edge of the search window", lead.location)
    return -lead.location.real


# ---------------------------------------------------------------------------
# time-domain decay fits


def _envelope(t: np.ndarray, a: np.ndarray, period: float | None):
    if period is not None:
        block = np.floor((t - t[0]) / period + 1e-9).astype(np.int64)
        block = np.minimum(block, max(0, int(round((t[-1] - t[0]) / period)) - 1))
        idx = [np.flatnonzero(block == b) for b in np.unique(block)]
        pick = np.array([k[np.argmax(a[k])] for k in idx])
        return t[pick], a[pick]
    peak = np.flatnonzero((a[1:-1] >= a[:-2]) & (a[1:-1] > a[2:])) + 1
    if len(peak) >= 4:
        return t[peak], a[peak]
    d = np.diff(a)
    if np.all(d <= 0) or np.all(d >= 0):
        return t, a
    return t[peak], a[peak]


def fit_decay_rate(series: HistoryBuffer, window: tuple, period: float | None = None) -> DecayFit:
    """Least-squares fit of ``log`` of the peak envelope of ``|f|`` on ``window``.

    Parameters
    ----------
    series : HistoryBuffer
        Sampled density.
    window : (float, float)
        Fit interval.
    period : float, optional
        If given, the envelope is the maximum of ``|f|`` over consecutive
        blocks of this length (use the delay, 2, for signals whose pulses
        recur once per delay).  Otherwise it is the set of local maxima of
        ``|f|``; a monotone ``|f|`` is its own envelope.

    Returns
    -------
    DecayFit
        ``rate`` is minus the fitted slope; ``fit_residual`` is the RMS
        misfit in log space.
    """
    lo, hi = map(float, window)
    t = series.times
    if not hi > lo or lo < t[0] - 1e-12 or hi > t[-1] + 1e-9:
        raise DomainError(f"window {window} not inside the series")
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    te, ae = _envelope(t[sel], np.abs(series.values[sel]), period)
    if len(te) < 4:
        raise NumericalFailure(f"only {len(te)} envelope points in window {window}")
    if np.any(ae <= 0):
        raise NumericalFailure("envelope is not positive on the window")
    y = np.log(ae)
    slope, intercept = np.polyfit(te, y, 1)
    resid = y - (slope * te + intercept)
    return DecayFit(
        rate=float(-slope),
        amplitude=float(math.exp(intercept)),
        fit_residual=float(np.sqrt(np.mean(resid**2))),
        window=(lo, hi),
        points=len(te),
    )


# ---------------------------------------------------------------------------
# impedance problem


def impedance_pole_free(k: complex, a: float, b: float) -> bool:
    """Whether ``k`` lies in the guaranteed pole-free set of the interior impedance problem.

    The set is the closed upper half plane together with the disk
    ``k1^2 + (k2 + b/a)^2 <= (b/a)^2`` minus the imaginary axis.
    """
    if not (a > 0 and b > 0):
        raise DomainError("impedance coefficients a and b must be positive")
    k = complex(k)
    k1, k2 = k.real, k.imag
    if k2 >= 0:
        return True
    r = b / a
    return k1 != 0.0 and k1 * k1 + (k2 + r) ** 2 <= r * r


def axis_eigenvalue_possible(k2: float, a: float, b: float) -> bool:
    """On the imaginary axis an impedance eigenvalue ``k = i k2`` requires ``k2 < -b/a``."""
    if not (a > 0 and b > 0):
        raise DomainError("impedance coefficients a and b must be positive")
    return k2 < -b / a
