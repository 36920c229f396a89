"""High-frequency asymptotics of the Helmholtz layer potentials on convex surfaces.

Kernels (outgoing, ``r = |x - y|``)::

    S_k f(x) = int e^{ikr} / (4 pi r) f(y) dS_y
    D_k f(x) = int e^{ikr} <x - y, n_y> / (4 pi r^2) (1/r - ik) f(y) dS_y

Besides the diagonal ``y = x`` the phase ``|x - y|`` is stationary where
``x - y`` is parallel to ``n_y``.  For a convex surface ``x`` lies on the
inner side of every such point and the leading terms of ``D_k`` and
``ik S_k`` coincide there.

Surfaces are spheroids ``(x^2 + y^2)/a^2 + z^2/c^2 = 1`` (spheres have
``a = c``), written as ``F(y) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, QuadratureRefusal, SearchFailure, UnsupportedConfiguration
from .special import gauss_legendre_rule

__all__ = [
    "ConvexSurface",
    "CriticalPointRecord",
    "critical_points",
    "diag_single_layer",
    "diag_double_layer",
    "diag_asymptotics",
    "sp_single_layer",
    "sp_double_layer",
    "direct_layer_quadrature",
    "cancellation_ratio",
    "cancellation_residual",
    "asymptotic_layer",
]

_ON_SURFACE_TOL = 1e-10
_MIN_PPW = 6.0


@dataclass(frozen=True)
class ConvexSurface:
    """Sphere or spheroid of revolution about the z axis.

    Parameters
    ----------
    a : float
        Equatorial semi-axis.
    c : float
        Polar semi-axis.
    """

    a: float
    c: float
    kind: str = "spheroid"
    _m: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0):
            raise DomainError("semi-axes must be positive")
        object.__setattr__(self, "_m", np.array([1 / self.a**2, 1 / self.a**2, 1 / self.c**2]))

    @classmethod
    def sphere(cls, radius: float = 1.0) -> "ConvexSurface":
        return cls(radius, radius, "sphere")

    @classmethod
    def spheroid(cls, a: float, c: float) -> "ConvexSurface":
        return cls(a, c, "sphere" if a == c else "spheroid")

    # geometry ------------------------------------------------------------
    def point(self, theta, phi) -> np.ndarray:
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        st = np.sin(theta)
        return np.stack([self.a * st * np.cos(phi), self.a * st * np.sin(phi), self.c * np.cos(theta)], axis=-1)

    def level(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        return np.sum(self._m * y * y, axis=-1) - 1.0

    def gradient(self, y) -> np.ndarray:
        return 2.0 * self._m * np.asarray(y, float)

    def normal(self, y) -> np.ndarray:
        g = self.gradient(y)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def check_on_surface(self, y) -> np.ndarray:
        y = np.asarray(y, float)
        if y.shape != (3,) or abs(self.level(y)) > _ON_SURFACE_TOL * 10:
            raise DomainError(f"point {y} is not on the surface")
        return y

    def shape_operator(self, y) -> np.ndarray:
        """Weingarten map as a 3x3 matrix acting on tangent vectors (positive for convex)."""
        g = self.gradient(y)
        n = g / np.linalg.norm(g)
        proj = np.eye(3) - np.outer(n, n)
        return proj @ np.diag(2.0 * self._m) @ proj / np.linalg.norm(g)

    def polar_angle(self, y) -> float:
        y = np.asarray(y, float)
        rho = math.hypot(y[0], y[1])
        return math.atan2(rho / self.a, y[2] / self.c)

    def principal_curvatures(self, y) -> tuple[float, float]:
        """Meridional and parallel curvatures at ``y``."""
        th = self.polar_angle(y)
        a, c = self.a, self.c
        q = a * a * math.cos(th) ** 2 + c * c * math.sin(th) ** 2
        return a * c / q**1.5, c / (a * math.sqrt(q))

    def mean_curvature(self, y) -> float:
        k1, k2 = self.principal_curvatures(y)
        return 0.5 * (k1 + k2)

    @property
    def diameter_bound(self) -> float:
        return 2.0 * max(self.a, self.c)


def tangent_basis(n: np.ndarray) -> np.ndarray:
    """Two orthonormal vectors spanning the plane normal to ``n`` (rows)."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - n * (helper @ n)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return np.stack([e1, e2])


@dataclass(frozen=True)
class CriticalPointRecord:
    y_hat: np.ndarray
    d: float
    hessian: np.ndarray
    det: float
    signature: int
    degenerate: bool
    normal: np.ndarray = field(repr=False)
    side: int = -1  # -1: x on the inner side of the tangent plane at y_hat


def _hessian(S: ConvexSurface, x: np.ndarray, y: np.ndarray):
    n = S.normal(y)
    e = (y - x) / np.linalg.norm(y - x)
    d = float(np.linalg.norm(y - x))
    basis = tangent_basis(n)
    w = basis @ S.shape_operator(y) @ basis.T
    h = (np.eye(2) - d * float(e @ n) * w) / d
    return 0.5 * (h + h.T), d, n


def critical_points(S: ConvexSurface, x, seeds: tuple[int, int] = (13, 24)) -> list[CriticalPointRecord]:
    """Points ``y != x`` of ``S`` where ``x - y`` is parallel to ``n_y``.

    Newton iteration on ``x - y - t grad F(y) = 0, F(y) = 0`` from a grid of
    seeds; results within 1e-8 are merged.
    """
    x = S.check_on_surface(x)
    scale = max(S.a, S.c)
    found: list[np.ndarray] = []
    converged_any = False
    thetas = np.linspace(0.0, math.pi, seeds[0])
    phis = np.linspace(0.0, 2 * math.pi, seeds[1], endpoint=False)
    for th in thetas:
        for ph in (phis if 0 < th < math.pi else phis[:1]):
            y = S.point(th, ph)
            g = S.gradient(y)
            t = float((x - y) @ g / (g @ g))
            ok = False
            for _ in range(60):
                g = S.gradient(y)
                r = np.concatenate([x - y - t * g, [S.level(y)]])
                jac = np.zeros((4, 4))
                jac[:3, :3] = -np.eye(3) - t * np.diag(2.0 * S._m)
                jac[:3, 3] = -g
                jac[3, :3] = g
                try:
                    step = np.linalg.solve(jac, -r)
                except np.linalg.LinAlgError:
                    break
                y = y + step[:3]
                t += step[3]
                if not np.all(np.isfinite(y)) or np.linalg.norm(y) > 10 * scale:
                    break
                if np.linalg.norm(step) <= 1e-14 * scale:
                    ok = True
                    break
            if not ok:
                continue
            converged_any = True
            if np.linalg.norm(y - x) <= 1e-6 * scale:
                continue
            if any(np.linalg.norm(y - z) <= 1e-8 * scale for z in found):
                continue
            found.append(y)
    if not converged_any:
        raise SearchFailure("Newton search for critical points failed from every seed")
    out = []
    for y in found:
        h, d, n = _hessian(S, x, y)
        eig = np.linalg.eigvalsh(h)
        det = float(eig[0] * eig[1])
        degenerate = abs(det) < 1e-8 * max(1.0, 1.0 / d**2)
        sgn = int(np.sum(eig > 0) - np.sum(eig < 0)) if not degenerate else int(np.sum(eig > 1e-8) - np.sum(eig < -1e-8))
        side = -1 if float((x - y) @ n) < 0 else 1
        out.append(CriticalPointRecord(y, d, h, det, sgn, degenerate, n, side))
    out.sort(key=lambda r: -r.d)
    return out


# ---------------------------------------------------------------------------
# asymptotic contributions


def _check_k(k: float) -> float:
    k = float(k)
    if k == 0:
        raise DomainError("asymptotic expansions need k != 0")
    return k


def diag_single_layer(S: ConvexSurface, x, k: float, f_at_x: complex = 1.0) -> complex:
    """Diagonal contribution ``-f(x) / (2ik)``."""
    k = _check_k(k)
    return -complex(f_at_x) / (2j * k)


def diag_double_layer(S: ConvexSurface, x, k: float, f_at_x: complex = 1.0) -> complex:
    """Diagonal contribution ``H(x) f(x) / (2ik)``.

    The coefficient is fixed by the exact unit-sphere double layer
    ``e^{2ik}/2 - (e^{2ik} - 1)/(2ik)``, whose non-oscillatory part is
    ``1/(2ik)`` with ``H = 1``.
    """
    k = _check_k(k)
    x = S.check_on_surface(x)
    return S.mean_curvature(x) * complex(f_at_x) / (2j * k)


def diag_asymptotics(S: ConvexSurface, x, k: float, a: float, b: float, f_at_x: complex = 1.0) -> complex:
    """Diagonal part of ``A f = f/2 + D_k f - i(ka + ib) S_k f``.

    ``((1 + a)/2) f + (H - b) f / (2ik)`` up to ``O(k^-2)``.
    """
    k = _check_k(k)
    x = S.check_on_surface(x)
    f = complex(f_at_x)
    return 0.5 * (1.0 + a) * f + (S.mean_curvature(x) - b) * f / (2j * k)


def _sp_prefactor(cp: CriticalPointRecord) -> complex:
    if cp.degenerate:
        raise UnsupportedConfiguration("stationary phase needs a non-degenerate critical point")
    return np.exp(0.25j * math.pi * cp.signature) / math.sqrt(abs(cp.det))


def sp_single_layer(S: ConvexSurface, x, cp: CriticalPointRecord, k: float, f_at_yhat: complex = 1.0) -> complex:
    """Leading stationary-phase term ``e^{i pi Sgn/4} / (2k sqrt|det|) e^{ikd} f / d``."""
    k = _check_k(k)
    return _sp_prefactor(cp) / (2.0 * k) * np.exp(1j * k * cp.d) * complex(f_at_yhat) / cp.d


def sp_double_layer(S: ConvexSurface, x, cp: CriticalPointRecord, k: float, f_at_yhat: complex = 1.0) -> complex:
    """Leading stationary-phase term ``e^{i pi Sgn/4} / (2 sqrt|det|) (+-i) e^{ikd} f / d``.

    The sign is ``+i`` when ``x`` lies on the inner side of the tangent
    plane at the critical point, which is always the case on a convex surface.
    """
    k = _check_k(k)
    sign = 1j if cp.side < 0 else -1j
    return _sp_prefactor(cp) / 2.0 * sign * np.exp(1j * k * cp.d) * complex(f_at_yhat) / cp.d


def _as_function(f) -> Callable[[np.ndarray], np.ndarray]:
    if callable(f):
        return f
    value = complex(f)
    return lambda y: np.full(y.shape[:-1], value)


def asymptotic_layer(S: ConvexSurface, x, k: float, layer: str, f=1.0, cps=None) -> complex:
    """Diagonal plus all stationary-phase contributions for one layer."""
    x = S.check_on_surface(x)
    fn = _as_function(f)
    cps = critical_points(S, x) if cps is None else cps
    if layer == "single":
        total = diag_single_layer(S, x, k, fn(x[None])[0])
        total += sum(sp_single_layer(S, x, cp, k, fn(cp.y_hat[None])[0]) for cp in cps)
    elif layer == "double":
        total = diag_double_layer(S, x, k, fn(x[None])[0])
        total += sum(sp_double_layer(S, x, cp, k, fn(cp.y_hat[None])[0]) for cp in cps)
    else:
        raise DomainError(f"unknown layer {layer!r}")
    return complex(total)


# ---------------------------------------------------------------------------
# direct quadrature


def _frame(v: np.ndarray) -> np.ndarray:
    """Rotation whose third column is the unit vector ``v``."""
    v = v / np.linalg.norm(v)
    b = tangent_basis(v)
    return np.stack([b[0], b[1], v], axis=1)


def _polar_geometry(S: ConvexSurface, x: np.ndarray, rot: np.ndarray, theta: np.ndarray, phi: np.ndarray):
    """Surface points, area element, distance to ``x`` and ``d|x-y|/dphi`` on a polar grid.

    The area element includes the ``sin(theta)`` factor of the direction map.
    """
    th = np.asarray(theta)[:, None]
    st, ct = np.sin(th), np.cos(th)
    cp, sp = np.cos(phi), np.sin(phi)
    u = np.stack([st * cp, st * sp, np.broadcast_to(ct, (len(th), len(phi)))], axis=-1) @ rot.T
    ut = np.stack([ct * cp, ct * sp, np.broadcast_to(-st, (len(th), len(phi)))], axis=-1) @ rot.T
    # d u / d phi divided by sin(theta)
    uph = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)[None] @ rot.T
    m = S._m
    r_u = np.sum(m * u * u, axis=-1) ** -0.5
    y = r_u[..., None] * u
    dr_t = -(r_u**3) * np.sum(m * u * ut, axis=-1)
    dr_p = -(r_u**3) * np.sum(m * u * uph, axis=-1)
    y_t = dr_t[..., None] * u + r_u[..., None] * ut
    y_p = dr_p[..., None] * u + r_u[..., None] * uph
    area = np.linalg.norm(np.cross(y_t, y_p), axis=-1) * st
    diff = x - y
    r = np.linalg.norm(diff, axis=-1)
    r = np.where(r > 0, r, np.inf)
    rate = -np.sum(diff * y_p, axis=-1) * st / r
    return y, area, r, rate


def direct_layer_quadrature(
    S: ConvexSurface,
    x,
    k: float,
    layer: str,
    f=1.0,
    points_per_wavelength: float = 20.0,
    panel_nodes: int = 16,
) -> complex:
    """Evaluate ``S_k f(x)`` or ``D_k f(x)`` by quadrature in polar angles about ``x``.

    Directions ``u(theta, phi)`` measured from ``x/|x|`` are mapped radially
    onto the surface.  The area element vanishes like ``theta`` at ``x``
    and cancels the ``1/|x - y|`` singularity, so Gauss panels in ``theta``
    and the trapezoid rule in ``phi`` converge rapidly.

    Raises
    ------
    QuadratureRefusal
        If fewer than 6 points per wavelength are requested.
    """
    if layer not in ("single", "double"):
        raise DomainError(f"unknown layer {layer!r}")
    k = float(k)
    if k < 0:
        raise DomainError("k must be non-negative")
    if points_per_wavelength < _MIN_PPW:
        raise QuadratureRefusal(
            f"{points_per_wavelength} points per wavelength is below the minimum of {_MIN_PPW:g}"
        )
    x = S.check_on_surface(x)
    fn = _as_function(f)
    big, small = max(S.a, S.c), min(S.a, S.c)
    # bound on the number of wavelengths along a meridian
    arc = math.pi * big * big / small
    waves_theta = k * arc / (2 * math.pi)
    n_theta = max(8 * panel_nodes, int(math.ceil(points_per_wavelength * waves_theta)))
    panels = int(math.ceil(n_theta / panel_nodes))

    rule = gauss_legendre_rule(panel_nodes)
    edges = np.linspace(0.0, math.pi, panels + 1)
    half = 0.5 * np.diff(edges)
    theta = ((0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * rule.nodes).ravel()
    wt = (half[:, None] * rule.weights).ravel()
    rot = _frame(x)

    # azimuthal resolution from the largest rate of change of |x - y| in phi
    probe_t = np.linspace(0.0, math.pi, 34)[1:-1]
    probe_p = 2 * math.pi * np.arange(64) / 64
    _, _, _, rate = _polar_geometry(S, x, rot, probe_t, probe_p)
    n_phi = max(64, int(math.ceil(1.25 * points_per_wavelength * k * float(np.max(np.abs(rate))))))
    n_phi += n_phi % 2
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    wp = 2 * math.pi / n_phi

    total = 0.0 + 0.0j
    chunk = max(1, 400_000 // n_phi)
    for lo in range(0, len(theta), chunk):
        y, area, r, _ = _polar_geometry(S, x, rot, theta[lo : lo + chunk], phi)
        fy = fn(y)
        if layer == "single":
            kern = np.exp(1j * k * r) / (4 * math.pi * r)
        else:
            proj = np.sum((x - y) * S.normal(y), axis=-1)
            kern = np.exp(1j * k * r) * proj / (4 * math.pi * r * r) * (1.0 / r - 1j * k)
        total += np.sum((kern * fy * area).sum(axis=1) * wp * wt[lo : lo + chunk])
    return complex(total)


# ---------------------------------------------------------------------------
# cancellation diagnostics


def cancellation_ratio(S: ConvexSurface, x, k: float, a: float, cps: Sequence[CriticalPointRecord] | None = None) -> float:
    """``|sum (D^sp - iak S^sp)| / |sum D^sp|`` for ``f = 1``; equals ``|1 - a|`` on convex surfaces."""
    if not a > 0:
        raise DomainError("a must be positive")
    cps = critical_points(S, x) if cps is None else cps
    if not cps:
        raise SearchFailure("no critical points besides the diagonal")
    dsum = sum(sp_double_layer(S, x, cp, k) for cp in cps)
    ssum = sum(sp_single_layer(S, x, cp, k) for cp in cps)
    return float(abs(dsum - 1j * a * k * ssum) / abs(dsum))


def cancellation_residual(
    S: ConvexSurface,
    x,
    k: float,
    a: float,
    points_per_wavelength: float = 20.0,
    cps: Sequence[CriticalPointRecord] | None = None,
) -> dict:
    """Compare ``(D_k - iak S_k) 1`` by direct quadrature with its asymptotic prediction.

    Returns a dict with ``direct``, ``diag``, ``stationary`` and
    ``residual = |direct - diag - stationary|``.
    """
    x = S.check_on_surface(x)
    cps = critical_points(S, x) if cps is None else cps
    ds = direct_layer_quadrature(S, x, k, "single", 1.0, points_per_wavelength)
    dd = direct_layer_quadrature(S, x, k, "double", 1.0, points_per_wavelength)
    direct = dd - 1j * a * k * ds
    diag = diag_double_layer(S, x, k) - 1j * a * k * diag_single_layer(S, x, k)
    stat = sum(sp_double_layer(S, x, cp, k) - 1j * a * k * sp_single_layer(S, x, cp, k) for cp in cps)
    return {
        "direct": complex(direct),
        "diag": complex(diag),
        "stationary": complex(stat),
        "residual": float(abs(direct - diag - stat)),
    }
