"""Uniform-grid time series with causal, piecewise Lagrange interpolation.

Sample ``i`` of a buffer sits at ``t = i * dt`` exactly; times are always
rebuilt from the integer index.  Inside the grid cell ``(j dt, (j+1) dt)``
the interpolant uses the stencil ``j - back, ..., j - back + size - 1`` with
``back = 3`` for the 6-point stencil (nodes j-3..j+2), clamped to the
stored range.  Everything before ``t = 0`` is zero.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import HistoryError

__all__ = ["HistoryBuffer", "stencil_back", "stencil_lower", "cardinal_weights", "interpolate_history"]

# slack for "on the grid" and "not past the end" tests, in units of dt
_GRID_TOL = 1e-9


def stencil_back(size: int) -> int:
    """Number of stencil nodes left of the cell's left endpoint."""
    return size // 2 if size > 2 else 0


def stencil_lower(j, size: int, last: int, first: int = 0):
    """Lowest stencil index for cell(s) ``j`` given stored indices ``first..last``.

    Returns ``(lower, size_eff)``; ``size_eff`` shrinks only when fewer than
    ``size`` samples exist.
    """
    size_eff = min(size, last - first + 1)
    lower = np.asarray(j) - stencil_back(size_eff)
    lower = np.clip(lower, first, last - size_eff + 1)
    return lower, size_eff


def cardinal_weights(size: int, x) -> np.ndarray:
    """Cardinal polynomials of nodes ``0..size-1`` at points ``x``."""
    x = np.asarray(x, dtype=float)
    return _cardinal(size, x)


def _cardinal(size, x):
    diff = x[..., None] - np.arange(size)
    ones = np.ones(x.shape + (1,))
    left = np.cumprod(np.concatenate([ones, diff[..., :-1]], axis=-1), axis=-1)
    right = np.cumprod(np.concatenate([ones, diff[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return left * right * _CARDINAL_SCALE[size]


# 1 / prod_{k != i} (i - k) for nodes 0..size-1
_CARDINAL_SCALE = {
    m: np.array([(-1.0) ** (m - 1 - i) / (math.factorial(i) * math.factorial(m - 1 - i)) for i in range(m)])
    for m in range(1, 13)
}


class HistoryBuffer:
    """Growable samples ``values[i] = f((start_index + i) * dt)``.

    Parameters
    ----------
    dt : float
        Grid spacing.
    values : array_like, optional
        Initial samples.
    order : int
        Interpolation stencil size (2, 4 or 6).
    start_index : int
        Global index of ``values[0]``; normally 0.
    """

    def __init__(self, dt: float, values=None, order: int = 6, start_index: int = 0, capacity: int = 0):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = float(dt)
        self.order = int(order)
        self.start_index = int(start_index)
        init = np.asarray([] if values is None else values, dtype=float).ravel()
        self._data = np.zeros(max(capacity, len(init), 16))
        self._data[: len(init)] = init
        self._n = len(init)

    # storage -----------------------------------------------------------
    def __len__(self) -> int:
        return self._n

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the stored samples."""
        v = self._data[: self._n]
        v.flags.writeable = False
        return v

    @property
    def times(self) -> np.ndarray:
        return (self.start_index + np.arange(self._n)) * self.dt

    @property
    def last_index(self) -> int:
        return self.start_index + self._n - 1

    @property
    def last_time(self) -> float:
        return self.last_index * self.dt

    def time(self, i: int) -> float:
        return i * self.dt

    def reserve(self, n: int) -> None:
        if n > len(self._data):
            new = np.zeros(max(n, 2 * len(self._data)))
            new[: self._n] = self._data[: self._n]
            self._data = new

    def append(self, value: float) -> None:
        if self._n == len(self._data):
            self.reserve(2 * self._n)
        self._data[self._n] = value
        self._n += 1

    def raw(self) -> np.ndarray:
        """Writable backing array (length >= len(self)); used by the marching kernels."""
        return self._data

    def set_length(self, n: int) -> None:
        if n > len(self._data):
            raise ValueError("length exceeds reserved capacity")
        self._n = n

    def copy(self) -> "HistoryBuffer":
        return HistoryBuffer(self.dt, self.values.copy(), self.order, self.start_index)

    # interpolation -----------------------------------------------------
    def in_cell(self, u, j, last: int | None = None) -> np.ndarray:
        """Interpolate at index-unit positions ``u`` using the stencil of cell ``j``.

        No range checks; ``u`` should lie in ``[j, j + 1]`` and ``j >= 0``.
        """
        last = self.last_index if last is None else last
        lower, size = stencil_lower(j, self.order, last, self.start_index)
        w = cardinal_weights(size, np.asarray(u, dtype=float) - lower)
        idx = (lower - self.start_index)[..., None] + np.arange(size)
        return np.sum(w * self._data[idx], axis=-1)

    def __call__(self, t):
        return interpolate_history(self, t)


def interpolate_history(h: HistoryBuffer, t):
    """Value of the stored solution at time(s) ``t``.

    Zero for ``t < 0``, the stored sample on grid points, and the stencil
    interpolant elsewhere.  Raises :class:`HistoryError` past the last sample
    or inside ``[0, start_index * dt)``.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = t / h.dt
    if np.any(u > h.last_index + _GRID_TOL):
        raise HistoryError(
            f"cannot extrapolate to t={t.max():.17g} beyond last sample t={h.last_time:.17g}"
        )
    out = np.zeros_like(u)
    live = u >= -_GRID_TOL
    if np.any(live & (u < h.start_index - _GRID_TOL)):
        raise HistoryError("query precedes the first stored sample")
    uu = np.clip(u[live], h.start_index, h.last_index)
    nearest = np.rint(uu)
    on_grid = np.abs(uu - nearest) <= _GRID_TOL
    res = np.empty_like(uu)
    if np.any(on_grid):
        res[on_grid] = h.values[nearest[on_grid].astype(np.int64) - h.start_index]
    off = ~on_grid
    if np.any(off):
        j = np.floor(uu[off]).astype(np.int64)
        res[off] = h.in_cell(uu[off], j)
    out[live] = res
    return float(out[0]) if scalar else out


def grid_count(t_end: float, dt: float) -> int:
    """Number of steps so that ``steps * dt`` covers ``t_end`` (to rounding)."""
    return int(math.ceil(t_end / dt - _GRID_TOL))
