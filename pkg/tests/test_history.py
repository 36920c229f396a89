import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdcfie.errors import HistoryError
from tdcfie.history import HistoryBuffer, cardinal_weights, grid_count, interpolate_history, stencil_lower


def quintic(t):
    return 0.3 - 1.2 * t + 0.7 * t**2 + 0.05 * t**3 - 0.02 * t**4 + 0.001 * t**5


def buffer_from(func, dt=0.1, n=60, order=6):
    return HistoryBuffer(dt, func(np.arange(n) * dt), order=order)


def test_on_grid_returns_stored_value():
    h = buffer_from(np.sin)
    assert interpolate_history(h, 17 * h.dt) == h.values[17]


def test_negative_time_is_zero():
    h = buffer_from(np.cos)
    assert interpolate_history(h, -0.5) == 0.0
    assert np.all(interpolate_history(h, np.array([-2.0, -1e-3])) == 0.0)


@given(st.floats(0.0, 5.9))
def test_quintic_reproduced(t):
    h = buffer_from(quintic)
    exact = quintic(t)
    assert abs(interpolate_history(h, t) - exact) <= 1e-11 * max(1.0, abs(exact))


@pytest.mark.parametrize("order", [2, 4, 6])
def test_lower_orders_reproduce_their_degree(order):
    coef = np.arange(1, order + 1) / 7.0
    h = buffer_from(lambda t: np.polyval(coef, t), order=order)
    t = np.linspace(0, 5.9, 37)
    assert np.allclose(interpolate_history(h, t), np.polyval(coef, t), rtol=1e-11, atol=1e-12)


def test_stencil_placement():
    # cell (j, j+1) uses j-3..j+2, clamped to stored samples
    assert stencil_lower(10, 6, 50) == (7, 6)
    assert stencil_lower(1, 6, 50)[0] == 0
    assert stencil_lower(49, 6, 50)[0] == 45
    assert stencil_lower(2, 6, 3) == (0, 4)
    assert stencil_lower(10, 4, 50)[0] == 8
    assert stencil_lower(10, 2, 50)[0] == 10


def test_extrapolation_refused():
    h = buffer_from(np.sin, n=10)
    with pytest.raises(HistoryError):
        interpolate_history(h, h.last_time + 0.5 * h.dt)
    # a rounding-level overshoot is still treated as the last grid point
    assert interpolate_history(h, h.last_time * (1 + 1e-15)) == h.values[-1]


def test_query_before_window_refused():
    h = HistoryBuffer(0.1, np.ones(10), start_index=5)
    with pytest.raises(HistoryError):
        interpolate_history(h, 0.2)


def test_cardinal_weights_are_cardinal():
    w = cardinal_weights(6, np.arange(6.0))
    assert np.allclose(w, np.eye(6), atol=1e-15)
    assert np.allclose(cardinal_weights(6, np.array([2.37])).sum(), 1.0)


def test_times_from_index_not_accumulated():
    dt = 97 / 6400
    h = HistoryBuffer(dt, np.zeros(100_001))
    assert h.times[-1] == 100_000 * dt
    assert grid_count(10.0, dt) == 660


def test_append_and_views():
    h = HistoryBuffer(0.5)
    for v in range(40):
        h.append(float(v))
    assert len(h) == 40 and h.last_index == 39 and h.last_time == 19.5
    with pytest.raises(ValueError):
        h.values[0] = 1.0
    c = h.copy()
    c.append(1.0)
    assert len(h) == 40
