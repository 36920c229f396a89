"""Pure-Python marching loops; same contract as the compiled ``_march`` module."""

import numpy as np


def march_pece(f, g, d, pred, corr, a_plus, start, stop, iters):
    """Advance ``f[i] -> f[i+1]`` for ``i`` in ``[start, stop)``.

    ``d[m]`` weights ``f[i-m]`` (history part of the operator difference),
    ``pred[k]`` weights ``f[i-k]`` and ``corr[k]`` weights ``f[i+1-k]`` in the
    newest-cell integral.  All touched indices must be >= 0.
    """
    M = len(d)
    S = len(pred)
    Sc = len(corr)
    rd = d[::-1].copy()
    rp = pred[::-1].copy()
    rc = corr[1:][::-1].copy()
    c0 = corr[0]
    inv = 1.0 / a_plus
    for i in range(start, stop):
        base = f[i] + (g[i + 1] - g[i] - np.dot(rd, f[i - M + 1 : i + 1])) * inv
        fn = base + np.dot(rp, f[i - S + 1 : i + 1]) * inv
        tail = np.dot(rc, f[i - Sc + 2 : i + 1]) if Sc > 1 else 0.0
        for _ in range(iters):
            fn = base + (c0 * fn + tail) * inv
        f[i + 1] = fn


def march_implicit(f, rhs, c, denom, start, stop):
    """``f[e] = (rhs[e] + sum_{m=1}^{M} c[m-1] f[e-m]) / denom`` for ``e`` in ``[start, stop)``.

    Terms with ``e - m < 0`` are dropped.
    """
    M = len(c)
    for e in range(start, stop):
        m = min(M, e)
        acc = rhs[e]
        if m:
            acc += np.dot(c[:m], f[e - 1 :: -1][:m])
        f[e] = acc / denom
