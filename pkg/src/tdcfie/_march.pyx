# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled marching loops; see ``_march_py`` for the contract."""


def march_pece(double[::1] f, const double[::1] g, const double[::1] d,
               const double[::1] pred, const double[::1] corr,
               double a_plus, Py_ssize_t start, Py_ssize_t stop, int iters):
    cdef Py_ssize_t M = d.shape[0], S = pred.shape[0], Sc = corr.shape[0]
    cdef Py_ssize_t i, m
    cdef int it
    cdef double inv = 1.0 / a_plus
    cdef double acc, base, fn, tail
    if start < M - 1 or start < S - 1 or start < Sc - 2:
        raise ValueError("march start leaves stencils before index 0")
    if stop + 1 > f.shape[0] or stop + 1 > g.shape[0]:
        raise ValueError("arrays too short for requested march")
    for i in range(start, stop):
        acc = 0.0
        for m in range(M):
            acc += d[m] * f[i - m]
        base = f[i] + (g[i + 1] - g[i] - acc) * inv
        acc = 0.0
        for m in range(S):
            acc += pred[m] * f[i - m]
        fn = base + acc * inv
        tail = 0.0
        for m in range(1, Sc):
            tail += corr[m] * f[i + 1 - m]
        for it in range(iters):
            fn = base + (corr[0] * fn + tail) * inv
        f[i + 1] = fn


def march_implicit(double[::1] f, const double[::1] rhs, const double[::1] c,
                   double denom, Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t M = c.shape[0]
    cdef Py_ssize_t e, m, top
    cdef double acc
    if stop > f.shape[0] or stop > rhs.shape[0]:
        raise ValueError("arrays too short for requested march")
    for e in range(start, stop):
        top = M if M < e else e
        acc = rhs[e]
        for m in range(1, top + 1):
            acc += c[m - 1] * f[e - m]
        f[e] = acc / denom
