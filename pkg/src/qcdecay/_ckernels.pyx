# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Mirrors ``qcdecay._pykernels`` one to one."""
import numpy as np
cimport cython
from cython.parallel cimport prange
from libc.math cimport sqrt, fabs, cos, sin

cdef double BISECT_REL = 1e-3
cdef double NEWTON_REL = 1e-13
cdef int MAX_NEWTON = 100

_num_threads = 1


def set_num_threads(int n):
    global _num_threads
    _num_threads = max(1, n)


cdef inline void _secular(double tau, double shift, const double[::1] poles,
                          const double[::1] c, double origin,
                          double* f, double* fp) noexcept nogil:
    cdef Py_ssize_t k, n = poles.shape[0]
    cdef double d, q, s = 0.0, sp = 0.0
    for k in range(n):
        d = tau - (poles[k] - origin)
        q = c[k] / d
        s += q
        sp += q / d
    f[0] = tau + shift - s
    fp[0] = 1.0 + sp


cdef void _solve_one(Py_ssize_t i, const double[::1] poles, const double[::1] c,
                     double level, double lo_ext, double hi_ext,
                     double* root, double* weight) noexcept nogil:
    cdef Py_ssize_t n = poles.shape[0]
    cdef double origin, a, b, mid, f, fp, width0, tau, step, new, left, right
    cdef int it
    if i == 0:
        origin = poles[0]
        a = lo_ext - origin
        b = 0.0
    elif i == n:
        origin = poles[n - 1]
        a = 0.0
        b = hi_ext - origin
    else:
        left = poles[i - 1]
        right = poles[i]
        mid = 0.5 * (right - left)
        _secular(mid, left - level, poles, c, left, &f, &fp)
        if f >= 0.0:
            origin = left
            a = 0.0
            b = mid
        else:
            origin = right
            a = left + mid - right
            b = 0.0
    width0 = b - a
    while (b - a) > BISECT_REL * width0:
        mid = 0.5 * (a + b)
        _secular(mid, origin - level, poles, c, origin, &f, &fp)
        if f < 0.0:
            a = mid
        else:
            b = mid
    tau = 0.5 * (a + b)
    for it in range(MAX_NEWTON):
        _secular(tau, origin - level, poles, c, origin, &f, &fp)
        if f < 0.0:
            a = tau
        else:
            b = tau
        step = f / fp
        new = tau - step
        if fabs(step) <= NEWTON_REL * fabs(tau) or new == tau:
            # accepted unguarded: the bracket edge may equal tau here
            tau = new
            break
        if not (new > a and new < b):
            new = 0.5 * (a + b)
        tau = new
    _secular(tau, origin - level, poles, c, origin, &f, &fp)
    root[0] = origin + tau
    weight[0] = 1.0 / fp


def secular_roots(poles, c, double level):
    cdef const double[::1] p = np.ascontiguousarray(poles, dtype=np.float64)
    cdef const double[::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i
    if n == 0:
        return np.array([level]), np.array([1.0])
    cdef double s = 0.0
    for i in range(n):
        s += cc[i]
    s = sqrt(s)
    cdef double lo_ext = min(level, p[0]) - s
    cdef double hi_ext = max(level, p[n - 1]) + s
    roots = np.empty(n + 1)
    weights = np.empty(n + 1)
    cdef double[::1] r = roots
    cdef double[::1] w = weights
    cdef int nt = _num_threads
    for i in prange(n + 1, nogil=True, schedule="static", num_threads=nt):
        _solve_one(i, p, cc, level, lo_ext, hi_ext, &r[i], &w[i])
    return roots, weights


def resolvent_sums(x, energies, c, double eps):
    cdef const double[::1] xx = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(energies, dtype=np.float64)
    cdef const double[::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t m = xx.shape[0], n = e.shape[0], i, j
    re = np.empty(m)
    im = np.empty(m)
    cdef double[::1] r = re
    cdef double[::1] q = im
    cdef double e2 = eps * eps, d, t, sr, si
    cdef int nt = _num_threads
    for i in prange(m, nogil=True, schedule="static", num_threads=nt):
        sr = 0.0
        si = 0.0
        for j in range(n):
            d = xx[i] - e[j]
            t = cc[j] / (d * d + e2)
            sr = sr + t * d
            si = si + t
        r[i] = sr
        q[i] = si
    return re, im


def lorentz_sum(x, omega, w, double eps):
    cdef const double[::1] xx = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef const double[::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = xx.shape[0], n = om.shape[0], i, j
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double e2 = eps * eps, d, s
    cdef int nt = _num_threads
    for i in prange(m, nogil=True, schedule="static", num_threads=nt):
        s = 0.0
        for j in range(n):
            d = xx[i] - om[j]
            s = s + ww[j] / (d * d + e2)
        o[i] = s
    return out


def survival_sum(t, omega, w):
    cdef const double[::1] tt = np.ascontiguousarray(np.atleast_1d(t), dtype=np.float64)
    cdef const double[::1] om = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = tt.shape[0], n = om.shape[0], i, j
    re = np.empty(m)
    im = np.empty(m)
    cdef double[::1] r = re
    cdef double[::1] q = im
    cdef double ph, sr, si
    cdef int nt = _num_threads
    for i in prange(m, nogil=True, schedule="static", num_threads=nt):
        sr = 0.0
        si = 0.0
        for j in range(n):
            ph = tt[i] * om[j]
            sr = sr + ww[j] * cos(ph)
            si = si - ww[j] * sin(ph)
        r[i] = sr
        q[i] = si
    return re, im
