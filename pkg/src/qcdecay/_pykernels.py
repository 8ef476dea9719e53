"""Pure numpy implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` module; see ``qcdecay.kernels``.
"""
import numpy as np

BISECT_REL = 1e-3
NEWTON_REL = 1e-13
MAX_NEWTON = 100
_CHUNK = 1 << 21


def _secular(tau, shift, delta, c):
    # f(tau) = tau + shift - sum c / (tau - delta), f' = 1 + sum c / (tau - delta)^2
    d = tau[:, None] - delta
    q = c / d
    f = tau + shift - q.sum(axis=1)
    fp = 1.0 + (q / d).sum(axis=1)
    return f, fp


def _solve_chunk(idx, poles, c, level, lo_ext, hi_ext):
    n = poles.size
    m = idx.size
    origin = np.empty(m)
    a = np.empty(m)
    b = np.empty(m)
    interior = (idx > 0) & (idx < n)
    left_ext = idx == 0
    right_ext = idx == n
    # exterior roots: shift to the adjacent pole
    origin[left_ext] = poles[0]
    a[left_ext] = lo_ext - poles[0]
    b[left_ext] = 0.0
    origin[right_ext] = poles[-1]
    a[right_ext] = 0.0
    b[right_ext] = hi_ext - poles[-1]
    if interior.any():
        ii = idx[interior]
        left = poles[ii - 1]
        right = poles[ii]
        mid = 0.5 * (right - left)
        delta = poles[None, :] - left[:, None]
        f_mid, _ = _secular(mid, left - level, delta, c)
        use_left = f_mid >= 0.0
        o = np.where(use_left, left, right)
        origin[interior] = o
        a[interior] = np.where(use_left, 0.0, left + mid - right)
        b[interior] = np.where(use_left, mid, 0.0)
    delta = poles[None, :] - origin[:, None]
    shift = origin - level
    width0 = b - a
    # bisection to BISECT_REL of the initial bracket
    while True:
        active = (b - a) > BISECT_REL * width0
        if not active.any():
            break
        mid = 0.5 * (a + b)
        f, _ = _secular(mid, shift, delta, c)
        neg = f < 0.0
        a = np.where(active & neg, mid, a)
        b = np.where(active & ~neg, mid, b)
    tau = 0.5 * (a + b)
    done = np.zeros(m, dtype=bool)
    for _ in range(MAX_NEWTON):
        f, fp = _secular(tau, shift, delta, c)
        neg = f < 0.0
        a = np.where(neg & ~done, tau, a)
        b = np.where(~neg & ~done, tau, b)
        step = f / fp
        new = tau - step
        conv = (np.abs(step) <= NEWTON_REL * np.abs(tau)) | (new == tau)
        # converged steps are accepted unguarded; the bracket edge may equal tau
        bad = ~((new > a) & (new < b)) & ~conv
        new = np.where(bad, 0.5 * (a + b), new)
        tau = np.where(done, tau, new)
        done |= conv
        if done.all():
            break
    _, fp = _secular(tau, shift, delta, c)
    return origin + tau, 1.0 / fp


def secular_roots(poles, c, level):
    """Eigenvalues and overlap weights of a bordered diagonal matrix.

    ``poles`` strictly increasing, ``c`` the positive squared couplings.
    Returns ``len(poles) + 1`` sorted roots of
    ``w - level = sum c / (w - poles)`` and weights ``1 / f'(w)``.
    """
    poles = np.ascontiguousarray(poles, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    n = poles.size
    if n == 0:
        return np.array([float(level)]), np.array([1.0])
    s = np.sqrt(c.sum())
    lo_ext = min(level, poles[0]) - s
    hi_ext = max(level, poles[-1]) + s
    roots = np.empty(n + 1)
    weights = np.empty(n + 1)
    step = max(1, _CHUNK // n)
    for start in range(0, n + 1, step):
        idx = np.arange(start, min(start + step, n + 1))
        r, w = _solve_chunk(idx, poles, c, float(level), lo_ext, hi_ext)
        roots[idx] = r
        weights[idx] = w
    return roots, weights


def resolvent_sums(x, energies, c, eps):
    """Sum_j c_j (x - E_j) / ((x - E_j)^2 + eps^2) and sum_j c_j / (...)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    re = np.empty(x.size)
    im = np.empty(x.size)
    step = max(1, _CHUNK // max(energies.size, 1))
    e2 = eps * eps
    for s in range(0, x.size, step):
        d = x[s:s + step, None] - energies[None, :]
        q = c / (d * d + e2)
        re[s:s + step] = (q * d).sum(axis=1)
        im[s:s + step] = q.sum(axis=1)
    return re, im


def lorentz_sum(x, omega, w, eps):
    """Sum_nu w_nu / ((x - omega_nu)^2 + eps^2) on a grid."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.size)
    step = max(1, _CHUNK // max(omega.size, 1))
    e2 = eps * eps
    for s in range(0, x.size, step):
        d = x[s:s + step, None] - omega[None, :]
        out[s:s + step] = (w / (d * d + e2)).sum(axis=1)
    return out


def survival_sum(t, omega, w):
    """Sum_nu w_nu exp(-i t omega_nu); returns (real, imag)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    re = np.empty(t.size)
    im = np.empty(t.size)
    step = max(1, _CHUNK // max(omega.size, 1))
    for s in range(0, t.size, step):
        ph = t[s:s + step, None] * omega[None, :]
        re[s:s + step] = (w * np.cos(ph)).sum(axis=1)
        im[s:s + step] = -(w * np.sin(ph)).sum(axis=1)
    return re, im
