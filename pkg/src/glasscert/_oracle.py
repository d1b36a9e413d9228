"""Numba kernels of the fixed-step integration oracle.

Kept apart so that importing the package does not pull in numba.
"""

import numpy as np

from numba import njit


@njit(cache=True)
def _flat_domain(x, levels, nthr, strides):
    flat = 0
    for i in range(x.shape[0]):
        k = 0
        for m in range(nthr[i]):
            th = levels[i, m]
            if x[i] == th:
                return -1
            if x[i] > th:
                k += 1
        flat += k * strides[i]
    return flat


@njit(cache=True)
def _rk4(x, kap, gamma, h):
    k1 = kap - gamma * x
    k2 = kap - gamma * (x + 0.5 * h * k1)
    k3 = kap - gamma * (x + 0.5 * h * k2)
    k4 = kap - gamma * (x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _near_codim2(x, levels, nthr, eps):
    close = 0
    for i in range(x.shape[0]):
        for m in range(nthr[i]):
            if abs(x[i] - levels[i, m]) <= eps:
                close += 1
                break
    return close >= 2


@njit(cache=True)
def oracle_kernel(x0, levels, nthr, strides, kappa_table, gamma, nsteps, h, record_every,
                   max_cross, bisections, singular_eps):
    n = x0.shape[0]
    nrec = nsteps // record_every + 1
    rec = np.empty((nrec, n))
    cross_t = np.empty(max_cross)
    cross_d = np.empty(max_cross, dtype=np.int64)
    cross_x = np.empty((max_cross, n))
    ncross = 0
    x = x0.copy()
    d = _flat_domain(x, levels, nthr, strides)
    if d < 0:
        return rec, cross_t, cross_d, cross_x, 0, 1
    rec[0] = x
    r = 1
    for step in range(nsteps):
        done = 0.0
        while True:
            kap = kappa_table[d]
            rest = 1.0 - done
            y = _rk4(x, kap, gamma, rest * h)
            dy = _flat_domain(y, levels, nthr, strides)
            if dy == d:
                x = y
                break
            if dy < 0:
                return rec, cross_t, cross_d, cross_x, ncross, 1
            lo = 0.0
            hi = rest
            for _ in range(bisections):
                mid = 0.5 * (lo + hi)
                ym = _rk4(x, kap, gamma, mid * h)
                dm = _flat_domain(ym, levels, nthr, strides)
                # a midpoint rounding onto the threshold counts as not yet crossed
                if dm == d or dm < 0:
                    lo = mid
                else:
                    hi = mid
            x = _rk4(x, kap, gamma, hi * h)
            d = _flat_domain(x, levels, nthr, strides)
            if d < 0:
                return rec, cross_t, cross_d, cross_x, ncross, 1
            if ncross < max_cross:
                cross_t[ncross] = (step + done + hi) * h
                cross_d[ncross] = d
                cross_x[ncross] = x
            ncross += 1
            done += hi
            if _near_codim2(x, levels, nthr, singular_eps):
                # hold the state from here on, like the exact solver
                while r < nrec:
                    rec[r] = x
                    r += 1
                return rec, cross_t, cross_d, cross_x, ncross, 2
            if done >= 1.0:
                break
        if (step + 1) % record_every == 0:
            rec[r] = x
            r += 1
    return rec, cross_t, cross_d, cross_x, ncross, 0
