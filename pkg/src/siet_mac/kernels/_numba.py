"""Loop kernels compiled with numba; same contracts as ``_numpy``."""

import math

import numpy as np
from numba import njit

_jit = njit(cache=True, nogil=True)


@_jit
def energy_max_batch(betas, snr2):
    n, k = betas.shape
    out = np.empty(n)
    base = 1.0 + snr2.sum()
    a = np.empty(k)
    for r in range(n):
        for j in range(k):
            rest = 1.0 - betas[r, j]
            a[j] = rest * snr2[j] if rest > 0.0 else 0.0
        cross = 0.0
        for i in range(k - 1):
            for j in range(i + 1, k):
                cross += math.sqrt(a[i] * a[j])
        out[r] = base + 2.0 * cross
    return out


@_jit
def capacity_violation_batch(betas, snr1, masks, sum_rates):
    n, k = betas.shape
    m = masks.shape[0]
    out = np.empty(n)
    x = np.empty(k)
    for r in range(n):
        for j in range(k):
            x[j] = betas[r, j] * snr1[j]
        worst = -np.inf
        for u in range(m):
            s = 0.0
            for j in range(k):
                if masks[u, j] != 0.0:
                    s += x[j]
            v = sum_rates[u] - 0.5 * math.log2(1.0 + s)
            if v > worst:
                worst = v
        out[r] = worst
    return out


@_jit
def sud_rates_batch(betas, snr1):
    n, k = betas.shape
    out = np.empty((n, k))
    for r in range(n):
        total = 0.0
        for j in range(k):
            total += betas[r, j] * snr1[j]
        for j in range(k):
            xj = betas[r, j] * snr1[j]
            out[r, j] = 0.5 * math.log2(1.0 + xj / (1.0 + total - xj))
    return out


@_jit
def sic_rates_batch(betas, snr1, order):
    n, k = betas.shape
    out = np.empty((n, k))
    for r in range(n):
        later = 0.0
        for pos in range(k - 1, -1, -1):
            u = order[pos]
            xu = betas[r, u] * snr1[u]
            out[r, u] = 0.5 * math.log2(1.0 + xu / (1.0 + later))
            later += xu
    return out


@_jit
def harvested_energy(w, v, g, coef_w, coef_v, sigma2):
    k, n = v.shape
    cw = 0.0
    for i in range(k):
        cw += coef_w[i]
    acc = 0.0
    for t in range(n):
        y = cw * w[t] + sigma2 * g[t]
        for i in range(k):
            y += coef_v[i] * v[i, t]
        acc += y * y
    return acc / (n * sigma2 * sigma2)
