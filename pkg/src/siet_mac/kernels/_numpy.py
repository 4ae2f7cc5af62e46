"""Vectorized numpy kernels.

Reference path; the numba backend must agree with it to rounding.
"""

import numpy as np


def energy_max_batch(betas, snr2):
    # expanded form 1 + sum(s) + 2 sum_{i<j} sqrt(a_i a_j), a = (1 - beta) s:
    # exact at beta = 1 and identical to b_coop at beta = 0
    a = np.clip(1.0 - betas, 0.0, None) * snr2
    k = snr2.size
    cross = np.zeros(betas.shape[0])
    for i in range(k - 1):
        cross += np.sqrt(a[:, i : i + 1] * a[:, i + 1 :]).sum(axis=1)
    return (1.0 + snr2.sum()) + 2.0 * cross


def capacity_violation_batch(betas, snr1, masks, sum_rates):
    """Worst subset-rate violation for every row of ``betas``.

    ``masks`` is an (M, K) 0/1 matrix of user subsets and ``sum_rates`` the
    requested sum rate of each subset.  Returns ``max_U (R_U - bound_U)``.
    """
    x = betas * snr1
    bound = 0.5 * np.log2(1.0 + x @ masks.T)
    return (sum_rates[None, :] - bound).max(axis=1)


def sud_rates_batch(betas, snr1):
    x = betas * snr1
    interference = 1.0 + x.sum(axis=1, keepdims=True) - x
    return 0.5 * np.log2(1.0 + x / interference)


def sic_rates_batch(betas, snr1, order):
    x = betas * snr1
    xs = x[:, order]
    # interference seen by the i-th decoded user: everyone decoded after it
    later = np.cumsum(xs[:, ::-1], axis=1)[:, ::-1] - xs
    rates_sorted = 0.5 * np.log2(1.0 + xs / (1.0 + later))
    rates = np.empty_like(rates_sorted)
    rates[:, order] = rates_sorted
    return rates


def harvested_energy(w, v, g, coef_w, coef_v, sigma2):
    """Empirical energy rate of one block, normalized by the noise variance.

    Output of the harvester: ``y_t = sum_i coef_w[i] w_t + coef_v[i] v[i, t]
    + sigma2 * g_t`` with standard normal ``w``, ``v`` and ``g``.
    """
    y = coef_w.sum() * w + coef_v @ v + sigma2 * g
    return float(np.dot(y, y)) / (y.size * sigma2 * sigma2)
