"""Time the numpy and numba kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from siet_mac.kernels import _numpy

try:
    from siet_mac.kernels import _numba
except ImportError:
    _numba = None


def _cases(rng):
    k = 3
    betas = rng.random((20_000, k))
    snr1 = rng.uniform(0.1, 100, k)
    snr2 = rng.uniform(0.1, 100, k)
    masks = np.array([[(m >> i) & 1 for i in range(k)] for m in range(1, 2**k)], dtype=float)
    sums = np.linspace(0.1, 2.0, masks.shape[0])
    order = np.array([2, 0, 1], dtype=np.intp)
    n = 100_000
    w, g = rng.standard_normal(n), rng.standard_normal(n)
    v = rng.standard_normal((k, n))
    cw, cv = rng.random(k), rng.random(k)
    return {
        "energy_max_batch": (betas, snr2),
        "capacity_violation_batch": (betas, snr1, masks, sums),
        "sud_rates_batch": (betas, snr1),
        "sic_rates_batch": (betas, snr1, order),
        "harvested_energy": (w, v, g, cw, cv, 1.0),
    }


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, inputs in cases.items():
        t_np = _best(getattr(_numpy, name), inputs, args.repeat)
        if _numba is None:
            print(f"{name:28s} {t_np * 1e3:10.3f} {'n/a':>10s}")
            continue
        fn = getattr(_numba, name)
        fn(*inputs)  # compile
        t_nb = _best(fn, inputs, args.repeat)
        print(f"{name:28s} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
