"""Time the numba kernels against their numpy fallbacks on LTE-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from specord import _kernels


def _inputs(rng):
    k, nt, nr, n, m = 600, 2, 2, 50, 8
    h = (rng.standard_normal((n, k, nr, nt)) + 1j * rng.standard_normal((n, k, nr, nt))) / np.sqrt(2)
    w, _ = np.linalg.qr(rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m)))
    z = np.conj(w)[:, :, None] * w[:, None, :]
    _, q = _kernels.tone_stats_np(h, 10.0)
    x = rng.standard_normal((k, 64)) + 1j * rng.standard_normal((k, 64))
    return {
        "tone_stats": (h, 10.0),
        "deflation_logdet": (z, q, 10.0),
        "reflector_apply": (w, np.eye(m, dtype=complex), x),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    args_for = _inputs(np.random.default_rng(0))
    if not _kernels.NUMBA_KERNELS:
        print("numba unavailable; only the numpy path can be timed")
    print(f"{'kernel':<18}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}  max |diff|")
    for name, a in args_for.items():
        f_np = _kernels.NUMPY_KERNELS[name]
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat)) * 1e3
        f_nb = _kernels.NUMBA_KERNELS.get(name)
        if f_nb is None:
            print(f"{name:<18}{t_np:>10.2f}")
            continue
        f_nb(*a)  # compile
        t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat)) * 1e3
        r_np, r_nb = f_np(*a), f_nb(*a)
        if isinstance(r_np, tuple):
            diff = max(np.abs(x - y).max() for x, y in zip(r_np, r_nb))
        else:
            diff = np.abs(r_np - r_nb).max()
        print(f"{name:<18}{t_np:>10.2f}{t_nb:>10.2f}{t_np / t_nb:>8.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
