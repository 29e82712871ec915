"""Compare the numba and numpy backends of the hot kernels.

    python3 benchmarks/bench_kernels.py [--batch 20000] [--repeat 5]

Reports best-of-repeat wall time per backend and the largest disagreement.
"""

import argparse
import time

import numpy as np

from rankembed import _kernels
from rankembed.symmetric import build_an_embedding


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba disabled (RANKEMBED_DISABLE_NUMBA set or numba missing); nothing to compare")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'numba s':>12}{'numpy s':>12}{'speedup':>10}{'max rel diff':>15}")
    for n in (1, 2, 3, 5):
        E = build_an_embedding(n)
        t = rng.uniform(-20, 20, (args.batch, n))
        s = rng.uniform(-5, 5, (args.batch, n))
        xs = t @ E.x_float
        _kernels.an_distance_batch(xs[:2], s[:2], E.tables, backend="numba")  # compile
        tn, dn = best_of(lambda: _kernels.an_distance_batch(xs, s, E.tables, backend="numba"), args.repeat)
        tp, dp = best_of(lambda: _kernels.an_distance_batch(xs, s, E.tables, backend="numpy"), args.repeat)
        diff = float(np.max(np.abs(dn - dp) / np.maximum(1.0, dp)))
        print(f"{f'an_distance_batch n={n}':<28}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}{diff:>15.2e}")

    m = 6
    mats = [(lambda a: a + a.T)(rng.standard_normal((m, m))) for _ in range(2000)]
    _kernels._jacobi_eigvalsh_nb(mats[0])
    tn, en = best_of(lambda: [_kernels._jacobi_eigvalsh_nb(a) for a in mats], args.repeat)
    tp, ep = best_of(lambda: [_kernels._jacobi_eigvalsh_py(a) for a in mats], 1)
    diff = max(float(np.max(np.abs(np.sort(a) - np.sort(b)))) for a, b in zip(en, ep))
    print(f"{'jacobi_eigvalsh 6x6 x2000':<28}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
