"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times a 10 000-trial coverage study under each backend (run in a
subprocess, since the backend is fixed at import time).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from casimir_stats import _kernels

MC_SNIPPET = (
    "import time;from casimir_stats.synth_mc import SyntheticScenario, coverage_study;"
    "t=time.perf_counter();r=coverage_study(SyntheticScenario(),10000);"
    "print(f'{time.perf_counter()-t:.3f} {r.coverage:.5f}')"
)


def bench(label, fast, slow, repeat):
    fast()  # compile
    tf = min(timeit.repeat(fast, number=1, repeat=repeat))
    ts = min(timeit.repeat(slow, number=1, repeat=repeat))
    print(f"{label:<28} numba {tf * 1e3:9.2f} ms   numpy {ts * 1e3:9.2f} ms   x{ts / tf:6.1f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-mc", action="store_true")
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba disabled; unset CASIMIR_STATS_DISABLE_NUMBA")

    rng = np.random.default_rng(0)
    n = 200_000
    ids = np.sort(rng.integers(0, 20_000, n))
    vals = rng.normal(size=n)
    bench("group_stats 200k/20k", lambda: _kernels._group_stats_nb(vals, ids, 20_000),
          lambda: _kernels._group_stats_np(vals, ids, 20_000), args.repeat)

    var = rng.exponential(size=(2_000, 41))
    starts = np.clip(np.arange(41) - 2, 0, 36)
    out = np.empty((2_000, 41))
    bench("smooth_windows 2000x41 N=5",
          lambda: _kernels._smooth_windows_2d(var, starts, 5, out),
          lambda: _kernels._smooth_windows_np(var, starts, 5), args.repeat)

    big = rng.exponential(size=50_000)
    st = np.clip(np.arange(50_000) - 14, 0, 50_000 - 30)
    out1 = np.empty(50_000)
    bench("smooth_windows 50k N=30", lambda: _kernels._smooth_row(big, st, 30, out1),
          lambda: _kernels._smooth_windows_np(big, st, 30), args.repeat)

    samples = rng.normal(size=(1_000, 14, 41))
    m, v = np.empty((1_000, 41)), np.empty((1_000, 41))
    bench("pointwise_stats 1000x14x41", lambda: _kernels._pointwise_stats_3d(samples, m, v),
          lambda: _kernels._pointwise_stats_np(samples), args.repeat)

    if not args.no_mc:
        for flag in ("", "1"):
            env = dict(os.environ, CASIMIR_STATS_DISABLE_NUMBA=flag)
            res = subprocess.run([sys.executable, "-c", MC_SNIPPET], env=env,
                                 capture_output=True, text=True, check=True)
            secs, cov = res.stdout.split()
            print(f"coverage study 10k trials ({'numpy' if flag else 'numba'}): {secs} s, coverage {cov}")


if __name__ == "__main__":
    main()
