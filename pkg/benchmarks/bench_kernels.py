"""Benchmark: compiled stepping kernels vs the numpy fallback.

Runs each kernel on a representative workload, reports wall time per
trajectory, the speedup, and the worst coordinate disagreement between
the two backends.

    python benchmarks/bench_kernels.py [n_repeats]
"""
import math
import sys
import time

import numpy as np

from catflow import _kernels
from catflow._kernels import _fallback


def timed(fn, repeats):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, compiled_fn, fallback_fn, repeats, extract=lambda r: r):
    t_c, r_c = timed(compiled_fn, repeats) if _kernels.has_compiled() else (math.nan, None)
    t_p, r_p = timed(fallback_fn, repeats)
    if r_c is not None:
        dev = float(np.max(np.abs(extract(r_c) - extract(r_p))))
        speedup = t_p / t_c
    else:
        dev = math.nan
        speedup = math.nan
    print(f"{name:<22} compiled {t_c * 1e3:9.2f} ms   python {t_p * 1e3:9.2f} ms"
          f"   speedup {speedup:6.1f}x   max dev {dev:.2e}")


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    n = 1571  # pi/2 at delta = 1e-3
    ts = np.linspace(0.0, math.pi / 2, n)
    meridian = np.column_stack([np.sin(ts), np.zeros(n), np.cos(ts)])
    p0_sphere = np.array([0.0, math.sin(1.2), math.cos(1.2)])

    line_ts = np.linspace(0.0, 5.0, 5001)
    gamma_line = line_ts[:, None]

    arc_start = np.array([0.0, 0.0, 1.0])
    arc_tan = np.array([1.0, 0.0, 0.0])

    x = np.array([0.2, 0.3, 0.93])
    x /= np.linalg.norm(x)
    y = np.array([-0.4, 0.1, 0.9])
    y /= np.linalg.norm(y)
    x6 = np.concatenate([x, y]) / math.sqrt(2.0)
    pole = np.array([0.0, 0.0, 1.0])

    print(f"kernel backend available: compiled={_kernels.has_compiled()}")
    bench("sphere_tractrix",
          lambda: _kernels._compiled.sphere_tractrix(meridian, p0_sphere, math.pi / 2, 1.0),
          lambda: _fallback.sphere_tractrix(meridian, p0_sphere, math.pi / 2, 1.0),
          repeats)
    bench("euclidean_tractrix",
          lambda: _kernels._compiled.euclidean_tractrix(gamma_line, np.array([0.0]), 1.0),
          lambda: _fallback.euclidean_tractrix(gamma_line, np.array([0.0]), 1.0),
          repeats)
    args = (p0_sphere, arc_start, arc_tan, 1.0, math.pi / 2, 0.0, math.pi / 2, ts, 101)
    bench("arc_glued_tractrix",
          lambda: _kernels._compiled.arc_glued_tractrix(*args),
          lambda: _fallback.arc_glued_tractrix(*args),
          repeats, extract=lambda r: r[0])
    bench("psi_glued_tractrix",
          lambda: _kernels._compiled.psi_glued_tractrix(x6, pole, math.pi / 2, ts),
          lambda: _fallback.psi_glued_tractrix(x6, pole, math.pi / 2, ts),
          repeats, extract=lambda r: r[0])


if __name__ == "__main__":
    main()
