"""Compare the numba and numpy kernels on inputs taken from a real construction.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--end-to-end]

Per-kernel timings are best-of-N after a warm-up call (so numba compile time
is excluded).  ``--end-to-end`` also times ``knotwave verify --family tau-quad``
in fresh interpreters with KNOTWAVE_NUMBA=1 and =0.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from knotwave import kernels
from knotwave import tau_wavelets as tw
from knotwave.piecewise import Stack


def _best(fn, args, repeat):
    fn(*args)  # warm-up / compile
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def kernel_inputs():
    B = tw.quad_tau_level(1, tw.DEFAULT_TOP).basis
    funcs = B.functions()
    st = Stack.of(funcs)
    coeffs = np.ascontiguousarray(st.coeffs)
    lo, hi = kernels.piece_ranges(coeffs)
    grid = st.grid
    w = np.ascontiguousarray(st.weights())
    x = np.linspace(grid[0], grid[-1], 20001)
    fine = np.union1d(grid, 0.5 * (grid[:-1] + grid[1:]))
    one = np.ascontiguousarray(coeffs[0])
    return {
        "gram": (coeffs, coeffs, w, lo, hi, lo, hi),
        "evaluate": (coeffs, grid, x),
        "rebase": (one, grid, fine),
        "shift_matrices": (np.linspace(-0.5, 0.5, 64), np.full(64, 0.5), coeffs.shape[2]),
    }


def run_kernels(repeat: int):
    inputs = kernel_inputs()
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, args in inputs.items():
        f_np = kernels.IMPLEMENTATIONS["numpy"][name]
        f_nb = kernels.IMPLEMENTATIONS["numba"][name]
        diff = float(np.max(np.abs(np.asarray(f_np(*args)) - np.asarray(f_nb(*args)))))
        t_np = _best(f_np, args, repeat)
        t_nb = _best(f_nb, args, repeat)
        print(f"{name:<16}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.2f}{diff:>14.2e}")


def run_end_to_end():
    print("\nend to end: knotwave verify --family tau-quad")
    for flag in ("1", "0"):
        env = dict(os.environ, KNOTWAVE_NUMBA=flag)
        t = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "knotwave", "verify", "--family", "tau-quad"], env=env, capture_output=True, text=True)
        wall = time.perf_counter() - t
        print(f"  KNOTWAVE_NUMBA={flag}: exit {proc.returncode}, wall {wall:.2f} s (includes import and any compilation)")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--end-to-end", action="store_true")
    ns = p.parse_args(argv)
    print(f"active backend in this process: {kernels.BACKEND}\n")
    run_kernels(ns.repeat)
    if ns.end_to_end:
        run_end_to_end()


if __name__ == "__main__":
    main()
