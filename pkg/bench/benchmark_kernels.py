#!/usr/bin/env python3
"""Time the compiled and pure-numpy integration kernels on the same run.

The workload is the default optical-pumping scenario: the full 36-equation
master equation integrated from uniform populations to t_end with dense
sampling.  The first compiled call includes (cached) JIT compilation and is
reported separately.
"""

import argparse
import time

import numpy as np

from eitsim import bloch, kernels
from eitsim.materials import N_LEVELS, pryso_defaults
from eitsim.optics import DriveSet
from eitsim.states import mixed_state


def build_problem(t_end: float, samples: int):
    mat = pryso_defaults()
    drives = DriveSet(probe_rabi=1.5e3, coupling_rabi=1.5e6, aux_rabi=1.5e6)
    ham = bloch.build_hamiltonian(N_LEVELS, drives.field_drives(0.0))
    lv = bloch.build_liouvillian(ham, mat.levels, mat.gamma)
    y0 = mixed_state(N_LEVELS).matrix.reshape(-1)
    t_samples = np.linspace(0.0, t_end, samples)
    return lv.generator, y0, t_samples


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        times.append(time.perf_counter() - started)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-end", type=float, default=10e-3,
                        help="integration horizon in seconds (default 10e-3)")
    parser.add_argument("--samples", type=int, default=201,
                        help="dense output samples (default 201)")
    parser.add_argument("--tol", type=float, default=1e-9,
                        help="relative tolerance (default 1e-9)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of (default 5)")
    args = parser.parse_args()

    gen, y0, t_samples = build_problem(args.t_end, args.samples)
    rtol, atol = args.tol, 1e-3 * args.tol

    out_np, status, n_steps, _ = kernels.integrate_numpy(
        gen, y0, t_samples, rtol, atol)
    print(f"problem: {gen.shape[0]} equations, {n_steps} accepted steps, "
          f"status {status}")

    t_numpy = best_of(
        lambda: kernels.integrate_numpy(gen, y0, t_samples, rtol, atol),
        args.repeats)
    print(f"numpy kernel:  {t_numpy:8.4f} s")

    try:
        started = time.perf_counter()
        out_nb = kernels.integrate_numba(gen, y0, t_samples, rtol, atol)[0]
        first = time.perf_counter() - started
    except Exception as exc:  # numba not importable in this interpreter
        print(f"numba kernel:  unavailable ({exc})")
        return 0

    t_numba = best_of(
        lambda: kernels.integrate_numba(gen, y0, t_samples, rtol, atol),
        args.repeats)
    agreement = float(np.max(np.abs(out_nb - out_np)))
    print(f"numba kernel:  {t_numba:8.4f} s  "
          f"(first call {first:.4f} s incl. compilation)")
    print(f"speedup:       {t_numpy / t_numba:8.2f} x")
    print(f"max |numba - numpy| over all samples: {agreement:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
