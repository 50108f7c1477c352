"""Time the TDSE hot loops with the numba kernels and with the numpy/scipy fallback.

    python benchmarks/bench_kernels.py [--steps 2000] [--lmax 20] [--rmax 200]
"""

import argparse
import time

import numpy as np

from sfagauge.field import PulseParams
from sfagauge.tdse import CutCoulomb, RadialGrid, initial_state, radial_operator
from sfagauge.tdse.kernels import Stepper, regular_solutions
from sfagauge.tdse.solver import dipole_couplings


def bench_stepper(backend, grid, l_max, steps):
    pot = CutCoulomb(1.0563, 2.0)
    ops = [radial_operator(pot, l, grid) for l in range(l_max + 1)]
    psi = initial_state(pot, 0, grid, l_max).coefficients.copy()
    stepper = Stepper(ops, grid.r, dipole_couplings(l_max), 0.025, grid.mask(), grid.dr, backend=backend)
    field = PulseParams().electric_field(0.025 * (np.arange(steps) + 0.5) + 100.0)
    stepper(psi, field[0])  # warm-up / compile
    t0 = time.perf_counter()
    for f in field:
        stepper(psi, f)
    return time.perf_counter() - t0, float(np.sum(np.abs(psi) ** 2) * grid.dr)


def bench_continuum(backend, grid, n_energies):
    op = radial_operator(CutCoulomb(1.0563, 2.0), 0, grid)
    e = np.linspace(0.01, 1.2, n_energies)
    regular_solutions(op, e[:2], backend=backend)
    t0 = time.perf_counter()
    regular_solutions(op, e, backend=backend)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--lmax", type=int, default=20)
    ap.add_argument("--rmax", type=float, default=200.0)
    ap.add_argument("--energies", type=int, default=500)
    args = ap.parse_args()
    grid = RadialGrid.from_extent(0.1, args.rmax)
    print(f"grid n_r={grid.n_r}, l_max={args.lmax}, {args.steps} steps, {args.energies} continuum energies")
    rows = {}
    for backend in ("numba", "numpy"):
        dt, norm = bench_stepper(backend, grid, args.lmax, args.steps)
        dc = bench_continuum(backend, grid, args.energies)
        rows[backend] = (dt, dc)
        print(f"{backend:6s} propagate {dt:8.3f} s ({1e3 * dt / args.steps:.3f} ms/step, norm {norm:.12f})"
              f"   continuum {dc:8.3f} s")
    print(f"speed-up numba/numpy: propagate x{rows['numpy'][0] / rows['numba'][0]:.1f}, "
          f"continuum x{rows['numpy'][1] / rows['numba'][1]:.1f}")


if __name__ == "__main__":
    main()
