#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the three hot kernels on paper-sized inputs (360 angles x 201 times,
and 360 log-linear fits of 51 samples) and checks both paths agree.

Usage:
    python benchmarks/bench_kernels.py [--angles N] [--times T] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from condemit import kernels
from condemit._accel import HAVE_NUMBA
from condemit.correlations import conditioned_coherences, detection_coefficients
from condemit.coupling import find_pair, pair_couplings
from condemit.geometry import AtomEnsemble, dipole_factors, geometric_phases


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--angles", type=int, default=360)
    ap.add_argument("--times", type=int, default=201)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    ens = AtomEnsemble.paper_geometry()
    cpl = pair_couplings(ens)
    p1, p2 = 2 * np.pi / 3, np.pi / 4.4
    angles = np.linspace(0, 2 * np.pi, args.angles, endpoint=False)
    times = np.linspace(0, 5, args.times)

    coeffs = detection_coefficients(ens, p1, p2)
    ph = geometric_phases(ens, angles)
    d23, d33 = ph[:, 1] - ph[:, 0], ph[:, 2] - ph[:, 0]
    sin2a = dipole_factors(ens, angles) ** 2
    c12 = find_pair(cpl)
    arg_sg, arg_ag = coeffs._relative_args()
    cf_args = (abs(coeffs.c_Ge), abs(coeffs.c_Sg), abs(coeffs.c_Ag), arg_sg, arg_ag,
               coeffs.detector_weight, d23, d33, sin2a, times, 1.0, c12.delta_gamma, c12.delta_omega)

    coh = conditioned_coherences(ens, cpl, p1, p2, times)
    fac = dipole_factors(ens, angles)

    fit_t = np.linspace(0, 0.5, 51)
    fit_y = np.exp(-np.outer(np.linspace(0.5, 4, args.angles), fit_t))

    cases = [
        ("closed_form_g3", kernels.closed_form_g3_np, kernels.closed_form_g3_nb, cf_args),
        ("field_quadratic_form", kernels.field_quadratic_form_np, kernels.field_quadratic_form_nb,
         (coh, ph, fac)),
        ("loglinear_fit", kernels.loglinear_fit_np, kernels.loglinear_fit_nb, (fit_t, fit_y)),
    ]

    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, f_np, f_nb, a in cases:
        t_np, r_np = best_of(lambda: f_np(*a), args.repeat)
        if not HAVE_NUMBA:
            print(f"{name:<22}{t_np * 1e3:12.3f}{'n/a':>12}")
            continue
        f_nb(*a)  # compile
        t_nb, r_nb = best_of(lambda: f_nb(*a), args.repeat)
        a_np = r_np[0] if isinstance(r_np, tuple) else r_np
        a_nb = r_nb[0] if isinstance(r_nb, tuple) else r_nb
        diff = float(np.nanmax(np.abs(a_np - a_nb)))
        print(f"{name:<22}{t_np * 1e3:12.3f}{t_nb * 1e3:12.3f}{t_np / t_nb:10.1f}{diff:14.2e}")


if __name__ == "__main__":
    main()
