"""Lattice solutions approach the coupled continuum system as h shrinks.

A gaussian pair (psi near theta = 0, phi near theta = pi) is sampled onto
lattices of decreasing spacing, evolved to t = 1, and compared against a
spectral solve of the coupled system.  The long-wave error is the on-lattice
comparison u_n/h ~ psi(hn) + e^{-4i tau} (-1)^n phi(hn).
"""

from lattice_nls.harness import ExperimentConfig, run_convergence_study

cfg = ExperimentConfig(h_list=(0.2, 0.1, 0.05))
report = run_convergence_study(cfg)

print(f"{'h':>6} {'err_psi':>10} {'err_phi':>10} {'longwave':>10}")
prev = None
for row in report.rows:
    print(f"{row.h:6.3f} {row.err_psi:10.3e} {row.err_phi:10.3e} {row.longwave_err:10.3e}")
    if prev is not None:
        print(f"{'':6} ratio {row.longwave_err / prev.longwave_err:.3f}")
    prev = row
