"""How the bilinear ratio depends on the time window.

Random data at frequency scales K and L; the product of the two free
evolutions is measured in L^2 over [0, window].  A decay like L^{-1/2} needs
the two waves to separate within the window.  Random-phase data spread over
the whole torus never separates, so the slope stays near zero at both
windows shown.  Trials are reduced here to keep the run short.
"""

from lattice_nls.diagnostics import bilinear_sweep

L_list = [1 / 8, 1 / 4, 1 / 2, 1]
for window in (50.0, 200.0):
    sweep = bilinear_sweep(1 / 64, L_list, trials=4, window=window, seed=0)
    medians = ", ".join(f"{r.median_lhs:.3e}" for r in sweep.records)
    print(f"window {window:5.0f}: slope {sweep.slope:+.3f}  median lhs [{medians}]")
