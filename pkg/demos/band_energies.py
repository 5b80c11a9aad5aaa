"""Dyadic band energies of a few corpus functions on the first Heisenberg group.

Run with ``python3 demos/band_energies.py``.  For every function the script
prints ``||Delta_j f||_2 / ||f||_2`` per band and the reconstruction error of
``S_jmin f + sum_j Delta_j f``.
"""

import numpy as np

from carnot_spectra.grid import Grid, generator, lp_norm, sample
from carnot_spectra.group import heisenberg
from carnot_spectra.littlewood_paley import default_window, lp_decompose

g = heisenberg(1)
grid = Grid(8.0, np.pi, 32, 32)
window = default_window(g, grid)
specs = [("gaussian", {"lam": 1, "alpha": 0}),
         ("gaussian", {"lam": 2, "alpha": 1}),
         ("random-bandlimited", {"seed": 7})]

print(f"window [{window.jmin}, {window.jmax}]")
for name, params in specs:
    f = sample(g, grid, generator(g, grid, name, **params))
    dec = lp_decompose(g, f, window)
    norm = lp_norm(f, 2)
    shares = " ".join(f"{lp_norm(p, 2) / norm:7.4f}" for _, p in dec.pieces())
    err = lp_norm(dec.reconstruct() - f, 2) / norm
    print(f"{name:20s} {params}  bands: {shares}  reconstruction {err:.1e}")
