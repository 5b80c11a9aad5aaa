"""Landau levels of the twisted Laplacian at ``lambda = 1``.

The continuum levels are ``(2 m + 1) |lambda|``, each with a multiplicity
proportional to the area of the box.  The script clusters the eigenvalues
of the stencil operator and of the spectral realisation on a 16 x 16 box
and prints the first three levels with their cluster sizes.
"""

import numpy as np
from scipy.linalg import eigvalsh

from carnot_spectra.grid import Grid
from carnot_spectra.group import heisenberg
from carnot_spectra.sublaplacian import assemble_twisted
from carnot_spectra.suites import ladder_levels

g = heisenberg(1)
lam = 1.0
grid = Grid(8.0, np.pi / lam, 16, 8)
for order in (2, 8, "spectral"):
    op = assemble_twisted(g, grid, lam, order=order)
    w = eigvalsh(op.matrix.toarray())
    levels = ladder_levels(w, lam)[:3]
    sizes = [int(np.sum(np.abs(w - v) < 0.05 * lam)) for v in levels]
    print(f"order={order!s:8s} levels: "
          + "  ".join(f"{v:6.3f} (x{n})" for v, n in zip(levels, sizes)))
