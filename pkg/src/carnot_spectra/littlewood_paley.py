"""Spectral multipliers of the sub-Laplacian and dyadic decompositions.

A multiplier ``phi(-Delta_G)`` acts on every central Fourier block as
``phi(L_lam)``.  It is applied through a Chebyshev expansion of ``phi`` on
the interval ``[a_lam, b]`` where ``b`` is the Gershgorin bound and
``a_lam`` is a safety-margined lower bound of the block spectrum.  The
polynomial degree is doubled until the coefficient tail drops below
``eps / 2``; only blocks carrying data are processed.

The dyadic partition uses the Gevrey cutoff

    chi(x) = G(1 - |x|) / (G(1 - |x|) + G(|x| - 1/4)),   G(x) = exp(-1/x),

equal to 1 on ``[0, 1/4]`` and 0 beyond 1, and ``psi(x) = chi(x/4) - chi(x)``.
With ``S_j = chi(2^{-2j} .)`` and ``Delta_j = psi(2^{-2j} .)`` one has the
telescoping identity ``S_{j+1} = S_j + Delta_j``.

Multipliers supported far below the spectral bound (low bands on fine
grids) need very high Chebyshev degrees because the cutoff is only Gevrey
smooth.  For those, :func:`apply_multipliers` can instead slice the
spectrum: the eigenpairs of each block below the upper end of the support
are computed by shift-invert Lanczos and the multiplier is applied exactly
on them.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.chebyshev import chebval
from scipy.fft import dct
from scipy.sparse.linalg import eigsh

from .grid import (Grid, GridFunction, from_blocks, lp_norm, to_blocks,
                   boundary_mass)
from .group import GroupSpec, gauge_norm
from .report import ReportTable
from .sublaplacian import (DEFAULT_ORDER, apply_field, twisted_bank,
                           worker_count)

DEGREE_CAP = 8192


class UnresolvedMultiplierError(RuntimeError):
    """Chebyshev expansion did not converge within the degree cap."""


def _G(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(x):
    """Smooth cutoff: 1 on ``[0, 1/4]``, 0 on ``[1, inf)``."""
    a = np.abs(np.asarray(x, dtype=float))
    g1 = _G(1.0 - a)
    g2 = _G(a - 0.25)
    return g1 / (g1 + g2)


def psi(x):
    """Dyadic bump ``chi(x/4) - chi(x)``, supported in ``[1/4, 4]``."""
    x = np.asarray(x, dtype=float)
    return chi(x / 4.0) - chi(x)


@dataclass(frozen=True)
class DyadicPartition:
    """Index window ``[jmin, jmax]`` of a Littlewood-Paley decomposition."""

    jmin: int
    jmax: int

    def __post_init__(self):
        if self.jmin > self.jmax:
            raise ValueError(f"empty window [{self.jmin}, {self.jmax}]")

    @staticmethod
    def band(j: int, tau):
        return psi(np.asarray(tau, dtype=float) * 4.0 ** (-j))

    @staticmethod
    def low(j: int, tau):
        return chi(np.asarray(tau, dtype=float) * 4.0 ** (-j))

    def indices(self):
        return range(self.jmin, self.jmax + 1)


def build_partition(jmin: int, jmax: int) -> DyadicPartition:
    return DyadicPartition(int(jmin), int(jmax))


@dataclass(frozen=True)
class MultiplierSpec:
    """A function ``phi`` of the sub-Laplacian.

    Parameters
    ----------
    kind : str
        ``chi0`` (``S_0``), ``chi`` (``S_j``, parameter ``j``), ``psi``
        (``Delta_j``, parameter ``j``), ``heat`` (``exp(-t tau)``),
        ``heat_moment`` (``(t tau)^(m/2) exp(-t tau)``, parameter ``t`` and
        ``extra = m``), ``fracpow`` (``tau^(rho/2)``), ``bessel``
        (``(1 + tau)^(rho/2)``) or ``custom`` (piecewise-linear ``table`` of
        ``(tau, value)`` pairs, clamped at the ends).
    param : float
        Main parameter (``j``, ``t`` or ``rho``).
    eps : float
        Target uniform accuracy of the polynomial approximation (relative
        to ``max |phi|`` when that exceeds 1).
    extra : float
        Secondary parameter.
    table : tuple, optional
        Breakpoints for ``custom``.
    """

    kind: str
    param: float = 0.0
    eps: float = 1e-8
    extra: float = 0.0
    table: tuple | None = None

    KINDS = ("chi0", "chi", "psi", "heat", "heat_moment", "fracpow",
             "bessel", "custom")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.kind == "custom":
            if not self.table or len(self.table) < 2:
                raise ValueError("custom multiplier needs a table with at "
                                 "least two rows")
            object.__setattr__(self, "table",
                               tuple(tuple(map(float, r)) for r in self.table))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        k, p = self.kind, self.param
        if k == "chi0":
            return chi(tau)
        if k == "chi":
            return chi(tau * 4.0 ** (-p))
        if k == "psi":
            return psi(tau * 4.0 ** (-p))
        if k == "heat":
            return np.exp(-p * tau)
        if k == "heat_moment":
            x = p * np.maximum(tau, 0.0)
            return x ** (0.5 * self.extra) * np.exp(-x)
        if k == "fracpow":
            return np.maximum(tau, 0.0) ** (0.5 * p)
        if k == "bessel":
            return (1.0 + tau) ** (0.5 * p)
        xs, ys = np.array(self.table).T
        return np.interp(tau, xs, ys)

    def singular_at_zero(self) -> bool:
        return self.kind == "fracpow" and self.param < 0


def psi_spec(j: int, eps: float = 1e-8) -> MultiplierSpec:
    return MultiplierSpec("psi", float(j), eps)


def chi_spec(j: int, eps: float = 1e-8) -> MultiplierSpec:
    return MultiplierSpec("chi", float(j), eps)


@functools.lru_cache(maxsize=4096)
def chebyshev_coefficients(spec: MultiplierSpec, a: float, b: float,
                           cap: int = DEGREE_CAP) -> np.ndarray:
    """Chebyshev coefficients of ``spec`` on ``[a, b]``.

    Interpolation at Chebyshev points of the first kind (via a DCT) with
    degree doubling until the tail of the coefficient sequence is below
    ``eps / 2``; the series is then truncated at the smallest degree whose
    discarded tail stays below ``eps / 2``.  A small tail can be spurious
    when the nodes step over a narrow feature of ``phi``, so the truncated
    series is also checked on a four times denser node set and inside the
    region where ``phi`` varies.

    Raises
    ------
    UnresolvedMultiplierError
        If the degree cap is reached first.
    """
    if spec.singular_at_zero() and a <= 0:
        raise UnresolvedMultiplierError(
            f"{spec.kind}({spec.param}) is singular at 0 and the block "
            f"spectrum is not bounded away from 0")
    n = 16
    while True:
        k = np.arange(n + 1)
        x = np.cos(np.pi * (k + 0.5) / (n + 1))
        vals = spec(a + (b - a) * (x + 1.0) / 2.0)
        c = dct(vals, type=2) / (n + 1)
        c[0] /= 2.0
        scale = max(1.0, float(np.abs(vals).max()))
        tol = 0.5 * spec.eps * scale
        tail = np.cumsum(np.abs(c[::-1]))[::-1]  # tail[d] = sum_{k>=d}
        if tail[(n + 1) // 2] < tol:
            keep = int(np.argmax(tail < tol))  # first index with small tail
            if _series_error(spec, a, b, c[:keep], n) <= 2.0 * tol:
                return c[:keep].copy()
        if n >= cap:
            raise UnresolvedMultiplierError(
                f"{spec.kind}({spec.param:g}) on [{a:.4g}, {b:.4g}] needs "
                f"degree > {cap} for eps={spec.eps:g}")
        n *= 2


def _variation_region(spec: MultiplierSpec):
    """Interval outside which a cutoff multiplier is locally constant."""
    if spec.kind == "chi0":
        return 0.25, 1.0
    if spec.kind == "chi":
        return 4.0 ** (spec.param - 1), 4.0 ** spec.param
    if spec.kind == "psi":
        return 4.0 ** (spec.param - 1), 4.0 ** (spec.param + 1)
    return None


def _series_error(spec: MultiplierSpec, a: float, b: float, c, n: int
                  ) -> float:
    m = 4 * (n + 1)
    x = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    region = _variation_region(spec)
    if region is not None:
        lo, hi = max(region[0], a), min(region[1], b)
        if lo < hi:
            u = np.linspace(lo, hi, 257)
            x = np.concatenate([x, 2.0 * (u - a) / (b - a) - 1.0])
    vals = spec(a + (b - a) * (x + 1.0) / 2.0)
    approx = chebval(x, c) if len(c) else np.zeros_like(x)
    return float(np.abs(approx - vals).max())


def _chebyshev_block(A, a, b, coeffs, U):
    """Apply several Chebyshev series of ``A`` (spectrum in [a, b]) to U."""
    n = A.shape[0]
    alpha, beta = 2.0 / (b - a), -(a + b) / (b - a)
    At = (alpha * A + beta * sp.eye(n, format="csr")).tocsr()
    out = [None if len(c) == 0 else c[0] * U for c in coeffs]
    deg = max((len(c) for c in coeffs), default=0)
    if deg <= 1:
        return [np.zeros_like(U) if o is None else o for o in out]
    T0, T1 = U, At @ U
    for s, c in enumerate(coeffs):
        if len(c) > 1:
            out[s] = out[s] + c[1] * T1
    for k in range(2, deg):
        T0, T1 = T1, 2.0 * (At @ T1) - T0
        for s, c in enumerate(coeffs):
            if len(c) > k:
                out[s] += c[k] * T1
    return [np.zeros_like(U) if o is None else o for o in out]


def filter_blocks(bank, B: np.ndarray, specs: Sequence[MultiplierSpec],
                  use_floor: bool = True, skip_tol: float = 1e-14
                  ) -> np.ndarray:
    """Apply multipliers to central Fourier blocks.

    Parameters
    ----------
    bank : TwistedBank
    B : ndarray, shape (n_z, n_blocks, n_fun)
    specs : sequence of MultiplierSpec
    use_floor : bool
        Use the per-block spectral floor as the left end of the Chebyshev
        interval (otherwise 0).
    skip_tol : float
        Blocks whose norm is below ``skip_tol`` times the largest block
        norm are treated as zero.

    Returns
    -------
    ndarray, shape (n_specs, n_z, n_blocks, n_fun)
    """
    nz, nb, nf = B.shape
    out = np.zeros((len(specs), nz, nb, nf), dtype=complex)
    norms = np.sqrt(np.sum(np.abs(B) ** 2, axis=(0, 2)))
    top = norms.max(initial=0.0)
    active = [k for k in range(nb) if norms[k] > skip_tol * top and top > 0]
    b = bank.specbound

    def work(k):
        op = bank[k]
        a = op.floor if use_floor else 0.0
        coeffs = [chebyshev_coefficients(s, a, b) for s in specs]
        if all(len(c) == 0 for c in coeffs):
            return k, None
        return k, _chebyshev_block(op.matrix, a, b, coeffs, B[:, k, :])

    nw = worker_count()
    if nw > 1 and len(active) > 1:
        with ThreadPoolExecutor(nw) as ex:
            results = list(ex.map(work, active))
    else:
        results = [work(k) for k in active]
    for k, res in results:
        if res is not None:
            for s in range(len(specs)):
                out[s, :, k, :] = res[s]
    return out


def support_top(spec: MultiplierSpec) -> float:
    """Upper end of the support of a compactly supported multiplier."""
    if spec.kind == "chi0":
        return 1.0
    if spec.kind == "chi":
        return 4.0 ** spec.param
    if spec.kind == "psi":
        return 4.0 ** (spec.param + 1)
    raise ValueError(f"{spec.kind} multipliers are not compactly supported")


def _low_eigenpairs(A, top: float, max_rank: int, dense_limit: int = 1024):
    """All eigenpairs of the Hermitian PSD matrix ``A`` with value <= top."""
    n = A.shape[0]
    if n <= dense_limit:
        w, V = np.linalg.eigh(A.toarray())
        keep = w <= top
        return w[keep], V[:, keep]
    k = 16
    v0 = np.ones(n, dtype=complex)
    while True:
        k = min(k, n - 2)
        w, V = eigsh(A, k=k, sigma=-1e-3 * max(top, 1e-12), which="LM",
                     v0=v0, tol=1e-12)
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        if w[-1] > top or k >= n - 2:
            keep = w <= top
            return w[keep], V[:, keep]
        if k >= max_rank:
            raise UnresolvedMultiplierError(
                f"more than {max_rank} eigenvalues below {top:.4g}; spectral "
                f"slicing is not applicable")
        k = min(2 * k, max_rank)


def slice_blocks(bank, B: np.ndarray, specs: Sequence[MultiplierSpec],
                 max_rank: int = 512, skip_tol: float = 1e-14) -> np.ndarray:
    """Apply compactly supported multipliers by spectral slicing.

    Same layout as :func:`filter_blocks`.  Blocks whose ground energy lies
    above every support are skipped.
    """
    nz, nb, nf = B.shape
    top = max(support_top(s) for s in specs)
    out = np.zeros((len(specs), nz, nb, nf), dtype=complex)
    norms = np.sqrt(np.sum(np.abs(B) ** 2, axis=(0, 2)))
    peak = norms.max(initial=0.0)
    for k in range(nb):
        if not norms[k] > skip_tol * peak or bank[k].ground > top:
            continue
        w, V = _low_eigenpairs(bank[k].matrix, top, max_rank)
        if len(w) == 0:
            continue
        C = V.conj().T @ B[:, k, :]
        for i, s in enumerate(specs):
            out[i, :, k, :] = V @ (s(np.maximum(w, 0.0))[:, None] * C)
    return out


def apply_multipliers(g: GroupSpec, fs: Sequence[GridFunction],
                      specs: Sequence[MultiplierSpec],
                      order: int = DEFAULT_ORDER, use_floor: bool = True,
                      method: str = "chebyshev") -> list:
    """Apply every multiplier in ``specs`` to every function in ``fs``.

    Returns a nested list ``result[s][i] = specs[s](-Delta_G) fs[i]``.  All
    functions must share one grid.  ``method="slice"`` uses spectral
    slicing (compactly supported multipliers only).
    """
    fs = list(fs)
    if not fs:
        return [[] for _ in specs]
    grid = fs[0].grid
    for f in fs:
        if f.grid != grid:
            raise ValueError("all functions must share one grid")
    bank = twisted_bank(g, grid, order)
    B = np.stack([to_blocks(f) for f in fs], axis=-1)
    if method == "slice":
        Y = slice_blocks(bank, B, specs)
    elif method == "chebyshev":
        Y = filter_blocks(bank, B, specs, use_floor=use_floor)
    else:
        raise ValueError(f"unknown method {method!r}")
    return [[from_blocks(grid, g.ell, g.nc, Y[s, :, :, i])
             for i in range(len(fs))] for s in range(len(specs))]


def apply_multiplier(g: GroupSpec, f: GridFunction, spec: MultiplierSpec,
                     order: int = DEFAULT_ORDER, use_floor: bool = True
                     ) -> GridFunction:
    """``phi(-Delta_G) f`` for a single multiplier."""
    return apply_multipliers(g, [f], [spec], order, use_floor)[0][0]


def delta_j(g: GroupSpec, f: GridFunction, j: int, eps: float = 1e-8,
            order: int = DEFAULT_ORDER) -> GridFunction:
    """Littlewood-Paley block ``Delta_j f = psi(-2^{-2j} Delta_G) f``."""
    return apply_multiplier(g, f, psi_spec(j, eps), order)


def s_j(g: GroupSpec, f: GridFunction, j: int, eps: float = 1e-8,
        order: int = DEFAULT_ORDER) -> GridFunction:
    """Low-pass part ``S_j f = chi(-2^{-2j} Delta_G) f``."""
    return apply_multiplier(g, f, chi_spec(j, eps), order)


@dataclass
class LPDecomposition:
    """Dyadic pieces of one function.

    ``low`` is ``S_{jmin} f`` and ``bands[j] = Delta_j f`` for ``jmin <= j <=
    jmax``.  When ``4^jmax`` exceeds the spectral bound the pieces sum to
    ``f`` up to the filter accuracy.
    """

    partition: DyadicPartition
    low: GridFunction
    bands: dict

    @property
    def jmin(self):
        return self.partition.jmin

    @property
    def jmax(self):
        return self.partition.jmax

    def band(self, j: int) -> GridFunction:
        """``Delta_j f``; raises outside the window."""
        if j not in self.bands:
            raise KeyError(f"band {j} outside window [{self.jmin}, "
                           f"{self.jmax}]")
        return self.bands[j]

    def S(self, j: int) -> GridFunction:
        """``S_j f`` for ``jmin <= j <= jmax + 1`` by telescoping."""
        if not self.jmin <= j <= self.jmax + 1:
            raise KeyError(f"S_{j} not available in window")
        out = self.low
        for i in range(self.jmin, j):
            out = out + self.bands[i]
        return out

    def pieces(self) -> list:
        """``[(label, piece)]`` with label ``jmin - 1`` for the low part."""
        return [(self.jmin - 1, self.low)] + [(j, self.bands[j])
                                              for j in self.partition.indices()]

    def reconstruct(self) -> GridFunction:
        return self.S(self.jmax + 1)


def lp_decompose(g: GroupSpec, fs, window, eps: float = 1e-8,
                 order: int = DEFAULT_ORDER):
    """Littlewood-Paley decomposition on the window ``(jmin, jmax)``.

    Accepts one function or a sequence (processed in a single batched
    pass) and returns an :class:`LPDecomposition` or a list of them.
    """
    single = isinstance(fs, GridFunction)
    flist = [fs] if single else list(fs)
    part = window if isinstance(window, DyadicPartition) \
        else build_partition(*window)
    specs = [chi_spec(part.jmin, eps)] + [psi_spec(j, eps)
                                          for j in part.indices()]
    res = apply_multipliers(g, flist, specs, order)
    out = []
    for i in range(len(flist)):
        bands = {j: res[1 + n][i] for n, j in enumerate(part.indices())}
        out.append(LPDecomposition(part, res[0][i], bands))
    return out[0] if single else out


def default_window(g: GroupSpec, grid: Grid, order: int = DEFAULT_ORDER
                   ) -> DyadicPartition:
    """Window covering the discrete spectrum of ``grid``.

    ``jmin`` is set from the smallest block ground energy and ``jmax`` from
    the Gershgorin bound, so that ``S_jmin`` vanishes on no eigenvalue that
    a band would miss and ``S_{jmax+1}`` is the identity on the spectrum.
    """
    bank = twisted_bank(g, grid, order)
    lo = bank[0].ground
    jmin = int(np.floor(0.5 * np.log2(max(lo, 1e-6)))) - 1
    jmax = int(np.ceil(0.5 * np.log2(bank.specbound)))
    return build_partition(jmin, jmax)


def delta_function(g: GroupSpec, grid: Grid) -> GridFunction:
    """Discrete Dirac mass at the identity (unit integral)."""
    data = np.zeros(grid.shape(g), dtype=complex)
    idx = (grid.Nz // 2,) * g.hdim + (grid.Nt // 2,) * g.nc
    data[idx] = 1.0 / grid.cell(g)
    return GridFunction(grid, g.ell, g.nc, data)


def psi_kernel(g: GroupSpec, grid: Grid, j: int, eps: float = 1e-8,
               order: int = DEFAULT_ORDER) -> GridFunction:
    """Convolution kernel ``Psi_j = Delta_j delta_e`` (so ``Delta_j f = f * Psi_j``)."""
    return delta_j(g, delta_function(g, grid), j, eps, order)


def dense_filter_oracle(g: GroupSpec, f: GridFunction, spec: MultiplierSpec,
                        order: int = DEFAULT_ORDER, max_block: int = 1024
                        ) -> GridFunction:
    """Apply ``spec`` through dense eigendecompositions of each block.

    Independent of the Chebyshev machinery; intended for small grids.
    """
    grid = f.grid
    n = grid.Nz ** g.hdim
    if n > max_block:
        raise ValueError(f"block size {n} exceeds {max_block}")
    bank = twisted_bank(g, grid, order)
    B = to_blocks(f)
    out = np.zeros_like(B)
    for k in range(B.shape[1]):
        if not np.any(B[:, k]):
            continue
        w, V = np.linalg.eigh(bank[k].matrix.toarray())
        w = np.maximum(w, 0.0)
        out[:, k] = V @ (spec(w) * (V.conj().T @ B[:, k]))
    return from_blocks(grid, g.ell, g.nc, out)


def gauge_on_grid(g: GroupSpec, grid: Grid) -> np.ndarray:
    """Gauge of every grid point, with central coordinates in ``[-T, T)``."""
    return gauge_norm(g, grid.points(g))


def kernel_estimate_report(g: GroupSpec, grid: Grid, jrange,
                           alphas=(0.0, 1.0), fields=None,
                           eps: float = 1e-8, order: int = DEFAULT_ORDER,
                           wrap_tol: float = 1e-2,
                           core_radius: float | None = None) -> ReportTable:
    """Scaling of the kernels ``Psi_j`` and their horizontal derivatives.

    For every ``j`` the table lists ``||Psi_j||_1``, ``||rho^a Psi_j||_1``,
    ``||X_i Psi_j||_1``, ``||Psi_j||_inf / ||Psi_j||_2`` and resolution
    diagnostics.  A band counts as resolved when the kernel is negligible
    near the horizontal boundary and near the central period ends, and the
    band lies below the spectral bound.  Summary rows give the least-squares
    slopes of ``log2`` of each quantity against ``j`` over resolved bands.

    With ``core_radius=R`` the norms are restricted to the gauge ball
    ``rho <= R 2^{-j}``, which is mapped onto itself by the dilation relating
    ``Psi_j`` and ``Psi_0``.  The kernels have slowly decaying central tails
    (the cutoff is only Gevrey smooth at the ends of its support), so
    whole-box norms pick up box-dependent tail mass; the restricted norms
    scale exactly in the continuum.  The share of ``||Psi_j||_1`` outside the
    ball is reported as ``core_tail``, and a band then counts as resolved
    when the ball fits in the box.
    """
    fields = list(range(g.hdim)) if fields is None else list(fields)
    rho = gauge_on_grid(g, grid)
    bound = twisted_bank(g, grid, order).specbound
    cols = ["j", "resolved", "L1", "Linf_over_L2"] + \
        [f"rho{a:g}_L1" for a in alphas] + [f"X{i}_L1" for i in fields] + \
        ["boundary_mass", "central_wrap", "core_tail"]
    table = ReportTable(cols)
    tmask = np.zeros(grid.shape(g), dtype=bool)
    tx = np.abs(grid.taxis) > 0.75 * grid.T
    for ax in range(g.nc):
        shape = [1] * len(grid.shape(g))
        shape[g.hdim + ax] = -1
        tmask |= tx.reshape(shape)
    rows = []
    for j in jrange:
        K = psi_kernel(g, grid, j, eps, order)
        a = np.abs(K.data)
        tot = np.sqrt(np.sum(a ** 2))
        wrap = float(np.sqrt(np.sum(a[tmask] ** 2)) / tot)
        bmass = boundary_mass(K, 0.1, norm=True)
        if core_radius is None:
            mask = np.ones(a.shape, dtype=bool)
            fits = bmass < wrap_tol and wrap < wrap_tol
        else:
            r = core_radius * 2.0 ** (-j)
            mask = rho <= r
            fits = r <= grid.L and r * r / 4.0 <= grid.T
        resolved = bool(fits and 4.0 ** (j + 1) <= bound)
        row = {"j": j, "resolved": resolved,
               "L1": float(np.sum(a[mask]) * K.cell),
               "Linf_over_L2": lp_norm(K, np.inf) / lp_norm(K, 2),
               "boundary_mass": bmass, "central_wrap": wrap,
               "core_tail": float(np.sum(a[~mask]) / np.sum(a))}
        for al in alphas:
            row[f"rho{al:g}_L1"] = float(np.sum((rho ** al * a)[mask]) * K.cell)
        for i in fields:
            x = np.abs(apply_field(g, K, i).data)
            row[f"X{i}_L1"] = float(np.sum(x[mask]) * K.cell)
        rows.append(row)
        table.add(row)
    good = [r for r in rows if r["resolved"]]
    slopes = {"j": "slope", "resolved": len(good)}
    for c in cols[2:-3]:
        if len(good) >= 2:
            js = np.array([r["j"] for r in good], dtype=float)
            ys = np.log2([r[c] for r in good])
            slopes[c] = float(np.polyfit(js, ys, 1)[0])
        else:
            slopes[c] = float("nan")
    table.add(slopes)
    return table
