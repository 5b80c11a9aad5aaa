"""Left-invariant fields and the discrete sub-Laplacian.

After a Fourier transform in the central variables the operator ``-sum X_j^2``
splits into twisted Laplacians ``L_lam`` acting on functions of ``z``.  Each
``L_lam`` is discretised as ``sum_i D_i^* D_i`` where ``D_i`` is a difference
operator built from covariant shifts

    (S_i u)(z) = exp(i (h/2) sum_k lam_k (U[k]^T z)_i) u(z + h e_i),

which are exactly the right translations by ``(h e_i, 0)`` restricted to the
block.  The discrete operator therefore commutes with left translations by
lattice points, is Hermitian positive semidefinite by construction, and its
spectral bound does not depend on ``lam``.

``D_i = p(S_i) (S_i - 1) / h`` where ``p`` comes from a Fejer-Riesz
factorisation of the truncated series of the symbol ``(2 arcsin(sqrt(s)/2))^2``
in ``s = 2 - 2 cos(k h)``.  The truncation order sets the accuracy order of
``L_lam``; order 2 is the plain first-order covariant difference.
Functions are extended by zero outside the box (Dirichlet conditions):
``D_i`` maps the box into a padded box so that ``L_lam`` is the compression of
the infinite-lattice operator.

With ``order="spectral"`` the fields are realised instead by exact
derivatives of the zero-extended data on a doubled periodic box.  This is
accurate for band-limited functions at any ``lam`` for which the box
resolves the magnetic length, at the price of a norm growing like
``(|lam| L)^2``; it is meant for spectra of individual blocks rather than
for filtering.
"""

from __future__ import annotations

import functools
import os
import threading
import warnings
from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import polynomial as P
from scipy.sparse.linalg import LinearOperator, lobpcg, splu

from .grid import (Grid, GridFunction, block_frequencies, from_blocks,
                   horizontal_coordinates, to_blocks)
from .group import GroupSpec

#: Default accuracy order of the twisted Laplacians.
DEFAULT_ORDER = 8


@functools.lru_cache(maxsize=None)
def difference_coefficients(order: int = DEFAULT_ORDER) -> tuple:
    """Coefficients ``d_r`` with ``D = (1/h) sum_r d_r S^r``.

    Parameters
    ----------
    order : int
        Even accuracy order of ``D^* D`` as an approximation of ``-d^2``,
        between 2 and 16.
    """
    if order % 2 or not 2 <= order <= 16:
        raise ValueError(f"order must be even and in [2, 16], got {order}")
    m = order // 2
    a = [2.0 * factorial(k - 1) ** 2 / factorial(2 * k) for k in range(1, m + 1)]
    deg = m - 1
    # q as a Laurent polynomial in w, with s = 2 - w - 1/w.
    q = np.zeros(2 * deg + 1)
    sk = np.array([1.0])
    for k in range(m):
        off = deg - k
        q[off: off + len(sk)] += a[k] * sk
        sk = P.polymul(sk, [-1.0, 2.0, -1.0])
    roots = np.roots(q[::-1])
    inner = roots[np.abs(roots) < 1]
    p = np.atleast_1d(np.real(np.poly(inner)))[::-1]  # ascending powers
    p = p * np.sqrt(a[0]) / abs(np.polyval(p[::-1], 1.0))
    d = P.polymul(p, [-1.0, 1.0])
    return tuple(float(v) for v in d)


def _field_coefficients(g: GroupSpec, Z: np.ndarray, i: int) -> np.ndarray:
    """Coefficients ``c_k(z)`` of ``d/dt_k`` in ``X_i``, shape ``(n_z, nc)``.

    ``X_i = d/dz_i + (1/2) sum_k sum_l z_l U[k]_{l i} d/dt_k``.
    """
    return 0.5 * np.einsum("pl,kl->pk", Z, g.U[:, :, i])


def _central_derivative(f: GridFunction, coef: np.ndarray) -> np.ndarray:
    """Blocks of ``sum_k coef[:, k] d/dt_k f`` (spectral in t)."""
    lam = block_frequencies(f.grid, f.nc)
    return to_blocks(f) * (1j * (coef @ lam.T))


def apply_field(g: GroupSpec, f: GridFunction, i: int) -> GridFunction:
    """Apply the left-invariant field ``X_i`` (``0 <= i < 2 ell``).

    The horizontal derivative is the fourth-order centred difference with
    zero data outside the box; central derivatives are spectral.
    """
    if not 0 <= i < g.hdim:
        raise ValueError(f"field index must be in [0, {g.hdim}), got {i}")
    grid = f.grid
    Z = horizontal_coordinates(grid, g.ell)
    cent = from_blocks(grid, g.ell, g.nc,
                       _central_derivative(f, _field_coefficients(g, Z, i)))
    u = np.pad(f.data, [(2, 2) if ax == i else (0, 0)
                        for ax in range(f.data.ndim)])
    sl = [slice(None)] * u.ndim

    def s(off):
        sl[i] = slice(2 + off, 2 + off + grid.Nz)
        return u[tuple(sl)]

    dz = (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * grid.hz)
    return GridFunction.like(f, dz + cent.data)


@dataclass
class TwistedOperator:
    """Discrete twisted Laplacian for one central frequency.

    Attributes
    ----------
    lam : tuple
        Central frequency vector.
    matrix : scipy.sparse.csr_matrix
        Hermitian positive semidefinite matrix of size ``Nz**(2 ell)``.
    specbound : float
        Gershgorin bound for the largest eigenvalue.
    ground : float
        Smallest eigenvalue (Lanczos or dense), a certified floor for
        spectral multipliers after a safety margin.
    order : int or str
        Accuracy order of the difference operators (or ``"spectral"``).
    """

    lam: tuple
    matrix: sp.csr_matrix = field(repr=False)
    specbound: float
    ground: float
    order: int | str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def floor(self) -> float:
        """Lower end of the interval used for polynomial filtering."""
        return 0.98 * self.ground if self.ground > 1e-12 * self.specbound \
            else 0.0


@functools.lru_cache(maxsize=16)
def _padded_spectral_derivative(n: int, h: float) -> tuple:
    """Spectral derivative of zero-extended data, ``(2n) x n``.

    The box data are embedded in a periodic interval of twice the length
    and differentiated by FFT (the Nyquist mode is dropped).  Returns the
    dense matrix and the offset of the box inside the padded interval.
    """
    m = 2 * n
    off = n // 2
    k = np.fft.fftfreq(m, d=h) * 2.0 * np.pi
    k[m // 2] = 0.0
    E = np.zeros((m, n))
    E[off:off + n] = np.eye(n)
    Dp = np.fft.ifft(1j * k[:, None] * np.fft.fft(E, axis=0), axis=0)
    Dp.setflags(write=False)
    return Dp, off


def _spectral_difference_matrices(g: GroupSpec, grid: Grid, lam):
    """Fields realised with exact derivatives of band-limited data.

    ``D_i = d/dz_i + i sum_k lam_k c_k(z)`` evaluated on the doubled box,
    acting on data extended by zero.  Not covariant under lattice
    translations, but free of the lattice flux effects that broaden the
    upper Landau levels of the stencil discretisation when ``|lam| h^2``
    is of order one.
    """
    n, h, hd = grid.Nz, grid.hz, g.hdim
    Dp, off = _padded_spectral_derivative(n, h)
    m = 2 * n
    E = sp.csr_matrix((np.ones(n), (np.arange(n) + off, np.arange(n))),
                      shape=(m, n))
    xe = -grid.L + h * (np.arange(m) - off)
    mesh = np.meshgrid(*([xe] * hd), indexing="ij")
    Ze = np.stack([c.ravel() for c in mesh], axis=-1)
    ext = E
    for _ in range(hd - 1):
        ext = sp.kron(ext, E, format="csr")
    lam = np.asarray(lam, dtype=float)
    mats = []
    for i in range(hd):
        D = None
        for ax in range(hd):
            f = sp.csr_matrix(Dp) if ax == i else E
            D = f if D is None else sp.kron(D, f, format="csr")
        c = _field_coefficients(g, Ze, i) @ lam
        mats.append((D + sp.diags(1j * c) @ ext).tocsr())
    return mats


def _difference_matrices(g: GroupSpec, grid: Grid, lam, order):
    if order == "spectral":
        return _spectral_difference_matrices(g, grid, lam)
    d = np.array(difference_coefficients(order))
    pad = len(d) - 1
    h = grid.hz
    n = grid.Nz
    ne = n + 2 * pad
    hd = g.hdim
    lam = np.asarray(lam, dtype=float)
    # coordinates of the padded grid
    xe = -grid.L + h * (np.arange(ne) - pad)
    mesh = np.meshgrid(*([np.arange(ne)] * hd), indexing="ij")
    eidx = np.stack([m.ravel() for m in mesh], axis=-1)  # padded indices
    Ze = xe[eidx]
    Ubar = np.einsum("k,klj->lj", lam, g.U)  # sum_k lam_k U[k]
    mats = []
    for i in range(hd):
        # theta_i(z) = (h/2) sum_k lam_k (U[k]^T z)_i = (h/2) (z @ Ubar)_i
        theta = 0.5 * h * (Ze @ Ubar[:, i])
        rows, cols, vals = [], [], []
        for r, dr in enumerate(d):
            src = eidx.copy()
            src[:, i] += r
            box = src - pad
            ok = np.all((box >= 0) & (box < n), axis=1)
            rows.append(np.nonzero(ok)[0])
            cols.append(np.ravel_multi_index(tuple(box[ok].T), (n,) * hd))
            vals.append(dr / h * np.exp(1j * r * theta[ok]))
        D = sp.csr_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(ne ** hd, n ** hd))
        mats.append(D)
    return mats


def _ground_eigenvalue(A: sp.csr_matrix) -> float:
    """Smallest eigenvalue of a Hermitian PSD matrix.

    Small matrices are diagonalised densely.  Larger ones use LOBPCG with a
    shift-invert preconditioner; the Rayleigh-Ritz value converges
    quadratically in the residual, so a few dozen iterations give a
    relative accuracy far below the safety margin applied in
    :attr:`TwistedOperator.floor`.
    """
    n = A.shape[0]
    if n <= 400:
        return float(np.linalg.eigvalsh(A.toarray())[0])
    shift = 1e-3 * (1.0 + float(np.abs(A.diagonal()).max()))
    lu = splu((A + shift * sp.eye(n, format="csc")).tocsc())
    M = LinearOperator((n, n), matvec=lu.solve, matmat=lu.solve,
                       dtype=complex)
    X = np.random.default_rng(0).standard_normal((n, 4)).astype(complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w, _ = lobpcg(A, X, M=M, largest=False, tol=1e-7, maxiter=40)
    return float(np.min(w))


def assemble_twisted(g: GroupSpec, grid: Grid, lam,
                     order: int = DEFAULT_ORDER,
                     ground: float | None = None) -> TwistedOperator:
    """Assemble ``L_lam`` on the horizontal box of ``grid``.

    Parameters
    ----------
    g : GroupSpec
    grid : Grid
    lam : float or array_like
        Central frequency; must lie on the lattice ``pi Z / T``.
    order : int or "spectral"
        Accuracy order of the stencil discretisation, or ``"spectral"``
        for exact derivatives of zero-extended band-limited data.
    ground : float, optional
        Known smallest eigenvalue (skips the eigenvalue computation).

    Returns
    -------
    TwistedOperator
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (g.nc,):
        raise ValueError(f"lam must have {g.nc} components")
    grid.lattice_index(lam)
    L = None
    for D in _difference_matrices(g, grid, lam, order):
        term = (D.conj().T @ D).tocsr()
        L = term if L is None else L + term
    L = ((L + L.conj().T) * 0.5).tocsr()
    L.sum_duplicates()
    bound = float(abs(L).sum(axis=1).max())
    if ground is None:
        ground = max(_ground_eigenvalue(L), 0.0)
    return TwistedOperator(tuple(lam), L, bound, ground, order)


class TwistedBank:
    """Lazily assembled twisted Laplacians for every block of a grid."""

    def __init__(self, g: GroupSpec, grid: Grid, order: int = DEFAULT_ORDER):
        self.g, self.grid, self.order = g, grid, order
        self.lams = block_frequencies(grid, g.nc)
        self._ops = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.lams)

    def __getitem__(self, k: int) -> TwistedOperator:
        op = self._ops.get(k)
        if op is None:
            # blocks with opposite frequency carry complex conjugate
            # matrices, hence the same spectrum.
            mirror = self._mirror(k)
            ground = self._ops[mirror].ground if mirror in self._ops else None
            op = assemble_twisted(self.g, self.grid, self.lams[k], self.order,
                                  ground=ground)
            with self._lock:
                self._ops[k] = op
        return op

    def _mirror(self, k: int) -> int:
        idx = np.unravel_index(k, (self.grid.Nt,) * self.g.nc)
        neg = tuple((-i) % self.grid.Nt for i in idx)
        return int(np.ravel_multi_index(neg, (self.grid.Nt,) * self.g.nc))

    @property
    def specbound(self) -> float:
        """Spectral bound valid for every block.

        The stencil operators are unitarily equivalent up to boundary terms
        and share the bound of the ``lam = 0`` block; the spectral
        realisation grows with ``|lam|`` and needs every block.
        """
        if self.order == "spectral":
            return max(self[k].specbound for k in range(len(self)))
        return self[0].specbound


@functools.lru_cache(maxsize=16)
def twisted_bank(g: GroupSpec, grid: Grid, order: int = DEFAULT_ORDER
                 ) -> TwistedBank:
    """Cached :class:`TwistedBank` for ``(g, grid, order)``."""
    return TwistedBank(g, grid, order)


def worker_count() -> int:
    """Number of worker threads (``CARNOT_SPECTRA_THREADS``, default 1)."""
    try:
        return max(1, int(os.environ.get("CARNOT_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def apply_neg_sublaplacian(g: GroupSpec, f: GridFunction,
                           order: int = DEFAULT_ORDER) -> GridFunction:
    """Apply the discrete ``-Delta_G = -sum X_j^2`` block by block."""
    bank = twisted_bank(g, f.grid, order)
    B = to_blocks(f)
    out = np.zeros_like(B)
    scale = np.abs(B).max(initial=0.0)
    for k in range(B.shape[1]):
        if np.abs(B[:, k]).max() > 1e-15 * scale:
            out[:, k] = bank[k].matrix @ B[:, k]
    return from_blocks(f.grid, g.ell, g.nc, out)


def spectral_bound(g: GroupSpec, grid: Grid, order: int = DEFAULT_ORDER
                   ) -> float:
    return twisted_bank(g, grid, order).specbound
