"""Group Fourier transform on the Heisenberg group H^1 in two pictures.

With the product ``t'' = t + t' + (x y' - y x')/2`` the Schrodinger
representation with central character ``e^{i lam t}`` is

    pi_lam(z, t) F(xi) = exp(i lam t - i lam (x xi + x y / 2)) F(xi + y).

It maps the horizontal fields to ``-i lam xi`` and ``d/dxi``, so the
sub-Laplacian becomes the harmonic oscillator ``-d^2 + lam^2 xi^2`` whose
eigenfunctions are the scaled Hermite functions ``Phi_alpha`` with
eigenvalues ``(2 alpha + 1) |lam|``.

The equivalent Fock-space picture acts on entire functions of ``xi in C``
with weight ``(2|lam|/pi) exp(-2|lam| |xi|^2)``, for which the monomials
``(sqrt(2|lam|) xi)^alpha / sqrt(alpha!)`` are orthonormal:

    pi_lam(z, t) F(xi) = exp(i lam t + |lam| (conj(w) xi - |z|^2/4)) F(xi - w/2),

where ``w = x + i y`` for ``lam > 0`` and ``w = x - i y`` for ``lam < 0``.

The transform is ``F(f)(lam) = int f(z, t) pi_lam(z, t) dz dt`` and the
matrices ``M_{alpha beta} = <F(f)(lam) e_beta, e_alpha>`` satisfy
``M[f * g] = M[f] M[g]`` and ``M[-Delta f] = M[f] diag((2 beta + 1)|lam|)``.
Matrix coefficients are computed with Gauss-Hermite quadrature on shifted
nodes.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .grid import (GridFunction, convolve_bruteforce, horizontal_coordinates,
                   to_blocks)
from .group import GroupSpec, group_mul
from .report import ReportTable
from .sublaplacian import worker_count

DEFAULT_NH = 16


@lru_cache(maxsize=64)
def _gauss(n: int):
    u, w = hermgauss(n)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def inversion_constant(ell: int = 1) -> float:
    """``c_ell`` in ``f(w) = c_ell int tr(pi_lam(w)^* F(f)(lam)) |lam|^ell dlam``
    for the representations of this module, ``(2 pi)^{-(ell+1)}``."""
    return (2.0 * np.pi) ** (-(ell + 1))


def alternative_inversion_constant(ell: int = 1) -> float:
    """The constant ``2^{ell-1} / pi^{ell+1}``.

    It equals ``4^ell`` times :func:`inversion_constant` and belongs to the
    convention where the central coordinate picks up ``2 Im(z conj(z'))``.
    """
    return 2.0 ** (ell - 1) / np.pi ** (ell + 1)


class TruncationError(RuntimeError):
    """Fourier data decay too slowly across the truncation."""


def _check_h1(g: GroupSpec):
    U = np.array([[0.0, 1.0], [-1.0, 0.0]])
    if g.ell != 1 or g.nc != 1 or not np.allclose(g.U[0], U):
        raise ValueError("unsupported group: Fourier transforms are "
                         "implemented for the Heisenberg group H^1 only")


def _check_lam(lam):
    if lam == 0:
        raise ValueError("lam must be nonzero")


def hermite_polynomials(n: int, x) -> np.ndarray:
    """Normalised Hermite polynomials ``P_k`` with ``h_k = P_k e^{-x^2/2}``.

    Returns an array of shape ``(n,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    out[0] = np.pi ** -0.25
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = (np.sqrt(2.0 / (k + 1)) * x * out[k]
                      - np.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


@dataclass(frozen=True)
class HermiteBasis:
    """Scaled Hermite functions ``Phi_alpha(xi) = |lam|^{1/4} h_alpha(sqrt|lam| xi)``
    tabulated at Gauss-Hermite nodes."""

    lam: float
    nh: int = DEFAULT_NH
    nq: int = 64

    def __post_init__(self):
        _check_lam(self.lam)

    @property
    def nodes(self) -> np.ndarray:
        """Quadrature nodes in the ``xi`` variable."""
        return _gauss(self.nq)[0] / np.sqrt(abs(self.lam))

    @property
    def weights(self) -> np.ndarray:
        """Weights for ``int F(xi) dxi`` at :attr:`nodes`."""
        u, w = _gauss(self.nq)
        return w * np.exp(u ** 2) / np.sqrt(abs(self.lam))

    def __call__(self, xi) -> np.ndarray:
        a = abs(self.lam)
        s = np.sqrt(a) * np.asarray(xi, dtype=float)
        return a ** 0.25 * hermite_polynomials(self.nh, s) * np.exp(-s ** 2 / 2)

    @property
    def values(self) -> np.ndarray:
        return self(self.nodes)

    def gram(self) -> np.ndarray:
        """Gram matrix under the quadrature (the Gaussian factor is absorbed
        into the weights, so the products are polynomials)."""
        u, w = _gauss(self.nq)
        P = hermite_polynomials(self.nh, u)
        return (P * w) @ P.T

    def eigenvalues(self) -> np.ndarray:
        return (2 * np.arange(self.nh) + 1) * abs(self.lam)


def schrodinger_coefficients(lam: float, nh: int, x, y,
                             nq: int = 96) -> np.ndarray:
    """``<pi_lam((x, y), 0) Phi_beta, Phi_alpha>`` at horizontal points.

    Returns shape ``x.shape + (nh, nh)`` indexed ``[..., alpha, beta]``.
    With ``a = sqrt|lam|``, ``c = a y`` and the substitution
    ``a xi = u - c/2`` the integral becomes
    ``e^{-c^2/4} sum_k w_k P_alpha(u_k - c/2) P_beta(u_k + c/2)
    exp(-i lam x (xi_k + y/2))``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.sqrt(abs(lam))
    u, w = _gauss(nq)
    c = (a * y)[..., None]
    ua = u - c / 2
    ub = u + c / 2
    phase = np.exp(-1j * lam * x[..., None] * (ua / a + y[..., None] / 2))
    Pa = np.moveaxis(hermite_polynomials(nh, ua), 0, -2)
    Pb = np.moveaxis(hermite_polynomials(nh, ub), 0, -2)
    wt = w * phase * np.exp(-c ** 2 / 4)
    return np.einsum("...aq,...q,...bq->...ab", Pa, wt, Pb)


def bargmann_coefficients(lam: float, nh: int, x, y,
                          nq: int = 40) -> np.ndarray:
    """``<pi_lam((x, y), 0) F_beta, F_alpha>`` in the Fock picture.

    The Gaussian part of the integrand is centred at ``w/4``; with
    ``xi = w/4 + (u + i v)/sqrt(2|lam|)`` the remaining integrand is
    ``F_beta(xi - w/2) conj(F_alpha(xi)) exp(i |lam| Im(conj(w) xi) -
    |lam| |w|^2 / 8)`` and the measure is ``w_u w_v / pi``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = abs(lam)
    wz = (x + 1j * np.sign(lam) * y)[..., None]
    u, wu = _gauss(nq)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = (np.outer(wu, wu) / np.pi).ravel()
    xi = wz / 4 + ((U + 1j * V) / np.sqrt(2 * a)).ravel()
    s = np.sqrt(2 * a)
    fact = np.sqrt([float(factorial(k)) for k in range(nh)])
    za = s * xi
    zb = s * (xi - wz / 2)
    Fa = np.stack([za ** k / fact[k] for k in range(nh)], axis=-2)
    Fb = np.stack([zb ** k / fact[k] for k in range(nh)], axis=-2)
    ph = np.exp(1j * a * np.imag(np.conj(wz) * xi) - a * np.abs(wz) ** 2 / 8)
    return np.einsum("...aq,...q,...bq->...ab", np.conj(Fa), W * ph, Fb)


def fock_gram(lam: float, nh: int = DEFAULT_NH, weight_exponent: float = 2.0,
              nq: int = 60) -> np.ndarray:
    """Gram matrix of ``(sqrt(2|lam|) xi)^a / sqrt(a!)`` for the weight
    ``(2|lam|/pi) exp(-weight_exponent |lam| |xi|^2)`` on ``C``.

    The identity is obtained for ``weight_exponent = 2``.
    """
    _check_lam(lam)
    a = abs(lam)
    u, w = _gauss(nq)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(w, w).ravel()
    beta = weight_exponent * a
    xi = ((U + 1j * V) / np.sqrt(beta)).ravel()
    fact = np.sqrt([float(factorial(k)) for k in range(nh)])
    F = np.stack([(np.sqrt(2 * a) * xi) ** k / fact[k] for k in range(nh)])
    return (2 * a / np.pi) / beta * (F * W) @ np.conj(F).T


@dataclass
class FourierMatrix:
    """Truncated matrix of ``F(f)(lam)`` in the Hermite or Fock basis."""

    lam: float
    nh: int
    picture: str
    matrix: np.ndarray = field(repr=False)

    def to_csv(self, header: bool = True) -> str:
        """Entries as ``lambda,alpha,beta,re,im`` rows."""
        buf = io.StringIO()
        if header:
            buf.write("lambda,alpha,beta,re,im\n")
        for a in range(self.nh):
            for b in range(self.nh):
                v = self.matrix[a, b]
                buf.write(f"{self.lam!r},{a},{b},{v.real!r},{v.imag!r}\n")
        return buf.getvalue()

    def ladder(self) -> np.ndarray:
        """``(2 beta + 1) |lam|``."""
        return (2 * np.arange(self.nh) + 1) * abs(self.lam)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, c):
        return FourierMatrix(self.lam, self.nh, self.picture, c * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._compatible(other)
        return FourierMatrix(self.lam, self.nh, self.picture,
                             self.matrix @ other.matrix)

    def _compatible(self, other):
        if (self.lam, self.nh, self.picture) != (other.lam, other.nh,
                                                 other.picture):
            raise ValueError("incompatible Fourier matrices")

    def _combine(self, other, sign):
        self._compatible(other)
        return FourierMatrix(self.lam, self.nh, self.picture,
                             self.matrix + sign * other.matrix)


def _coefficient_radius2(lam, nh):
    # Matrix coefficients of the first nh basis vectors are Laguerre
    # functions of |zeta|^2 = |lam| |z|^2 / 2, bounded by
    # exp(-(|zeta| - sqrt(4 nh + 2))^2 / 2); beyond this radius they are
    # below e^{-40}.
    return 2.0 * (np.sqrt(4 * nh + 2) + 9.0) ** 2 / abs(lam)


def _default_nq(picture, lam, nh, zmax):
    # resolve the oscillation exp(i sqrt|lam| x u) on the quadrature nodes
    zmax = min(zmax, np.sqrt(_coefficient_radius2(lam, nh)))
    omega2 = abs(lam) * zmax ** 2
    if picture == "schrodinger":
        return int(min(400, max(2 * nh + 40, omega2 / 2 + 2 * nh + 20)))
    return int(min(120, max(nh + 24, omega2 / 4 + nh + 16)))


def _coefficients(picture, lam, nh, Z, nq):
    if picture == "schrodinger":
        return schrodinger_coefficients(lam, nh, Z[:, 0], Z[:, 1], nq)
    if picture == "bargmann":
        return bargmann_coefficients(lam, nh, Z[:, 0], Z[:, 1], nq)
    raise ValueError(f"unknown picture {picture!r}")


def representation_matrix(g: GroupSpec, lam: float, nh: int, points,
                          picture: str = "schrodinger", nq: int | None = None
                          ) -> np.ndarray:
    """Truncated matrices ``<pi_lam(w) e_beta, e_alpha>`` for points ``w``,
    shape ``(M, nh, nh)``."""
    _check_h1(g)
    _check_lam(lam)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nq = nq or _default_nq(picture, lam, nh, np.abs(pts[:, :2]).max())
    A = _coefficients(picture, lam, nh, pts[:, :2], nq)
    return A * np.exp(1j * lam * pts[:, 2])[:, None, None]


def _group_ft(g, f, lam, nh, picture, nq, cutoff):
    _check_h1(g)
    _check_lam(lam)
    grid = f.grid
    # int f(z, t) e^{i lam t} dt = 2T c_{-lam}(z)
    k = grid.lattice_index([-lam])[0]
    fhat = 2 * grid.T * to_blocks(f)[:, k]
    Z = horizontal_coordinates(grid, 1)
    M = np.zeros((nh, nh), dtype=complex)
    scale = 2 * grid.T * np.abs(f.data).max(initial=0.0)
    peak = np.abs(fhat).max(initial=0.0)
    if peak > 1e-13 * scale:
        r2 = np.sum(Z ** 2, axis=1)
        keep = np.nonzero((np.abs(fhat) > cutoff * peak)
                          & (r2 <= _coefficient_radius2(lam, nh)))[0]
        if len(keep):
            nq = nq or _default_nq(picture, lam, nh, np.abs(Z[keep]).max())
            chunk = 256 if picture == "schrodinger" else max(1, 4096 // nq)
            for s in range(0, len(keep), chunk):
                sel = keep[s:s + chunk]
                A = _coefficients(picture, lam, nh, Z[sel], nq)
                M += np.einsum("p,pab->ab", fhat[sel], A)
            M *= grid.hz ** 2
    return FourierMatrix(float(lam), nh, picture, M)


def schrodinger_ft(g: GroupSpec, f: GridFunction, lam: float,
                   nh: int = DEFAULT_NH, nq: int | None = None,
                   cutoff: float = 1e-14) -> FourierMatrix:
    """Truncated Schrodinger-picture Fourier matrix of ``f`` at ``lam``.

    The horizontal integral is a Riemann sum over the grid and the central
    one is exact for the trigonometric interpolant, so ``lam`` must be a
    nonzero lattice frequency. Grid points where ``|f|`` is below
    ``cutoff`` times its maximum (after the central transform) are skipped.

    Raises
    ------
    ValueError
        For groups other than H^1, ``lam = 0`` or off-lattice ``lam``.
    """
    return _group_ft(g, f, lam, nh, "schrodinger", nq, cutoff)


def bargmann_ft(g: GroupSpec, f: GridFunction, lam: float,
                nh: int = DEFAULT_NH, nq: int | None = None,
                cutoff: float = 1e-14) -> FourierMatrix:
    """Truncated Fock-picture Fourier matrix of ``f`` at ``lam``."""
    return _group_ft(g, f, lam, nh, "bargmann", nq, cutoff)


def fourier_family(g: GroupSpec, f: GridFunction, kmax: int | None = None,
                   nh: int = DEFAULT_NH, picture: str = "schrodinger"
                   ) -> list:
    """Fourier matrices at all nonzero lattice frequencies ``|k| <= kmax``.

    Frequencies are processed in parallel (``CARNOT_SPECTRA_THREADS``).
    """
    grid = f.grid
    kmax = grid.Nt // 2 - 1 if kmax is None else kmax
    lams = [np.pi * k / grid.T for k in range(-kmax, kmax + 1) if k != 0]
    ft = schrodinger_ft if picture == "schrodinger" else bargmann_ft
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda lam: ft(g, f, lam, nh), lams))
    return [ft(g, f, lam, nh) for lam in lams]


def invert_ft(g: GroupSpec, matrices, points, T: float,
              constant: float | None = None, tail_tol: float = 0.05,
              check_tail: bool = True) -> np.ndarray:
    """Evaluate the inversion formula at ``points``.

    ``f(w) = c (pi / T) sum_lam |lam| tr(pi_lam(w^{-1}) M(lam))``, the
    lattice sum standing in for the integral over ``lam`` for functions of
    period ``2T`` in ``t``.

    Parameters
    ----------
    matrices : sequence of FourierMatrix
        One matrix per nonzero lattice frequency.
    points : array_like, shape (M, 3)
    T : float
        Half period of the central variable.
    constant : float, optional
        Override ``c`` (default :func:`inversion_constant`).
    tail_tol : float
        Largest share of the weighted Hilbert-Schmidt mass allowed on the
        last basis index or on the outermost frequencies.

    Raises
    ------
    TruncationError
        If the data do not decay across the truncation.
    """
    _check_h1(g)
    mats = list(matrices)
    c = inversion_constant(1) if constant is None else constant
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if check_tail:
        _tail_check(mats, tail_tol)
    out = np.zeros(len(pts), dtype=complex)
    for m in mats:
        A = representation_matrix(g, m.lam, m.nh, -pts, m.picture)
        out += abs(m.lam) * np.einsum("pab,ba->p", A, m.matrix)
    return c * (np.pi / T) * out


def _tail_check(mats, tail_tol):
    if not mats:
        return
    lams = np.array([abs(m.lam) for m in mats])
    mass = np.array([np.sum(np.abs(m.matrix) ** 2) for m in mats]) * lams
    total = mass.sum()
    if total == 0:
        return
    outer = mass[lams >= lams.max() - 1e-12].sum() / total
    if len(mats) > 2 and outer > tail_tol:
        raise TruncationError(f"outermost frequencies carry {outer:.1%} of "
                              f"the Fourier mass (limit {tail_tol:.0%})")
    edge = sum(w * (np.sum(np.abs(m.matrix[-1]) ** 2)
                    + np.sum(np.abs(m.matrix[:, -1]) ** 2))
               for m, w in zip(mats, lams)) / total
    if edge > tail_tol:
        raise TruncationError(f"last Hermite index carries {edge:.1%} of the "
                              f"Fourier mass (limit {tail_tol:.0%})")


def rep_unitarity_check(g: GroupSpec, lam: float, points,
                        nh: int = DEFAULT_NH, picture: str = "schrodinger"
                        ) -> ReportTable:
    """Unitarity and homomorphism defects of the truncated matrices.

    For every sample ``p`` the table reports the largest deviation from 1
    of ``||pi(p) e_alpha||`` over the leading half of the basis (the
    truncation loses mass from the last columns), and the largest entry of
    ``pi(p) pi(q) - pi(p o q)`` on that block, with ``q`` the next sample.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lead = nh // 2
    A = representation_matrix(g, lam, nh, pts, picture)
    qs = np.roll(pts, -1, axis=0)
    B = representation_matrix(g, lam, nh, qs, picture)
    C = representation_matrix(g, lam, nh, group_mul(g, pts, qs), picture)
    table = ReportTable(["index", "unitarity", "homomorphism"])
    for i in range(len(pts)):
        norms = np.linalg.norm(A[i][:, :lead], axis=0)
        prod = (A[i] @ B[i])[:lead, :lead]
        table.add({"index": i,
                   "unitarity": float(np.max(np.abs(norms - 1.0))),
                   "homomorphism": float(np.max(np.abs(prod
                                                       - C[i][:lead, :lead])))})
    return table


def diagonalization_constants(g: GroupSpec, f: GridFunction,
                              lap_f: GridFunction, lam: float,
                              nh: int = DEFAULT_NH,
                              picture: str = "schrodinger") -> np.ndarray:
    """Least-squares ``c_beta`` with ``M[lap_f][:, beta] = c_beta M[f][:, beta]``,
    divided by ``|lam|``.

    For ``lap_f = -Delta f`` the Schrodinger picture predicts ``2 beta + 1``.
    Columns with negligible mass give ``nan``.
    """
    A = _group_ft(g, f, lam, nh, picture, None, 1e-14).matrix
    B = _group_ft(g, lap_f, lam, nh, picture, None, 1e-14).matrix
    num = np.sum(B * np.conj(A), axis=0)
    den = np.sum(np.abs(A) ** 2, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.real(num / den) / abs(lam)
    out[den < 1e-20 * den.max(initial=0.0)] = np.nan
    return out


def convolution_defect(g: GroupSpec, f: GridFunction, h: GridFunction,
                       lam: float, nh: int = DEFAULT_NH,
                       inner: int | None = None) -> float:
    """Entrywise defect of ``F(f * h)(lam) = F(f)(lam) F(h)(lam)``.

    ``f * h`` is formed by :func:`~carnot_spectra.grid.convolve_bruteforce`.
    The matrix product sums over the intermediate basis index, so the
    factors are computed with ``inner`` (default ``4 nh``) basis vectors and
    the leading ``nh x nh`` blocks are compared.  Returns the largest entry
    of the difference relative to the largest entry of ``F(f * h)``.
    """
    inner = inner or 4 * nh
    conv = convolve_bruteforce(g, f, h)
    Mc = schrodinger_ft(g, conv, lam, nh).matrix
    Mf = schrodinger_ft(g, f, lam, inner).matrix
    Mh = schrodinger_ft(g, h, lam, inner).matrix
    P = (Mf @ Mh)[:nh, :nh]
    scale = np.abs(Mc).max()
    return float(np.abs(P - Mc).max() / scale) if scale > 0 else float(
        np.abs(P).max())
