"""Step-two Carnot groups in exponential coordinates.

A group is described by ``ell`` (half the horizontal dimension), ``nc``
(the central dimension) and a stack of skew-symmetric matrices
``U[k]`` of shape ``(2*ell, 2*ell)``.  Points are real arrays whose last
axis has length ``2*ell + nc``: the first ``2*ell`` entries are the
horizontal coordinates ``z`` and the remaining ``nc`` entries the central
coordinates ``t``.  The product is

    (z, t) o (z', t') = (z + z', t_k + t'_k + <z, U[k] z'> / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


class GroupError(ValueError):
    """Raised when the structure matrices do not define a valid group."""


class NoAdmissiblePathError(RuntimeError):
    """Raised when no horizontal path reaches the requested endpoint."""


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Structure data of a step-two group.

    Parameters
    ----------
    ell : int
        Half the horizontal dimension.
    nc : int
        Central dimension.
    U : ndarray, shape (nc, 2*ell, 2*ell)
        Skew-symmetric, linearly independent structure matrices.
    htype : bool
        Whether the matrices satisfy the H-type relations.
    """

    ell: int
    nc: int
    U: np.ndarray
    htype: bool = False

    @property
    def hdim(self) -> int:
        """Horizontal dimension ``2*ell``."""
        return 2 * self.ell

    @property
    def dim(self) -> int:
        """Topological dimension ``2*ell + nc``."""
        return 2 * self.ell + self.nc

    @property
    def Q(self) -> int:
        """Homogeneous dimension ``2*ell + 2*nc``."""
        return 2 * self.ell + 2 * self.nc

    def key(self):
        return (self.ell, self.nc, self.htype, self.U.tobytes())

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.key() == other.key()

    def identity(self) -> np.ndarray:
        return np.zeros(self.dim)

    def split(self, p):
        """Return the horizontal and central parts of ``p``."""
        p = np.asarray(p, dtype=float)
        return p[..., : self.hdim], p[..., self.hdim:]


def make_group(ell: int, nc: int, U, require_htype: bool = False,
               tol: float = 1e-10) -> GroupSpec:
    """Validate structure matrices and build a :class:`GroupSpec`.

    Parameters
    ----------
    ell, nc : int
        Half horizontal dimension and central dimension, both >= 1.
    U : array_like, shape (nc, 2*ell, 2*ell)
        Structure matrices.
    require_htype : bool
        If true, the H-type relations ``U_r U_s + U_s U_r = 0`` for
        ``r != s`` and ``U_j U_j^T = I`` are enforced.
    tol : float
        Absolute tolerance for all checks.

    Returns
    -------
    GroupSpec

    Raises
    ------
    GroupError
        If a matrix is not skew-symmetric, the matrices are linearly
        dependent, or a requested H-type relation fails.  The message
        names the offending indices and the residual.
    """
    ell, nc = int(ell), int(nc)
    if ell < 1 or nc < 1:
        raise GroupError(f"ell and nc must be >= 1, got ell={ell}, nc={nc}")
    U = np.array(U, dtype=float).reshape(nc, 2 * ell, 2 * ell) \
        if np.size(U) == nc * 4 * ell * ell else None
    if U is None:
        raise GroupError(f"U must contain {nc} matrices of shape "
                         f"({2 * ell}, {2 * ell})")
    for k in range(nc):
        res = float(np.max(np.abs(U[k] + U[k].T)))
        if res > tol:
            raise GroupError(f"U[{k}] is not skew-symmetric "
                             f"(residual {res:.3e})")
    flat = U.reshape(nc, -1)
    sv = np.linalg.svd(flat, compute_uv=False)
    if sv[-1] <= tol * max(1.0, sv[0]):
        raise GroupError(f"U matrices are linearly dependent "
                         f"(smallest singular value {sv[-1]:.3e})")
    eye = np.eye(2 * ell)
    htype = True
    worst = None
    for r in range(nc):
        res = float(np.max(np.abs(U[r] @ U[r].T - eye)))
        if res > tol:
            htype = False
            worst = worst or (f"U[{r}] U[{r}]^T != I", res)
        for s in range(r + 1, nc):
            res = float(np.max(np.abs(U[r] @ U[s] + U[s] @ U[r])))
            if res > tol:
                htype = False
                worst = worst or (f"U[{r}] U[{s}] + U[{s}] U[{r}] != 0", res)
    if require_htype and not htype:
        msg, res = worst
        raise GroupError(f"H-type relation violated: {msg} "
                         f"(residual {res:.3e})")
    U.setflags(write=False)
    return GroupSpec(ell, nc, U, htype)


def heisenberg(ell: int = 1) -> GroupSpec:
    """Heisenberg group of dimension ``2*ell + 1``.

    The structure matrix is block diagonal with blocks ``[[0, 1], [-1, 0]]``
    acting on the pairs ``(x_j, y_j)``, so that on ``H^1`` the product reads
    ``t + t' + (x y' - y x') / 2``.
    """
    U = np.zeros((1, 2 * ell, 2 * ell))
    for j in range(ell):
        U[0, 2 * j, 2 * j + 1] = 1.0
        U[0, 2 * j + 1, 2 * j] = -1.0
    return make_group(ell, 1, U)


def quaternionic_htype() -> GroupSpec:
    """H-type group with ``ell = 2`` and ``nc = 3`` (quaternionic structure)."""
    # Left multiplication by i, j, k on R^4 = H, written as real 4x4 matrices.
    Ui = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    Uj = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    Uk = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    return make_group(2, 3, [Ui, Uj, Uk], require_htype=True)


def _bracket(g: GroupSpec, z, w):
    """Return ``<z, U[k] w>`` for every k (vectorised over leading axes)."""
    return np.einsum("...i,kij,...j->...k", z, g.U, w)


def group_mul(g: GroupSpec, p, q) -> np.ndarray:
    """Group product ``p o q`` (broadcasts over leading axes)."""
    pz, pt = g.split(p)
    qz, qt = g.split(q)
    return np.concatenate([pz + qz, pt + qt + 0.5 * _bracket(g, pz, qz)],
                          axis=-1)


def group_inv(g: GroupSpec, p) -> np.ndarray:
    """Group inverse, which is ``-p`` in exponential coordinates."""
    return -np.asarray(p, dtype=float)


def dilate(g: GroupSpec, delta: float, p) -> np.ndarray:
    """Anisotropic dilation ``(z, t) -> (delta z, delta^2 t)``."""
    if not np.all(np.asarray(delta) > 0):
        raise ValueError(f"dilation factor must be positive, got {delta}")
    pz, pt = g.split(p)
    return np.concatenate([delta * pz, delta ** 2 * pt], axis=-1)


def gauge_norm(g: GroupSpec, p) -> np.ndarray:
    """Homogeneous gauge ``(|z|^4 + 16 |t|^2)^(1/4)``."""
    pz, pt = g.split(p)
    z2 = np.sum(pz ** 2, axis=-1)
    t2 = np.sum(pt ** 2, axis=-1)
    return (z2 ** 2 + 16.0 * t2) ** 0.25


@dataclass
class HorizontalPath:
    """Piecewise-constant horizontal control on ``[0, 1]``.

    ``controls[k]`` is the velocity on the k-th of ``K`` equal segments.
    """

    controls: np.ndarray

    @property
    def length(self) -> float:
        K = len(self.controls)
        return float(np.sum(np.linalg.norm(self.controls, axis=1)) / K)

    def endpoint(self, g: GroupSpec) -> np.ndarray:
        return _endpoint(g, self.controls.ravel(), len(self.controls))[0]


def _endpoint(g: GroupSpec, cflat, K):
    """Endpoint of the path from e and its Jacobian w.r.t. the controls.

    On a segment with constant velocity ``c`` the horizontal part moves
    linearly and the central part changes by ``<z0, U c> / 2`` times the
    duration, because ``<c, U c> = 0``.
    """
    c = cflat.reshape(K, g.hdim)
    prefix = np.cumsum(c, axis=0) - c          # sum_{m<a} c_m
    suffix = c.sum(axis=0) - prefix - c        # sum_{k>a} c_k
    z = c.sum(axis=0) / K
    t = 0.5 / K ** 2 * np.einsum("ai,kij,aj->k", prefix, g.U, c)
    jac = np.zeros((g.dim, K, g.hdim))
    jac[: g.hdim] = np.eye(g.hdim)[:, None, :] / K
    jz = (np.einsum("kij,aj->kai", g.U, suffix)
          + np.einsum("kji,aj->kai", g.U, prefix))
    jac[g.hdim:] = 0.5 / K ** 2 * jz
    return np.concatenate([z, t]), jac.reshape(g.dim, -1)


def _project(g, c, target, K, iters=20):
    """Gauss-Newton minimum-norm correction onto the endpoint constraint."""
    for _ in range(iters):
        e, J = _endpoint(g, c, K)
        r = e - target
        if np.max(np.abs(r)) < 1e-14:
            break
        c = c - np.linalg.lstsq(J, r, rcond=None)[0]
    return c


def cc_distance_ub(g: GroupSpec, p, q, K: int = 16, budget: int = 200,
                   starts: int = 6, seed: int = 0,
                   return_path: bool = False):
    """Upper bound for the Carnot-Caratheodory distance ``d(p, q)``.

    By left invariance the search runs over horizontal paths from the
    identity to ``p^{-1} o q``.  The energy of piecewise-constant controls
    is minimised under the endpoint constraint (SLSQP, several seeded
    starts), every candidate is polished by a Gauss-Newton projection, and
    the smallest length among admissible candidates is returned.

    Parameters
    ----------
    g : GroupSpec
    p, q : array_like
        Endpoints.
    K : int
        Number of control segments.
    budget : int
        Iteration limit for each optimisation run.
    starts : int
        Number of starting points (the first is the straight segment).
    seed : int
        Seed of the random starting points.
    return_path : bool
        Also return the best :class:`HorizontalPath`.

    Returns
    -------
    float or (float, HorizontalPath)

    Raises
    ------
    NoAdmissiblePathError
        If no candidate reaches the endpoint to within ``1e-8``.
    """
    target = group_mul(g, group_inv(g, p), q)
    scale = float(gauge_norm(g, target))
    if scale == 0.0:
        path = HorizontalPath(np.zeros((K, g.hdim)))
        return (0.0, path) if return_path else 0.0
    rng = np.random.default_rng(seed)
    tz = target[: g.hdim]
    inits = [np.tile(tz, (K, 1)).ravel()]
    for _ in range(max(starts, 1) - 1):
        inits.append(scale * rng.standard_normal(K * g.hdim))

    def energy(c):
        return float(c @ c) / K, 2.0 * c / K

    cons = {"type": "eq",
            "fun": lambda c: _endpoint(g, c, K)[0] - target,
            "jac": lambda c: _endpoint(g, c, K)[1]}
    best = None
    for c0 in inits:
        res = minimize(energy, c0, jac=True, method="SLSQP",
                       constraints=[cons],
                       options={"maxiter": budget, "ftol": 1e-12})
        c = _project(g, res.x, target, K)
        resid = np.max(np.abs(_endpoint(g, c, K)[0] - target))
        if resid > 1e-8 * max(1.0, scale):
            continue
        path = HorizontalPath(c.reshape(K, g.hdim))
        if best is None or path.length < best.length:
            best = path
    if best is None:
        raise NoAdmissiblePathError(
            f"no admissible path to {target} within budget {budget}")
    return (best.length, best) if return_path else best.length
