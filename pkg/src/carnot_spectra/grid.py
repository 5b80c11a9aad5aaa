"""Uniform grids, grid functions and group-aware operations on them.

The horizontal box is ``[-L, L)^(2 ell)`` with ``Nz`` points per axis and
spacing ``h = 2L/Nz`` (so the origin is a grid point).  Every central axis
is the periodic interval ``[-T, T)`` with ``Nt`` points.  A grid function
is therefore a trigonometric polynomial in ``t`` with frequencies on the
lattice ``lambda_k = pi k / T``; in ``z`` it is extended by zero outside
the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.special import eval_genlaguerre

from .group import GroupSpec, group_inv, group_mul


@dataclass(frozen=True)
class Grid:
    """Sampling grid.

    Parameters
    ----------
    L : float
        Half-width of the horizontal box.
    T : float
        Half-period of every central axis.
    Nz : int
        Points per horizontal axis (even).
    Nt : int
        Points per central axis (even).
    """

    L: float
    T: float
    Nz: int
    Nt: int

    def __post_init__(self):
        for name in ("L", "T"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"grid.{name} must be positive, got {v}")
        for name in ("Nz", "Nt"):
            v = getattr(self, name)
            if int(v) != v or v < 2 or v % 2:
                raise ValueError(f"grid.{name} must be an even integer >= 2,"
                                 f" got {v}")

    @property
    def hz(self) -> float:
        return 2.0 * self.L / self.Nz

    @property
    def ht(self) -> float:
        return 2.0 * self.T / self.Nt

    @property
    def xaxis(self) -> np.ndarray:
        return -self.L + self.hz * np.arange(self.Nz)

    @property
    def taxis(self) -> np.ndarray:
        return -self.T + self.ht * np.arange(self.Nt)

    @property
    def frequencies(self) -> np.ndarray:
        """Central frequencies in FFT order (``pi k / T``)."""
        return np.fft.fftfreq(self.Nt, d=1.0 / self.Nt) * np.pi / self.T

    def shape(self, g: GroupSpec) -> tuple:
        return (self.Nz,) * g.hdim + (self.Nt,) * g.nc

    def cell(self, g: GroupSpec) -> float:
        return self.hz ** g.hdim * self.ht ** g.nc

    def npoints(self, g: GroupSpec) -> int:
        return self.Nz ** g.hdim * self.Nt ** g.nc

    def points(self, g: GroupSpec) -> np.ndarray:
        """All grid points, shape ``grid.shape(g) + (g.dim,)``."""
        axes = [self.xaxis] * g.hdim + [self.taxis] * g.nc
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def lattice_index(self, lam) -> tuple:
        """Block index of the central frequency vector ``lam``.

        Raises
        ------
        ValueError
            If ``lam`` is not on the lattice ``pi Z / T`` or exceeds the
            frequencies representable with ``Nt`` points.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        idx = []
        for v in lam:
            k = v * self.T / np.pi
            if abs(k - round(k)) > 1e-9:
                raise ValueError(f"lambda={v} is off the lattice pi*Z/T "
                                 f"(T={self.T})")
            k = int(round(k))
            if not -self.Nt // 2 <= k < self.Nt // 2:
                raise ValueError(f"lambda={v} exceeds the grid band limit")
            idx.append(k % self.Nt)
        return tuple(idx)

    def dilated(self, delta: float, min_half_width: float | None = None
                ) -> "Grid":
        """Grid adapted to ``f o dilate(delta)``.

        Spacings scale by ``1/delta`` horizontally and ``1/delta^2``
        centrally.  With ``min_half_width`` the box is enlarged (keeping the
        spacing) so that it never becomes narrower than that value.
        """
        h = self.hz / delta
        L = self.L / delta
        if min_half_width is not None and L < min_half_width:
            n = int(np.ceil(min_half_width / h))
            L = n * h
        Nz = int(round(2 * L / h))
        Nz += Nz % 2
        return Grid(Nz * h / 2, self.T / delta ** 2, Nz, self.Nt)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on a :class:`Grid`.

    The data array is read-only; operations return new objects.
    """

    grid: Grid
    ell: int
    nc: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        shape = (self.grid.Nz,) * (2 * self.ell) + (self.grid.Nt,) * self.nc
        if data.shape != shape:
            raise ValueError(f"data shape {data.shape} does not match grid "
                             f"shape {shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("grid function contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def like(cls, f: "GridFunction", data) -> "GridFunction":
        return cls(f.grid, f.ell, f.nc, data)

    @property
    def cell(self) -> float:
        return self.grid.hz ** (2 * self.ell) * self.grid.ht ** self.nc

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid or other.data.shape != self.data.shape:
                raise ValueError("grid functions live on different grids")
            return other.data
        return other

    def __add__(self, other):
        return GridFunction.like(self, self.data + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction.like(self, self.data - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction.like(self, self._coerce(other) - self.data)

    def __mul__(self, other):
        return GridFunction.like(self, self.data * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction.like(self, -self.data)

    def conj(self):
        return GridFunction.like(self, np.conj(self.data))

    @property
    def real(self):
        return GridFunction.like(self, self.data.real)


def zeros_like(f: GridFunction) -> GridFunction:
    return GridFunction.like(f, np.zeros_like(f.data))


# ---------------------------------------------------------------------------
# Central Fourier blocks


def central_axes(nc: int) -> tuple:
    return tuple(range(-nc, 0))


def block_frequencies(grid: Grid, nc: int) -> np.ndarray:
    """Frequency vectors of all blocks, shape ``(Nt**nc, nc)``, FFT order."""
    fr = grid.frequencies
    mesh = np.meshgrid(*([fr] * nc), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def to_blocks(f: GridFunction) -> np.ndarray:
    """Central Fourier coefficients, shape ``(Nz**(2 ell), Nt**nc)``.

    Column ``k`` holds ``c_k(z)`` with ``f(z, t) = sum_k c_k(z) e^{i lambda_k
    . t}`` at every grid point.
    """
    grid = f.grid
    F = np.fft.fftn(f.data, axes=central_axes(f.nc)) / grid.Nt ** f.nc
    k = np.fft.fftfreq(grid.Nt, d=1.0 / grid.Nt)
    sign = (-1.0) ** np.abs(k)  # e^{i lambda_k T} = (-1)^k
    for ax in range(f.nc):
        shape = [1] * F.ndim
        shape[2 * f.ell + ax] = grid.Nt
        F = F * sign.reshape(shape)
    return F.reshape(grid.Nz ** (2 * f.ell), grid.Nt ** f.nc)


def from_blocks(grid: Grid, ell: int, nc: int, blocks) -> GridFunction:
    """Inverse of :func:`to_blocks`."""
    F = np.asarray(blocks).reshape((grid.Nz,) * (2 * ell) + (grid.Nt,) * nc)
    k = np.fft.fftfreq(grid.Nt, d=1.0 / grid.Nt)
    sign = (-1.0) ** np.abs(k)
    for ax in range(nc):
        shape = [1] * F.ndim
        shape[2 * ell + ax] = grid.Nt
        F = F * sign.reshape(shape)
    data = np.fft.ifftn(F, axes=central_axes(nc)) * grid.Nt ** nc
    return GridFunction(grid, ell, nc, data)


def horizontal_coordinates(grid: Grid, ell: int) -> np.ndarray:
    """Horizontal coordinates of the flattened box, shape ``(n_z, 2 ell)``."""
    mesh = np.meshgrid(*([grid.xaxis] * (2 * ell)), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


# ---------------------------------------------------------------------------
# Analytic test functions


@dataclass(frozen=True)
class AnalyticFunction:
    """Closed-form function ``f(z, t)`` with known central frequencies.

    ``func`` receives horizontal coordinates of shape ``(..., 2 ell)`` and
    central coordinates of shape ``(..., nc)``.  ``frequencies`` lists the
    central frequency vectors present in ``f``; sampling checks that they
    lie on the lattice of the target grid.
    """

    func: Callable
    frequencies: tuple = ()
    label: str = "analytic"

    def __call__(self, z, t):
        return self.func(z, t)

    def dilate(self, delta: float) -> "AnalyticFunction":
        """Return ``f o dilate(delta)``."""
        fz = self.func
        freqs = tuple(tuple(delta ** 2 * np.asarray(v)) for v in
                      self.frequencies)
        return AnalyticFunction(lambda z, t: fz(delta * z, delta ** 2 * t),
                                freqs, f"{self.label}@{delta:g}")


def laguerre_wave(g: GroupSpec, lam, alpha: int = 0) -> AnalyticFunction:
    """Radial Laguerre profile times a central plane wave.

    ``f(z, t) = e^{i <lam, t>} L_alpha^{(ell-1)}(|lam| |z|^2 / 2)
    e^{-|lam| |z|^2 / 4}``.  On H-type groups (and in particular on
    Heisenberg groups) this is an eigenfunction of the sub-Laplacian with
    eigenvalue ``(2 alpha + ell) |lam|``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (g.nc,):
        raise ValueError(f"lam must have {g.nc} components")
    a = float(np.linalg.norm(lam))
    if a == 0:
        raise ValueError("lam must be nonzero")

    def func(z, t):
        r2 = np.sum(z ** 2, axis=-1)
        prof = eval_genlaguerre(alpha, g.ell - 1, a * r2 / 2) * np.exp(-a * r2 / 4)
        return prof * np.exp(1j * (t @ lam))

    return AnalyticFunction(func, (tuple(lam),), f"gaussian{alpha}")


def random_bandlimited(g: GroupSpec, seed: int, grid_T: float,
                       packets: int = 5, sigma: float = 1.2,
                       kmax: float = 1.0, nmax: int = 2, radius: float = 2.0,
                       real: bool = True) -> AnalyticFunction:
    """Seeded sum of Gaussian wave packets with lattice central frequencies.

    Each packet is ``c exp(-|z-a|^2/(2 sigma^2)) cos(<k, z> + phi)
    e^{i <n, t> pi / T}`` with centre ``|a| <= radius``, horizontal
    frequency ``|k| <= kmax`` and integer central indices ``|n_j| <= nmax``.
    The function is defined analytically, so it can be resampled on grids
    of different resolution sharing the period ``grid_T``.
    """
    rng = np.random.default_rng(seed)
    hd = 2 * g.ell
    a = rng.uniform(-1, 1, (packets, hd))
    a *= radius * rng.uniform(0, 1, (packets, 1)) / np.maximum(
        np.linalg.norm(a, axis=1, keepdims=True), 1e-12)
    k = rng.normal(size=(packets, hd))
    k *= kmax * rng.uniform(0, 1, (packets, 1)) / np.linalg.norm(
        k, axis=1, keepdims=True)
    phi = rng.uniform(0, 2 * np.pi, packets)
    n = rng.integers(-nmax, nmax + 1, (packets, g.nc))
    c = rng.normal(size=packets) + 1j * rng.normal(size=packets)
    lam = n * np.pi / grid_T

    def func(z, t):
        out = 0.0
        for m in range(packets):
            d2 = np.sum((z - a[m]) ** 2, axis=-1)
            env = np.exp(-d2 / (2 * sigma ** 2)) * np.cos(z @ k[m] + phi[m])
            out = out + c[m] * env * np.exp(1j * (t @ lam[m]))
        return out.real if real else out

    freqs = set()
    for m in range(packets):
        freqs.add(tuple(lam[m]))
        if real:
            freqs.add(tuple(-lam[m]))
    return AnalyticFunction(func, tuple(sorted(freqs)), f"random{seed}")


def sample(g: GroupSpec, grid: Grid, fn: AnalyticFunction) -> GridFunction:
    """Sample an analytic function on ``grid``.

    Raises
    ------
    ValueError
        If one of the declared central frequencies is off the grid lattice.
    """
    for lam in getattr(fn, "frequencies", ()):
        grid.lattice_index(lam)
    pts = grid.points(g)
    z, t = pts[..., : g.hdim], pts[..., g.hdim:]
    data = np.broadcast_to(fn(z, t), grid.shape(g))
    return GridFunction(grid, g.ell, g.nc, data)


def generator(g: GroupSpec, grid: Grid, name: str, **params) -> AnalyticFunction:
    """Look up a named generator.

    ``gaussian`` (parameters ``lam``, ``alpha``) gives :func:`laguerre_wave`;
    ``random-bandlimited`` (``seed`` plus packet options) gives
    :func:`random_bandlimited` on the period of ``grid``; ``radial``
    (``sigma``) is ``exp(-|z|^2 / (2 sigma^2))``, constant in ``t``; and
    ``gauss`` (``zsigma``, ``tsigma``) is the separable Gaussian
    ``exp(-|z|^2 / (2 zsigma^2) - |t|^2 / (2 tsigma^2))``, which is not
    periodic in ``t`` and should only be sampled with ``T >> tsigma``.
    """
    scale = float(params.pop("scale", 1.0))
    if name == "gaussian":
        lam = params.pop("lam", 1.0)
        lam = np.full(g.nc, float(lam)) if np.isscalar(lam) else lam
        fn = laguerre_wave(g, lam, int(params.pop("alpha", 0)))
    elif name in ("random-bandlimited", "random"):
        fn = random_bandlimited(g, int(params.pop("seed", 0)),
                                grid.T * scale ** 2, **params)
        params = {}
    elif name == "radial":
        fn = _separable_gaussian(g, float(params.pop("sigma", 1.0)), None)
    elif name == "gauss":
        fn = _separable_gaussian(g, float(params.pop("zsigma", 1.0)),
                                 float(params.pop("tsigma", 1.0)))
    else:
        raise ValueError(f"unknown generator {name!r}")
    if params:
        raise ValueError(f"unknown generator parameters {sorted(params)}")
    return fn.dilate(scale) if scale != 1.0 else fn


def _separable_gaussian(g: GroupSpec, zs: float, ts: float | None
                        ) -> AnalyticFunction:
    if not zs > 0 or (ts is not None and not ts > 0):
        raise ValueError("Gaussian widths must be positive")

    def func(z, t):
        out = np.exp(-np.sum(z ** 2, axis=-1) / (2 * zs * zs))
        if ts is not None:
            out = out * np.exp(-np.sum(t ** 2, axis=-1) / (2 * ts * ts))
        return out

    if ts is None:
        return AnalyticFunction(func, (tuple([0.0] * g.nc),), f"radial{zs:g}")
    return AnalyticFunction(func, (), f"gauss{zs:g},{ts:g}")


def parse_generator(text: str) -> tuple:
    """Parse ``"name key=value ..."`` into ``(name, params)``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty generator specification")
    params = {}
    for item in parts[1:]:
        if "=" not in item:
            raise ValueError(f"malformed generator parameter {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k] = int(v)
        except ValueError:
            try:
                params[k] = float(v)
            except ValueError:
                params[k] = v
    return parts[0], params


# ---------------------------------------------------------------------------
# Norms, evaluation and translations


def lp_norm(f: GridFunction, p: float) -> float:
    """Riemann-sum ``L^p`` norm; ``p = inf`` gives the grid maximum."""
    a = np.abs(f.data)
    if np.isinf(p):
        return float(a.max())
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((np.sum(a ** p) * f.cell) ** (1.0 / p))


def evaluate(g: GroupSpec, f: GridFunction, points) -> np.ndarray:
    """Evaluate ``f`` at arbitrary points.

    Horizontal interpolation is multilinear (zero outside the box), the
    central interpolation is the trigonometric one.
    """
    grid = f.grid
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, g.dim)
    blocks = to_blocks(f).reshape((grid.Nz,) * g.hdim + (-1,))
    coords = (flat[:, : g.hdim] + grid.L) / grid.hz
    nb = blocks.shape[-1]
    vals = np.empty((flat.shape[0], nb), dtype=complex)
    for k in range(nb):
        b = blocks[..., k]
        vals[:, k] = (ndimage.map_coordinates(b.real, coords.T, order=1,
                                              mode="grid-constant", cval=0.0)
                      + 1j * ndimage.map_coordinates(b.imag, coords.T,
                                                     order=1,
                                                     mode="grid-constant",
                                                     cval=0.0))
    lam = block_frequencies(grid, g.nc)
    phase = np.exp(1j * flat[:, g.hdim:] @ lam.T)
    return np.sum(vals * phase, axis=1).reshape(pts.shape[:-1])


def translation_leak(g: GroupSpec, grid: Grid, w) -> float:
    """Fraction of points whose translate ``v o w`` leaves the box."""
    wz = np.asarray(w, dtype=float)[: g.hdim]
    x = grid.xaxis
    inside = 1.0
    for i in range(g.hdim):
        y = x + wz[i]
        inside *= np.mean((y >= x[0] - 1e-12) & (y <= x[-1] + 1e-12))
    return 1.0 - inside


def translate_right(g: GroupSpec, f: GridFunction, w, order: int = 1,
                    max_leak: float = 0.2) -> GridFunction:
    """Right translation ``(tau_w f)(v) = f(v o w)``.

    For ``v = (z, t)`` and ``w = (z_w, t_w)`` one has ``v o w = (z + z_w,
    t + t_w + <z, U z_w>/2)``.  The central shift is applied exactly on every
    Fourier block as the phase ``exp(i lambda . (t_w + <z, U z_w>/2))``;
    the horizontal shift uses spline interpolation of the given ``order``
    (1 = multilinear) with zero data outside the box.

    Raises
    ------
    ValueError
        If more than ``max_leak`` of the grid points need data from outside
        the horizontal box.
    """
    grid = f.grid
    leak = translation_leak(g, grid, w)
    if leak > max_leak:
        raise ValueError(f"translation leaks {leak:.1%} of the grid "
                         f"(limit {max_leak:.0%})")
    w = np.asarray(w, dtype=float)
    wz, wt = w[: g.hdim], w[g.hdim:]
    Z = horizontal_coordinates(grid, g.ell)
    lam = block_frequencies(grid, g.nc)
    shift_t = wt[None, :] + 0.5 * np.einsum("pi,kij,j->pk", Z, g.U, wz)
    blocks = to_blocks(f)
    if np.any(wz != 0):
        nb = blocks.shape[1]
        B = blocks.reshape((grid.Nz,) * g.hdim + (nb,))
        sh = tuple(-wz / grid.hz) + (0.0,)
        B = (ndimage.shift(B.real, sh, order=order, mode="grid-constant",
                           cval=0.0, prefilter=order > 1)
             + 1j * ndimage.shift(B.imag, sh, order=order,
                                  mode="grid-constant", cval=0.0,
                                  prefilter=order > 1))
        blocks = B.reshape(-1, nb)
    blocks = blocks * np.exp(1j * shift_t @ lam.T)
    return from_blocks(grid, g.ell, g.nc, blocks)


def convolve_bruteforce(g: GroupSpec, f: GridFunction, h: GridFunction,
                        max_points: int = 4096) -> GridFunction:
    """Direct group convolution ``(f * h)(w) = sum_v f(v) h(v^{-1} w) dv``.

    The sum over the horizontal part of ``v`` is an explicit loop; for each
    horizontal source the central sum is a periodic convolution, evaluated
    exactly through the trigonometric interpolant of ``h``.  Intended as an
    independent oracle on small grids.
    """
    grid = f.grid
    if grid.npoints(g) > max_points:
        raise ValueError(f"grid has {grid.npoints(g)} points, the direct "
                         f"convolution is limited to {max_points}")
    Z = horizontal_coordinates(grid, g.ell)
    nz = Z.shape[0]
    fb = to_blocks(f)
    hb = to_blocks(h)
    lam = block_frequencies(grid, g.nc)
    idx = np.stack(np.unravel_index(np.arange(nz), (grid.Nz,) * g.hdim), 1)
    out = np.zeros_like(fb)
    vol_t = (2 * grid.T) ** g.nc
    for v in range(nz):
        # h(v^{-1} w): horizontal part z_w - z_v, central part
        # t_w - t_v - <z_v, U z_w>/2.
        d = idx - idx[v] + grid.Nz // 2
        ok = np.all((d >= 0) & (d < grid.Nz), axis=1)
        src = np.ravel_multi_index(tuple(d[ok].T), (grid.Nz,) * g.hdim)
        phase = np.exp(-0.5j * np.einsum("i,kij,pj->pk", Z[v], g.U, Z[ok])
                       @ lam.T)
        out[ok] += fb[v][None, :] * hb[src] * phase
    out *= grid.hz ** g.hdim * vol_t
    return from_blocks(grid, g.ell, g.nc, out)


def boundary_mass(f: GridFunction, shell: float = 0.1,
                  norm: bool = False) -> float:
    """Share of the ``L^2`` mass ``||f||_2^2`` in the outer ``shell`` of the box.

    A grid point belongs to the shell when one of its horizontal
    coordinates exceeds ``(1 - shell) L`` in absolute value.  With
    ``norm=True`` the square root of the share is returned, i.e. the
    fraction ``||f 1_shell||_2 / ||f||_2``.
    """
    x = np.abs(f.grid.xaxis)
    mask1 = x > (1 - shell) * f.grid.L
    m = np.zeros(f.data.shape, dtype=bool)
    for i in range(2 * f.ell):
        shape = [1] * f.data.ndim
        shape[i] = -1
        m |= mask1.reshape(shape)
    tot = np.sum(np.abs(f.data) ** 2)
    if not tot:
        return 0.0
    share = float(np.sum(np.abs(f.data[m]) ** 2) / tot)
    return float(np.sqrt(share)) if norm else share
