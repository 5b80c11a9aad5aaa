"""Besov norms: Littlewood-Paley, difference and heat characterisations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import beta as beta_dist, norm as normal_dist, qmc

from .grid import GridFunction, lp_norm, translate_right
from .group import GroupSpec, gauge_norm
from .littlewood_paley import (DyadicPartition, LPDecomposition,
                               MultiplierSpec, apply_multipliers,
                               build_partition, default_window, lp_decompose)
from .report import ReportTable
from .sublaplacian import DEFAULT_ORDER


@dataclass(frozen=True)
class BesovParams:
    """Besov exponents.

    Parameters
    ----------
    s : float
        Smoothness.
    p : float
        Integrability, ``1 <= p <= inf``.
    q : float
        Summability, ``q > 0`` (``q < 1`` gives a quasi-norm).
    homogeneous : bool
        Homogeneous norm over the full window, or inhomogeneous norm with
        the low-pass part ``S_0``.
    window : tuple, optional
        ``(jmin, jmax)``; defaults to :func:`default_window`.
    """

    s: float
    p: float
    q: float
    homogeneous: bool = False
    window: tuple | None = None

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"p must satisfy 1 <= p <= inf, got {self.p}")
        if not (self.q > 0):
            raise ValueError(f"q must be positive, got {self.q}")


def lq_sum(values, q: float) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    if np.isinf(q):
        return float(v.max())
    return float(np.sum(v ** q) ** (1.0 / q))


def _window(g, f, bp):
    if bp.window is not None:
        return build_partition(*bp.window)
    return default_window(g, f.grid)


def besov_from_decomposition(dec: LPDecomposition, bp: BesovParams) -> float:
    """Besov norm computed from precomputed dyadic pieces."""
    js = list(dec.partition.indices())
    if bp.homogeneous:
        terms = [2.0 ** (j * bp.s) * lp_norm(dec.bands[j], bp.p) for j in js]
        return lq_sum(terms, bp.q)
    if not dec.jmin <= 0:
        raise ValueError("inhomogeneous norm needs a window with jmin <= 0")
    terms = [2.0 ** (j * bp.s) * lp_norm(dec.bands[j], bp.p)
             for j in js if j >= 0]
    return lp_norm(dec.S(0), bp.p) + lq_sum(terms, bp.q)


def besov_norm(g: GroupSpec, f: GridFunction, bp: BesovParams,
               eps: float = 1e-8, order: int = DEFAULT_ORDER,
               decomposition: LPDecomposition | None = None) -> float:
    """Littlewood-Paley Besov norm.

    Inhomogeneous: ``||S_0 f||_p + (sum_{j>=0} (2^{js} ||Delta_j f||_p)^q)^{1/q}``.
    Homogeneous: ``(sum_{jmin<=j<=jmax} (2^{js} ||Delta_j f||_p)^q)^{1/q}``.
    """
    dec = decomposition or lp_decompose(g, f, _window(g, f, bp), eps, order)
    return besov_from_decomposition(dec, bp)


@dataclass(frozen=True)
class BallSampling:
    """Quasi-Monte Carlo sampling of translations ``y`` by gauge shells.

    Shell ``m`` covers gauge radii ``[2^{-m-1}, 2^{-m}]`` for
    ``mtop <= m < mtop + shells``; each shell receives ``points`` scrambled
    Sobol points (a power of two) seeded by ``(seed, m)``, so doubling
    ``points`` extends the same sequence.
    """

    shells: int = 12
    points: int = 16
    seed: int = 0
    mtop: int = 0


def gauge_sphere_points(g: GroupSpec, u: np.ndarray) -> np.ndarray:
    """Map points of ``[0,1)^d`` to the unit gauge sphere.

    The image is distributed according to the surface measure induced by
    homogeneous polar coordinates ``dy = r^{Q-1} dr dsigma``.  In the
    parametrisation ``|z| = (1-u)^{1/4}``, ``|t| = sqrt(u)/4`` the variable
    ``u`` is ``Beta(nc/2, ell/2)`` distributed, and the directions of ``z``
    and ``t`` are uniform on their spheres.
    """
    u = np.clip(u, 1e-12, 1 - 1e-12)
    ub = beta_dist.ppf(u[:, 0], g.nc / 2.0, g.ell / 2.0)
    zd = normal_dist.ppf(u[:, 1:1 + g.hdim])
    zd /= np.linalg.norm(zd, axis=1, keepdims=True)
    if g.nc == 1:
        td = np.where(u[:, 1 + g.hdim:2 + g.hdim] < 0.5, -1.0, 1.0)
    else:
        td = normal_dist.ppf(u[:, 1 + g.hdim:1 + g.hdim + g.nc])
        td /= np.linalg.norm(td, axis=1, keepdims=True)
    z = zd * (1.0 - ub)[:, None] ** 0.25
    t = td * np.sqrt(ub)[:, None] / 4.0
    return np.concatenate([z, t], axis=1)


def shell_samples(g: GroupSpec, sampling: BallSampling, m: int) -> np.ndarray:
    """Translation vectors of shell ``m`` (log-uniform in the radius)."""
    d = 2 + g.hdim + g.nc
    eng = qmc.Sobol(d, scramble=True,
                    seed=np.random.default_rng([sampling.seed, m + 1000]))
    u = eng.random(sampling.points)
    omega = gauge_sphere_points(g, u[:, 1:])
    r = 2.0 ** (-m - u[:, 0])
    z = omega[:, : g.hdim] * r[:, None]
    t = omega[:, g.hdim:] * r[:, None] ** 2
    return np.concatenate([z, t], axis=1)


def difference_norm(g: GroupSpec, f: GridFunction, bp: BesovParams,
                    sampling: BallSampling = BallSampling(),
                    interp_order: int = 1, max_leak: float = 0.2) -> float:
    """Difference characterisation of the Besov norm, ``0 < s < 1``.

    ``||f||_p + (int_{|y|<=1} (||tau_y f - f||_p / |y|^s)^q dy / V(|y|))^{1/q}``
    with ``|y|`` the gauge and ``V(r) = |B_1| r^Q``.  In homogeneous polar
    coordinates ``dy / V(|y|) = Q (dr / r) dsigma / sigma(S)``, so every
    dyadic shell contributes ``Q ln 2`` times the mean of the integrand over
    the shell.  The homogeneous variant drops ``||f||_p`` and uses the shells
    given by ``sampling`` (which may start above radius 1 via ``mtop < 0``).
    """
    if not 0 < bp.s < 1:
        raise ValueError("the difference norm needs 0 < s < 1")
    vals = []
    weight = g.Q * np.log(2.0)
    for m in range(sampling.mtop, sampling.mtop + sampling.shells):
        ys = shell_samples(g, sampling, m)
        F = []
        for y in ys:
            d = translate_right(g, f, y, order=interp_order,
                                max_leak=max_leak) - f
            F.append(lp_norm(d, bp.p) / float(gauge_norm(g, y)) ** bp.s)
        F = np.asarray(F)
        vals.append(F.max() if np.isinf(bp.q) else np.mean(F ** bp.q))
    if np.isinf(bp.q):
        integral = max(vals)
    else:
        integral = (weight * np.sum(vals)) ** (1.0 / bp.q)
    if bp.homogeneous:
        return float(integral)
    return lp_norm(f, bp.p) + float(integral)


def heat_norm(g: GroupSpec, f: GridFunction, bp: BesovParams, m: int = 2,
              kmax: int = 24, eps: float = 1e-8, order: int = DEFAULT_ORDER,
              tail_tol: float = 1e-2) -> float:
    """Heat-semigroup characterisation of the inhomogeneous Besov norm.

    ``||f||_p + (int_0^1 t^{-sq/2} ||(t(-Delta))^{m/2} e^{t Delta} f||_p^q
    dt/t)^{1/q}`` with ``m > s``.  The integral is discretised in
    ``log t`` at ``t_k = 4^{-k}`` (trapezoidal rule, step ``2 ln 2``); the
    number of nodes grows until the last term is below ``tail_tol`` of the
    sum.

    Raises
    ------
    ValueError
        If ``m <= s``.
    RuntimeError
        If the tail criterion is not met with ``kmax`` nodes.
    """
    if not m > bp.s:
        raise ValueError(f"heat characterisation needs m > s "
                         f"(m={m}, s={bp.s})")
    ts = 4.0 ** (-np.arange(kmax + 1))
    specs = [MultiplierSpec("heat_moment", float(t), eps, float(m))
             for t in ts]
    outs = apply_multipliers(g, [f], specs, order)
    norms = np.array([lp_norm(o[0], bp.p) for o in outs])
    integrand = ts ** (-bp.s / 2.0) * norms
    if np.isinf(bp.q):
        return lp_norm(f, bp.p) + float(integrand.max())
    terms = integrand ** bp.q
    w = np.full(len(ts), 2.0 * np.log(2.0))
    w[0] *= 0.5
    csum = np.cumsum(w * terms)
    for k in range(4, len(ts)):
        if terms[k] <= tail_tol * csum[k]:
            return lp_norm(f, bp.p) + float(csum[k] ** (1.0 / bp.q))
    raise RuntimeError("heat integral did not converge within kmax nodes")


def embedding_report(g: GroupSpec, functions: Sequence[GridFunction],
                     s: float, p1: float, p2: float, q: float,
                     homogeneous: bool = False, window=None,
                     eps: float = 1e-8, order: int = DEFAULT_ORDER
                     ) -> ReportTable:
    """Ratios ``||f||_{B^s_{p2,q}} / ||f||_{B^{s + Q/p1 - Q/p2}_{p1,q}}``.

    The embedding ``B^{s+Q/p1-Q/p2}_{p1,q} -> B^s_{p2,q}`` holds for
    ``p1 <= p2``; a bounded ratio over the sample set is the empirical
    evidence.
    """
    if p1 > p2:
        raise ValueError("the embedding needs p1 <= p2")
    s1 = s + g.Q / p1 - (0.0 if np.isinf(p2) else g.Q / p2)
    table = ReportTable(["index", "lhs", "rhs", "ratio"])
    fs = list(functions)
    if not fs:
        return table
    part = build_partition(*window) if window else default_window(g, fs[0].grid)
    decs = lp_decompose(g, fs, part, eps, order)
    for i, dec in enumerate(decs):
        lhs = besov_from_decomposition(dec, BesovParams(s, p2, q, homogeneous))
        rhs = besov_from_decomposition(dec, BesovParams(s1, p1, q, homogeneous))
        table.add({"index": i, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
    return table
