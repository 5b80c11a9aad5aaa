"""Bony paraproducts, spectral localisation of products and product laws.

The dyadic pieces of a function on a window ``[jmin, jmax]`` are the
low-pass part ``S_jmin f`` (labelled ``jmin - 1``) and the bands
``Delta_j f``.  Each piece is used exactly once, so with

    T_u v = sum_j S_{j-1} u . Delta_j v,   S_{j-1} u = sum_{i <= j-2} piece_i(u),
    R(u, v) = sum_{|i - j| <= 1} piece_i(u) . piece_j(v),

the identity ``u v = T_u v + T_v u + R(u, v)`` holds exactly for the
reconstructed functions; the measured residual is the reconstruction error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .besov import BesovParams, besov_from_decomposition
from .grid import GridFunction, lp_norm, zeros_like
from .group import GroupSpec
from .littlewood_paley import (DyadicPartition, LPDecomposition,
                               apply_multipliers, build_partition, chi_spec,
                               UnresolvedMultiplierError, lp_decompose,
                               psi_spec)
from .report import ReportTable
from .sublaplacian import DEFAULT_ORDER, apply_field


def _decs(g, u, v, window, eps, order, decs):
    if decs is not None:
        return decs
    part = window if isinstance(window, DyadicPartition) \
        else build_partition(*window)
    return tuple(lp_decompose(g, [u, v], part, eps, order))


def _paraprod_from(du: LPDecomposition, dv: LPDecomposition) -> GridFunction:
    pu, pv = du.pieces(), dv.pieces()
    out = zeros_like(pu[0][1])
    acc = zeros_like(pu[0][1])  # running sum of pieces of u with label <= j-2
    k = 0
    for j, piece in pv:
        while k < len(pu) and pu[k][0] <= j - 2:
            acc = acc + pu[k][1]
            k += 1
        if k:
            out = out + acc * piece
    return out


def _remainder_from(du: LPDecomposition, dv: LPDecomposition) -> GridFunction:
    pu, pv = dict(du.pieces()), dict(dv.pieces())
    out = zeros_like(next(iter(pu.values())))
    for i, a in pu.items():
        for j in (i - 1, i, i + 1):
            if j in pv:
                out = out + a * pv[j]
    return out


def paraprod(g: GroupSpec, u: GridFunction, v: GridFunction, window,
             eps: float = 1e-8, order: int = DEFAULT_ORDER,
             decs=None) -> GridFunction:
    """Paraproduct ``T_u v = sum_j S_{j-1} u . Delta_j v``."""
    du, dv = _decs(g, u, v, window, eps, order, decs)
    return _paraprod_from(du, dv)


def remainder(g: GroupSpec, u: GridFunction, v: GridFunction, window,
              eps: float = 1e-8, order: int = DEFAULT_ORDER,
              decs=None) -> GridFunction:
    """Resonant term ``R(u, v) = sum_{|i-j|<=1} Delta_i u . Delta_j v``."""
    du, dv = _decs(g, u, v, window, eps, order, decs)
    return _remainder_from(du, dv)


@dataclass
class BonySplit:
    Tuv: GridFunction
    Tvu: GridFunction
    R: GridFunction
    residual: float


def bony_decomposition(g: GroupSpec, u: GridFunction, v: GridFunction,
                       window, eps: float = 1e-8,
                       order: int = DEFAULT_ORDER) -> BonySplit:
    """Compute ``T_u v``, ``T_v u``, ``R(u, v)`` and the relative residual
    ``||uv - T_u v - T_v u - R||_2 / ||uv||_2``."""
    du, dv = _decs(g, u, v, window, eps, order, None)
    Tuv = _paraprod_from(du, dv)
    Tvu = _paraprod_from(dv, du)
    R = _remainder_from(du, dv)
    uv = u * v
    res = lp_norm(uv - Tuv - Tvu - R, 2) / lp_norm(uv, 2)
    return BonySplit(Tuv, Tvu, R, res)


def bony_residual(g: GroupSpec, u: GridFunction, v: GridFunction, window,
                  eps: float = 1e-8, order: int = DEFAULT_ORDER) -> float:
    return bony_decomposition(g, u, v, window, eps, order).residual


# ---------------------------------------------------------------------------
# Spectral localisation of products


def ring_bands(center_j: int, factor: float, ball: bool = False) -> tuple:
    """Bands whose support ``[4^{j-1}, 4^{j+1}]`` meets the ring
    ``[4^c / factor, factor 4^c]`` (or the ball ``[0, factor 4^c]``)."""
    lo = -np.inf if ball else 4.0 ** center_j / factor
    hi = factor * 4.0 ** center_j
    # 4^{j+1} > lo and 4^{j-1} < hi
    jhi = int(np.ceil(np.log(hi) / np.log(4.0) + 1)) - 1
    jlo = -10 ** 6 if ball else int(np.floor(np.log(lo) / np.log(4.0) - 1)) + 1
    return jlo, jhi


def localization_leak(g: GroupSpec, w: GridFunction, center_j: int,
                      factor: float = 8.0, ball: bool = False,
                      eps: float = 1e-10, order: int = DEFAULT_ORDER) -> float:
    """Share of ``w`` in bands that do not meet the ring (or ball).

    Computed as ``||w - sum_{j in ring} Delta_j w||_2 / ||w||_2``, which by
    the partition of unity equals the norm of the remaining pieces.
    """
    jlo, jhi = ring_bands(center_j, factor, ball)
    if ball:
        # bands above the ball only
        low = apply_multipliers(g, [w], [chi_spec(jhi + 1, eps)], order)[0][0]
        return lp_norm(w - low, 2) / lp_norm(w, 2)
    specs = [psi_spec(j, eps) for j in range(jlo, jhi + 1)]
    parts = apply_multipliers(g, [w], specs, order)
    inside = zeros_like(w)
    for p in parts:
        inside = inside + p[0]
    return lp_norm(w - inside, 2) / lp_norm(w, 2)


def localization_report(g: GroupSpec, f_source: GridFunction,
                        g_source: GridFunction, pairs: Sequence[tuple],
                        factors=(4.0, 8.0, 16.0), eps: float = 1e-10,
                        threshold: float = 1e-6,
                        order: int = DEFAULT_ORDER) -> ReportTable:
    """Spectral localisation of products of purified band functions.

    For every pair ``(m, m')`` the functions ``f = Delta_m f_source`` and
    ``h = Delta_{m'} g_source`` are formed and the leak of ``f h`` outside
    the ring around ``4^{m'}`` (or, when ``m == m'``, outside the ball of
    radius ``factor 4^{m'}``) is measured for each dilation factor.  A
    summary row reports the smallest gap ``M1`` such that every pair with
    ``m' - m >= M1`` has leak below ``threshold`` at factor 8.

    Bands too far below the spectral bound for the Chebyshev filter are
    purified by spectral slicing instead.
    """
    table = ReportTable(["m", "mprime", "gap", "factor", "leak"])
    cache = {}

    def band(src, key, j):
        if (key, j) not in cache:
            spec = [psi_spec(j, eps)]
            try:
                piece = apply_multipliers(g, [src], spec, order)[0][0]
            except UnresolvedMultiplierError:
                piece = apply_multipliers(g, [src], spec, order,
                                          method="slice")[0][0]
            cache[(key, j)] = piece
        return cache[(key, j)]

    leaks = {}
    for m, mp in pairs:
        w = band(f_source, "f", m) * band(g_source, "g", mp)
        for fac in factors:
            leak = localization_leak(g, w, mp, fac, ball=(m == mp), eps=eps,
                                     order=order)
            table.add({"m": m, "mprime": mp, "gap": mp - m, "factor": fac,
                       "leak": leak})
            if fac == 8.0:
                leaks[(m, mp)] = leak
    gaps = sorted({mp - m for m, mp in leaks if mp > m})
    M1 = None
    for d0 in gaps:
        if all(leaks[k] < threshold for k in leaks if k[1] - k[0] >= d0):
            M1 = d0
            break
    table.add({"m": "M1", "mprime": "", "gap": M1 if M1 is not None else "",
               "factor": 8.0, "leak": ""})
    return table


# ---------------------------------------------------------------------------
# Product laws


class HypothesisError(ValueError):
    """A product-law case violates the hypotheses of its statement."""


def _lq(x):
    return np.inf if x in ("inf", np.inf) else float(x)


LAWS = {
    # id: (description, required parameter names)
    "algebra": ("||fg||_{B^s_{p,q}} <= C (||f||_inf ||g||_{B^s_{p,q}} + "
                "||g||_inf ||f||_{B^s_{p,q}})", ("s", "p", "q")),
    "mixed_lebesgue": ("||fg||_{B^s_{p,q}} <= C (||f||_{L^a1} ||g||_{B^s_{b1,q}}"
                       " + ||g||_{L^a2} ||f||_{B^s_{b2,q}})",
                       ("s", "p", "q", "a1", "b1", "a2", "b2")),
    "critical_embedding": ("||f||_inf <= C ||f||_{B^s_{Q/s,1}} (homogeneous)",
                           ("s",)),
    "critical_algebra": ("||fg||_{B^s_{Q/s,1}} <= C ||f||_{B^s_{Q/s,1}} "
                         "||g||_{B^s_{Q/s,1}} (homogeneous)", ("s",)),
    "quasi_norm": ("||fg||_{B^s_{p,1}} <= C (||f||_inf ||g||_{B^s_{p,(s-1)/s}}"
                   " + ||g||_inf ||f||_{B^s_{p,(s-1)/s}}) (homogeneous)",
                   ("s", "p")),
    "lebesgue_pair": ("||fg||_{B^s_{p,q}} <= C (||f||_{B^s_{p1,q}} + "
                      "||f||_{p1}) (||g||_{B^s_{p2,q}} + ||g||_{p2}), "
                      "1/p = 1/p1 + 1/p2", ("s", "p1", "p2", "q")),
    "derivative_equivalence": ("||f||_{B^{s+1}_{p,q}} ~ sum_i ||X_i f||_{B^s_{p,q}}"
                               " (homogeneous, two-sided)", ("s", "p", "q")),
    "nonlinear_a": ("||fg||_{B^rho_{p,r}} <= C (||f||_inf ||g||_{B^rho_{p,r}} "
                    "+ ||g||_inf ||f||_{B^rho_{p,r}})", ("rho", "p", "r")),
    "nonlinear_b": ("||fg||_{B^rho_{p2,r2}} <= C (||f||_{B^rho1_{p1,inf}} "
                    "||g||_{B^rho2_{p2,r2}} + sym), rho = rho1 + rho2 - Q/p1",
                    ("rho1", "rho2", "p1", "p2", "r2")),
    "nonlinear_c": ("||fg||_{B^rho_{p2,inf}} <= C (||f||_{B^rho1_{p1,r1}} "
                    "||g||_{B^rho2_{p2,r2}} + sym), 1/r1 + 1/r2 = 1",
                    ("rho1", "rho2", "p1", "p2", "r1", "r2")),
    "nonlinear_d": ("||fg||_{B^rho12_{p,r}} <= C ||f||_{B^rho1_{p1,r1}} "
                    "||g||_{B^rho2_{p2,r2}}, r = max(r1, r2)",
                    ("rho1", "rho2", "p1", "p2", "p", "r1", "r2")),
    "nonlinear_e": ("||fg||_{B^rho12_{p,inf}} <= C ||f||_{B^rho1_{p1,r1}} "
                    "||g||_{B^rho2_{p2,r2}}, 1/r1 + 1/r2 = 1",
                    ("rho1", "rho2", "p1", "p2", "p", "r1", "r2")),
}


@dataclass
class ProductLawCase:
    """One product estimate to be tested on a corpus.

    ``params`` holds the exponents named in :data:`LAWS`; ``homogeneous``
    selects homogeneous norms for laws that allow both.
    """

    law: str
    params: dict = field(default_factory=dict)
    homogeneous: bool = False

    @property
    def label(self) -> str:
        ps = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.law}[{ps}{';hom' if self.homogeneous else ''}]"

    def to_text(self) -> str:
        """Inverse of the ``law k=v ... [homogeneous]`` config syntax."""
        items = [self.law] + [f"{k}={v}" for k, v in self.params.items()]
        return " ".join(items + (["homogeneous"] if self.homogeneous else []))

    def validate(self, Q: int):
        """Check the hypotheses; raise :class:`HypothesisError` naming the
        violated one."""
        if self.law not in LAWS:
            raise HypothesisError(f"unknown law {self.law!r}")
        need = LAWS[self.law][1]
        missing = [k for k in need if k not in self.params]
        if missing:
            raise HypothesisError(f"{self.law}: missing parameters {missing}")
        P = {k: _lq(v) for k, v in self.params.items()}
        inv = lambda x: 0.0 if np.isinf(x) else 1.0 / x  # noqa: E731

        def req(cond, text):
            if not cond:
                raise HypothesisError(f"{self.law}: hypothesis {text} violated")

        for k in ("p", "p1", "p2", "a1", "a2", "b1", "b2"):
            if k in P:
                req(P[k] >= 1, f"{k} >= 1")
        L = self.law
        if L == "algebra":
            req(P["s"] > 0, "s > 0")
        elif L == "mixed_lebesgue":
            req(P["s"] > 0, "s > 0")
            for i in ("1", "2"):
                req(abs(inv(P["p"]) - inv(P["a" + i]) - inv(P["b" + i]))
                    < 1e-12, f"1/p = 1/a{i} + 1/b{i}")
            if P["s"] >= 1:
                req(all(1 < P[k] < np.inf for k in ("p", "a1", "a2", "b1",
                                                    "b2")),
                    "1 < p, a_i, b_i < inf when s >= 1")
        elif L in ("critical_embedding", "critical_algebra"):
            req(1 <= P["s"] <= Q, "1 <= s <= Q")
        elif L == "quasi_norm":
            req(P["s"] >= 1, "s >= 1")
            req(1 < P["p"] < np.inf, "1 < p < inf")
        elif L == "lebesgue_pair":
            req(P["s"] > 0, "s > 0")
            req(1 < P["p1"] < np.inf and 1 < P["p2"] < np.inf,
                "1 < p1, p2 < inf")
        elif L == "derivative_equivalence":
            req(P["s"] > 0, "s > 0")
        elif L == "nonlinear_a":
            req(P["rho"] > 0, "rho > 0")
        elif L in ("nonlinear_b", "nonlinear_c"):
            strict = L == "nonlinear_b"
            tot = P["rho1"] + P["rho2"]
            req(tot > 0 if strict else tot >= 0,
                "rho1 + rho2 > 0" if strict else "rho1 + rho2 >= 0")
            req(P["rho1"] < Q * inv(P["p1"]), "rho1 < Q/p1")
            if L == "nonlinear_c":
                req(abs(inv(P["r1"]) + inv(P["r2"]) - 1) < 1e-12,
                    "1/r1 + 1/r2 = 1")
        elif L in ("nonlinear_d", "nonlinear_e"):
            strict = L == "nonlinear_d"
            tot = P["rho1"] + P["rho2"]
            req(tot > 0 if strict else tot >= 0,
                "rho1 + rho2 > 0" if strict else "rho1 + rho2 >= 0")
            req(P["rho1"] < Q * inv(P["p1"]), "rho1 < Q/p1")
            req(P["rho2"] < Q * inv(P["p2"]), "rho2 < Q/p2")
            req(P["p"] >= max(P["p1"], P["p2"]), "p >= max(p1, p2)")
            if L == "nonlinear_e":
                req(abs(inv(P["r1"]) + inv(P["r2"]) - 1) < 1e-12,
                    "1/r1 + 1/r2 = 1")
        return P

    def sides(self, Q: int, norm, sup, lp, X=None):
        """Return ``(lhs, rhs)`` for a pair; ``norm(which, s, p, q, hom)``
        evaluates Besov norms of ``which in {'f', 'g', 'fg'}``."""
        P = self.validate(Q)
        h = self.homogeneous
        inv = lambda x: 0.0 if np.isinf(x) else 1.0 / x  # noqa: E731
        L = self.law
        if L == "algebra":
            s, p, q = P["s"], P["p"], P["q"]
            return (norm("fg", s, p, q, h),
                    sup("f") * norm("g", s, p, q, h)
                    + sup("g") * norm("f", s, p, q, h))
        if L == "mixed_lebesgue":
            s, q = P["s"], P["q"]
            return (norm("fg", s, P["p"], q, h),
                    lp("f", P["a1"]) * norm("g", s, P["b1"], q, h)
                    + lp("g", P["a2"]) * norm("f", s, P["b2"], q, h))
        if L == "critical_embedding":
            s = P["s"]
            return sup("f"), norm("f", s, Q / s, 1.0, True)
        if L == "critical_algebra":
            s = P["s"]
            return (norm("fg", s, Q / s, 1.0, True),
                    norm("f", s, Q / s, 1.0, True)
                    * norm("g", s, Q / s, 1.0, True))
        if L == "quasi_norm":
            s, p = P["s"], P["p"]
            qq = (s - 1.0) / s
            if qq <= 0:
                raise HypothesisError("quasi_norm: (s-1)/s must be positive "
                                      "(take s > 1)")
            return (norm("fg", s, p, 1.0, True),
                    sup("f") * norm("g", s, p, qq, True)
                    + sup("g") * norm("f", s, p, qq, True))
        if L == "lebesgue_pair":
            s, q, p1, p2 = P["s"], P["q"], P["p1"], P["p2"]
            p = 1.0 / (inv(p1) + inv(p2))
            return (norm("fg", s, p, q, h),
                    (norm("f", s, p1, q, h) + lp("f", p1))
                    * (norm("g", s, p2, q, h) + lp("g", p2)))
        if L == "derivative_equivalence":
            s, p, q = P["s"], P["p"], P["q"]
            return norm("f", s + 1, p, q, True), X(s, p, q)
        if L == "nonlinear_a":
            r, p, rr = P["rho"], P["p"], P["r"]
            return (norm("fg", r, p, rr, h),
                    sup("f") * norm("g", r, p, rr, h)
                    + sup("g") * norm("f", r, p, rr, h))
        r1, r2, p1, p2 = P["rho1"], P["rho2"], P["p1"], P["p2"]
        if L == "nonlinear_b":
            rho = r1 + r2 - Q * inv(p1)
            R2 = P["r2"]
            return (norm("fg", rho, p2, R2, h),
                    norm("f", r1, p1, np.inf, h) * norm("g", r2, p2, R2, h)
                    + norm("g", r1, p1, np.inf, h) * norm("f", r2, p2, R2, h))
        if L == "nonlinear_c":
            rho = r1 + r2 - Q * inv(p1)
            R1, R2 = P["r1"], P["r2"]
            return (norm("fg", rho, p2, np.inf, h),
                    norm("f", r1, p1, R1, h) * norm("g", r2, p2, R2, h)
                    + norm("g", r1, p1, R1, h) * norm("f", r2, p2, R2, h))
        p = P["p"]
        rho12 = r1 + r2 - Q * (inv(p1) + inv(p2) - inv(p))
        R1, R2 = P["r1"], P["r2"]
        rr = max(R1, R2) if L == "nonlinear_d" else np.inf
        return (norm("fg", rho12, p, rr, h),
                norm("f", r1, p1, R1, h) * norm("g", r2, p2, R2, h))


def product_law_report(g: GroupSpec, corpus: Sequence[tuple],
                       cases: Sequence[ProductLawCase], window,
                       eps: float = 1e-8, order: int = DEFAULT_ORDER
                       ) -> ReportTable:
    """Empirical constants of product laws over a corpus of pairs.

    For every case and pair the table lists ``lhs``, ``rhs`` and their
    ratio; a summary row per case gives the largest ratio (the empirical
    constant).  For ``derivative_equivalence`` the ratio is two-sided and the
    summary gives ``max(ratio, 1/ratio)``.
    """
    part = window if isinstance(window, DyadicPartition) \
        else build_partition(*window)
    for c in cases:
        c.validate(g.Q)
    pairs = list(corpus)
    funcs = []
    for f, h in pairs:
        funcs.extend([f, h, f * h])
    need_x = any(c.law == "derivative_equivalence" for c in cases)
    if need_x:
        for f, _ in pairs:
            funcs.extend(apply_field(g, f, i) for i in range(g.hdim))
    decs = lp_decompose(g, funcs, part, eps, order)
    stride = 3
    grid = pairs[0][0].grid if pairs else None
    gtag = (f"{grid.Nz}^{g.hdim}x{grid.Nt}^{g.nc} L={grid.L:g} T={grid.T:.6g}"
            if grid else "")
    wtag = f"[{part.jmin},{part.jmax}]"
    table = ReportTable(["law", "pair", "lhs", "rhs", "ratio", "grid",
                         "window"])
    for c in cases:
        ratios = []
        for n, (f, h) in enumerate(pairs):
            d = {"f": decs[stride * n], "g": decs[stride * n + 1],
                 "fg": decs[stride * n + 2]}
            fn = {"f": f, "g": h, "fg": f * h}

            def norm(which, s, p, q, hom, d=d):
                return besov_from_decomposition(d[which],
                                                BesovParams(s, p, q, hom))

            def X(s, p, q, n=n):
                base = stride * len(pairs) + g.hdim * n
                return sum(besov_from_decomposition(
                    decs[base + i], BesovParams(s, p, q, True))
                    for i in range(g.hdim))

            lhs, rhs = c.sides(g.Q, norm, lambda w, fn=fn: lp_norm(fn[w], np.inf),
                               lambda w, p, fn=fn: lp_norm(fn[w], p), X)
            ratio = lhs / rhs
            ratios.append(ratio)
            table.add({"law": c.label, "pair": n, "lhs": lhs, "rhs": rhs,
                       "ratio": ratio, "grid": gtag, "window": wtag})
        if c.law == "derivative_equivalence":
            const = max(max(ratios), 1.0 / min(ratios))
        else:
            const = max(ratios)
        table.add({"law": c.label, "pair": "constant", "lhs": "", "rhs": "",
                   "ratio": const, "grid": gtag, "window": wtag})
    return table


def law_constants(table: ReportTable) -> dict:
    return {r["law"]: r["ratio"] for r in table.rows if r["pair"] == "constant"}
