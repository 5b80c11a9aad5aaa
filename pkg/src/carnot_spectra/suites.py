"""Experiment suites run by the command-line tool.

Each suite takes a validated :class:`~carnot_spectra.config.ExperimentConfig`
and returns a :class:`SuiteResult`: a list of assertions (name, measured
value, bound, pass flag) and a set of detail tables.  Suite parameters are
declared in :data:`SUITES` together with their defaults; the declared
default fixes the type used to parse ``params.<name>`` values.

All randomness is drawn from generators seeded by the configuration seed
(or by the seeds written in the corpus manifest), so reruns are
reproducible.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .besov import (BallSampling, BesovParams, besov_from_decomposition,
                    difference_norm, embedding_report, heat_norm)
from .grid import (AnalyticFunction, Grid, GridFunction, boundary_mass,
                   convolve_bruteforce, generator, laguerre_wave, lp_norm,
                   parse_generator, sample, translate_right)
from .group import cc_distance_ub, dilate, gauge_norm, group_inv, group_mul
from .hgrd import import_grid
from .littlewood_paley import (MultiplierSpec, apply_multipliers, chi,
                               build_partition, chi_spec, default_window,
                               delta_j, dense_filter_oracle,
                               gauge_on_grid, kernel_estimate_report,
                               lp_decompose, psi, psi_kernel, psi_spec)
from .paraproduct import (HypothesisError, ProductLawCase, bony_decomposition,
                          law_constants, localization_report,
                          product_law_report, remainder)
from .report import ReportTable
from .sublaplacian import (apply_field, apply_neg_sublaplacian,
                           assemble_twisted, twisted_bank)


# ---------------------------------------------------------------------------
# Results


@dataclass
class Assertion:
    """One checked quantity.

    ``kind`` is ``"le"`` (value <= bound), ``"ge"`` (value >= bound) or
    ``"in"`` (bound is a closed interval ``(lo, hi)``).
    """

    name: str
    value: float
    bound: object
    kind: str = "le"

    @property
    def passed(self) -> bool:
        v = self.value
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        if self.kind == "le":
            return bool(v <= self.bound)
        if self.kind == "ge":
            return bool(v >= self.bound)
        lo, hi = self.bound
        return bool(lo <= v <= hi)

    def to_json(self) -> dict:
        return {"name": self.name, "value": _finite(self.value),
                "bound": ([_finite(b) for b in self.bound]
                          if self.kind == "in" else _finite(self.bound)),
                "pass": self.passed}


def _finite(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class SuiteResult:
    assertions: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    exports: list = field(default_factory=list)

    def check(self, name, value, bound, kind="le") -> Assertion:
        a = Assertion(name, float(value) if value is not None else None,
                      bound, kind)
        self.assertions.append(a)
        return a

    def get(self, name) -> Assertion:
        for a in self.assertions:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def first_failure(self):
        return next((a for a in self.assertions if not a.passed), None)


def rel(a, b) -> float:
    """Relative L2 distance ``||a - b|| / ||b||``."""
    nb = lp_norm(b, 2)
    return lp_norm(a - b, 2) / nb if nb > 0 else lp_norm(a, 2)


def slope(js, values) -> float:
    return float(np.polyfit(np.asarray(js, float), np.log2(values), 1)[0])


# ---------------------------------------------------------------------------
# Corpus


def builtin_manifest() -> str:
    return resources.files("carnot_spectra").joinpath(
        "data/corpus.txt").read_text(encoding="utf-8")


def parse_manifest(text: str) -> list:
    """Parse corpus lines ``"<generator spec> | <generator spec>"``."""
    pairs = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"corpus line {n}: expected 'spec | spec'")
        for p in parts:
            parse_generator(p)
        pairs.append(tuple(parts))
    if not pairs:
        raise ValueError("corpus manifest is empty")
    return pairs


def corpus_pairs(cfg) -> list:
    path = cfg.manifest_path()
    if path is None:
        return parse_manifest(builtin_manifest())
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh.read())


def make_function(g, grid: Grid, spec: str) -> GridFunction:
    name, params = parse_generator(spec)
    return sample(g, grid, generator(g, grid, name, **params))


def corpus_functions(g, grid: Grid, pairs) -> list:
    return [(make_function(g, grid, a), make_function(g, grid, b))
            for a, b in pairs]


def single_functions(cfg, g, grid, count: int) -> list:
    """Input functions: HGRD files if given, else corpus members."""
    if cfg.hgrd_inputs:
        fs = [import_grid(os.path.join(cfg.base_dir, p))
              for p in cfg.hgrd_inputs]
        for f in fs:
            if f.grid != grid or (f.ell, f.nc) != (g.ell, g.nc):
                raise ValueError("input.hgrd: file grid does not match the "
                                 "configured group and grid")
        return fs
    specs = []
    for a, b in corpus_pairs(cfg):
        specs.extend([a, b])
    return [make_function(g, grid, s) for s in specs[:count]]


# ---------------------------------------------------------------------------
# geometry


def run_geometry(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    rng = np.random.default_rng([cfg.seed, 1])
    n = P["triples"]
    p, q, r = (rng.uniform(-2, 2, (n, g.dim)) for _ in range(3))
    assoc = np.abs(group_mul(g, group_mul(g, p, q), r)
                   - group_mul(g, p, group_mul(g, q, r))).max()
    res.check("associativity", assoc, 1e-12)
    e = np.zeros(g.dim)
    ident = max(np.abs(group_mul(g, p, e) - p).max(),
                np.abs(group_mul(g, e, p) - p).max(),
                np.abs(group_mul(g, p, group_inv(g, p))).max(),
                np.abs(group_mul(g, group_inv(g, p), p)).max())
    res.check("identity_inverse", ident, 1e-14)
    deltas = rng.uniform(0.25, 4.0, (n, 1))
    lhs = dilate(g, deltas, group_mul(g, p, q))
    rhs = group_mul(g, dilate(g, deltas, p), dilate(g, deltas, q))
    res.check("dilation_automorphism",
              np.abs(lhs - rhs).max() / np.abs(lhs).max(), 1e-12)
    hom = np.abs(gauge_norm(g, dilate(g, deltas, p))
                 - deltas[:, 0] * gauge_norm(g, p)) / gauge_norm(g, p)
    res.check("gauge_homogeneity", hom.max(), 1e-12)
    res.check("gauge_symmetry", np.abs(gauge_norm(g, group_inv(g, p))
                                       - gauge_norm(g, p)).max(), 1e-14)

    # Carnot-Caratheodory upper bounds
    K, budget, starts = P["cc_segments"], P["cc_budget"], P["cc_starts"]
    m = P["cc_points"]
    pts = rng.uniform(-1, 1, (m, g.dim))
    pts = pts[gauge_norm(g, pts) > 0]
    pts = dilate(g, (rng.uniform(0.2, 1.0, len(pts))
                     / gauge_norm(g, pts))[:, None], pts)
    cc = np.array([cc_distance_ub(g, e, x, K, budget, starts, seed=cfg.seed)
                   for x in pts])
    ratios = cc / gauge_norm(g, pts)
    table = ReportTable(["index", "gauge", "cc_ub", "ratio"])
    for i, (x, c) in enumerate(zip(pts, cc)):
        table.add({"index": i, "gauge": float(gauge_norm(g, x)), "cc_ub": c,
                   "ratio": c / float(gauge_norm(g, x))})
    res.tables["cc_ratios"] = table
    res.check("cc_gauge_ratio_spread", ratios.max() / ratios.min(), 10.0)
    left = []
    for i in range(P["invariance_pairs"]):
        a, b = pts[i], pts[-1 - i]
        d0 = cc_distance_ub(g, e, b, K, budget, starts, seed=cfg.seed)
        d1 = cc_distance_ub(g, a, group_mul(g, a, b), K, budget, starts,
                            seed=cfg.seed)
        left.append(abs(d0 - d1) / d0)
    res.check("cc_left_invariance", max(left), 0.05)
    if g.ell == 1 and g.nc == 1:
        top = np.array([0.0, 0.0, 1.0])
        ub = cc_distance_ub(g, e, top, K, budget, starts, seed=cfg.seed)
        oracle = cc_distance_ub(g, e, top, 64, 4 * budget, 2 * starts,
                                seed=cfg.seed + 1)
        iso = math.sqrt(4 * math.pi)
        res.check("cc_vertical_above_isoperimetric", ub / iso,
                  1.0 - 1e-9, "ge")
        res.check("cc_vertical_vs_dense_oracle", ub / oracle, 1.02)
        res.check("cc_horizontal_segment",
                  abs(cc_distance_ub(g, e, [1.0, 0.0, 0.0], K, budget,
                                     starts, seed=cfg.seed) - 1.0), 1e-6)

    # Lebesgue norms and translations on the configured grid
    f = make_function(g, grid, "random-bandlimited seed=1")
    h = make_function(g, grid, "random-bandlimited seed=2")
    tri = lp_norm(f + h, 3) - lp_norm(f, 3) - lp_norm(h, 3)
    res.check("triangle_inequality", tri, 1e-10)
    hold = lp_norm(f * h, 2) - lp_norm(f, 4) * lp_norm(h, 4)
    res.check("hoelder_inequality", hold, 1e-10)
    if g.ell == 1 and g.nc == 1:
        gw = make_function(g, grid, "gaussian lam=1 alpha=0")
        exact = 2 * math.pi * 2 * grid.T
        res.check("gaussian_l2_closed_form",
                  abs(lp_norm(gw, 2) ** 2 - exact) / exact, 1e-6)
        w = np.array(P["translation"])
        back = translate_right(g, translate_right(g, gw, w, order=3), -w,
                               order=3)
        res.check("translation_round_trip", rel(back, gw), 1e-3)
        res.check("translation_haar_invariance",
                  abs(lp_norm(translate_right(g, gw, w, order=3), 2)
                      / lp_norm(gw, 2) - 1.0), 1e-3)
        lin = translate_right(g, translate_right(g, gw, w), -w)
        table = ReportTable(["interpolation", "round_trip_error"])
        table.add({"interpolation": "multilinear",
                   "round_trip_error": rel(lin, gw)})
        table.add({"interpolation": "cubic",
                   "round_trip_error": rel(back, gw)})
        res.tables["translation"] = table
    return res


# ---------------------------------------------------------------------------
# kernels


def _conv_source(g, grid, sigma):
    def func(z, t):
        return (np.exp(-np.sum(z ** 2, axis=-1) / (2 * sigma ** 2))
                * (1 + np.cos(np.pi * t[..., 0] / grid.T)))
    lam = np.pi / grid.T
    freqs = ((0.0,), (lam,), (-lam,)) if g.nc == 1 else ()
    return sample(g, grid, AnalyticFunction(func, freqs, "conv-source"))


def run_kernels(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    js = P["j"]
    table = kernel_estimate_report(g, grid, js, alphas=(1.0,), eps=cfg.eps,
                                   order=cfg.order,
                                   core_radius=P["core_radius"])
    res.tables["kernel_scaling"] = table
    summary = table.rows[-1]
    res.check("resolved_bands", summary["resolved"], 3, "ge")
    res.check("rho_Psi_L1_slope", summary["rho1_L1"], (-1.15, -0.85), "in")
    for i in range(g.hdim):
        res.check(f"X{i}_Psi_L1_slope", summary[f"X{i}_L1"], (0.85, 1.15),
                  "in")
    res.check("Psi_L1_slope", summary["L1"], (-0.15, 0.15), "in")
    res.check("Psi_Linf_over_L2_slope", summary["Linf_over_L2"],
              (0.85 * g.Q / 2, 1.15 * g.Q / 2), "in")

    # Delta_j f against the brute-force convolution with Psi_j
    cg = Grid(P["conv_L"], P["conv_T"], P["conv_Nz"], P["conv_Nt"])
    f = _conv_source(g, cg, P["conv_sigma"])
    conv = ReportTable(["j", "relative_error"])
    worst = 0.0
    for j in P["conv_j"]:
        K = psi_kernel(g, cg, j, 1e-10, cfg.order)
        err = rel(convolve_bruteforce(g, f, K),
                  delta_j(g, f, j, 1e-10, cfg.order))
        conv.add({"j": j, "relative_error": err})
        worst = max(worst, err)
    res.tables["convolution_oracle"] = conv
    res.check("delta_j_vs_bruteforce_convolution", worst, 1e-2)
    return res


# ---------------------------------------------------------------------------
# lp-reconstruct


def run_lp_reconstruct(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    jmin, jmax = cfg.window
    # partition of unity, function level
    J = P["pu_J"]
    tau = np.linspace(0.0, 4.0 ** J, P["pu_samples"])
    inh = chi(tau) + sum(psi(4.0 ** (-j) * tau) for j in range(J + 1))
    res.check("partition_of_unity_inhomogeneous", np.abs(inh - 1).max(),
              1e-12)
    tau = np.geomspace(4.0 ** jmin, 4.0 ** (jmax - 1), P["pu_samples"])
    hom = sum(psi(4.0 ** (-j) * tau) for j in range(jmin, jmax + 1))
    res.check("partition_of_unity_homogeneous", np.abs(hom - 1).max(), 1e-12)
    x = np.linspace(-2, 2, 10 ** 4)
    c = chi(x)
    bad = max(np.abs(c[np.abs(x) <= 0.25] - 1).max(),
              np.abs(c[np.abs(x) >= 1]).max(),
              max(0.0, -c.min()), max(0.0, c.max() - 1))
    res.check("chi_profile", bad, 1e-14)
    s = psi(np.linspace(0, 8, 10 ** 4))
    xs = np.linspace(0, 8, 10 ** 4)
    res.check("psi_support", np.abs(s[(xs < 0.25) | (xs > 4)]).max(), 1e-14)

    # operator sanity on the configured grid
    bank = twisted_bank(g, grid, cfg.order)
    rng = np.random.default_rng([cfg.seed, 2])
    ks = sorted({0, 1 % len(bank), len(bank) // 2})
    herm, psd, power = 0.0, 1e300, 0.0
    for k in ks:
        op = bank[k]
        A = op.matrix
        u = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        v = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        herm = max(herm, abs(np.vdot(v, A @ u) - np.conj(np.vdot(u, A @ v)))
                   / (np.linalg.norm(u) * np.linalg.norm(v) * op.specbound))
        psd = min(psd, op.ground / op.specbound)
        y = u / np.linalg.norm(u)
        for _ in range(50):
            y = A @ y
            y /= np.linalg.norm(y)
        power = max(power, float(np.real(np.vdot(y, A @ y))) / op.specbound)
    res.check("twisted_hermitian", herm, 1e-12)
    res.check("twisted_nonnegative", psd, -1e-9, "ge")
    res.check("specbound_over_power_iteration", power, 1.0 - 1e-12)
    if g.nc == 1 and len(grid.frequencies) > 1 and \
            np.isclose(grid.frequencies, 1.0).any():
        gw = make_function(g, grid, "gaussian lam=1 alpha=0")
        lap = apply_neg_sublaplacian(g, gw, cfg.order)
        res.check("gaussian_eigenfunction", rel(lap, g.ell * gw), 0.02)

    # reconstruction identities on the corpus
    fs = single_functions(cfg, g, grid, P["functions"])
    if cfg.export_hgrd:
        res.exports = [(f"input{i}", f) for i, f in enumerate(fs)]
    specs = [chi_spec(0, cfg.eps)] + [psi_spec(j, cfg.eps)
                                      for j in range(jmax + 1)]
    outs = apply_multipliers(g, fs, specs, cfg.order)
    decs = lp_decompose(g, fs, cfg.window, cfg.eps, cfg.order)
    table = ReportTable(["index", "boundary_mass", "boundary_norm_share",
                         "inhomogeneous_residual", "window_residual",
                         "max_band_ratio"])
    worst_i = worst_w = worst_b = worst_ratio = 0.0
    for i, f in enumerate(fs):
        total = outs[0][i]
        for s_ in range(1, len(specs)):
            total = total + outs[s_][i]
        ri = rel(total, f)
        rw = rel(decs[i].reconstruct(), f)
        ratio = max(lp_norm(b, 2) for b in decs[i].bands.values()) \
            / lp_norm(f, 2)
        bm = boundary_mass(f)
        table.add({"index": i, "boundary_mass": bm,
                   "boundary_norm_share": boundary_mass(f, norm=True),
                   "inhomogeneous_residual": ri, "window_residual": rw,
                   "max_band_ratio": ratio})
        worst_i, worst_w = max(worst_i, ri), max(worst_w, rw)
        worst_b, worst_ratio = max(worst_b, bm), max(worst_ratio, ratio)
    res.tables["reconstruction"] = table
    res.check("reconstruction_residual", worst_i, 1e-6)
    res.check("window_reconstruction_residual", worst_w, 1e-6)
    res.check("band_contraction", worst_ratio, 1.0 + 1e-8)
    res.check("corpus_boundary_mass", worst_b, 1e-6)

    # Chebyshev filtering against dense eigendecompositions
    og = Grid(P["oracle_L"], P["oracle_T"], P["oracle_Nz"], P["oracle_Nt"])
    of = make_function(g, og, P["oracle_function"])
    ospecs = [chi_spec(0, 1e-10), MultiplierSpec("heat", 0.5, 1e-10),
              MultiplierSpec("bessel", 1.0, 1e-10)] + \
        [psi_spec(j, 1e-10) for j in range(-1, 3)]
    got = apply_multipliers(g, [of], ospecs, cfg.order)
    ot = ReportTable(["multiplier", "parameter", "relative_error"])
    worst = 0.0
    for spec, out in zip(ospecs, got):
        ref = dense_filter_oracle(g, of, spec, cfg.order)
        err = rel(out[0], ref) if lp_norm(ref, 2) > 0 else lp_norm(out[0], 2)
        ot.add({"multiplier": spec.kind, "parameter": spec.param,
                "relative_error": err})
        worst = max(worst, err)
    res.tables["dense_oracle"] = ot
    res.check("chebyshev_vs_dense_oracle", worst, 1e-6)
    return res


# ---------------------------------------------------------------------------
# bernstein


def run_bernstein(cfg, g, grid, P) -> SuiteResult:
    """Bernstein inequalities on band-limited functions.

    For each band ``j`` a random cluster of point masses is placed in the
    gauge ball of radius ``cluster * 2^{-j}`` (so the sources of different
    bands are dilates of each other in distribution) and ``Delta_j`` is
    applied.  The growth of ``||f||_inf / ||f||_2`` and ``||Xf||_2 /
    ||f||_2`` with ``j`` is regressed.
    """
    res = SuiteResult()
    rho = gauge_on_grid(g, grid)
    js = P["j"]
    table = ReportTable(["seed", "j", "linf_over_l2", "grad_over_l2",
                         "reverse_ratio"])
    slopes_inf, slopes_d, reverse = [], [], []
    for s in range(P["samples"]):
        rows = []
        for j in js:
            rng = np.random.default_rng([cfg.seed, s, j + 1000])
            mask = rho <= P["cluster"] * 2.0 ** (-j)
            data = np.zeros(grid.shape(g), dtype=complex)
            data[mask] = rng.uniform(0.5, 1.0, int(mask.sum()))
            src = GridFunction(grid, g.ell, g.nc,
                               data / (grid.cell(g) * mask.sum()))
            b = apply_multipliers(g, [src], [psi_spec(j, cfg.eps)],
                                  cfg.order)[0][0]
            n2 = lp_norm(b, 2)
            grad = math.sqrt(sum(lp_norm(apply_field(g, b, i), 2) ** 2
                                 for i in range(g.hdim)))
            row = {"seed": s, "j": j, "linf_over_l2": lp_norm(b, np.inf) / n2,
                   "grad_over_l2": grad / n2,
                   "reverse_ratio": grad / (2.0 ** j * n2)}
            rows.append(row)
            table.add(row)
            reverse.append(row["reverse_ratio"])
        slopes_inf.append(slope(js, [r["linf_over_l2"] for r in rows]))
        slopes_d.append(slope(js, [r["grad_over_l2"] for r in rows]))
    res.tables["bernstein"] = table
    st = ReportTable(["seed", "linf_l2_slope", "derivative_slope"])
    for s, (a, b) in enumerate(zip(slopes_inf, slopes_d)):
        st.add({"seed": s, "linf_l2_slope": a, "derivative_slope": b})
    res.tables["slopes"] = st
    lo_i, hi_i = min(slopes_inf), max(slopes_inf)
    res.check("linf_l2_slope_min", lo_i, 0.85 * g.Q / 2, "ge")
    res.check("linf_l2_slope_max", hi_i, 1.15 * g.Q / 2)
    res.check("derivative_slope_min", min(slopes_d), 0.85, "ge")
    res.check("derivative_slope_max", max(slopes_d), 1.15)
    res.check("reverse_bernstein_min", min(reverse), 1.0 / 16, "ge")
    res.check("reverse_bernstein_max", max(reverse), 16.0)
    return res


# ---------------------------------------------------------------------------
# Dilated family shared by the norm-equivalence suites


@functools.lru_cache(maxsize=32)
def _family_member(g, base_grid: Grid, spec: str, k: int,
                   min_half_width: float, eps: float, order, with_fields: bool):
    name, params = parse_generator(spec)
    d = 2.0 ** k
    grid = base_grid.dilated(d, min_half_width=min_half_width)
    fn = generator(g, grid, name, **params).dilate(d)
    f = sample(g, grid, fn)
    w = default_window(g, grid, order)
    window = (min(w.jmin, 0), w.jmax)
    funcs = [f]
    if with_fields:
        funcs += [apply_field(g, f, i) for i in range(g.hdim)]
    decs = lp_decompose(g, funcs, window, eps, order)
    return grid, f, window, decs


def _family(cfg, g, grid, P, with_fields=False):
    for k in P["k"]:
        yield (k,) + _family_member(g, grid, P["function"], k,
                                    P["min_half_width"], cfg.eps, cfg.order,
                                    with_fields)


def _two_sided(res, name, ratios, C):
    r = np.asarray(ratios)
    const = float(max(r.max(), 1.0 / r.min()))
    res.check(name, const, C)
    return const


def _family_table():
    return ReportTable(["k", "grid", "window", "lhs", "rhs", "ratio"])


def _gtag(grid):
    return f"{grid.Nz}x{grid.Nt} L={grid.L:g} T={grid.T:.6g}"


def run_besov_equivalence(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    s, p, q = P["s"], P["p"], P["q"]
    table = _family_table()
    ratios = []
    samp = BallSampling(P["shells"], P["points"], cfg.seed)
    for k, fgrid, f, window, decs in _family(cfg, g, grid, P):
        lp = besov_from_decomposition(decs[0], BesovParams(s, p, q))
        df = difference_norm(g, f, BesovParams(s, p, q), samp)
        ratios.append(df / lp)
        table.add({"k": k, "grid": _gtag(fgrid), "window": str(window),
                   "lhs": df, "rhs": lp, "ratio": df / lp})
    res.tables["difference_vs_lp"] = table
    _two_sided(res, "difference_lp_equivalence_constant", ratios, P["C"])

    # stability of the quasi-Monte Carlo difference integral
    k0 = P["k"][len(P["k"]) // 2]
    _, fgrid, f, window, decs = next(x for x in _family(cfg, g, grid, P)
                                     if x[0] == k0)
    a = difference_norm(g, f, BesovParams(s, p, q), samp)
    b = difference_norm(g, f, BesovParams(s, p, q),
                        BallSampling(P["shells"], 2 * P["points"], cfg.seed))
    res.check("difference_sampling_doubling", abs(a - b) / b,
              P["sampling_tol"])

    # homogeneous dilation exponent on a fixed grid
    name, params = parse_generator(P["function"])
    fn = generator(g, grid, name, **params)
    w = default_window(g, grid, cfg.order)
    win = (w.jmin, w.jmax)
    delta = P["dilation"]
    f0, f1 = sample(g, grid, fn), sample(g, grid, fn.dilate(delta))
    d0, d1 = lp_decompose(g, [f0, f1], win, cfg.eps, cfg.order)
    bp = BesovParams(s, p, q, True)
    measured = math.log(besov_from_decomposition(d1, bp)
                        / besov_from_decomposition(d0, bp)) / math.log(delta)
    expected = s - g.Q / p
    dt = ReportTable(["delta", "window", "measured_exponent",
                      "expected_exponent"])
    dt.add({"delta": delta, "window": str(win),
            "measured_exponent": measured, "expected_exponent": expected})
    res.tables["dilation_exponent"] = dt
    res.check("homogeneous_dilation_exponent",
              abs(measured - expected) / abs(expected), 0.10)
    return res


def run_heat_equivalence(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    s, p, q = P["s"], P["p"], P["q"]
    table = _family_table()
    ratios = []
    for k, fgrid, f, window, decs in _family(cfg, g, grid, P):
        lp = besov_from_decomposition(decs[0], BesovParams(s, p, q))
        ht = heat_norm(g, f, BesovParams(s, p, q), m=P["m"], eps=cfg.eps,
                       order=cfg.order)
        ratios.append(ht / lp)
        table.add({"k": k, "grid": _gtag(fgrid), "window": str(window),
                   "lhs": ht, "rhs": lp, "ratio": ht / lp})
    res.tables["heat_vs_lp"] = table
    _two_sided(res, "heat_lp_equivalence_constant", ratios, P["C"])
    return res


def run_prop41(cfg, g, grid, P) -> SuiteResult:
    """Horizontal derivatives shift homogeneous smoothness by one."""
    res = SuiteResult()
    s, p, q = P["s"], P["p"], P["q"]
    table = _family_table()
    ratios = []
    for k, fgrid, f, window, decs in _family(cfg, g, grid, P,
                                             with_fields=True):
        lhs = besov_from_decomposition(decs[0], BesovParams(s + 1, p, q, True))
        rhs = sum(besov_from_decomposition(d, BesovParams(s, p, q, True))
                  for d in decs[1:])
        ratios.append(lhs / rhs)
        table.add({"k": k, "grid": _gtag(fgrid), "window": str(window),
                   "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
    res.tables["derivative_equivalence"] = table
    _two_sided(res, "derivative_equivalence_constant", ratios, P["C"])
    return res


# ---------------------------------------------------------------------------
# embedding


def run_embedding(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    s, q = P["s"], P["q"]
    p1, p2 = P["p1"], P["p2"]
    specs = []
    for a, b in corpus_pairs(cfg):
        specs.extend([a, b])
    specs = specs[:P["functions"]]
    consts = {}
    detail = ReportTable(["grid", "index", "lhs", "rhs", "ratio"])
    for N in P["refine"]:
        rg = Grid(grid.L, grid.T, N, N)
        fs = [make_function(g, rg, sp_) for sp_ in specs]
        t = embedding_report(g, fs, s, p1, p2, q, window=cfg.window,
                             eps=cfg.eps, order=cfg.order)
        for r in t.rows:
            detail.add({"grid": N, **r})
        consts[N] = max(t.column("ratio"))
        same = embedding_report(g, fs, s, p1, p1, q, window=cfg.window,
                                eps=cfg.eps, order=cfg.order)
        res.check(f"equal_exponent_identity_N{N}",
                  max(abs(r - 1) for r in same.column("ratio")), 1e-12)
    res.tables["embedding"] = detail
    Ns = list(P["refine"])
    for N in Ns:
        res.check(f"embedding_constant_N{N}", consts[N], 1e6)
    res.check("embedding_constant_refinement",
              abs(consts[Ns[-1]] / consts[Ns[0]] - 1), 0.2)
    return res


# ---------------------------------------------------------------------------
# bony


def _bony_index_identity(jmin, jmax) -> int:
    """Number of index pairs not covered exactly once by T_u v, T_v u, R."""
    labels = range(jmin - 1, jmax + 1)
    bad = 0
    for i in labels:
        for j in labels:
            hits = (i <= j - 2) + (j <= i - 2) + (abs(i - j) <= 1)
            bad += hits != 1
    return bad


def run_bony(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    res.check("index_set_partition", _bony_index_identity(*cfg.window), 0)
    pairs = corpus_pairs(cfg)
    corpus = corpus_functions(g, grid, pairs)
    table = ReportTable(["pair", "u", "v", "residual"])
    worst = 0.0
    for n, ((a, b), (u, v)) in enumerate(zip(pairs, corpus)):
        r = bony_decomposition(g, u, v, cfg.window, cfg.eps, cfg.order).residual
        table.add({"pair": n, "u": a, "v": b, "residual": r})
        worst = max(worst, r)
    res.tables["bony_residual"] = table
    res.check("bony_residual", worst, 1e-6)
    res.check("corpus_size", len(corpus), 25, "ge")

    (u, v), (w, _) = corpus[0], corpus[1]
    rng = np.random.default_rng([cfg.seed, 3])
    al, be = rng.normal(size=2)
    lin = remainder(g, al * u + be * w, v, cfg.window, cfg.eps, cfg.order)
    ref = al * remainder(g, u, v, cfg.window, cfg.eps, cfg.order) \
        + be * remainder(g, w, v, cfg.window, cfg.eps, cfg.order)
    res.check("remainder_bilinearity", rel(lin, ref), 1e-10)
    sym = rel(remainder(g, v, u, cfg.window, cfg.eps, cfg.order),
              remainder(g, u, v, cfg.window, cfg.eps, cfg.order))
    res.check("remainder_symmetry", sym, 1e-12)
    return res


# ---------------------------------------------------------------------------
# localization


def run_localization(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    fs = make_function(g, grid, P["f_source"])
    gs = make_function(g, grid, P["g_source"])
    pairs = [tuple(P["pairs"][i:i + 2]) for i in range(0, len(P["pairs"]), 2)]
    table = localization_report(g, fs, gs, pairs, factors=P["factors"],
                                eps=cfg.eps, threshold=P["threshold"],
                                order=cfg.order)
    res.tables["localization"] = table
    rows = [r for r in table.rows if r["m"] != "M1"]
    gap = P["gap"]
    at_gap = [r["leak"] for r in rows
              if r["gap"] >= gap and r["factor"] == 8.0]
    res.check(f"ring_leak_gap{gap}", max(at_gap) if at_gap else float("nan"),
              P["threshold"])
    mono = 0.0
    for m, mp in pairs:
        ls = [r["leak"] for r in rows if (r["m"], r["mprime"]) == (m, mp)]
        mono = max([mono] + [b - a for a, b in zip(ls, ls[1:])])
    res.check("leak_monotone_in_factor", mono, 1e-15)
    M1 = table.rows[-1]["gap"]
    res.check("empirical_M1", float(M1) if M1 != "" else float("nan"), gap)
    return res


# ---------------------------------------------------------------------------
# product-laws


def run_product_laws(cfg, g, grid, P) -> SuiteResult:
    res = SuiteResult()
    cases = P["cases"]
    pairs = corpus_pairs(cfg)
    consts = {}
    detail = None
    for N in P["refine"]:
        rg = Grid(grid.L, grid.T, N, N)
        corpus = corpus_functions(g, rg, pairs)
        t = product_law_report(g, corpus, cases, cfg.window, cfg.eps,
                               cfg.order)
        if detail is None:
            detail = ReportTable(t.columns)
        for r in t.rows:
            detail.add(r)
        consts[N] = law_constants(t)
    res.tables["product_laws"] = detail
    Ns = list(P["refine"])
    summary = ReportTable(["law"] + [f"constant_N{N}" for N in Ns]
                          + ["growth"])
    for c in cases:
        vals = [consts[N][c.label] for N in Ns]
        growth = vals[-1] / vals[0]
        summary.add({"law": c.label, **{f"constant_N{N}": v
                                        for N, v in zip(Ns, vals)},
                     "growth": growth})
        res.check(f"{c.label}:finite", max(vals), 1e6)
        res.check(f"{c.label}:refinement", growth, (0.5, 2.0), "in")
    res.tables["constants"] = summary
    return res


# ---------------------------------------------------------------------------
# fourier


def ladder_levels(w, lam: float, rtol: float = 0.02, min_size: int = 5):
    """Cluster sorted eigenvalues into Landau levels.

    Consecutive eigenvalues closer than ``rtol |lam|`` belong to one
    cluster; clusters with at least ``min_size`` members are levels, each
    represented by its median.
    """
    w = np.sort(np.asarray(w))
    levels, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] >= rtol * abs(lam):
            if i - start >= min_size:
                levels.append(float(np.median(w[start:i])))
            start = i
    return levels


def run_fourier(cfg, g, grid, P) -> SuiteResult:
    from .fourier import (HermiteBasis, convolution_defect,
                          diagonalization_constants, fock_gram,
                          fourier_family, invert_ft, rep_unitarity_check,
                          representation_matrix, schrodinger_ft)
    res = SuiteResult()
    lam = P["ladder_lambda"]
    lg = Grid(P["ladder_L"], np.pi / lam * P["ladder_k"], P["ladder_Nz"], 8)
    lt = ReportTable(["discretization", "ground", "level1", "level2",
                      "gap1", "gap2"])
    ladders = {}
    for order in ("spectral", cfg.order):
        A = assemble_twisted(g, lg, [lam], order)
        w = np.linalg.eigvalsh(A.matrix.toarray())
        lev = ladder_levels(w, lam)
        row = {"discretization": str(order), "ground": float(w[0]),
               "level1": lev[1], "level2": lev[2],
               "gap1": lev[1] - lev[0], "gap2": lev[2] - lev[1]}
        lt.add(row)
        ladders[order] = row
    res.tables["ladder"] = lt
    sp_ = ladders["spectral"]
    res.check("ladder_ground", abs(sp_["ground"] - g.ell * abs(lam))
              / (g.ell * abs(lam)), 0.02)
    res.check("ladder_gap1", abs(sp_["gap1"] - 2 * abs(lam)) / (2 * abs(lam)),
              0.03)
    res.check("ladder_gap2", abs(sp_["gap2"] - 2 * abs(lam)) / (2 * abs(lam)),
              0.03)

    nh = P["Nh"]
    res.check("hermite_gram", np.abs(HermiteBasis(1.0, nh).gram()
                                     - np.eye(nh)).max(), 1e-10)
    res.check("fock_gram", np.abs(fock_gram(1.0, nh) - np.eye(nh)).max(),
              1e-8)
    rng = np.random.default_rng([cfg.seed, 4])
    pts = rng.uniform(-P["rep_scale"], P["rep_scale"], (50, 3))
    ut = ReportTable(["picture", "unitarity", "homomorphism"])
    for pic in ("schrodinger", "bargmann"):
        t = rep_unitarity_check(g, 1.0, pts, nh, pic)
        u, h = max(t.column("unitarity")), max(t.column("homomorphism"))
        ut.add({"picture": pic, "unitarity": u, "homomorphism": h})
        res.check(f"{pic}_unitarity", u, 1e-6)
        res.check(f"{pic}_homomorphism", h, 1e-6)
        res.check(f"{pic}_identity",
                  np.abs(representation_matrix(g, 1.0, nh, [[0, 0, 0]], pic)[0]
                         - np.eye(nh)).max(), 1e-10)
    res.tables["representations"] = ut

    # convolution theorem on the tiny grid
    cg = Grid(P["conv_L"], P["conv_T"], P["conv_Nz"], P["conv_Nt"])
    fa = make_function(g, cg, P["conv_f"])
    fb = make_function(g, cg, P["conv_h"])
    ct = ReportTable(["lambda", "defect"])
    worst = 0.0
    for lv in P["conv_lambdas"]:
        d = convolution_defect(g, fa, fb, lv, nh)
        ct.add({"lambda": lv, "defect": d})
        worst = max(worst, d)
    res.tables["convolution"] = ct
    res.check("convolution_theorem", worst, 5e-2)

    # inversion round trip for the Gaussian family on the main grid
    W = np.vstack([np.zeros(3), rng.uniform(-1, 1, (P["points"], 3))])
    it = ReportTable(["function", "point", "value", "reconstruction",
                      "error"])
    worst = 0.0
    for spec in P["inversion_family"]:
        name, params = parse_generator(spec)
        fn = generator(g, grid, name, **params)
        f = sample(g, grid, fn)
        v = invert_ft(g, fourier_family(g, f, nh=nh), W, grid.T)
        ex = fn(W[:, :2], W[:, 2:])
        scale = np.abs(f.data).max()
        for i in range(len(W)):
            err = abs(v[i] - ex[i]) / scale
            it.add({"function": spec, "point": i, "value": complex(ex[i]),
                    "reconstruction": complex(v[i]), "error": err})
            worst = max(worst, err)
    res.tables["inversion"] = it
    res.check("inversion_round_trip", worst, 0.05)

    # linearity and diagonalisation on a random smooth function
    r1 = make_function(g, grid, P["diag_function"])
    r2 = make_function(g, grid, "random-bandlimited seed=4")
    a, b = rng.normal(size=2)
    M = schrodinger_ft(g, a * r1 + b * r2, 1.0, nh).matrix
    Mr = a * schrodinger_ft(g, r1, 1.0, nh).matrix + \
        b * schrodinger_ft(g, r2, 1.0, nh).matrix
    res.check("transform_linearity", np.abs(M - Mr).max() / np.abs(Mr).max(),
              1e-12)
    lap = apply_neg_sublaplacian(g, r1, cfg.order)
    dt = ReportTable(["picture", "lambda", "alpha", "measured",
                      "ladder_2a_plus_1", "ladder_4x"])
    sch_err, spread = 0.0, 0.0
    for pic in ("schrodinger", "bargmann"):
        for lv in P["diag_lambdas"]:
            c = diagonalization_constants(g, r1, lap, lv, nh, pic)
            per = []
            for al in range(3):
                dt.add({"picture": pic, "lambda": lv, "alpha": al,
                        "measured": float(c[al]),
                        "ladder_2a_plus_1": 2 * al + 1,
                        "ladder_4x": 4 * (2 * al + 1)})
                per.append(c[al] / (2 * al + 1))
            per = np.array(per)
            if pic == "schrodinger":
                # nan (no Fourier mass at this lambda) must fail, not vanish
                sch_err = float(np.max(np.r_[sch_err, np.abs(per - 1)]))
            spread = float(np.max(np.r_[spread, np.ptp(per) / np.mean(per)]))
    res.tables["diagonalization"] = dt
    res.check("schrodinger_diagonalization", sch_err, 1e-2)
    res.check("ladder_linearity", spread, 0.02)
    return res


# ---------------------------------------------------------------------------
# Registry and parameter validation

_PI = math.pi

SUITES = {
    "geometry": (run_geometry, {
        "triples": 1000, "cc_points": 200, "cc_segments": 16,
        "cc_budget": 200, "cc_starts": 4, "invariance_pairs": 10,
        "translation": (0.3, -0.2, 0.1)}),
    "kernels": (run_kernels, {
        "j": (-1, 0, 1), "core_radius": 4.0, "conv_L": 4.0, "conv_T": _PI,
        "conv_Nz": 8, "conv_Nt": 16, "conv_sigma": 0.5,
        "conv_j": (-1, 0, 1)}),
    "lp-reconstruct": (run_lp_reconstruct, {
        "functions": 6, "pu_J": 8, "pu_samples": 10000, "oracle_L": 4.0,
        "oracle_T": _PI, "oracle_Nz": 8, "oracle_Nt": 16,
        "oracle_function": "random-bandlimited seed=3 radius=1.0 sigma=0.8"}),
    "bernstein": (run_bernstein, {
        "j": (-1, 0, 1), "samples": 3, "cluster": 0.25}),
    "besov-equivalence": (run_besov_equivalence, {
        "function": "gauss zsigma=2 tsigma=1", "k": (-2, -1, 0, 1, 2),
        "min_half_width": 4.0, "s": 0.5, "p": 2.0, "q": 2.0, "C": 50.0,
        "shells": 12, "points": 16, "sampling_tol": 0.05,
        "dilation": 2.0}),
    "heat-equivalence": (run_heat_equivalence, {
        "function": "gauss zsigma=2 tsigma=1", "k": (-2, -1, 0, 1, 2),
        "min_half_width": 4.0, "s": 0.5, "p": 2.0, "q": 2.0, "C": 50.0,
        "m": 2}),
    "prop41": (run_prop41, {
        "function": "gauss zsigma=2 tsigma=1", "k": (-2, -1, 0, 1, 2),
        "min_half_width": 4.0, "s": 0.5, "p": 2.0, "q": 2.0, "C": 50.0}),
    "embedding": (run_embedding, {
        "s": 0.5, "p1": 2.0, "p2": math.inf, "q": 2.0, "functions": 10,
        "refine": (24, 32)}),
    "bony": (run_bony, {}),
    "localization": (run_localization, {
        "f_source": "radial sigma=4",
        "g_source": "random-bandlimited seed=5 kmax=4.0 sigma=2.0",
        "pairs": (-3, 3, -2, 3, -1, 3, -3, 2, 0, 0),
        "factors": (4.0, 8.0, 16.0), "gap": 6, "threshold": 1e-6}),
    "product-laws": (run_product_laws, {"refine": (24, 32)}),
    "fourier": (run_fourier, {
        "ladder_lambda": 1.0, "ladder_k": 1, "ladder_L": 8.0,
        "ladder_Nz": 16, "Nh": 16, "rep_scale": 0.3, "conv_L": 6.0,
        "conv_T": _PI, "conv_Nz": 12, "conv_Nt": 8,
        "conv_f": "random-bandlimited seed=1",
        "conv_h": "random-bandlimited seed=2", "conv_lambdas": (-1.0, 1.0),
        "points": 4,
        "inversion_family": ("gaussian lam=1 alpha=0",
                             "gaussian lam=1 alpha=1",
                             "gaussian lam=-2 alpha=0",
                             "gaussian lam=2 alpha=1"),
        "diag_function": "random-bandlimited seed=3",
        "diag_lambdas": (1.0, -1.0)}),
}

# Suites that need the Heisenberg group H^1 specifically.
H1_ONLY = {"fourier"}


def _parse_value(default, text, key):
    from .config import ConfigError, parse_bool, parse_int, parse_real
    if isinstance(default, bool):
        return parse_bool(text, key)
    if isinstance(default, int):
        return parse_int(text, key)
    if isinstance(default, float):
        if text.strip() == "inf":
            return math.inf
        return parse_real(text, key)
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ConfigError(f"{key}: empty list")
        if all(isinstance(d, str) for d in default):
            return tuple(items)
        if all(isinstance(d, int) for d in default):
            return tuple(parse_int(t, key) for t in items)
        return tuple(parse_real(t, key) for t in items)
    return text.strip()


def parse_case(text: str, key: str) -> ProductLawCase:
    """``law k=v ... [homogeneous]`` to a :class:`ProductLawCase`."""
    from .config import ConfigError, parse_real
    parts = text.split()
    if not parts:
        raise ConfigError(f"{key}: empty product-law case")
    hom = False
    params = {}
    for item in parts[1:]:
        if item in ("homogeneous", "hom"):
            hom = True
            continue
        if "=" not in item:
            raise ConfigError(f"{key}: malformed parameter {item!r}")
        k, v = item.split("=", 1)
        if v == "inf":
            params[k] = v
        else:
            try:
                params[k] = int(v)
            except ValueError:
                params[k] = parse_real(v, key)
    return ProductLawCase(parts[0], params, hom)


def validate_params(cfg, raw: dict) -> dict:
    """Check ``params.*`` entries of ``cfg`` and fill in defaults.

    Raises
    ------
    ConfigError
        For unknown parameters, malformed values and, for product laws,
        cases whose hypotheses fail (the message names the violated
        inequality).
    """
    from .config import ConfigError
    _, defaults = SUITES[cfg.suite]
    params = dict(defaults)
    cases = []
    for name, text in sorted(raw.items()):
        key = f"params.{name}"
        if cfg.suite == "product-laws" and name.startswith("case."):
            cases.append((name, parse_case(text, key)))
            continue
        if name not in defaults:
            raise ConfigError(f"{key}: unknown parameter for suite "
                              f"{cfg.suite!r}")
        params[name] = _parse_value(defaults[name], text, key)
    g = cfg.group()
    if cfg.suite in H1_ONLY and (g.ell, g.nc) != (1, 1):
        raise ConfigError(f"group.preset: suite {cfg.suite!r} supports the "
                          f"Heisenberg group heisenberg1 only")
    if cfg.suite == "product-laws":
        if not cases:
            raise ConfigError("params.case.*: product-laws needs at least "
                              "one case")
        for name, c in cases:
            try:
                c.validate(g.Q)
            except HypothesisError as exc:
                raise ConfigError(f"params.{name}: {exc}") from None
        params["cases"] = [c for _, c in cases]
    for name in ("j", "k", "refine", "pairs"):
        if name in params and len(params[name]) == 0:
            raise ConfigError(f"params.{name}: empty list")
    if cfg.suite in ("kernels", "bernstein") and len(params["j"]) < 3:
        raise ConfigError("params.j: slope regressions need at least three "
                          "bands")
    if cfg.suite == "localization" and len(params["pairs"]) % 2:
        raise ConfigError("params.pairs: expected an even number of band "
                          "indices")
    if cfg.suite == "embedding" and params["p1"] > params["p2"]:
        raise ConfigError("params.p1: the embedding needs p1 <= p2")
    for name in ("s", "p", "q"):
        if cfg.suite in ("besov-equivalence", "heat-equivalence", "prop41") \
                and not params[name] > 0:
            raise ConfigError(f"params.{name}: must be positive")
    if cfg.suite == "besov-equivalence" and not 0 < params["s"] < 1:
        raise ConfigError("params.s: the difference characterisation needs "
                          "0 < s < 1")
    if cfg.suite == "heat-equivalence" and not params["m"] > params["s"]:
        raise ConfigError("params.m: the heat characterisation needs m > s")
    return params


def run_suite(cfg) -> SuiteResult:
    """Run the suite named in ``cfg``."""
    func, _ = SUITES[cfg.suite]
    return func(cfg, cfg.group(), cfg.grid(), cfg.params)
