"""Acceptance criteria 1-8, run on the shipped configurations.

Each test runs the relevant suites in-process, compares the measured
values against tolerances pinned here (not the bounds the suites carry
themselves) and prints one ``PASS``/``FAIL`` line per criterion.  The
whole module takes a few minutes; deselect it with ``-m "not acceptance"``.
"""

import functools
import math
from pathlib import Path

import pytest

from carnot_spectra.config import load_config
from carnot_spectra.suites import run_suite

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.acceptance

# Pinned tolerances.
TOL_IDENTITY = 1e-12
TOL_RECONSTRUCTION = 1e-6
TOL_BONY = 1e-6
BONY_CORPUS = 25
TOL_DENSE_ORACLE = 1e-6
TOL_BRUTE_CONVOLUTION = 1e-2
TOL_FOURIER_PRODUCT = 5e-2
TOL_GROUND = 0.02
TOL_GAP = 0.03
SLOPE_X = (0.85, 1.15)
SLOPE_RHO = (-1.15, -0.85)
SLOPE_BERNSTEIN = (2.0 * 0.85, 2.0 * 1.15)  # Q/2 = 2 on the first Heisenberg group
SLOPE_DERIVATIVE = (0.85, 1.15)
TOL_DILATION_EXPONENT = 0.10
MIN_BANDS = 3
MAX_EQUIVALENCE = 50.0
MAX_GROWTH = 2.0
TOL_LEAK = 1e-6
TOL_INVERSION = 0.05


@functools.lru_cache(maxsize=None)
def suite(name):
    cfg = load_config(CONFIGS / f"{name}.cfg", suite=name)
    return run_suite(cfg)


def value(name, key):
    v = suite(name).get(key).value
    return math.nan if v is None else v


def report(capsys, number, title, failures):
    line = (f"criterion {number} ({title}): "
            f"{'PASS' if not failures else 'FAIL ' + '; '.join(failures)}")
    with capsys.disabled():
        print("\n" + line)
    assert not failures, line


def within(x, lo, hi):
    return lo <= x <= hi


def below(failures, label, x, bound):
    if not x <= bound:
        failures.append(f"{label}={x:.3g} > {bound:g}")


def between(failures, label, x, lo, hi):
    if not within(x, lo, hi):
        failures.append(f"{label}={x:.3g} outside [{lo:g}, {hi:g}]")


def test_criterion_1_exact_identities(capsys):
    bad = []
    for key in ("associativity", "identity_inverse", "dilation_automorphism"):
        below(bad, key, value("geometry", key), TOL_IDENTITY)
    for key in ("partition_of_unity_inhomogeneous",
                "partition_of_unity_homogeneous"):
        below(bad, key, value("lp-reconstruct", key), TOL_IDENTITY)
    below(bad, "reconstruction",
          value("lp-reconstruct", "reconstruction_residual"),
          TOL_RECONSTRUCTION)
    below(bad, "bony", value("bony", "bony_residual"), TOL_BONY)
    if value("bony", "corpus_size") < BONY_CORPUS:
        bad.append("bony corpus smaller than 25 pairs")
    report(capsys, 1, "exact identities", bad)


def test_criterion_2_oracle_equivalence(capsys):
    bad = []
    below(bad, "dense oracle",
          value("lp-reconstruct", "chebyshev_vs_dense_oracle"),
          TOL_DENSE_ORACLE)
    below(bad, "brute-force convolution",
          value("kernels", "delta_j_vs_bruteforce_convolution"),
          TOL_BRUTE_CONVOLUTION)
    below(bad, "Fourier product", value("fourier", "convolution_theorem"),
          TOL_FOURIER_PRODUCT)
    report(capsys, 2, "oracle equivalence", bad)


def test_criterion_3_spectral_ladder(capsys):
    bad = []
    below(bad, "ground", value("fourier", "ladder_ground"), TOL_GROUND)
    below(bad, "gap1", value("fourier", "ladder_gap1"), TOL_GAP)
    below(bad, "gap2", value("fourier", "ladder_gap2"), TOL_GAP)
    report(capsys, 3, "spectral ladder", bad)


def test_criterion_4_scaling_laws(capsys):
    bad = []
    if value("kernels", "resolved_bands") < MIN_BANDS:
        bad.append("fewer than 3 resolved bands")
    for key in ("X0_Psi_L1_slope", "X1_Psi_L1_slope"):
        between(bad, key, value("kernels", key), *SLOPE_X)
    between(bad, "rho_Psi_L1_slope", value("kernels", "rho_Psi_L1_slope"),
            *SLOPE_RHO)
    for key in ("linf_l2_slope_min", "linf_l2_slope_max"):
        between(bad, key, value("bernstein", key), *SLOPE_BERNSTEIN)
    for key in ("derivative_slope_min", "derivative_slope_max"):
        between(bad, key, value("bernstein", key), *SLOPE_DERIVATIVE)
    below(bad, "dilation exponent",
          value("besov-equivalence", "homogeneous_dilation_exponent"),
          TOL_DILATION_EXPONENT)
    report(capsys, 4, "scaling laws", bad)


def test_criterion_5_norm_equivalences(capsys):
    bad = []
    below(bad, "difference vs LP",
          value("besov-equivalence", "difference_lp_equivalence_constant"),
          MAX_EQUIVALENCE)
    below(bad, "heat vs LP",
          value("heat-equivalence", "heat_lp_equivalence_constant"),
          MAX_EQUIVALENCE)
    below(bad, "derivative", value("prop41", "derivative_equivalence_constant"),
          MAX_EQUIVALENCE)
    report(capsys, 5, "norm equivalences", bad)


def test_criterion_6_product_laws(capsys):
    bad = []
    res = suite("product-laws")
    growth = [a for a in res.assertions if a.name.endswith(":refinement")]
    finite = [a for a in res.assertions if a.name.endswith(":finite")]
    if len(growth) < 12 or len(finite) < 12:
        bad.append("fewer than 12 product-law cases")
    for a in finite:
        if a.value is None or not math.isfinite(a.value):
            bad.append(f"{a.name} not finite")
    for a in growth:
        between(bad, a.name, math.nan if a.value is None else a.value,
                1.0 / MAX_GROWTH, MAX_GROWTH)
    report(capsys, 6, "product laws", bad)


def test_criterion_7_localization(capsys):
    bad = []
    below(bad, "ring leak", value("localization", "ring_leak_gap6"), TOL_LEAK)
    if math.isnan(value("localization", "empirical_M1")):
        bad.append("empirical M1 missing")
    report(capsys, 7, "localization", bad)


def test_criterion_8_fourier_inversion(capsys):
    bad = []
    below(bad, "round trip", value("fourier", "inversion_round_trip"),
          TOL_INVERSION)
    report(capsys, 8, "Fourier inversion", bad)
