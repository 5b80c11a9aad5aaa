import numpy as np
import pytest

from carnot_spectra.grid import Grid, laguerre_wave, lp_norm, random_bandlimited, sample
from carnot_spectra.littlewood_paley import default_window
from carnot_spectra.paraproduct import (HypothesisError, ProductLawCase,
                                        bony_decomposition, law_constants,
                                        localization_leak, paraprod,
                                        product_law_report, remainder,
                                        ring_bands)
from carnot_spectra.suites import parse_case

GRID = Grid(8.0, np.pi, 16, 16)


@pytest.fixture(scope="module")
def pair(h1):
    return tuple(sample(h1, GRID, random_bandlimited(h1, s, GRID.T))
                 for s in (11, 12))


@pytest.fixture(scope="module")
def window(h1):
    w = default_window(h1, GRID)
    return (min(w.jmin, 0), w.jmax + 1)


def test_bony_identity(h1, pair, window):
    u, v = pair
    split = bony_decomposition(h1, u, v, window, 1e-10)
    assert split.residual <= 1e-6
    # T_u v is linear in v, R is symmetric
    assert lp_norm(paraprod(h1, u, 2 * v, window, 1e-10) - 2 * split.Tuv, 2) \
        <= 1e-10 * lp_norm(split.Tuv, 2)
    Rvu = remainder(h1, v, u, window, 1e-10)
    assert lp_norm(Rvu - split.R, 2) <= 1e-12 * lp_norm(split.R, 2)


def test_ring_bands():
    # ring [2, 128]; band j covers [4^(j-1), 4^(j+1)]
    assert ring_bands(2, 8.0) == (0, 4)
    assert ring_bands(2, 4.0) == (1, 3)
    lo, hi = ring_bands(2, 8.0, ball=True)
    assert hi == 4 and lo < -1000


def test_localized_product_stays_in_ring(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, laguerre_wave(h1, 1.0, 0))
    # a band-limited function is localised around its own eigenvalue
    assert localization_leak(h1, f, 0, 8.0) <= 1e-6


def test_hypothesis_checks():
    ok = ProductLawCase("nonlinear_b", {"rho1": 0.5, "rho2": 1, "p1": 2,
                                        "p2": 2, "r2": 2})
    ok.validate(4)
    bad = ProductLawCase("nonlinear_b", {"rho1": 3, "rho2": 1, "p1": 2,
                                         "p2": 2, "r2": 2})
    with pytest.raises(HypothesisError, match="rho1 < Q/p1"):
        bad.validate(4)
    with pytest.raises(HypothesisError, match="missing"):
        ProductLawCase("algebra", {"s": 1}).validate(4)
    with pytest.raises(HypothesisError, match="unknown law"):
        ProductLawCase("binomial", {}).validate(4)
    with pytest.raises(HypothesisError, match="1/p = 1/a1"):
        ProductLawCase("mixed_lebesgue", {"s": 0.5, "p": 2, "q": 2, "a1": 4,
                                          "b1": 2, "a2": "inf",
                                          "b2": 2}).validate(4)


def test_case_text_round_trip():
    text = "mixed_lebesgue s=0.5 p=2 q=2 a1=4 b1=4 a2=inf b2=2 homogeneous"
    case = parse_case(text, "params.case.x")
    assert case.homogeneous and case.params["a2"] == "inf"
    assert parse_case(case.to_text(), "params.case.x") == case


def test_product_law_report(h1, pair, window):
    cases = [ProductLawCase("algebra", {"s": 0.5, "p": 2, "q": 2}),
             ProductLawCase("lebesgue_pair", {"s": 0.5, "p1": 4, "p2": 4,
                                              "q": 2})]
    table = product_law_report(h1, [pair], cases, window, 1e-8)
    consts = law_constants(table)
    assert set(consts) == {c.label for c in cases}
    assert all(0 < v < 1e6 for v in consts.values())
