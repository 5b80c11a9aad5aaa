import numpy as np
import pytest

from carnot_spectra.besov import (BallSampling, BesovParams, besov_norm,
                                  difference_norm, gauge_sphere_points,
                                  heat_norm, lq_sum, shell_samples)
from carnot_spectra.grid import Grid, laguerre_wave, lp_norm, sample
from carnot_spectra.group import gauge_norm
from carnot_spectra.littlewood_paley import chi

GRID = Grid(8.0, np.pi, 32, 8)


@pytest.fixture(scope="module")
def waves(h1):
    return [sample(h1, GRID, laguerre_wave(h1, 1.0, a)) for a in (0, 1)]


def test_params_validation():
    with pytest.raises(ValueError):
        BesovParams(0.5, 0.5, 2)
    with pytest.raises(ValueError):
        BesovParams(0.5, 2, 0)
    BesovParams(0.5, np.inf, 0.5)


def test_lq_sum():
    assert lq_sum([3.0, 4.0], 2) == pytest.approx(5.0)
    assert lq_sum([3.0, 4.0], np.inf) == 4.0
    assert lq_sum([], 2) == 0.0


@pytest.mark.parametrize("s", [0.5, 1.5])
def test_norm_of_eigenfunctions(h1, waves, s):
    f0, f1 = waves
    bp = BesovParams(s, 2, 2, homogeneous=True, window=(-3, 4))
    # eigenvalue 1 sits in band 0 only
    assert besov_norm(h1, f0, bp) == pytest.approx(lp_norm(f0, 2), rel=1e-2)
    # eigenvalue 3 splits between bands 0 and 1
    c = float(chi(0.75))
    expected = np.hypot(c, 2 ** s * (1 - c)) * lp_norm(f1, 2)
    assert besov_norm(h1, f1, bp) == pytest.approx(expected, rel=2e-2)


def test_inhomogeneous_requires_window_reaching_zero(h1, waves):
    with pytest.raises(ValueError, match="jmin"):
        besov_norm(h1, waves[0], BesovParams(0.5, 2, 2, window=(1, 4)))


def test_sphere_points_have_unit_gauge(h1):
    u = np.random.default_rng(1).uniform(size=(64, 4))
    assert np.allclose(gauge_norm(h1, gauge_sphere_points(h1, u)), 1.0)
    pts = shell_samples(h1, BallSampling(shells=4, points=8), 2)
    r = gauge_norm(h1, pts)
    assert np.all((r >= 2.0 ** -3 - 1e-12) & (r <= 2.0 ** -2 + 1e-12))


def test_characterisations_are_comparable(h1, waves):
    f = waves[0]
    bp = BesovParams(0.5, 2, 2, window=(-3, 4))
    lp = besov_norm(h1, f, bp)
    diff = difference_norm(h1, f, bp, BallSampling(shells=6, points=8))
    heat = heat_norm(h1, f, bp, kmax=12)
    for other in (diff, heat):
        assert 1 / 50 <= other / lp <= 50
