import numpy as np
import pytest

from carnot_spectra.grid import (Grid, GridFunction, boundary_mass,
                                 convolve_bruteforce, evaluate, generator,
                                 laguerre_wave, lp_norm, parse_generator,
                                 random_bandlimited, sample, to_blocks,
                                 from_blocks, translate_right)


def test_grid_validation():
    with pytest.raises(ValueError, match="grid.Nz"):
        Grid(8.0, np.pi, 15, 16)
    with pytest.raises(ValueError, match="grid.L"):
        Grid(-1.0, np.pi, 16, 16)


def test_lattice_index(small_grid):
    assert small_grid.lattice_index(1.0) == (1,)
    assert small_grid.lattice_index(-2.0) == (14,)
    with pytest.raises(ValueError, match="off the lattice"):
        small_grid.lattice_index(0.5)


def test_blocks_round_trip(h1, small_grid):
    f = sample(h1, small_grid, random_bandlimited(h1, 3, small_grid.T))
    back = from_blocks(small_grid, 1, 1, to_blocks(f))
    assert np.max(np.abs(back.data - f.data)) < 1e-13


def test_gaussian_l2_closed_form(h1):
    # ||exp(-|z|^2/4)||_2^2 over R^2 x [-T, T) is 2 pi * 2T
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, generator(h1, grid, "radial", sigma=np.sqrt(2.0)))
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(2 * np.pi * 2 * np.pi),
                                          rel=1e-6)


def test_triangle_and_hoelder(h1, small_grid):
    f = sample(h1, small_grid, random_bandlimited(h1, 1, small_grid.T))
    h = sample(h1, small_grid, random_bandlimited(h1, 2, small_grid.T))
    for p in (1, 2, 3.5, np.inf):
        assert lp_norm(f + h, p) <= lp_norm(f, p) + lp_norm(h, p) + 1e-10
    assert lp_norm(f * h, 2) <= lp_norm(f, 4) * lp_norm(h, 4) + 1e-10
    assert lp_norm(f * h, 1) <= lp_norm(f, 3) * lp_norm(h, 1.5) + 1e-10


def test_evaluate_reproduces_samples(h1, small_grid):
    f = sample(h1, small_grid, laguerre_wave(h1, 1.0, 1))
    pts = small_grid.points(h1).reshape(-1, 3)[::37]
    vals = evaluate(h1, f, pts)
    assert np.max(np.abs(vals - f.data.reshape(-1)[::37])) < 1e-12


def test_translation_round_trip(h1):
    grid = Grid(8.0, np.pi, 32, 32)
    f = sample(h1, grid, generator(h1, grid, "gaussian", lam=1, alpha=0))
    w = np.array([0.3, -0.2, 0.4])
    back = translate_right(h1, translate_right(h1, f, w, order=3), -w,
                           order=3)
    assert lp_norm(back - f, 2) / lp_norm(f, 2) < 1e-3
    # right translation preserves the integral of |f|^2 (Haar measure)
    moved = translate_right(h1, f, w, order=3)
    assert lp_norm(moved, 2) == pytest.approx(lp_norm(f, 2), rel=1e-3)


def test_translation_leak_guard(h1, small_grid):
    f = sample(h1, small_grid, laguerre_wave(h1, 1.0))
    with pytest.raises(ValueError, match="leaks"):
        translate_right(h1, f, [6.0, 0.0, 0.0])


def test_convolution_with_delta_is_identity(h1):
    from carnot_spectra.littlewood_paley import delta_function
    grid = Grid(4.0, np.pi, 8, 8)
    f = sample(h1, grid, random_bandlimited(h1, 5, grid.T, sigma=0.8,
                                            radius=1.0))
    out = convolve_bruteforce(h1, f, delta_function(h1, grid))
    assert lp_norm(out - f, 2) / lp_norm(f, 2) < 1e-10


def test_boundary_mass_energy_share(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, generator(h1, grid, "radial", sigma=np.sqrt(2.0)))
    share = boundary_mass(f)
    assert 0 < share < 1e-9
    assert boundary_mass(f, norm=True) == pytest.approx(np.sqrt(share))
    flat = GridFunction(grid, 1, 1, np.ones(grid.shape(h1)))
    assert boundary_mass(flat) > 0.1


def test_parse_generator():
    assert parse_generator("gaussian lam=1 alpha=2") == (
        "gaussian", {"lam": 1, "alpha": 2})
    with pytest.raises(ValueError):
        parse_generator("gaussian lam")


def test_grid_function_is_read_only(h1, small_grid):
    f = GridFunction(small_grid, 1, 1, np.zeros(small_grid.shape(h1)))
    with pytest.raises(ValueError):
        f.data[0, 0, 0] = 1.0
    with pytest.raises(ValueError, match="non-finite"):
        GridFunction(small_grid, 1, 1, np.full(small_grid.shape(h1), np.nan))
