import numpy as np
import pytest

from carnot_spectra.fourier import (
    HermiteBasis, TruncationError, alternative_inversion_constant,
    bargmann_ft, convolution_defect, diagonalization_constants, fock_gram,
    fourier_family, hermite_polynomials, invert_ft, inversion_constant,
    rep_unitarity_check, representation_matrix, schrodinger_ft)
from carnot_spectra.grid import Grid, laguerre_wave, random_bandlimited, sample
from carnot_spectra.group import group_mul, heisenberg, quaternionic_htype
from carnot_spectra.sublaplacian import apply_neg_sublaplacian

POINTS = np.random.default_rng(7).uniform(-0.7, 0.7, (6, 3))


def test_hermite_functions_orthonormal():
    for lam in (1.0, -2.5):
        basis = HermiteBasis(lam, nh=12)
        assert np.max(np.abs(basis.gram() - np.eye(12))) <= 1e-10
        assert np.allclose(basis.eigenvalues()[:3], np.array([1, 3, 5]) * abs(lam))
    h = hermite_polynomials(3, 0.0)
    assert h[0] == pytest.approx(np.pi ** -0.25) and h[1] == 0.0


def test_fock_monomials_orthonormal():
    assert np.max(np.abs(fock_gram(1.0, 10) - np.eye(10))) <= 1e-8
    # a wrong Gaussian weight breaks orthonormality
    assert np.max(np.abs(fock_gram(1.0, 10, weight_exponent=1.0)
                         - np.eye(10))) > 0.1


def test_inversion_constants():
    assert inversion_constant(1) == pytest.approx(1 / (4 * np.pi ** 2))
    assert alternative_inversion_constant(1) == pytest.approx(
        4 * inversion_constant(1))


@pytest.mark.parametrize("picture", ["schrodinger", "bargmann"])
def test_representations(h1, picture):
    table = rep_unitarity_check(h1, 1.0, POINTS, 16, picture)
    assert max(table.column("unitarity")) <= 1e-6
    assert max(table.column("homomorphism")) <= 1e-6
    e = representation_matrix(h1, -2.0, 8, np.zeros(3), picture)[0]
    assert np.max(np.abs(e - np.eye(8))) <= 1e-10


def test_central_character(h1):
    p = np.array([0.0, 0.0, 0.3])
    A = representation_matrix(h1, 2.0, 6, p)[0]
    assert np.allclose(A, np.exp(2j * 0.3) * np.eye(6))


def test_only_h1_and_lattice_frequencies(small_grid):
    g2 = heisenberg(2)
    with pytest.raises(ValueError):
        representation_matrix(g2, 1.0, 4, np.zeros(5))
    with pytest.raises(ValueError):
        representation_matrix(quaternionic_htype(), 1.0, 4, np.zeros(7))
    h1 = heisenberg(1)
    f = sample(h1, small_grid, laguerre_wave(h1, 1.0))
    with pytest.raises(ValueError):
        schrodinger_ft(h1, f, 0.5)
    with pytest.raises(ValueError):
        schrodinger_ft(h1, f, 0.0)


def test_ground_state_transform_is_rank_one_diagonal(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, laguerre_wave(h1, 1.0, 0))
    M = schrodinger_ft(h1, f, -1.0, 8).matrix
    off = M.copy()
    k = np.unravel_index(np.argmax(np.abs(M)), M.shape)
    off[k] = 0
    assert k[0] == k[1]
    assert np.abs(off).max() <= 1e-3 * np.abs(M[k])


def test_diagonalization(h1):
    grid = Grid(8.0, np.pi, 32, 16)
    f = sample(h1, grid, random_bandlimited(h1, 3, grid.T))
    lap = apply_neg_sublaplacian(h1, f)
    c = diagonalization_constants(h1, f, lap, 1.0, 16)
    assert np.allclose(c[:3], [1, 3, 5], rtol=1e-2)
    cb = diagonalization_constants(h1, f, lap, 1.0, 16, "bargmann")
    assert np.allclose(cb[:3], [1, 3, 5], rtol=1e-2)


def test_transform_of_lattice_free_frequency_has_no_mass(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, laguerre_wave(h1, 1.0))
    M = bargmann_ft(h1, f, 2.0, 8).matrix
    assert np.abs(M).max() <= 1e-12


def test_convolution_theorem(h1):
    grid = Grid(6.0, np.pi, 12, 8)
    f = sample(h1, grid, random_bandlimited(h1, 1, grid.T))
    h = sample(h1, grid, random_bandlimited(h1, 2, grid.T))
    assert convolution_defect(h1, f, h, 1.0, 8) <= 5e-2


def test_inversion_round_trip(h1):
    grid = Grid(8.0, np.pi, 32, 16)
    fn = laguerre_wave(h1, 1.0, 1)
    f = sample(h1, grid, fn)
    W = np.vstack([np.zeros(3), POINTS[:4]])
    v = invert_ft(h1, fourier_family(h1, f), W, grid.T)
    exact = fn(W[:, :2], W[:, 2:])
    assert np.max(np.abs(v - exact)) <= 0.05 * np.abs(f.data).max()


def test_inversion_detects_truncation(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, laguerre_wave(h1, 1.0, 6))
    with pytest.raises(TruncationError):
        invert_ft(h1, fourier_family(h1, f, nh=4), np.zeros((1, 3)), grid.T)
