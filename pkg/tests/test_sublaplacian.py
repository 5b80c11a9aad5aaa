import numpy as np
import pytest

from carnot_spectra.grid import (Grid, GridFunction, generator, laguerre_wave,
                                 lp_norm, sample)
from carnot_spectra.sublaplacian import (apply_field, apply_neg_sublaplacian,
                                         assemble_twisted,
                                         difference_coefficients,
                                         worker_count)


def polynomial_gaussian(h1, grid, poly):
    P = grid.points(h1)
    x, y, t = P[..., 0], P[..., 1], P[..., 2]
    return x, y, t, GridFunction(grid, 1, 1,
                                 poly(x, y) * np.exp(-x ** 2 - y ** 2)
                                 * np.exp(np.cos(t)))


def test_field_at_origin(h1):
    # X = d/dx - (y/2) d/dt, and y = 0 at the origin, so X f(e) = 1 for
    # f = x exp(-|z|^2 - t^2); the stencil error is 2 h^4
    grid = Grid(1.5, np.pi, 192, 16)
    P = grid.points(h1)
    x, y, t = P[..., 0], P[..., 1], P[..., 2]
    f = GridFunction(grid, 1, 1, x * np.exp(-x ** 2 - y ** 2 - t ** 2))
    c = grid.Nz // 2
    assert abs(apply_field(h1, f, 0).data[c, c, grid.Nt // 2] - 1) < 1e-6


def test_fields_annihilate_constants_in_the_interior(h1, small_grid):
    f = GridFunction(small_grid, 1, 1, np.ones(small_grid.shape(h1)))
    for i in (0, 1):
        inner = apply_field(h1, f, i).data[2:-2, 2:-2]
        assert np.max(np.abs(inner)) < 1e-12


def test_commutator_is_central_derivative(h1):
    grid = Grid(4.0, np.pi, 96, 16)
    x, y, t, f = polynomial_gaussian(h1, grid, lambda x, y: 1 + x * y + y)
    comm = (apply_field(h1, apply_field(h1, f, 1), 0)
            - apply_field(h1, apply_field(h1, f, 0), 1))
    dt = GridFunction.like(f, -np.sin(t) * f.data)
    assert lp_norm(comm - dt, 2) / lp_norm(dt, 2) < 1e-4


def test_field_index_checked(h1, small_grid):
    f = GridFunction(small_grid, 1, 1, np.zeros(small_grid.shape(h1)))
    with pytest.raises(ValueError):
        apply_field(h1, f, 2)


def test_twisted_zero_frequency_is_real_laplacian(h1, small_grid):
    op = assemble_twisted(h1, small_grid, 0.0, order=2)
    A = op.matrix.toarray()
    assert np.max(np.abs(A.imag)) == 0.0
    assert op.ground > 0
    assert op.specbound >= np.linalg.eigvalsh(A).max()


@pytest.mark.parametrize("order", [2, 8, "spectral"])
def test_twisted_hermitian_psd(h1, order):
    grid = Grid(8.0, np.pi, 12, 8)
    op = assemble_twisted(h1, grid, 2.0, order=order)
    A = op.matrix.toarray()
    assert np.max(np.abs(A - A.conj().T)) <= 1e-12 * op.specbound
    ev = np.linalg.eigvalsh(A)
    assert ev.min() >= -1e-9 * op.specbound
    assert ev.max() <= op.specbound * (1 + 1e-12)


def test_twisted_ground_state(h1):
    grid = Grid(8.0, np.pi, 16, 8)
    op = assemble_twisted(h1, grid, 1.0, order="spectral")
    assert op.ground == pytest.approx(1.0, rel=0.02)


def test_off_lattice_frequency_rejected(h1, small_grid):
    with pytest.raises(ValueError, match="lattice"):
        assemble_twisted(h1, small_grid, 0.3)


def test_neg_sublaplacian_on_eigenfunctions(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    for alpha in (0, 1):
        f = sample(h1, grid, laguerre_wave(h1, 1.0, alpha))
        out = apply_neg_sublaplacian(h1, f)
        assert lp_norm(out - (2 * alpha + 1) * f, 2) / lp_norm(f, 2) < 0.02


def test_neg_sublaplacian_on_radial_gaussian(h1):
    grid = Grid(8.0, np.pi, 64, 8)
    f = sample(h1, grid, generator(h1, grid, "radial", sigma=1.0))
    out = apply_neg_sublaplacian(h1, f)
    # radial Gaussian: -Delta e^{-r^2/2} = (2 - r^2) e^{-r^2/2} in the plane
    P = grid.points(h1)
    r2 = P[..., 0] ** 2 + P[..., 1] ** 2
    exact = (2 - r2) * np.exp(-r2 / 2)
    assert np.max(np.abs(out.data - exact)) < 1e-5


def test_difference_coefficients():
    assert difference_coefficients(2) == (-1.0, 1.0)
    # |sum_r d_r e^{i k r}|^2 approximates k^2 to order k^(order + 2)
    for order in (2, 4, 8):
        d = np.array(difference_coefficients(order))
        k = np.array([0.1, 0.2])
        sym = np.abs(np.exp(1j * np.outer(k, np.arange(len(d)))) @ d) ** 2
        err = np.abs(sym - k ** 2)
        assert np.log2(err[1] / err[0]) == pytest.approx(order + 2, abs=0.2)
    with pytest.raises(ValueError):
        difference_coefficients(3)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("CARNOT_SPECTRA_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("CARNOT_SPECTRA_THREADS", "junk")
    assert worker_count() == 1
