import numpy as np
import pytest

from carnot_spectra.grid import (Grid, laguerre_wave, lp_norm, random_bandlimited,
                                 sample)
from carnot_spectra.littlewood_paley import (
    MultiplierSpec, UnresolvedMultiplierError, apply_multiplier,
    apply_multipliers, build_partition, chebyshev_coefficients, chi,
    default_window, delta_j, dense_filter_oracle, lp_decompose, psi,
    psi_kernel, psi_spec, s_j)
from carnot_spectra.sublaplacian import spectral_bound

TINY = Grid(4.0, np.pi, 8, 16)


@pytest.fixture(scope="module")
def tiny_f(h1):
    return sample(h1, TINY, random_bandlimited(h1, 3, TINY.T, radius=1.0,
                                               sigma=0.8))


def test_cutoff_values():
    assert chi(0.2) == 1.0 and chi(1.5) == 0.0
    assert psi(0.1) == 0.0 and psi(5.0) == 0.0
    x = np.random.default_rng(0).uniform(-3, 3, 10 ** 4)
    c = chi(x)
    assert c.min() >= 0 and c.max() <= 1
    assert np.all(c[np.abs(x) <= 0.25] == 1) and np.all(c[np.abs(x) >= 1] == 0)
    assert np.array_equal(chi(x), chi(-x))


def test_telescoping_and_partition_of_unity():
    tau = np.linspace(0, 16, 4001)
    assert np.max(np.abs(chi(tau) + psi(tau) + psi(tau / 4) - chi(tau / 16))) \
        <= 1e-13
    J = 5
    tau = np.linspace(0, 4.0 ** J, 20001)
    total = chi(tau) + sum(psi(4.0 ** -j * tau) for j in range(J + 1))
    assert np.max(np.abs(total - 1)) <= 1e-12
    part = build_partition(-3, 4)
    tau = np.geomspace(4.0 ** part.jmin, 4.0 ** (part.jmax - 1), 5000)
    total = sum(part.band(j, tau) for j in part.indices())
    assert np.max(np.abs(total - 1)) <= 1e-12
    with pytest.raises(ValueError):
        build_partition(2, 1)


def test_heat_at_zero_is_identity(h1, tiny_f):
    out = apply_multiplier(h1, tiny_f, MultiplierSpec("heat", 0.0))
    assert lp_norm(out - tiny_f, 2) <= 1e-12 * lp_norm(tiny_f, 2)


@pytest.mark.parametrize("spec", [MultiplierSpec("chi0", 0.0, 1e-10),
                                  MultiplierSpec("heat", 0.5, 1e-10),
                                  MultiplierSpec("bessel", 1.0, 1e-10),
                                  psi_spec(-1, 1e-10), psi_spec(1, 1e-10)])
def test_chebyshev_matches_dense_oracle(h1, tiny_f, spec):
    cheb = apply_multiplier(h1, tiny_f, spec)
    dense = dense_filter_oracle(h1, tiny_f, spec)
    assert lp_norm(cheb - dense, 2) <= 1e-6 * lp_norm(dense, 2)


def test_slicing_matches_chebyshev(h1, tiny_f):
    specs = [psi_spec(0, 1e-10), MultiplierSpec("chi", 1.0, 1e-10)]
    a = apply_multipliers(h1, [tiny_f], specs)
    b = apply_multipliers(h1, [tiny_f], specs, method="slice")
    for x, y in zip(a, b):
        assert lp_norm(x[0] - y[0], 2) <= 1e-7 * lp_norm(tiny_f, 2)


def test_band_on_ground_state(h1):
    grid = Grid(8.0, np.pi, 32, 8)
    f = sample(h1, grid, laguerre_wave(h1, 1.0, 0))
    d0 = delta_j(h1, f, 0)
    assert lp_norm(d0 - f, 2) <= 1e-2 * lp_norm(f, 2)
    # the eigenvalue ~1 lies outside the supports of Delta_2 and Delta_-2;
    # what remains is the sampling error of the eigenfunction
    for j in (-2, 2):
        assert lp_norm(delta_j(h1, f, j), 2) <= 1e-3 * lp_norm(f, 2)


def test_reconstruction_and_orthogonality(h1, tiny_f):
    top = spectral_bound(h1, TINY)
    J = int(np.ceil(0.5 * np.log2(top))) + 1
    dec = lp_decompose(h1, tiny_f, (0, J), 1e-10)
    assert 4.0 ** (J - 1) >= top
    rec = dec.reconstruct()
    assert lp_norm(tiny_f - rec, 2) <= 1e-6 * lp_norm(tiny_f, 2)
    for j in dec.partition.indices():
        assert lp_norm(dec.band(j), 2) <= lp_norm(tiny_f, 2) * (1 + 1e-8)
    far = delta_j(h1, dec.band(0), 2, 1e-10)
    assert lp_norm(far, 2) <= 1e-8 * lp_norm(tiny_f, 2)
    assert lp_norm(dec.S(1) - s_j(h1, tiny_f, 1, 1e-10), 2) \
        <= 1e-8 * lp_norm(tiny_f, 2)
    labels = [j for j, _ in dec.pieces()]
    assert labels[0] == -1 and labels[1:] == list(range(0, J + 1))
    with pytest.raises(KeyError):
        dec.band(J + 1)


def test_default_window_covers_spectrum(h1):
    part = default_window(h1, TINY)
    assert 4.0 ** part.jmax >= spectral_bound(h1, TINY)


def test_kernel_reproduces_band(h1, tiny_f):
    from carnot_spectra.grid import convolve_bruteforce
    K = psi_kernel(h1, TINY, 0, 1e-10)
    band = delta_j(h1, tiny_f, 0, 1e-10)
    conv = convolve_bruteforce(h1, tiny_f, K)
    # finite box: agreement is limited by the kernel tails
    assert lp_norm(conv - band, 2) <= 0.1 * lp_norm(band, 2)


def test_unresolved_multiplier():
    with pytest.raises(UnresolvedMultiplierError, match="psi"):
        chebyshev_coefficients(psi_spec(-6, 1e-12), 0.0, 1000.0, cap=64)
    with pytest.raises(UnresolvedMultiplierError, match="singular"):
        chebyshev_coefficients(MultiplierSpec("fracpow", -1.0), 0.0, 10.0)


def test_multiplier_spec_validation():
    with pytest.raises(ValueError):
        MultiplierSpec("wavelet")
    with pytest.raises(ValueError):
        MultiplierSpec("heat", 1.0, eps=0.0)
    spec = MultiplierSpec("custom", table=((0, 1), (2, 0)))
    assert spec(1.0) == pytest.approx(0.5)
