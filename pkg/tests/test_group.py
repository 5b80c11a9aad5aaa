import numpy as np
import pytest

from carnot_spectra.group import (GroupError, cc_distance_ub, dilate,
                                  gauge_norm, group_inv, group_mul,
                                  heisenberg, make_group, quaternionic_htype)


def random_points(g, n, seed=0):
    return np.random.default_rng(seed).normal(size=(n, g.dim))


@pytest.mark.parametrize("g", [heisenberg(1), heisenberg(2),
                               quaternionic_htype()])
def test_associativity_and_inverse(g):
    p, q, r = (random_points(g, 1000, s) for s in (1, 2, 3))
    lhs = group_mul(g, group_mul(g, p, q), r)
    rhs = group_mul(g, p, group_mul(g, q, r))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    e = g.identity()
    assert np.max(np.abs(group_mul(g, p, group_inv(g, p)))) <= 1e-14
    assert np.array_equal(group_mul(g, p, e), p)


def test_h1_product_formula(h1):
    p = np.array([1.0, 2.0, 3.0])
    q = np.array([-0.5, 4.0, 1.0])
    # t + t' + (x y' - y x') / 2
    expected_t = 3.0 + 1.0 + 0.5 * (1.0 * 4.0 - 2.0 * -0.5)
    assert np.allclose(group_mul(h1, p, q), [0.5, 6.0, expected_t])


def test_dilation_is_automorphism_and_gauge_homogeneous():
    g = quaternionic_htype()
    p, q = random_points(g, 200, 4), random_points(g, 200, 5)
    for d in (0.5, 2.0, 3.7):
        lhs = dilate(g, d, group_mul(g, p, q))
        rhs = group_mul(g, dilate(g, d, p), dilate(g, d, q))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * d ** 2 * 10
        assert np.allclose(gauge_norm(g, dilate(g, d, p)),
                           d * gauge_norm(g, p), rtol=1e-12)
    with pytest.raises(ValueError):
        dilate(g, 0.0, p)


def test_gauge_vertical_axis(h1):
    assert gauge_norm(h1, [0.0, 0.0, 0.25]) == pytest.approx(1.0)


def test_homogeneous_dimension():
    assert heisenberg(1).Q == 4
    assert heisenberg(3).Q == 8
    assert quaternionic_htype().Q == 10


def test_htype_block_example_accepted():
    J = [[0, 1], [-1, 0]]
    U = np.zeros((1, 4, 4))
    U[0, :2, :2] = J
    U[0, 2:, 2:] = J
    g = make_group(2, 1, U, require_htype=True)
    assert g.htype and g.Q == 6


def test_make_group_rejections():
    with pytest.raises(GroupError, match="skew"):
        make_group(1, 1, [[1.0, 0.0], [0.0, 0.0]])
    J = np.array([[0, 1], [-1, 0]], float)
    with pytest.raises(GroupError, match="dependent"):
        make_group(1, 2, [J, 2 * J])
    with pytest.raises(GroupError, match="H-type"):
        make_group(1, 1, [2 * J], require_htype=True)


def test_cc_distance_horizontal_and_vertical(h1):
    e = h1.identity()
    d = cc_distance_ub(h1, e, [1.0, 0.0, 0.0], K=8)
    assert d == pytest.approx(1.0, abs=1e-6)
    # the isoperimetric value sqrt(4 pi) is a lower bound for (0, 0, 1)
    v = cc_distance_ub(h1, e, [0.0, 0.0, 1.0], K=16)
    assert np.sqrt(4 * np.pi) * (1 - 1e-9) <= v <= 1.02 * np.sqrt(4 * np.pi)
