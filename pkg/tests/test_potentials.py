import math

import numpy as np
import pytest

from randpress import (
    AdditivePotential,
    CocyclePotential,
    ScaledInverseNormPotential,
    check_subadditivity,
    sup_norm_f1,
)
from randpress.errors import SingularMatrix

from fixtures import (
    bernoulli_chain,
    fix_a,
    fix_b,
    full_shift_bundle,
    one_state_chain,
    random_bundle,
    random_chain,
    random_cocycle,
)


def test_zero_additive_is_zero():
    pot = AdditivePotential(np.zeros((1, 2)))
    assert pot.eval((0,) * 5, (1, 0, 1, 1, 0), 5) == 0.0


def test_fix_a_birkhoff_sum():
    _, _, pot = fix_a()
    assert pot.eval((0, 0, 0), (1, 0, 1), 3) == pytest.approx(2.0)


def test_diagonal_cocycle_max_row_sum():
    B = np.broadcast_to(np.diag([math.e, math.e ** 2]), (1, 2, 2, 2)).copy()
    pot = CocyclePotential(B, norm_kind="max_row_sum")
    assert pot.eval((0, 0, 0), (0, 1, 0), 3) == pytest.approx(6.0, abs=1e-12)


def test_commuting_diagonal_birkhoff_identity():
    rng = np.random.default_rng(0)
    diag = rng.normal(size=(2, 2))  # (fiber symbol, coordinate) exponents
    B = np.zeros((1, 2, 2, 2))
    for a in range(2):
        B[0, a] = np.diag(np.exp(diag[a]))
    pot = CocyclePotential(B, norm_kind="max_row_sum")
    w = (0, 1, 1, 0, 1)
    expected = max(sum(diag[a][c] for a in w) for c in range(2))
    assert pot.eval((0,) * 5, w, 5) == pytest.approx(expected, abs=1e-12)


def test_additive_subadditivity_is_equality():
    chain, bundle, pot = fix_a()
    worst = check_subadditivity(pot, chain, bundle, sample_count=200, seed=1)
    assert abs(worst) <= 1e-12


def test_cocycle_subadditivity_rotations():
    theta = 0.7
    R = 2.0 * np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    pot = CocyclePotential(np.broadcast_to(R, (1, 2, 2, 2)).copy())
    chain, bundle = one_state_chain(), full_shift_bundle()
    assert check_subadditivity(pot, chain, bundle, sample_count=1000, seed=2) <= 1e-12


def test_scaled_inverse_t_zero_is_zero():
    rng = np.random.default_rng(4)
    coc = random_cocycle(rng, 1, 2)
    pot = ScaledInverseNormPotential(coc, 0.0)
    assert pot.eval((0, 0), (0, 1), 2) == 0.0
    chain, bundle = one_state_chain(), full_shift_bundle()
    assert check_subadditivity(pot, chain, bundle, sample_count=100, seed=0) == 0.0


def test_shipped_potentials_subadditive():
    rng = np.random.default_rng(5)
    chain = random_chain(rng, 2)
    bundle = random_bundle(rng, 2, 2)
    coc = random_cocycle(rng, 2, 2)
    for pot in (
        AdditivePotential(rng.normal(size=(2, 2))),
        coc,
        CocyclePotential(coc.matrices, norm_kind="max_row_sum"),
        ScaledInverseNormPotential(coc, 0.8),
    ):
        assert check_subadditivity(pot, chain, bundle, sample_count=1000, seed=6) <= 1e-12


def test_scaled_inverse_linear_in_t():
    rng = np.random.default_rng(7)
    coc = random_cocycle(rng, 1, 2)
    u, w = (0, 0, 0), (1, 0, 1)
    v1 = ScaledInverseNormPotential(coc, 1.0).eval(u, w, 3)
    for t in (0.25, 0.5, 2.0):
        vt = ScaledInverseNormPotential(coc, t).eval(u, w, 3)
        assert vt == pytest.approx(t * v1, rel=1e-12)


def test_scaled_inverse_rejects_negative_t():
    rng = np.random.default_rng(8)
    with pytest.raises(ValueError):
        ScaledInverseNormPotential(random_cocycle(rng, 1, 2), -0.5)


def test_singular_product_raises():
    B = np.zeros((1, 2, 2, 2))
    B[0, 0] = np.array([[1.0, 0.0], [0.0, 0.0]])  # singular generator
    B[0, 1] = np.eye(2)
    pot = ScaledInverseNormPotential(CocyclePotential(B), 1.0)
    with pytest.raises(SingularMatrix):
        pot.eval((0, 0), (0, 1), 2)


def test_sup_norm_zero_potential():
    chain, bundle, _ = fix_a()
    assert sup_norm_f1(AdditivePotential(np.zeros((1, 2))), chain, bundle) == 0.0


def test_sup_norm_fix_a():
    chain, bundle, pot = fix_a()
    assert sup_norm_f1(pot, chain, bundle) == pytest.approx(1.0)


def test_sup_norm_weighted_states():
    chain, bundle, _ = fix_b()
    pot = AdditivePotential(np.array([[2.0, 2.0, 2.0], [-3.0, -3.0, -3.0]]))
    assert sup_norm_f1(pot, chain, bundle) == pytest.approx(2.5)


def test_scalar_cocycle_reduces_to_additive():
    B = np.zeros((1, 2, 1, 1))
    B[0, :, 0, 0] = (2.0, 5.0)
    coc = CocyclePotential(B)
    add = coc.to_additive()
    assert np.allclose(add.table, np.log([[2.0, 5.0]]))
    scaled = ScaledInverseNormPotential(coc, 0.5).to_additive()
    assert np.allclose(scaled.table, -0.5 * np.log([[2.0, 5.0]]))
    assert random_cocycle(np.random.default_rng(0), 1, 2).to_additive() is None


def test_bernoulli_chain_helper():
    chain = bernoulli_chain()
    assert np.allclose(chain.stationary, [0.5, 0.5])
