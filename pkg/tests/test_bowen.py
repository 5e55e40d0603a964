import math

import numpy as np
import pytest

from randpress import (
    BundleSFT,
    CocyclePotential,
    dimension_root,
    lyapunov_spread,
    pressure_at_t,
)
from randpress.errors import NoBracket, NonMonotone

from fixtures import (
    fix_b,
    fix_e,
    fix_f,
    full_shift_bundle,
    one_state_chain,
    uniform_measure,
)


def test_pressure_at_zero_is_entropy_estimate():
    chain, bundle, coc = fix_e()
    est = pressure_at_t(chain, bundle, coc, 0.0, n=4, m=2)
    assert est.value == pytest.approx(math.log(2), abs=1e-12)


def test_fix_e_affine_exact_all_depths():
    chain, bundle, coc = fix_e()
    for n in (1, 3, 6):
        for m in (1, 2, 3):
            for t in (0.0, 0.4, 1.1):
                est = pressure_at_t(chain, bundle, coc, t, n, m)
                assert est.value == pytest.approx(
                    math.log(2) - t * math.log(3), abs=1e-10
                )


def test_fix_f_increment_matches_limit():
    chain, bundle, coc = fix_f()
    limit = 0.5 * (math.log(2) + math.log(3))
    rate = 0.5 * (math.log(3) + math.log(4))
    for t in (0.0, 0.5):
        est = pressure_at_t(chain, bundle, coc, t, n=8, m=1)
        assert est.value == pytest.approx(limit - t * rate, abs=1e-10)


def test_pressure_affine_in_t_scalar():
    chain, bundle, coc = fix_e()
    vals = [pressure_at_t(chain, bundle, coc, t, 4, 1).value for t in (0.0, 0.5, 1.0)]
    assert vals[1] == pytest.approx(0.5 * (vals[0] + vals[2]), abs=1e-12)


def test_pressure_monte_carlo_deterministic():
    chain, bundle, coc = fix_f()
    a = pressure_at_t(chain, bundle, coc, 0.3, 6, 1, mode="monte_carlo", samples=64, seed=5)
    b = pressure_at_t(chain, bundle, coc, 0.3, 6, 1, mode="monte_carlo", samples=64, seed=5)
    assert a == b
    assert a.std_error > 0.0


def test_dimension_root_fix_e():
    chain, bundle, coc = fix_e()
    root = dimension_root(chain, bundle, coc, n=6, m=1, t_max=2.0)
    assert abs(root.t_star - math.log(2) / math.log(3)) <= 1e-6
    assert root.converged
    assert not root.upper_estimate


def test_dimension_root_m_stable():
    chain, bundle, coc = fix_e()
    roots = [dimension_root(chain, bundle, coc, 5, m, 2.0).t_star for m in (1, 2, 3)]
    assert max(roots) - min(roots) <= 1e-3


def test_dimension_root_zero_entropy():
    chain = one_state_chain()
    bundle = BundleSFT.from_matrices(np.ones((1, 1, 1), dtype=int))
    coc = CocyclePotential(np.full((1, 1, 1, 1), 2.0))
    root = dimension_root(chain, bundle, coc, n=4, m=1, t_max=1.5)
    assert root.t_star == 0.0
    assert root.converged


def test_dimension_root_no_bracket():
    chain, bundle, coc = fix_e()
    with pytest.raises(NoBracket):
        dimension_root(chain, bundle, coc, n=4, m=1, t_max=0.1)


def test_dimension_root_non_monotone_contraction():
    chain = one_state_chain()
    bundle = full_shift_bundle()
    coc = CocyclePotential(np.full((1, 2, 1, 1), 0.5))  # contracting: pressure rises in t
    with pytest.raises(NonMonotone):
        dimension_root(chain, bundle, coc, n=4, m=1, t_max=2.0)


def test_dimension_root_upper_estimate_flag():
    chain = one_state_chain()
    bundle = full_shift_bundle()
    B = np.broadcast_to(np.diag([math.e, math.e ** 2]), (1, 2, 2, 2)).copy()
    coc = CocyclePotential(B)
    root = dimension_root(chain, bundle, coc, n=4, m=1, t_max=3.0)
    assert root.upper_estimate


def test_lyapunov_spread_scalar_zero():
    chain, bundle, coc = fix_e()
    top, bottom, spread = lyapunov_spread(chain, bundle, coc, uniform_measure(), 4)
    assert top == pytest.approx(math.log(3))
    assert bottom == pytest.approx(math.log(3))
    assert spread == pytest.approx(0.0, abs=1e-12)


def test_lyapunov_spread_conformal_rotation_zero():
    chain = one_state_chain()
    bundle = full_shift_bundle()
    theta = 0.9
    R = 1.7 * np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    coc = CocyclePotential(np.broadcast_to(R, (1, 2, 2, 2)).copy())
    _, _, spread = lyapunov_spread(chain, bundle, coc, uniform_measure(), 4)
    assert abs(spread) <= 1e-10


def test_lyapunov_spread_diagonal_gap():
    chain = one_state_chain()
    bundle = full_shift_bundle()
    B = np.broadcast_to(np.diag([math.e, math.e ** 2]), (1, 2, 2, 2)).copy()
    coc = CocyclePotential(B)
    _, _, spread = lyapunov_spread(chain, bundle, coc, uniform_measure(), 5)
    assert spread == pytest.approx(1.0, abs=1e-10)


def test_fix_b_alias_shares_structure():
    chain, bundle, _ = fix_b()
    assert chain.num_states == 2 and bundle.num_symbols == 3
