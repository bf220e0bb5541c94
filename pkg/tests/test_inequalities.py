import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellcc import inequalities as iq
from bellcc import qsim
from bellcc.errors import CapacityError


def brute_lhv(values, n):
    """Plain-loop maximum over every assignment a_i(x_i)."""
    best = None
    for flat in itertools.product((1, -1), repeat=2 * n):
        a = np.reshape(flat, (n, 2))
        total = 0
        for idx, x in enumerate(itertools.product((0, 1), repeat=n)):
            total += values[idx] * np.prod([a[i][x[i]] for i in range(n)])
        best = total if best is None else max(best, total)
    return best


def brute_wwzb(table, n):
    out = []
    for x in itertools.product((0, 1), repeat=n):
        out.append(sum(S * np.prod([s[i] ** x[i] for i in range(n)])
                       for S, s in zip(table, itertools.product((-1, 1), repeat=n))))
    return out


def test_wwzb_single_party():
    g = iq.wwzb_g(iq.SignFunction.from_function(1, lambda s: s[0]))
    assert g.values.tolist() == [0, 2]


def test_wwzb_odd_mermin_n3():
    sign = iq.SignFunction.from_function(3, lambda s: np.sqrt(2) * np.cos(sum(s) * np.pi / 4))
    g = iq.wwzb_g(sign)
    assert g.values.tolist() == [4, 0, 0, -4, 0, -4, -4, 0]


def test_wwzb_ardehali_n2():
    assert iq.wwzb_g(iq.ardehali_sign(2)).values.tolist() == [2, -2, -2, -2]


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 3), data=st.data())
def test_wwzb_matches_plain_sum(n, data):
    mask = data.draw(st.integers(0, 2 ** (2**n) - 1))
    sign = iq.SignFunction.from_mask(n, mask)
    g = iq.wwzb_g(sign)
    assert g.values.tolist() == brute_wwzb(sign.table.tolist(), n)
    assert np.all(np.abs(g.values) <= 2**n)
    assert g.integral_values is not None


def test_wwzb_large_n_path_agrees():
    r = np.random.default_rng(3)
    table = r.choice([-1, 1], size=2**7)
    g = iq.wwzb_g(iq.SignFunction(7, table))
    kron = iq._power_kron(7) @ table
    assert np.array_equal(g.values, kron)


def test_mermin_supports_and_values():
    g3 = iq.mermin_g(3)
    even = qsim.all_setting_bits(3).sum(axis=1) % 2 == 0
    assert np.all((g3.values != 0) == even)
    g4 = iq.mermin_g(4)
    even4 = qsim.all_setting_bits(4).sum(axis=1) % 2 == 0
    assert np.all(np.abs(g4.values[even4]) == 4)
    assert np.all(g4.values[~even4] == 0)


def test_ardehali_total_weight_n4():
    x_sum = qsim.all_setting_bits(4).sum(axis=1)
    direct = np.sum(np.abs(np.sqrt(32) * np.cos(np.pi / 2 * x_sum + np.pi / 4)))
    g = iq.ardehali_g(4)
    assert abs(g.total_weight - direct) < 1e-9
    assert g.total_weight == 64


def test_ardehali_needs_even_n():
    with pytest.raises(ValueError):
        iq.ardehali_g(3)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_closed_forms_match_generators_exactly(n):
    assert np.array_equal(iq.mermin_g(n).values, iq.wwzb_transform(iq.mermin_coefficients(n)).values)
    if n % 2 == 0:
        assert np.array_equal(iq.ardehali_g(n).values, iq.wwzb_g(iq.ardehali_sign(n)).values)


def test_lhv_examples():
    assert iq.lhv_bound(iq.mermin_g(3))[0] == 8
    assert iq.lhv_bound(iq.ardehali_g(2))[0] == 4
    vals = np.zeros(8)
    vals[5] = -5
    assert iq.lhv_bound(iq.GTable(3, vals))[0] == 5


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), data=st.data())
def test_lhv_matches_brute_force(n, data):
    vals = data.draw(st.lists(st.integers(-5, 5), min_size=2**n, max_size=2**n))
    if not any(vals):
        vals[0] = 1
    g = iq.GTable(n, vals)
    bound, strategy = iq.lhv_bound(g)
    assert bound == brute_lhv(vals, n)
    assert int(np.dot(g.integral_values, strategy.correlations())) == bound


def test_lhv_float_weights(rng):
    vals = rng.standard_normal(8)
    bound, strategy = iq.lhv_bound(iq.GTable(3, vals))
    assert abs(bound - brute_lhv(vals, 3)) < 1e-9
    assert abs(iq.bell_lhs(iq.GTable(3, vals), strategy.correlations()) - bound) < 1e-12


def test_lhv_tie_break_lowest_index():
    g = iq.GTable(1, [1.0, 0.0])
    _, s = iq.lhv_bound(g)
    assert s.index == 0


def test_lhv_capacity():
    with pytest.raises(CapacityError, match="--lhv-cap"):
        iq.lhv_bound(iq.mermin_g(9))
    assert iq.lhv_bound(iq.mermin_g(3), cap=3)[0] == 8


@pytest.mark.parametrize("n", [2, 3])
def test_every_wwzb_member_has_bound_2n(n):
    for sign, g, _ in iq.enumerate_wwzb(n):
        assert iq.lhv_bound(g)[0] == 2**n


def test_lhv_symmetries(rng):
    for _ in range(10):
        g = iq.GTable(3, rng.integers(-4, 5, 8) + np.eye(8)[0])
        b = iq.lhv_bound(g)[0]
        assert iq.lhv_bound(-g)[0] == b
        for party in range(3):
            assert iq.lhv_bound(g.relabel(party))[0] == b


def test_mixed_strategies_respect_bound(rng):
    g = iq.mermin_g(3)
    bound, _ = iq.lhv_bound(g)
    for _ in range(50):
        k = rng.integers(1, 6)
        members = [iq.DeterministicStrategy.from_index(int(i), 3) for i in rng.integers(0, 64, k)]
        ens = iq.StrategyEnsemble(tuple(members), rng.random(k))
        assert iq.bell_lhs(g, ens.correlations()) <= bound + 1e-12


def test_strategy_index_roundtrip():
    for idx in range(64):
        assert iq.DeterministicStrategy.from_index(idx, 3).index == idx


def test_bell_lhs_examples():
    g = iq.mermin_g(3)
    assert iq.bell_lhs(g, np.zeros(8)) == 0
    E = qsim.correlation_tensor(qsim.ghz(3), qsim.mermin_settings(3))
    assert abs(iq.bell_lhs(g, E) - 16) < 1e-12


def test_violated_examples():
    ineq = iq.BellInequality.from_g(iq.mermin_g(3))
    state, settings = qsim.ghz(3), qsim.mermin_settings(3)
    flag, margin = iq.violated(ineq, qsim.correlation_tensor(state, settings, 1.0))
    assert flag and abs(margin - 8) < 1e-12
    flag, margin = iq.violated(ineq, qsim.correlation_tensor(state, settings, 0.5))
    assert not flag and abs(margin) < 1e-12
    for idx in range(64):
        s = iq.DeterministicStrategy.from_index(idx, 3)
        assert not iq.violated(ineq, s.correlations())[0]


def test_optimize_mermin3():
    res = iq.optimize_settings(qsim.ghz(3), iq.mermin_g(3))
    assert abs(res.value - 16) < 1e-6
    assert res.converged


def test_optimize_ardehali2_against_angle_grid():
    g = iq.ardehali_g(2)
    state = qsim.ghz(2)
    # oracle: dense grid over the four equatorial angles, E = cos(a_x + b_y)
    grid = np.linspace(0, 2 * np.pi, 49)[:-1]
    a0, a1, b0, b1 = np.meshgrid(grid, grid, grid, grid, indexing="ij", sparse=True)
    val = (g.values[0] * np.cos(a0 + b0) + g.values[1] * np.cos(a0 + b1)
           + g.values[2] * np.cos(a1 + b0) + g.values[3] * np.cos(a1 + b1))
    grid_max = float(val.max())
    res = iq.optimize_settings(state, g)
    assert grid_max <= res.value + 1e-9
    assert abs(grid_max - 4 * np.sqrt(2)) < 1e-2
    assert abs(res.value - 4 * np.sqrt(2)) < 1e-6


def test_optimize_product_state_stays_classical():
    res = iq.optimize_settings(qsim.basis_state(3), iq.mermin_g(3), restarts=8)
    assert res.value <= 8 + 1e-9


def test_factorable_members_not_violated_by_ghz():
    for n in (2, 3):
        for sign, g, factorable in iq.enumerate_wwzb(n):
            if factorable:
                res = iq.optimize_settings(qsim.ghz(n), g, restarts=4)
                assert res.value <= 2**n + 1e-6


def test_enumerate_counts_and_factorability_oracle():
    members = list(iq.enumerate_wwzb(2))
    assert len(members) == 16
    assert sum(f for *_, f in members) == 8
    for n in (2, 3):
        for sign, g, factorable in iq.enumerate_wwzb(n):
            # a product of one-party signs is a single character, so g has one nonzero entry
            assert factorable == (np.count_nonzero(g.values) == 1)
    const = iq.SignFunction(2, np.ones(4, dtype=int))
    assert iq.is_factorable(const)


def test_enumerate_cap():
    with pytest.raises(CapacityError):
        next(iq.enumerate_wwzb(5))


def test_sign_function_mask_roundtrip():
    for mask in range(256):
        assert iq.SignFunction.from_mask(3, mask).mask == mask
    with pytest.raises(ValueError):
        iq.SignFunction(2, [1, 0, 1, 1])


def test_gtable_validation():
    with pytest.raises(ValueError):
        iq.GTable(2, [0, 0, 0, 0])
    g = iq.mermin_g(3)
    assert g.total_weight == 16
    assert g.sign((0, 1, 1)) == -1
    with pytest.raises(ValueError):
        g.sign((0, 0, 1))


@pytest.mark.parametrize("n", [5, 6])
def test_optimize_reaches_certainty_for_larger_mermin(n):
    g = iq.mermin_g(n)
    res = iq.optimize_settings(qsim.ghz(n), g, restarts=8)
    assert abs(res.value - g.total_weight) < 1e-6
