from fractions import Fraction

import numpy as np
import pytest

from hybrid_dof.dof_calc import (INFINITE_GAIN, TwoUserAllocation,
                                 alloc_two_user, dof_bc, dof_k_user_bounds,
                                 dof_mac, dof_ptp, dof_two_user,
                                 extension_dof_limit, extension_plan,
                                 fm_two_user_dof, hybrid_gain_ratio,
                                 interference_free_dof,
                                 monotone_lower_bound, sum_dof)
from hybrid_dof.errors import InvalidArgumentError
from hybrid_dof.model import NetworkConfig, UserProfile

from oracles import brute_force_two_user, two_user_grid


def sym2(m, m_ant, n, n_ant):
    return NetworkConfig.symmetric(2, m, m_ant, n, n_ant)


def cfg_from_row(row):
    m1, m1a, n1, n1a, m2, m2a, n2, n2a = (int(x) for x in row)
    return NetworkConfig((UserProfile(m1, m1a, n1, n1a),
                          UserProfile(m2, m2a, n2, n2a)))


class TestSingleHop:
    @pytest.mark.parametrize('args, expected', [
        ((2, 4, 2, 2), 2), ((1, 1, 1, 1), 1), ((3, 8, 5, 9), 3)])
    def test_ptp(self, args, expected):
        assert dof_ptp(*args) == expected

    def test_ptp_ordering(self):
        with pytest.raises(InvalidArgumentError, match="M=3 exceeds"):
            dof_ptp(3, 2, 1, 1)

    @pytest.mark.parametrize('ms, n, expected', [
        ([2, 2], 3, 3), ([1, 1, 1], 8, 3), ([4], 2, 2)])
    def test_mac(self, ms, n, expected):
        assert dof_mac(ms, n) == expected

    @pytest.mark.parametrize('m, ns, expected', [
        (3, [2, 2], 3), (8, [1, 1, 1], 3), (2, [4], 2)])
    def test_bc(self, m, ns, expected):
        assert dof_bc(m, ns) == expected

    def test_mac_bc_single_user_is_ptp(self):
        assert dof_mac([4], 2) == dof_bc(4, [2]) == dof_ptp(4, 4, 2, 2)


class TestTwoUser:
    @pytest.mark.parametrize('profile, expected', [
        ((2, 4, 2, 2), 4), ((1, 2, 2, 4), 2), ((2, 2, 2, 2), 2),
        ((2, 3, 2, 3), 3)])
    def test_examples(self, profile, expected):
        assert dof_two_user(sym2(*profile)) == expected

    def test_needs_two_users(self):
        with pytest.raises(InvalidArgumentError):
            dof_two_user(NetworkConfig.symmetric(3, 1, 1, 1, 1))

    def test_allocation_kernel_streams(self):
        a = alloc_two_user(sym2(2, 4, 2, 2))
        assert a.as_tuple() == (2, 2, 0, 2, 2, 0)

    def test_allocation_three_antennas(self):
        a = alloc_two_user(sym2(2, 3, 2, 3))
        assert a.streams == (2, 1)
        assert a.is_feasible(sym2(2, 3, 2, 3))

    def test_violations_named(self):
        cfg = sym2(2, 2, 2, 2)
        bad = TwoUserAllocation(2, 1, 1, 2, 0, 2)
        names = bad.violations(cfg)
        assert "d11 <= max(0, M1' - N2')" in names
        assert "d1 + d20 <= N1'" in names

    def test_full_digital_reduction(self):
        # equal antennas and RF chains: no kernel to exploit
        for m in range(1, 5):
            for n in range(1, 5):
                cfg = sym2(m, m, n, n)
                assert dof_two_user(cfg) == min(2 * m, 2 * n, max(m, n))

    def test_allocation_matches_formula_on_sample(self):
        grid = two_user_grid(rf_max=3, ant_max=4)
        for row in grid[::7]:
            cfg = cfg_from_row(row)
            a = alloc_two_user(cfg)
            assert a.is_feasible(cfg)
            assert a.total == dof_two_user(cfg)

    def test_brute_force_small_grid(self):
        grid = two_user_grid(rf_max=3, ant_max=4)
        best = brute_force_two_user(grid)
        got = np.array([dof_two_user(cfg_from_row(r)) for r in grid])
        np.testing.assert_array_equal(got, best)

    def test_fourier_motzkin_route(self):
        grid = two_user_grid(rf_max=3, ant_max=5)
        for row in grid[::97]:
            cfg = cfg_from_row(row)
            assert fm_two_user_dof(cfg) == dof_two_user(cfg)


class TestKUserBounds:
    @pytest.mark.parametrize('args, expected', [
        ((3, 2, 2, 2, 2), (3, 3)),
        ((3, 2, 4, 2, 4), (6, 6)),
        ((3, 2, 6, 2, 2), (6, 6)),
        ((3, 2, 4, 2, 2), (4, 4))])
    def test_examples(self, args, expected):
        assert dof_k_user_bounds(*args) == tuple(map(Fraction, expected))

    def test_fractional_gap(self):
        lo, hi = dof_k_user_bounds(3, 2, 5, 2, 2)
        # R = 2: lower uses 2/3 of min, upper uses max/3
        assert lo == 3 * Fraction(4, 3)
        assert hi == 3 * Fraction(5, 3)

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            dof_k_user_bounds(0, 1, 1, 1, 1)
        with pytest.raises(InvalidArgumentError):
            dof_k_user_bounds(3, 3, 2, 1, 1)

    def test_sum_dof_dispatch(self):
        assert sum_dof(NetworkConfig.symmetric(1, 2, 4, 3, 3)) == 2
        assert sum_dof(sym2(2, 4, 2, 2)) == 4
        assert sum_dof(NetworkConfig.symmetric(3, 2, 4, 2, 2)) == 4
        asym = NetworkConfig((UserProfile(1, 1, 1, 1),) * 2
                             + (UserProfile(2, 2, 2, 2),))
        with pytest.raises(InvalidArgumentError):
            sum_dof(asym)


class TestMonotoneEnvelope:
    def test_recovers_dropped_value(self):
        assert dof_k_user_bounds(2, 2, 3, 2, 4)[0] == 3
        assert monotone_lower_bound(2, 2, 3, 2, 4) == 4

    def test_monotone_and_below_upper(self):
        for k in (2, 3, 5):
            for ma in range(2, 7):
                for na in range(2, 7):
                    lo = monotone_lower_bound(k, 2, ma, 2, na)
                    assert lo <= dof_k_user_bounds(k, 2, ma, 2, na)[1]
                    assert lo >= dof_k_user_bounds(k, 2, ma, 2, na)[0]
                    if ma < 6:
                        assert monotone_lower_bound(k, 2, ma + 1, 2, na) >= lo
                    if na < 6:
                        assert monotone_lower_bound(k, 2, ma, 2, na + 1) >= lo


class TestExtensionPlan:
    def test_worked_example(self):
        plan = extension_plan(4, 2, 2, 6, 6, ext_n=1, p=1)
        assert plan.r == 3 and plan.k1 == 2 and plan.t == 8
        assert plan.c == (12, 12, 6, 6)
        assert sum(plan.c) == 36
        assert plan.conservation_holds()

    def test_first_groups_take_large_share(self):
        plan = extension_plan(5, 2, 2, 6, 6, ext_n=2, p=2)
        big = plan.m_ant * plan.r * (plan.ext_n + 1) ** plan.p
        assert all(ci == big for ci in plan.c[:plan.k1])

    def test_zf_regime_rejected(self):
        with pytest.raises(InvalidArgumentError, match="K=3 <= R=3"):
            extension_plan(3, 2, 2, 2, 6, ext_n=1, p=1)

    def test_orientation_swap(self):
        a = extension_plan(4, 2, 2, 3, 6, ext_n=1, p=1)
        b = extension_plan(4, 3, 6, 2, 2, ext_n=1, p=1)
        assert a == b

    def test_default_p(self):
        plan = extension_plan(3, 1, 1, 1, 1, ext_n=1)
        # M'KR(M'K - R - 1) with M'=1, K=3, R=1
        assert plan.p == 3

    def test_streams_capped_by_rf(self):
        plan = extension_plan(4, 1, 2, 1, 6, ext_n=1, p=1)
        assert all(d <= plan.t for d in plan.d)

    def test_limit(self):
        assert extension_dof_limit(3, 2, 4, 2, 2) == 4
        assert extension_dof_limit(5, 2, 2, 2, 8) == Fraction(8)


class TestGainRatio:
    def test_kernel_doubles(self):
        assert hybrid_gain_ratio(sym2(2, 4, 2, 2)) == 2

    def test_full_digital_is_one(self):
        for cfg in (sym2(2, 2, 2, 2), NetworkConfig.symmetric(3, 2, 2, 2, 2)):
            assert hybrid_gain_ratio(cfg) == 1

    def test_never_above_two(self):
        grid = two_user_grid(rf_max=3, ant_max=6)
        for row in grid[::13]:
            assert hybrid_gain_ratio(cfg_from_row(row)) <= 2

    def test_sentinel(self):
        assert INFINITE_GAIN == float('inf')


def test_interference_free_cap():
    cfg = NetworkConfig((UserProfile(2, 4, 1, 3), UserProfile(3, 3, 3, 5)))
    assert interference_free_dof(cfg) == 4
    assert dof_two_user(cfg) <= interference_free_dof(cfg)
