import math

import numpy as np
import pytest

from hybrid_dof.beamform import design_k_user_zf, design_two_user_zf
from hybrid_dof.cxmat import Rng, mix64
from hybrid_dof.dof_calc import alloc_two_user
from hybrid_dof.errors import InvalidArgumentError, InvalidDesignError
from hybrid_dof.model import NetworkConfig, draw_channels
from hybrid_dof.rate import (RatePoint, RateTable, Scheme, estimate_dof,
                             interference_free_rate, mc_sweep,
                             resolve_scheme, snr_to_power, sum_rate_instant)

from conftest import crandn
from oracles import interference_free_rate as oracle_rate

TWO_USER = NetworkConfig.symmetric(2, 2, 4, 2, 2)
FULL_DIGITAL = NetworkConfig.symmetric(2, 2, 2, 2, 2)


def zf_design(cfg=TWO_USER, seed=1):
    rng = Rng(seed)
    r = draw_channels(cfg, 1, rng)[0]
    return design_two_user_zf(r, alloc_two_user(cfg), rng=rng,
                              config=cfg), r


def table_from(snr_db, sums):
    return RateTable([RatePoint(s, [v], v, 1, 0)
                      for s, v in zip(snr_db, sums)])


class TestInstantRate:
    def test_zero_power(self):
        d, r = zf_design()
        np.testing.assert_array_equal(sum_rate_instant(d, r, 0.0), 0.0)

    def test_negative_power(self):
        d, r = zf_design()
        with pytest.raises(InvalidArgumentError):
            sum_rate_instant(d, r, -1.0)

    @pytest.mark.parametrize('snr_db', [0, 20, 40, 60])
    def test_closed_form(self, snr_db):
        d, r = zf_design(seed=3)
        p = snr_to_power(snr_db)
        got = sum_rate_instant(d, r, p)
        for i in range(2):
            want = oracle_rate(d.direct_singulars[i], p, d.streams[i])
            assert abs(got[i] - want) <= 1e-6
        np.testing.assert_allclose(got, interference_free_rate(d, p),
                                   atol=1e-6)

    def test_unitary_combiner_invariance(self, np_rng):
        d, r = zf_design(seed=4)
        before = sum_rate_instant(d, r, 100.0)
        q, _ = np.linalg.qr(crandn(np_rng, 2, 2))
        d.digital_rx[0] = d.digital_rx[0] @ q
        np.testing.assert_allclose(sum_rate_instant(d, r, 100.0), before,
                                   atol=1e-10)

    def test_non_orthonormal_combiner(self, np_rng):
        # rates only depend on the receive subspace, so an invertible
        # digital stage leaves them unchanged (general A_i path)
        d, r = zf_design(seed=5)
        before = sum_rate_instant(d, r, 1000.0)
        d.digital_rx[1] = d.digital_rx[1] @ (crandn(np_rng, 2, 2)
                                             + 2 * np.eye(2))
        np.testing.assert_allclose(sum_rate_instant(d, r, 1000.0), before,
                                   atol=1e-8)

    def test_singular_combiner(self):
        d, r = zf_design(seed=6)
        d.digital_rx[0] = np.zeros((2, 2), dtype=complex)
        with pytest.raises(InvalidDesignError):
            sum_rate_instant(d, r, 10.0)

    def test_monotone_in_power(self):
        d, r = zf_design(seed=7)
        rates = [sum_rate_instant(d, r, p).sum()
                 for p in (0.1, 1, 10, 100, 1000)]
        assert all(b > a for a, b in zip(rates, rates[1:]))

    def test_interference_limits_rate(self):
        # receive ZF for K=2, d=1 leaves no interference; random combiners
        # on the same precoders do
        cfg = NetworkConfig.symmetric(2, 1, 1, 1, 2)
        r = draw_channels(cfg, 1, Rng(3))[0]
        d = design_k_user_zf(r, 1, 'receive', rng=Rng(3), config=cfg)
        zf = sum_rate_instant(d, r, 1e6).sum()
        d.digital_rx = [np.eye(1, dtype=complex)] * 2
        d.analog_rx = [np.array([[1], [0]], dtype=complex)] * 2
        assert sum_rate_instant(d, r, 1e6).sum() < zf


class TestEstimateDof:
    def test_synthetic_line(self):
        snr = list(range(40, 65, 5))
        sums = [4 * math.log2(snr_to_power(s)) + 7 for s in snr]
        assert estimate_dof(table_from(snr, sums)) == pytest.approx(4.0,
                                                                    abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(InvalidArgumentError):
            estimate_dof(table_from([40, 45], [1, 2]), window=(50, 60))

    def test_window_approach(self):
        d, _ = zf_design(seed=8)
        snr = list(range(0, 125, 5))
        sums = [float(interference_free_rate(d, snr_to_power(s)).sum())
                for s in snr]
        table = table_from(snr, sums)
        slopes = [estimate_dof(table, w)
                  for w in ((20, 40), (40, 60), (60, 80))]
        gaps = [abs(4 - s) for s in slopes]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.01

    def test_single_user_slope(self):
        cfg = NetworkConfig.symmetric(1, 2, 4, 2, 3)
        table = mc_sweep(cfg, Scheme('k_user_zf', (2,)),
                         list(range(40, 65, 5)), 50, 3)
        assert estimate_dof(table) == pytest.approx(2.0, abs=0.1)


class TestTable:
    def test_snr_order(self):
        with pytest.raises(InvalidArgumentError):
            table_from([10, 5], [1, 2])

    def test_failure_fraction(self):
        t = RateTable([RatePoint(0, [0.0], 0.0, 10, 1, failures=3)])
        assert t.failure_fraction == 0.3


class TestResolve:
    def test_auto_two_user(self):
        r = resolve_scheme(TWO_USER, Scheme())
        assert r.kind == 'two_user_zf' and r.alloc.streams == (2, 2)

    def test_auto_k_user(self):
        rx = resolve_scheme(NetworkConfig.symmetric(3, 2, 2, 2, 8), Scheme())
        assert (rx.kind, rx.side, rx.streams) == ('k_user_zf', 'receive',
                                                  (2, 2, 2))
        tx = resolve_scheme(NetworkConfig.symmetric(3, 2, 6, 2, 2), Scheme())
        assert (tx.kind, tx.side) == ('k_user_zf', 'transmit')

    def test_auto_dia(self):
        r = resolve_scheme(NetworkConfig.symmetric(3, 2, 4, 2, 4), Scheme())
        assert (r.kind, r.streams, r.slots) == ('dia', (2, 2, 2), 1)

    def test_fractional_extension(self):
        # 4/3 streams per user: 4 streams over 3 slots
        r = resolve_scheme(NetworkConfig.symmetric(3, 2, 4, 2, 2), Scheme())
        assert (r.kind, r.streams[0], r.slots) == ('dia', 4, 3)
        forced = resolve_scheme(NetworkConfig.symmetric(3, 2, 4, 2, 2),
                                Scheme('dia', extension_t=2))
        assert (forced.streams[0], forced.slots) == (2, 2)

    def test_baseline(self):
        r = resolve_scheme(TWO_USER, Scheme('full_digital_baseline'))
        assert r.config == FULL_DIGITAL
        assert sum(r.alloc.streams) == 2


class TestSweep:
    SNR = [0, 30, 60]

    def test_deterministic(self):
        a = mc_sweep(TWO_USER, Scheme(), self.SNR, 1, 5)
        b = mc_sweep(TWO_USER, Scheme(), self.SNR, 1, 5)
        assert a == b

    def test_seed_changes_result(self):
        a = mc_sweep(TWO_USER, Scheme(), self.SNR, 2, 5)
        b = mc_sweep(TWO_USER, Scheme(), self.SNR, 2, 6)
        assert a.points[0].sum_bits != b.points[0].sum_bits

    def test_worker_count_invariance(self, monkeypatch):
        serial = mc_sweep(TWO_USER, Scheme(), self.SNR, 6, 9, workers=1)
        monkeypatch.setenv('HDL_THREADS', '3')
        pooled = mc_sweep(TWO_USER, Scheme(), self.SNR, 6, 9)
        assert serial == pooled

    def test_matches_per_draw_oracle(self):
        trials, seed = 20, 11
        table = mc_sweep(TWO_USER, Scheme(), [60], trials, seed)
        p = snr_to_power(60)
        total = 0.0
        for t in range(trials):
            rng = Rng(mix64(seed, t))
            r = draw_channels(TWO_USER, 1, rng)[0]
            d = design_two_user_zf(r, alloc_two_user(TWO_USER), rng=rng,
                                   config=TWO_USER)
            total += sum(oracle_rate(s, p, n) for s, n in
                         zip(d.direct_singulars, d.streams))
        assert abs(table.points[0].sum_bits - total / trials) <= \
            0.01 * total / trials

    def test_hybrid_above_full_digital(self):
        hybrid = mc_sweep(TWO_USER, Scheme(), [40], 30, 2)
        full = mc_sweep(TWO_USER, Scheme('full_digital_baseline'), [40],
                        30, 2)
        assert full.points[0].sum_bits < hybrid.points[0].sum_bits

    def test_zero_trials(self):
        with pytest.raises(InvalidArgumentError):
            mc_sweep(TWO_USER, Scheme(), self.SNR, 0, 1)
