"""
Achievable rates, Monte-Carlo SNR sweeps and slope-based DoF estimates.

Rates are evaluated analytically per channel draw: with Gaussian inputs of
power ``P / d_j`` per stream and effective noise covariance
``A_i = G_i^H G_i`` (``G_i`` the combined receive filter), user ``i`` gets

    log2 |A_i + sum_j (P/d_j) E_ij E_ij^H| - log2 |A_i + sum_{j!=i} ...|

where ``E_ij`` is the fully beamformed channel from transmitter ``j``.
Noise power is one, so ``P = 10 ** (snr_db / 10)``.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import dof_calc
from .beamform import (_stack, design_k_user_zf, design_two_user_zf,
                       dia_batch, effective_channel, finish_dia,
                       random_orthonormal)
from .cxmat import Rng, logdet_hpd, mix64
from .dof_calc import TwoUserAllocation
from .errors import (InvalidArgumentError, InvalidDesignError,
                     NumericalFailure, SweepDegradedError)
from .model import draw_channels, extend_realization

__all__ = ['RatePoint', 'RateTable', 'Scheme', 'DiaOptions',
           'sum_rate_instant', 'interference_free_rate', 'mc_sweep',
           'estimate_dof', 'resolve_scheme', 'ResolvedScheme',
           'MAX_FAILURE_FRACTION']

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.2
_LN2 = math.log(2.0)


def snr_to_power(snr_db):
    return 10.0 ** (snr_db / 10.0)


@dataclass
class RatePoint:
    snr_db: float
    per_user_bits: list
    sum_bits: float
    trials: int
    seed: int
    failures: int = 0


@dataclass
class RateTable:
    points: list
    scenario: dict = field(default_factory=dict)

    def __post_init__(self):
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise InvalidArgumentError("SNR points must be strictly "
                                       "increasing")

    @property
    def failure_fraction(self):
        if not self.points:
            return 0.0
        p = self.points[0]
        return p.failures / p.trials if p.trials else 0.0


def _noise_covariance(g):
    return g.conj().T @ g


def sum_rate_instant(design, r, power):
    """
    Per-user achievable rates (bits per channel use of ``r``) for one draw.

    ``r`` must have the dimensions the design was built for (for symbol
    extended designs, pass the extended realization; the result is per
    extended use, not per slot).

    Raises
    ------
    InvalidDesignError
        If a combined receive filter is not injective.
    """
    if power < 0:
        raise InvalidArgumentError("power must be non-negative")
    k = design.k
    rates = np.zeros(k)
    for i in range(k):
        d_i = design.streams[i]
        if d_i == 0:
            continue
        g = design.combiner(i)
        a = _noise_covariance(g)
        interference = np.zeros_like(a)
        desired = None
        for j in range(k):
            if design.streams[j] == 0:
                continue
            e = effective_channel(design, r, i, j)
            term = (power / design.streams[j]) * (e @ e.conj().T)
            if j == i:
                desired = term
            else:
                interference = interference + term
        try:
            lower = logdet_hpd(a + interference)
            upper = logdet_hpd(a + interference + desired)
        except InvalidArgumentError as exc:
            raise InvalidDesignError(
                f"receiver {i + 1}: noise covariance is singular") from exc
        rates[i] = max(0.0, (upper - lower) / _LN2)
    return rates


def interference_free_rate(design, power):
    """Closed form ``sum_k log2(1 + (P/d) s_k^2)`` per user for designs
    with orthonormal combiners and no residual interference."""
    out = []
    for d_i, s in zip(design.streams, design.direct_singulars):
        if d_i == 0:
            out.append(0.0)
            continue
        out.append(float(np.sum(np.log2(1.0 + power / d_i * s ** 2))))
    return np.array(out)


@dataclass(frozen=True)
class DiaOptions:
    max_iter: int = 5000
    leak_tol: float = 1e-6


@dataclass(frozen=True)
class Scheme:
    """What to synthesize on each trial.

    ``kind`` is one of ``auto``, ``two_user_zf``, ``k_user_zf``, ``dia`` or
    ``full_digital_baseline``. ``streams`` overrides the per-user stream
    count (over the extension when ``extension_t`` is set).
    """
    kind: str = 'auto'
    streams: tuple = None
    extension_t: int = None
    dia: DiaOptions = DiaOptions()


SCHEME_KINDS = ('auto', 'two_user_zf', 'k_user_zf', 'dia',
                'full_digital_baseline')


@dataclass(frozen=True)
class ResolvedScheme:
    """A concrete scheme for a concrete configuration."""
    kind: str
    config: object
    streams: tuple
    slots: int = 1
    side: str = 'receive'
    alloc: TwoUserAllocation = None
    dia: DiaOptions = DiaOptions()


def _split_two_user(cfg, streams):
    u1, u2 = cfg.users
    room = (max(0, u1.m_ant - u2.n_ant), max(0, u2.m_ant - u1.n_ant))
    d11, d22 = min(streams[0], room[0]), min(streams[1], room[1])
    alloc = TwoUserAllocation(streams[0], d11, streams[0] - d11,
                              streams[1], d22, streams[1] - d22)
    bad = alloc.violations(cfg)
    if bad:
        raise InvalidArgumentError("infeasible stream override: "
                                   + "; ".join(bad))
    return alloc


def resolve_scheme(cfg, scheme):
    """
    Pick the concrete scheme and stream counts.

    ``auto`` uses the two-user zero-forcing split for ``K = 2``, zero
    forcing for symmetric ``K <= R`` and DIA otherwise, with per-user
    streams taken from the achievable sum DoF. A fractional per-user DoF
    ``a/b`` runs DIA over a ``T = b`` slot extension with ``a`` streams.
    """
    kind = scheme.kind
    if kind not in SCHEME_KINDS:
        raise InvalidArgumentError(f"unknown scheme {kind!r}")
    if kind == 'full_digital_baseline':
        return resolve_scheme(cfg.full_digital(), replace(scheme, kind='auto'))
    if kind == 'auto':
        if cfg.k == 2:
            kind = 'two_user_zf'
        elif cfg.k == 1:
            kind = 'k_user_zf'
        else:
            if not cfg.is_symmetric():
                raise InvalidArgumentError(
                    "auto scheme needs a symmetric network for K >= 3")
            u = cfg.users[0]
            r = dof_calc.antenna_ratio(u.m_ant, u.n_ant)
            kind = 'k_user_zf' if cfg.k <= r else 'dia'

    if kind == 'two_user_zf':
        if cfg.k != 2:
            raise InvalidArgumentError("two_user_zf needs K=2")
        if scheme.streams is not None:
            alloc = _split_two_user(cfg, tuple(scheme.streams))
        else:
            alloc = dof_calc.alloc_two_user(cfg)
        return ResolvedScheme('two_user_zf', cfg, alloc.streams, alloc=alloc)

    if not cfg.is_symmetric():
        raise InvalidArgumentError(f"{kind} needs a symmetric network")
    u = cfg.users[0]
    if kind == 'k_user_zf':
        d = (min(u.m_rf, u.n_rf) if scheme.streams is None
             else _uniform(scheme.streams, cfg.k))
        side = 'receive' if u.n_ant >= u.m_ant else 'transmit'
        return ResolvedScheme('k_user_zf', cfg, (d,) * cfg.k, side=side)

    # dia
    if scheme.streams is not None:
        d = _uniform(scheme.streams, cfg.k)
        slots = scheme.extension_t or 1
    else:
        lower, _ = dof_calc.dof_k_user_bounds(cfg.k, u.m_rf, u.m_ant,
                                              u.n_rf, u.n_ant)
        per_user = Fraction(lower) / cfg.k
        if scheme.extension_t:
            slots = scheme.extension_t
            d = math.floor(per_user * slots)
        else:
            slots = per_user.denominator
            d = per_user.numerator
    if d < 1:
        raise InvalidArgumentError("DIA needs at least one stream per user")
    return ResolvedScheme('dia', cfg, (d,) * cfg.k, slots=slots,
                          dia=scheme.dia)


def _uniform(streams, k):
    streams = tuple(streams)
    if len(streams) == 1:
        return streams[0]
    if len(streams) != k or len(set(streams)) != 1:
        raise InvalidArgumentError("symmetric schemes need equal streams")
    return streams[0]


def _trial_rates(resolved, seed, trial, powers):
    """Design and evaluate one zero-forcing trial; ``None`` on failure."""
    rng = Rng(mix64(seed, trial))
    cfg = resolved.config
    r = draw_channels(cfg, 1, rng)[0]
    try:
        if resolved.kind == 'two_user_zf':
            design = design_two_user_zf(r, resolved.alloc, rng=rng,
                                        config=cfg)
        else:
            design = design_k_user_zf(r, resolved.streams[0], resolved.side,
                                      rng=rng, config=cfg)
        return np.array([sum_rate_instant(design, r, p) for p in powers])
    except (NumericalFailure, InvalidDesignError) as exc:
        log.debug("trial %d failed: %s", trial, exc)
        return None


def _dia_rates(resolved, seed, trials, powers):
    cfg = resolved.config
    d = resolved.streams[0]
    slots = resolved.slots
    u0 = cfg.users[0]
    realizations, h, v0 = [], [], []
    for trial in range(trials):
        rng = Rng(mix64(seed, trial))
        rs = draw_channels(cfg, slots, rng)
        r = rs[0] if slots == 1 else extend_realization(rs)
        nt = r.h[0][0].shape[1]
        realizations.append(r)
        h.append(_stack(r))
        v0.append([random_orthonormal(nt, d, rng) for _ in range(cfg.k)])
    u, v, traces = dia_batch(np.array(h), d, np.array(v0),
                             resolved.dia.max_iter, resolved.dia.leak_tol)
    out = []
    rf = (u0.m_rf * slots, u0.n_rf * slots)
    for b, r in enumerate(realizations):
        if not traces[b].converged:
            out.append(None)
            continue
        try:
            design = finish_dia(r, u[b], v[b], traces[b], slots, rf)
            out.append(np.array([sum_rate_instant(design, r, p) / slots
                                 for p in powers]))
        except (NumericalFailure, InvalidDesignError) as exc:
            log.debug("trial %d failed: %s", b, exc)
            out.append(None)
    return out


def _workers():
    try:
        return max(1, int(os.environ.get('HDL_THREADS', '1')))
    except ValueError:
        return 1


def mc_sweep(cfg, scheme, snr_db, trials, seed, workers=None):
    """
    Average per-user rates over ``trials`` independent channel draws.

    Trial ``k`` draws everything from ``Rng(mix64(seed, k))``, so results
    do not depend on evaluation order or on ``workers``. Failed trials
    (degenerate channels, unconverged DIA) are excluded from the averages
    and counted.

    Raises
    ------
    SweepDegradedError
        If more than 20% of the trials fail; the partial table is attached.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    snr_db = [float(s) for s in snr_db]
    powers = [snr_to_power(s) for s in snr_db]
    resolved = scheme if isinstance(scheme, ResolvedScheme) else \
        resolve_scheme(cfg, scheme)
    if resolved.kind == 'dia':
        results = _dia_rates(resolved, seed, trials, powers)
    else:
        workers = _workers() if workers is None else workers
        args = [(resolved, seed, t, powers) for t in range(trials)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_trial_rates_star, args))
        else:
            results = [_trial_rates(*a) for a in args]
    good = [x for x in results if x is not None]
    failures = trials - len(good)
    k = resolved.config.k
    if good:
        mean = np.mean(np.array(good), axis=0)
    else:
        mean = np.full((len(powers), k), np.nan)
    points = [RatePoint(s, [float(x) for x in mean[n]],
                        float(np.sum(mean[n])), trials, seed, failures)
              for n, s in enumerate(snr_db)]
    table = RateTable(points, {
        'scheme': resolved.kind, 'streams': list(resolved.streams),
        'slots': resolved.slots,
        'config': [vars(u) for u in resolved.config.users]})
    if failures > MAX_FAILURE_FRACTION * trials:
        raise SweepDegradedError(
            f"{failures} of {trials} trials failed", table)
    return table


def _trial_rates_star(args):
    return _trial_rates(*args)


def estimate_dof(table, window=(40.0, 60.0)):
    """
    Least-squares slope of the sum rate against ``log2(SNR)`` over the
    points whose SNR lies inside ``window`` (inclusive).
    """
    lo, hi = window
    pts = [p for p in table.points if lo <= p.snr_db <= hi]
    if len(pts) < 2:
        raise InvalidArgumentError("need at least two points in the window")
    x = np.array([p.snr_db / 10.0 * math.log2(10.0) for p in pts])
    y = np.array([p.sum_bits for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
