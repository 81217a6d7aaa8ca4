"""
Closed-form sum-DoF results for interference channels with hybrid
beamforming, and the stream-count arithmetic behind the achievable
schemes.

All DoF values are exact: integers or :class:`fractions.Fraction`.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import fourier_motzkin
from .errors import InvalidArgumentError

__all__ = ['dof_ptp', 'dof_mac', 'dof_bc', 'dof_two_user', 'alloc_two_user',
           'TwoUserAllocation', 'two_user_constraints', 'fm_two_user_dof',
           'antenna_ratio', 'dof_k_user_bounds', 'monotone_lower_bound',
           'ExtensionPlan',
           'extension_plan', 'extension_sum_dof', 'extension_dof_limit',
           'hybrid_gain_ratio', 'interference_free_dof', 'sum_dof',
           'INFINITE_GAIN']

# Sentinel for a zero full-digital DoF under a nonzero hybrid DoF.
INFINITE_GAIN = math.inf


def _check_order(m, m_ant, n, n_ant):
    if min(m, m_ant, n, n_ant) < 1:
        raise InvalidArgumentError("antenna and RF-chain counts must be >= 1")
    if m > m_ant:
        raise InvalidArgumentError(f"M={m} exceeds M'={m_ant}")
    if n > n_ant:
        raise InvalidArgumentError(f"N={n} exceeds N'={n_ant}")


def dof_ptp(m, m_ant, n, n_ant):
    """DoF of a point-to-point link; extra antennas do not help."""
    _check_order(m, m_ant, n, n_ant)
    return min(m, n)


def dof_mac(ms, n):
    if not ms:
        raise InvalidArgumentError("need at least one transmitter")
    return min(sum(ms), n)


def dof_bc(m, ns):
    if not ns:
        raise InvalidArgumentError("need at least one receiver")
    return min(m, sum(ns))


def _two_users(cfg):
    if cfg.k != 2:
        raise InvalidArgumentError(f"two-user formula needs K=2, got K={cfg.k}")
    return cfg.users


def dof_two_user(cfg):
    """Sum DoF of the two-user channel (exact characterization)."""
    u1, u2 = _two_users(cfg)
    return min(u1.m_rf + u2.m_rf, u1.n_rf + u2.n_rf,
               u1.m_rf + u2.n_rf, u2.m_rf + u1.n_rf,
               max(u1.m_ant, u2.n_ant), max(u2.m_ant, u1.n_ant))


@dataclass(frozen=True)
class TwoUserAllocation:
    """
    Stream split of the two-user zero-forcing scheme.

    ``d11``/``d22`` streams are sent from the kernel of the cross channel
    and never reach the other receiver; ``d10``/``d20`` use generic
    directions and must be zero-forced at the other receiver.
    """
    d1: int
    d11: int
    d10: int
    d2: int
    d22: int
    d20: int

    @property
    def streams(self):
        return (self.d1, self.d2)

    @property
    def total(self):
        return self.d1 + self.d2

    def as_tuple(self):
        return (self.d1, self.d11, self.d10, self.d2, self.d22, self.d20)

    def violations(self, cfg):
        """Names of the feasibility conditions this split breaks."""
        u1, u2 = _two_users(cfg)
        checks = {
            'nonnegative': min(self.as_tuple()) >= 0,
            'd1 = d11 + d10 <= min(M1, N1)': (
                self.d1 == self.d11 + self.d10
                and self.d1 <= min(u1.m_rf, u1.n_rf)),
            'd2 = d22 + d20 <= min(M2, N2)': (
                self.d2 == self.d22 + self.d20
                and self.d2 <= min(u2.m_rf, u2.n_rf)),
            "d11 <= max(0, M1' - N2')": (
                self.d11 <= max(0, u1.m_ant - u2.n_ant)),
            "d22 <= max(0, M2' - N1')": (
                self.d22 <= max(0, u2.m_ant - u1.n_ant)),
            "d1 + d20 <= N1'": self.d1 + self.d20 <= u1.n_ant,
            "d2 + d10 <= N2'": self.d2 + self.d10 <= u2.n_ant,
        }
        return [name for name, ok in checks.items() if not ok]

    def is_feasible(self, cfg):
        return not self.violations(cfg)


def alloc_two_user(cfg):
    """
    Sum-optimal stream split for the two-user zero-forcing scheme.

    For fixed ``(d1, d2)`` sending as many streams as possible through the
    cross-channel kernel only loosens the receive-side constraints, so
    ``d_ii = min(d_i, max(0, M_i' - N_j'))`` is optimal and the search
    reduces to the ``(d1, d2)`` grid. Ties are broken by the larger number
    of kernel streams, then by the larger ``d1``.
    """
    u1, u2 = _two_users(cfg)
    room1 = max(0, u1.m_ant - u2.n_ant)
    room2 = max(0, u2.m_ant - u1.n_ant)
    best, best_key = TwoUserAllocation(0, 0, 0, 0, 0, 0), (0, 0, 0)
    for d1 in range(min(u1.m_rf, u1.n_rf) + 1):
        d11 = min(d1, room1)
        for d2 in range(min(u2.m_rf, u2.n_rf) + 1):
            d22 = min(d2, room2)
            a = TwoUserAllocation(d1, d11, d1 - d11, d2, d22, d2 - d22)
            if d1 + a.d20 > u1.n_ant or d2 + a.d10 > u2.n_ant:
                continue
            key = (d1 + d2, d11 + d22, d1)
            if key > best_key:
                best, best_key = a, key
    return best


def two_user_constraints(cfg):
    """The feasibility conditions as ``(coeffs, bound)`` rows ``a.x <= b``."""
    u1, u2 = _two_users(cfg)
    rows = []
    for v in ('d11', 'd10', 'd22', 'd20'):
        rows.append(({v: -1}, 0))
    rows += [
        ({'d11': 1, 'd10': 1}, min(u1.m_rf, u1.n_rf)),
        ({'d22': 1, 'd20': 1}, min(u2.m_rf, u2.n_rf)),
        ({'d11': 1}, max(0, u1.m_ant - u2.n_ant)),
        ({'d22': 1}, max(0, u2.m_ant - u1.n_ant)),
        ({'d11': 1, 'd10': 1, 'd20': 1}, u1.n_ant),
        ({'d22': 1, 'd20': 1, 'd10': 1}, u2.n_ant),
    ]
    return rows


def fm_two_user_dof(cfg):
    """Maximum of ``d1 + d2`` by Fourier-Motzkin projection of the
    feasibility polyhedron (``d1``, ``d2`` substituted by their splits)."""
    objective = {'d11': 1, 'd10': 1, 'd22': 1, 'd20': 1}
    return fourier_motzkin.maximize(two_user_constraints(cfg), objective)


def antenna_ratio(m_ant, n_ant):
    """``R = floor(max(M', N') / min(M', N'))``."""
    return max(m_ant, n_ant) // min(m_ant, n_ant)


def dof_k_user_bounds(k, m, m_ant, n, n_ant):
    """
    Achievable (lower) and converse (upper) sum DoF of the symmetric
    ``K``-user channel, as exact fractions.

    >>> dof_k_user_bounds(3, 2, 4, 2, 2)
    (Fraction(4, 1), Fraction(4, 1))
    """
    _check_order(m, m_ant, n, n_ant)
    if k < 1:
        raise InvalidArgumentError("K must be >= 1")
    r = antenna_ratio(m_ant, n_ant)
    if k <= r:
        full = Fraction(k * min(m, n))
        return full, full
    per_user_lo = min(Fraction(m), Fraction(n),
                      Fraction(r, r + 1) * min(m_ant, n_ant))
    per_user_hi = min(Fraction(m), Fraction(n),
                      Fraction(max(m_ant, n_ant), r + 1))
    return k * per_user_lo, k * per_user_hi


def monotone_lower_bound(k, m, m_ant, n, n_ant):
    """
    Best achievable bound over antenna subsets: the maximum of the
    ``K``-user lower bound over ``M <= M'' <= M'`` and ``N <= N'' <= N'``.

    The plain lower bound can drop when an antenna is added, because the
    ratio ``R`` may fall (``K=2, M=N=M'=2``: ``N'=4`` gives 4 but ``M'=3,
    N'=4`` gives 3). Leaving antennas unused is always allowed, so this
    envelope is achievable and non-decreasing in ``M'`` and ``N'``.
    """
    _check_order(m, m_ant, n, n_ant)
    return max(dof_k_user_bounds(k, m, a, n, b)[0]
               for a in range(m, m_ant + 1) for b in range(n, n_ant + 1))


@dataclass(frozen=True)
class ExtensionPlan:
    """
    Stream counts of the symbol-extension alignment scheme (``K > R``),
    computed in the orientation ``M' <= N'``.
    """
    k: int
    m: int
    m_ant: int
    n: int
    n_ant: int
    ext_n: int
    r: int
    p: int
    t: int
    k1: int
    ds: tuple
    c: tuple
    d: tuple

    @property
    def sum_dof(self):
        return Fraction(sum(self.d), self.t)

    def conservation_holds(self):
        """Per-user column counts add up to the regrouped SIMO streams."""
        r, n, p = self.r, self.ext_n, self.p
        expected = ((r + 1) * r * (n + 1) ** p
                    + (self.k * self.m_ant - r - 1) * r * n ** p)
        return sum(self.c) == expected == sum(self.ds)


def extension_plan(k, m, m_ant, n, n_ant, ext_n, p=None):
    """
    Stream arithmetic of the ``T = (R+1)(n+1)^p`` symbol-extension scheme.

    The transmitter side is taken as the one with fewer antennas (the
    scheme is reciprocal), so ``(M, M')`` and ``(N, N')`` are swapped when
    ``M' > N'``. ``p`` defaults to ``M'KR(M'K - R - 1)``; pass a small value
    to exercise the arithmetic without astronomically large ``T``.

    The middle column count uses ``(K1+1)M' - (R+1)`` small-share SIMO
    users, which is the count that makes the groups partition the
    ``KM'`` SIMO users.
    """
    _check_order(m, m_ant, n, n_ant)
    if ext_n < 1:
        raise InvalidArgumentError("extension parameter n must be >= 1")
    if m_ant > n_ant:
        m, m_ant, n, n_ant = n, n_ant, m, m_ant
    r = antenna_ratio(m_ant, n_ant)
    if k <= r:
        raise InvalidArgumentError(
            f"K={k} <= R={r}: zero forcing needs no symbol extension")
    if p is None:
        p = m_ant * k * r * (m_ant * k - r - 1)
    if p < 0:
        raise InvalidArgumentError("p must be >= 0")
    big = r * (ext_n + 1) ** p
    small = r * ext_n ** p
    t = (r + 1) * (ext_n + 1) ** p
    k1 = (r + 1) // m_ant
    simo = k * m_ant
    ds = tuple(big if s < r + 1 else small for s in range(simo))
    c = []
    for i in range(1, k + 1):
        if i <= k1:
            c.append(m_ant * big)
        elif i == k1 + 1:
            c.append((r + 1 - k1 * m_ant) * big
                     + ((k1 + 1) * m_ant - (r + 1)) * small)
        else:
            c.append(m_ant * small)
    d = tuple(min(m * t, n * t, ci) for ci in c)
    return ExtensionPlan(k, m, m_ant, n, n_ant, ext_n, r, p, t, k1, ds,
                         tuple(c), d)


def extension_sum_dof(plan):
    """Per-slot sum DoF ``(1/T) sum(d_i)`` of a plan."""
    return plan.sum_dof


def extension_dof_limit(k, m, m_ant, n, n_ant):
    """Limit of the extension scheme's per-slot sum DoF as ``n`` grows."""
    _check_order(m, m_ant, n, n_ant)
    r = antenna_ratio(m_ant, n_ant)
    return k * min(Fraction(r * min(m_ant, n_ant), r + 1),
                   Fraction(m), Fraction(n))


def interference_free_dof(cfg):
    return sum(min(u.m_rf, u.n_rf) for u in cfg.users)


def sum_dof(cfg):
    """
    Best known achievable sum DoF: exact for ``K <= 2``, the achievable
    bound for symmetric ``K >= 3``.
    """
    if cfg.k == 1:
        u = cfg.users[0]
        return Fraction(dof_ptp(u.m_rf, u.m_ant, u.n_rf, u.n_ant))
    if cfg.k == 2:
        return Fraction(dof_two_user(cfg))
    if not cfg.is_symmetric():
        raise InvalidArgumentError(
            "K >= 3 results cover symmetric configurations only")
    u = cfg.users[0]
    return dof_k_user_bounds(cfg.k, u.m_rf, u.m_ant, u.n_rf, u.n_ant)[0]


def hybrid_gain_ratio(cfg):
    """
    Ratio of the hybrid sum DoF to that of the full-digital network with
    the same RF chains. ``K >= 3`` compares achievable bounds.
    """
    hybrid = sum_dof(cfg)
    full = sum_dof(cfg.full_digital())
    if full == 0:
        return Fraction(0) if hybrid == 0 else INFINITE_GAIN
    return Fraction(hybrid) / full
