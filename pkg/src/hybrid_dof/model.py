"""
Network configurations and channel realizations.

A receiver ``j`` sees transmitter ``i`` through ``h[j][i]``, an
``n_ant_j x m_ant_i`` matrix, following the usual ``H_ji`` indexing.
"""

from dataclasses import dataclass, field

import numpy as np

from .cxmat import gaussian_matrix
from .errors import InvalidArgumentError

__all__ = ['UserProfile', 'NetworkConfig', 'ChannelRealization',
           'draw_channels', 'reverse_channels', 'extend_block_diagonal',
           'extend_realization']


@dataclass(frozen=True)
class UserProfile:
    """RF-chain and antenna counts of one transmitter/receiver pair."""
    m_rf: int
    m_ant: int
    n_rf: int
    n_ant: int

    def __post_init__(self):
        for name in ('m_rf', 'm_ant', 'n_rf', 'n_ant'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidArgumentError(
                    f"{name} must be a positive integer, got {value!r}")
        if self.m_rf > self.m_ant:
            raise InvalidArgumentError(
                f"transmit RF chains exceed antennas: M={self.m_rf} > "
                f"M'={self.m_ant}")
        if self.n_rf > self.n_ant:
            raise InvalidArgumentError(
                f"receive RF chains exceed antennas: N={self.n_rf} > "
                f"N'={self.n_ant}")

    def full_digital(self):
        """Same RF chains with one antenna per chain."""
        return UserProfile(self.m_rf, self.m_rf, self.n_rf, self.n_rf)

    def reversed(self):
        """Profile of the same pair in the reverse (reciprocal) network."""
        return UserProfile(self.n_rf, self.n_ant, self.m_rf, self.m_ant)


@dataclass(frozen=True)
class NetworkConfig:
    users: tuple

    def __post_init__(self):
        object.__setattr__(self, 'users', tuple(self.users))
        if len(self.users) < 1:
            raise InvalidArgumentError("a network needs at least one user")

    @classmethod
    def symmetric(cls, k, m_rf, m_ant, n_rf, n_ant):
        return cls((UserProfile(m_rf, m_ant, n_rf, n_ant),) * k)

    @property
    def k(self):
        return len(self.users)

    def is_symmetric(self):
        return all(u == self.users[0] for u in self.users)

    def full_digital(self):
        return NetworkConfig(tuple(u.full_digital() for u in self.users))

    def reversed(self):
        return NetworkConfig(tuple(u.reversed() for u in self.users))


@dataclass
class ChannelRealization:
    """All ``K x K`` channel matrices of one time slot."""
    slot: int
    h: list = field(repr=False)

    @property
    def k(self):
        return len(self.h)

    def check_shapes(self, config):
        if self.k != config.k:
            raise InvalidArgumentError("realization and config disagree on K")
        for j, rx in enumerate(config.users):
            for i, tx in enumerate(config.users):
                if self.h[j][i].shape != (rx.n_ant, tx.m_ant):
                    raise InvalidArgumentError(
                        f"h[{j}][{i}] has shape {self.h[j][i].shape}, "
                        f"expected {(rx.n_ant, tx.m_ant)}")

    def __eq__(self, other):
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return (self.slot == other.slot and self.k == other.k and all(
            np.array_equal(a, b)
            for ra, rb in zip(self.h, other.h) for a, b in zip(ra, rb)))


def draw_channels(config, slots, rng, constant=False):
    """
    Draw ``slots`` realizations with i.i.d. CN(0, 1) entries.

    Draw order: slot, then receiver ``j``, then transmitter ``i``, each
    matrix row-major. With ``constant=True`` a single draw is repeated in
    every slot.
    """
    if slots < 1:
        raise InvalidArgumentError("slots must be >= 1")
    out = []
    for t in range(slots):
        if constant and out:
            h = [[m.copy() for m in row] for row in out[0].h]
        else:
            h = [[gaussian_matrix(rx.n_ant, tx.m_ant, rng)
                  for tx in config.users] for rx in config.users]
        out.append(ChannelRealization(t, h))
    return out


def reverse_channels(r):
    """Reciprocal network: ``h'[j][i] = h[i][j]^H``."""
    k = r.k
    h = [[r.h[i][j].conj().T for i in range(k)] for j in range(k)]
    return ChannelRealization(r.slot, h)


def extend_block_diagonal(rs, i, j):
    """
    Block-diagonal channel from transmitter ``i`` to receiver ``j`` over
    the slots of ``rs`` (in order).
    """
    if not rs:
        raise InvalidArgumentError("need at least one slot")
    shape = rs[0].h[j][i].shape
    for r in rs[1:]:
        if r.h[j][i].shape != shape:
            raise InvalidArgumentError(
                f"inconsistent shapes across slots for h[{j}][{i}]")
    rows, cols = shape
    t = len(rs)
    out = np.zeros((t * rows, t * cols), dtype=complex)
    for s, r in enumerate(rs):
        out[s * rows:(s + 1) * rows, s * cols:(s + 1) * cols] = r.h[j][i]
    return out


def extend_realization(rs):
    """Symbol-extended realization whose blocks are block-diagonal."""
    k = rs[0].k
    h = [[extend_block_diagonal(rs, i, j) for i in range(k)]
         for j in range(k)]
    return ChannelRealization(rs[0].slot, h)
