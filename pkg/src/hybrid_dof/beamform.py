"""
Hybrid precoder and combiner synthesis.

Three schemes are provided:

* ``design_two_user_zf``: two-user scheme that splits each precoder into
  columns from the kernel of the cross channel and generic columns, then
  zero-forces the generic ones at the unintended receiver.
* ``design_k_user_zf``: ``K``-user zero forcing, done either at the
  receivers (enough receive antennas) or at the transmitters (enough
  transmit antennas).
* ``design_dia``: distributed interference alignment, i.e. alternating
  leakage minimization over the forward and reciprocal networks.

Every design stores the analog/digital factors of both ends. Combined
receive matrices have orthonormal columns, so the effective noise
covariance is the identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .cxmat import (DEFAULT_REL_TOL, Rng, gaussian_matrix, nullspace,
                    orthonormal_columns, svd)
from .errors import (DegenerateChannelError, InfeasibleSchemeError,
                     InvalidArgumentError)
from .model import extend_realization

__all__ = ['HybridDesign', 'LeakageTrace', 'factor_hybrid',
           'design_two_user_zf', 'design_k_user_zf', 'design_dia',
           'dia_batch', 'leakage', 'effective_channel', 'random_unit_columns',
           'random_orthonormal']


@dataclass
class HybridDesign:
    """Per-user analog and digital precoders/combiners.

    ``analog_tx[i] @ digital_tx[i]`` is the combined precoder of user ``i``
    and ``analog_rx[i] @ digital_rx[i]`` its combined receive filter.
    ``slots`` is the symbol-extension length the design spans.
    """
    analog_tx: list
    digital_tx: list
    analog_rx: list
    digital_rx: list
    streams: list
    direct_singulars: list
    slots: int = 1

    @property
    def k(self):
        return len(self.streams)

    def precoder(self, i):
        return self.analog_tx[i] @ self.digital_tx[i]

    def combiner(self, i):
        return self.analog_rx[i] @ self.digital_rx[i]


@dataclass
class LeakageTrace:
    """Total leakage after every DIA iteration (unit per-stream power)."""
    values: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.values)

    @property
    def final(self):
        return self.values[-1] if self.values else float('nan')


def random_unit_columns(rows, cols, rng):
    """CN(0, 1) columns scaled to unit norm."""
    if cols == 0:
        return np.zeros((rows, 0), dtype=complex)
    a = gaussian_matrix(rows, cols, rng)
    return a / np.linalg.norm(a, axis=0)


def random_orthonormal(rows, cols, rng):
    if cols == 0:
        return np.zeros((rows, 0), dtype=complex)
    return orthonormal_columns(gaussian_matrix(rows, cols, rng))


def factor_hybrid(combined, rf_chains):
    """
    Split a combined beamformer into an analog stage with unit-norm columns
    and a diagonal digital stage holding the column norms.

    The analog stage accepts arbitrary complex gains, so this factorization
    is exact.
    """
    combined = np.asarray(combined, dtype=complex)
    if combined.shape[1] > rf_chains:
        raise InvalidArgumentError(
            f"{combined.shape[1]} streams exceed {rf_chains} RF chains")
    norms = np.linalg.norm(combined, axis=0)
    if np.any(norms == 0):
        raise InvalidArgumentError("combined matrix has a zero column")
    return combined / norms, np.diag(norms).astype(complex)


def effective_channel(design, r, j, i):
    """``U_j^H H_ji W_i``: receiver ``j``'s view of transmitter ``i``."""
    return design.combiner(j).conj().T @ r.h[j][i] @ design.precoder(i)


def leakage(design, r, powers=None):
    """
    Total interference power inside the receive subspaces,
    ``sum_i sum_{j != i} (P_j / d_j) ||U_i^H H_ij W_j||_F^2``.

    ``powers`` defaults to unit power per stream (``P_j = d_j``).
    """
    k = design.k
    if powers is None:
        powers = list(design.streams)
    elif np.isscalar(powers):
        powers = [powers] * k
    total = 0.0
    for i in range(k):
        if design.streams[i] == 0:
            continue
        for j in range(k):
            if j == i or design.streams[j] == 0:
                continue
            e = effective_channel(design, r, i, j)
            total += powers[j] / design.streams[j] * float(
                np.sum(np.abs(e) ** 2))
    return total


def _digital_stage(analog_rx, h, analog_tx, rel_tol):
    """SVD of the baseband direct channel; returns (U, V, singulars)."""
    d = analog_tx.shape[1]
    if d == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return empty, empty, np.zeros(0)
    u, s, v = svd(analog_rx.conj().T @ h @ analog_tx)
    if s[-1] <= rel_tol * s[0]:
        raise DegenerateChannelError(
            f"effective direct channel is rank deficient (sigma_min/"
            f"sigma_max = {s[-1] / s[0]:.3g})")
    return u, v, s


def _receive_filter(h_direct, w, interference, rel_tol):
    """
    Orthonormal ``N' x d`` receive filter that annihilates the columns of
    ``interference`` and captures as much of ``h_direct @ w`` as possible.
    """
    n_ant = h_direct.shape[0]
    d = w.shape[1]
    if d == 0:
        return np.zeros((n_ant, 0), dtype=complex)
    if interference is not None and interference.shape[1] > 0:
        free = nullspace(interference.conj().T, rel_tol)
    else:
        free = np.eye(n_ant, dtype=complex)
    if free.shape[1] < d:
        raise DegenerateChannelError(
            f"only {free.shape[1]} interference-free receive dimensions for "
            f"{d} streams")
    u, s, _ = svd(free.conj().T @ h_direct @ w)
    if s[0] == 0 or s[-1] <= rel_tol * s[0]:
        raise DegenerateChannelError(
            "desired signal collapses in the interference-free subspace")
    return free @ u[:, :d]


def _strongest_kernel_columns(h_direct, kernel, count):
    """``count`` kernel directions with the largest direct-channel gain."""
    if count == 0:
        return np.zeros((kernel.shape[0], 0), dtype=complex)
    _, _, v = svd(h_direct @ kernel)
    return kernel @ v[:, :count]


def _assemble(r, analog_tx, analog_rx, rel_tol, slots=1):
    k = len(analog_tx)
    digital_tx, digital_rx, singulars = [], [], []
    for i in range(k):
        u, v, s = _digital_stage(analog_rx[i], r.h[i][i], analog_tx[i],
                                 rel_tol)
        digital_rx.append(u)
        digital_tx.append(v)
        singulars.append(s)
    return HybridDesign(list(analog_tx), digital_tx, list(analog_rx),
                        digital_rx, [a.shape[1] for a in analog_tx],
                        singulars, slots)


def _check_zero_forcing(design, r, tol=1e-8):
    for i in range(design.k):
        for j in range(design.k):
            if i == j or design.streams[i] == 0 or design.streams[j] == 0:
                continue
            scale = np.linalg.norm(r.h[i][j])
            e = np.linalg.norm(effective_channel(design, r, i, j))
            if e > tol * scale:
                raise DegenerateChannelError(
                    f"residual interference {e:.3g} from transmitter {j} at "
                    f"receiver {i}")


def design_two_user_zf(r, alloc, rel_tol=DEFAULT_REL_TOL, rng=None,
                       config=None):
    """
    Two-user hybrid zero-forcing design for a feasible allocation.

    Transmitter ``i`` sends ``d_ii`` streams from the kernel of ``H_ji``
    and ``d_i0`` streams along random unit vectors. Receiver ``i`` picks an
    orthonormal analog combiner orthogonal to the ``d_j0`` generic streams
    of the other user, and the digital stages diagonalize the remaining
    direct channel.

    Parameters
    ----------
    r : ChannelRealization
        Two-user channel draw.
    alloc : TwoUserAllocation
    rel_tol : float
        Rank tolerance for the generic-position checks.
    rng : Rng, optional
        Source of the random analog columns; ``Rng(0)`` if omitted.
    config : NetworkConfig, optional
        When given, ``alloc`` is validated against it.

    Raises
    ------
    InvalidArgumentError
        If the allocation is infeasible.
    DegenerateChannelError
        If a generic-rank assumption fails numerically.
    """
    if r.k != 2:
        raise InvalidArgumentError("two-user design needs K=2")
    if config is not None:
        bad = alloc.violations(config)
        if bad:
            raise InvalidArgumentError(
                "infeasible allocation: " + "; ".join(bad))
    rng = Rng(0) if rng is None else rng
    kernel_streams = (alloc.d11, alloc.d22)
    generic_streams = (alloc.d10, alloc.d20)
    analog_tx, generic = [], []
    for i in range(2):
        j = 1 - i
        m_ant = r.h[i][i].shape[1]
        if kernel_streams[i] + generic_streams[i] > m_ant:
            raise InvalidArgumentError(
                f"user {i + 1} requests more streams than antennas")
        kernel = nullspace(r.h[j][i], rel_tol)
        if kernel.shape[1] < kernel_streams[i]:
            raise InvalidArgumentError(
                f"cross-channel kernel of user {i + 1} has dimension "
                f"{kernel.shape[1]} < {kernel_streams[i]}")
        if kernel_streams[j] + generic_streams[j] == 0:
            # nobody to protect: plain SVD beamforming
            _, _, vh = svd(r.h[i][i])
            analog_tx.append(vh[:, :kernel_streams[i] + generic_streams[i]])
            generic.append(np.zeros((m_ant, 0), dtype=complex))
            continue
        v_null = _strongest_kernel_columns(r.h[i][i], kernel,
                                           kernel_streams[i])
        v_rand = random_unit_columns(m_ant, generic_streams[i], rng)
        analog_tx.append(np.hstack([v_null, v_rand]))
        generic.append(v_rand)
    analog_rx = []
    for i in range(2):
        j = 1 - i
        interference = r.h[i][j] @ generic[j]
        analog_rx.append(_receive_filter(r.h[i][i], analog_tx[i],
                                         interference, rel_tol))
    design = _assemble(r, analog_tx, analog_rx, rel_tol)
    _check_zero_forcing(design, r)
    return design


def design_k_user_zf(r, d, side='receive', rel_tol=DEFAULT_REL_TOL, rng=None,
                     config=None):
    """
    Zero-forcing design nulling all interference in a single slot.

    ``side='receive'`` uses random unit analog precoders and receive
    filters orthogonal to all ``(K-1) d`` interfering streams, which needs
    ``K d <= N'``. ``side='transmit'`` is the reciprocal scheme: each
    precoder lies in the common kernel of the ``K-1`` cross channels,
    which needs ``d <= M' - (K-1) N'``. With ``K = 1`` both reduce to
    SVD beamforming.

    Raises
    ------
    InfeasibleSchemeError
        If the dimension requirement of the chosen side fails.
    """
    k = r.k
    rng = Rng(0) if rng is None else rng
    if side not in ('receive', 'transmit'):
        raise InvalidArgumentError(f"unknown side {side!r}")
    if config is not None:
        for idx, u in enumerate(config.users):
            if d > min(u.m_rf, u.n_rf):
                raise InfeasibleSchemeError(
                    f"d={d} exceeds min(M, N)={min(u.m_rf, u.n_rf)} for "
                    f"user {idx + 1}")
    m_ant = r.h[0][0].shape[1]
    n_ant = r.h[0][0].shape[0]
    if d > min(m_ant, n_ant):
        raise InfeasibleSchemeError(f"d={d} exceeds min(M', N')")

    if k == 1:
        u, _, v = svd(r.h[0][0])
        design = _assemble(r, [v[:, :d]], [u[:, :d]], rel_tol)
        return design

    if side == 'receive':
        if k * d > n_ant:
            raise InfeasibleSchemeError(
                f"receive zero forcing needs K*d <= N' "
                f"({k}*{d}={k * d} > {n_ant})")
        analog_tx = [random_unit_columns(r.h[i][i].shape[1], d, rng)
                     for i in range(k)]
        analog_rx = []
        for i in range(k):
            interference = np.hstack([r.h[i][j] @ analog_tx[j]
                                      for j in range(k) if j != i])
            analog_rx.append(_receive_filter(r.h[i][i], analog_tx[i],
                                             interference, rel_tol))
    else:
        if d > m_ant - (k - 1) * n_ant:
            raise InfeasibleSchemeError(
                f"transmit zero forcing needs d <= M' - (K-1) N' "
                f"({d} > {m_ant} - {k - 1}*{n_ant})")
        analog_tx, analog_rx = [], []
        for i in range(k):
            cross = np.vstack([r.h[j][i] for j in range(k) if j != i])
            kernel = nullspace(cross, rel_tol)
            if kernel.shape[1] < d:
                raise DegenerateChannelError(
                    f"common kernel of user {i + 1} has dimension "
                    f"{kernel.shape[1]} < {d}")
            v = _strongest_kernel_columns(r.h[i][i], kernel, d)
            analog_tx.append(v)
            analog_rx.append(_receive_filter(r.h[i][i], v, None, rel_tol))
    design = _assemble(r, analog_tx, analog_rx, rel_tol)
    _check_zero_forcing(design, r)
    return design


def _least_left_singular(a, count):
    """Left singular vectors for the ``count`` smallest singular values
    (batched over leading axes)."""
    u, _, _ = np.linalg.svd(a, full_matrices=True)
    return u[..., -count:]


def _batch_leakage(h, u, v, weights):
    """Per-instance leakage; ``weights[i]`` multiplies transmitter ``i``."""
    k = h.shape[1]
    total = np.zeros(h.shape[0])
    for j in range(k):
        for i in range(k):
            if i == j:
                continue
            e = u[:, j].conj().swapaxes(-1, -2) @ h[:, j, i] @ v[:, i]
            total += weights[i] * np.sum(np.abs(e) ** 2, axis=(-1, -2))
    return total


def dia_batch(h, d, v0, max_iter=5000, leak_tol=1e-6, powers=None):
    """
    Alternating leakage minimization on a batch of symmetric networks.

    Parameters
    ----------
    h : ndarray, shape (B, K, K, Nr, Nt)
        ``h[b, j, i]`` is the channel from transmitter ``i`` to receiver
        ``j`` in instance ``b``.
    d : int
        Streams per user.
    v0 : ndarray, shape (B, K, Nt, d)
        Initial precoders with orthonormal columns.
    max_iter : int
    leak_tol : float
        An instance stops once its leakage at unit per-stream power drops
        below this value.
    powers : sequence of float, optional
        Per-transmitter powers ``P_i`` weighting the interference
        covariances (``P_i / d`` per stream); equal powers by default.

    Returns
    -------
    u, v : ndarray
        Final combiners ``(B, K, Nr, d)`` and precoders ``(B, K, Nt, d)``.
    traces : list of LeakageTrace
    """
    h = np.asarray(h, dtype=complex)
    batch, k = h.shape[0], h.shape[1]
    nr, nt = h.shape[3], h.shape[4]
    if d < 1 or d > min(nr, nt):
        raise InvalidArgumentError(f"cannot place {d} streams per user")
    if powers is None:
        powers = [1.0] * k
    amp = np.sqrt(np.asarray(powers, dtype=float) / d)
    v = np.array(v0, dtype=complex)
    u = np.zeros((batch, k, nr, d), dtype=complex)
    traces = [LeakageTrace() for _ in range(batch)]
    active = np.arange(batch)
    unit = np.ones(k)
    hh = h.conj().swapaxes(-1, -2)
    for _ in range(max_iter):
        ha, hha, va = h[active], hh[active], v[active]
        ua = np.empty((len(active), k, nr, d), dtype=complex)
        for j in range(k):
            cols = [amp[i] * (ha[:, j, i] @ va[:, i])
                    for i in range(k) if i != j]
            ua[:, j] = _least_left_singular(np.concatenate(cols, axis=-1), d)
        for i in range(k):
            cols = [amp[j] * (hha[:, j, i] @ ua[:, j])
                    for j in range(k) if j != i]
            va[:, i] = _least_left_singular(np.concatenate(cols, axis=-1), d)
        u[active] = ua
        v[active] = va
        leak = _batch_leakage(ha, ua, va, unit)
        done = []
        for pos, b in enumerate(active):
            traces[b].values.append(float(leak[pos]))
            if leak[pos] < leak_tol:
                traces[b].converged = True
                done.append(pos)
        if done:
            active = np.delete(active, done)
        if active.size == 0:
            break
    return u, v, traces


def finish_dia(r, u, v, trace, slots=1, rf=None, rel_tol=DEFAULT_REL_TOL):
    """
    Turn DIA combiners/precoders into a ``HybridDesign``: rotate within
    each subspace to diagonalize the direct channel, then factor into
    analog and digital stages.
    """
    k = r.k
    analog_tx, digital_tx, analog_rx, digital_rx, singulars = ([] for _ in
                                                                range(5))
    for i in range(k):
        a, s, b = svd(u[i].conj().T @ r.h[i][i] @ v[i])
        w = v[i] @ b
        g = u[i] @ a
        tx_chains = w.shape[1] if rf is None else rf[0]
        rx_chains = g.shape[1] if rf is None else rf[1]
        at, dt = factor_hybrid(w, tx_chains)
        ar, dr = factor_hybrid(g, rx_chains)
        analog_tx.append(at)
        digital_tx.append(dt)
        analog_rx.append(ar)
        digital_rx.append(dr)
        singulars.append(s)
    return HybridDesign(analog_tx, digital_tx, analog_rx, digital_rx,
                        [v[i].shape[1] for i in range(k)], singulars, slots)


def _stack(r):
    k = r.k
    return np.array([[r.h[j][i] for i in range(k)] for j in range(k)])


def design_dia(rs, d, power=1.0, max_iter=5000, leak_tol=1e-6, rng=None,
               config=None):
    """
    Distributed interference alignment over one or more slots.

    With several slots the channels are symbol-extended (block diagonal)
    and ``d`` counts the streams per user over the whole extension.
    Non-convergence is reported through the trace, not raised.

    Returns
    -------
    design : HybridDesign
        Spans ``len(rs)`` slots.
    trace : LeakageTrace
    """
    rs = list(rs)
    if not rs:
        raise InvalidArgumentError("need at least one slot")
    slots = len(rs)
    r = rs[0] if slots == 1 else extend_realization(rs)
    nr, nt = r.h[0][0].shape
    rf = None
    if config is not None:
        if not config.is_symmetric():
            raise InvalidArgumentError("DIA is implemented for symmetric "
                                       "networks")
        u0 = config.users[0]
        if d > min(u0.m_rf, u0.n_rf) * slots:
            raise InvalidArgumentError(
                f"d={d} exceeds min(M, N)*T={min(u0.m_rf, u0.n_rf) * slots}")
        rf = (u0.m_rf * slots, u0.n_rf * slots)
    if d > min(nr, nt):
        raise InvalidArgumentError(f"d={d} exceeds antenna dimensions")
    rng = Rng(0) if rng is None else rng
    v0 = np.array([random_orthonormal(nt, d, rng) for _ in range(r.k)])
    powers = [power] * r.k if np.isscalar(power) else list(power)
    u, v, traces = dia_batch(_stack(r)[None], d, v0[None], max_iter,
                             leak_tol, powers)
    design = finish_dia(r, u[0], v[0], traces[0], slots, rf)
    return design, traces[0]
