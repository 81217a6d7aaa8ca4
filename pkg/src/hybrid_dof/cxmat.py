"""
Small dense complex linear algebra and a reproducible random source.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The
factorizations delegate to LAPACK through :mod:`numpy.linalg`; this module
adds the tolerance conventions used everywhere else (rank, nullspace) and a
seeded generator whose stream is fully specified so that other
implementations can reproduce it draw for draw.

Random stream
-------------
``Rng`` is xoshiro256** seeded through splitmix64. A uniform variate is
``((x >> 11) + 1) * 2**-53`` which lies in (0, 1]. A CN(0, 1) entry consumes
two uniforms ``u1, u2`` (in that order) via Box-Muller::

    r = sqrt(-2 ln u1),  theta = 2 pi u2
    entry = (r cos(theta) + 1j r sin(theta)) / sqrt(2)

Matrices are filled in row-major order.
"""

import math

import numpy as np

from .errors import InvalidArgumentError, NumericalFailure

__all__ = ['Rng', 'mix64', 'gaussian_matrix', 'svd', 'rank', 'nullspace',
           'qr', 'logdet_hpd', 'orthonormal_columns', 'DEFAULT_REL_TOL']

DEFAULT_REL_TOL = 1e-8

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(state):
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def mix64(seed, k):
    """Derive the sub-seed of trial ``k`` from a master ``seed``.

    Computed as one splitmix64 step starting from
    ``seed + k * 0x9E3779B97F4A7C15 (mod 2**64)``, so sub-seeds depend
    only on ``(seed, k)`` and not on the order trials are run in.
    """
    _, z = _splitmix64((seed + k * _GOLDEN) & _MASK)
    return z


class Rng:
    """Deterministic xoshiro256** generator.

    Not thread-safe; give every concurrent task its own instance.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _MASK
        sm = self.seed
        state = []
        for _ in range(4):
            sm, z = _splitmix64(sm)
            state.append(z)
        self._s = state

    def next_u64(self):
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self):
        """Uniform variate on (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * (1.0 / 9007199254740992.0)

    def complex_normal(self, count):
        """Return ``count`` i.i.d. CN(0, 1) samples as a 1-D array."""
        out = np.empty(count, dtype=complex)
        scale = math.sqrt(0.5)
        for k in range(count):
            u1 = self.uniform()
            u2 = self.uniform()
            r = math.sqrt(-2.0 * math.log(u1)) * scale
            theta = 2.0 * math.pi * u2
            out[k] = complex(r * math.cos(theta), r * math.sin(theta))
        return out


def gaussian_matrix(rows, cols, rng):
    """
    Draw a ``rows x cols`` matrix with i.i.d. CN(0, 1) entries.

    Raises
    ------
    InvalidArgumentError
        If either dimension is smaller than one.
    """
    if rows < 1 or cols < 1:
        raise InvalidArgumentError(
            f"matrix dimensions must be positive, got {rows}x{cols}")
    return rng.complex_normal(rows * cols).reshape(rows, cols)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalFailure("non-finite values in factorization")


def svd(a):
    """
    Thin singular value decomposition ``a = u @ diag(s) @ v.conj().T``.

    Returns
    -------
    u : ndarray, shape (m, k)
    s : ndarray, shape (k,)
        Non-negative, in descending order; ``k = min(m, n)``.
    v : ndarray, shape (n, k)
        Right singular vectors as columns (not the conjugate transpose).
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        m, n = a.shape
        k = min(m, n)
        return (np.zeros((m, k), dtype=complex), np.zeros(k),
                np.zeros((n, k), dtype=complex))
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    _check_finite(u, s, vh)
    return u, s, vh.conj().T


def rank(a, rel_tol=DEFAULT_REL_TOL):
    """Count singular values above ``rel_tol`` times the largest one."""
    if rel_tol <= 0:
        raise InvalidArgumentError("rel_tol must be positive")
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def nullspace(a, rel_tol=DEFAULT_REL_TOL):
    """
    Orthonormal basis of ``{x : a @ x = 0}``.

    The result has ``a.shape[1] - rank(a, rel_tol)`` columns; an empty
    kernel gives a matrix with zero columns.
    """
    if rel_tol <= 0:
        raise InvalidArgumentError("rel_tol must be positive")
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(n, dtype=complex)
    try:
        _, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    r = int(np.sum(s > rel_tol * s[0]))
    return vh[r:].conj().T.copy()


def qr(a):
    """Reduced QR factorization of a tall (or square) matrix."""
    a = np.asarray(a, dtype=complex)
    if a.shape[0] < a.shape[1]:
        raise InvalidArgumentError("qr requires rows >= cols")
    q, r = np.linalg.qr(a, mode='reduced')
    return q, r


def orthonormal_columns(a):
    """Orthonormalize the columns of a full-column-rank tall matrix."""
    q, _ = qr(a)
    return q


def logdet_hpd(a, herm_tol=1e-10):
    """
    Natural log-determinant of a Hermitian positive definite matrix.

    Validated through a Cholesky factorization; the Hermitian check is
    relative to the largest entry magnitude.

    Raises
    ------
    InvalidArgumentError
        If ``a`` is not square, not Hermitian within ``herm_tol`` or not
        positive definite.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("logdet_hpd requires a square matrix")
    if a.shape[0] == 0:
        return 0.0
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.conj().T)) > herm_tol * scale:
        raise InvalidArgumentError("matrix is not Hermitian")
    try:
        c = np.linalg.cholesky(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise InvalidArgumentError("matrix is not positive definite") from exc
    diag = np.real(np.diag(c))
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise InvalidArgumentError("matrix is not positive definite")
    return float(2.0 * np.sum(np.log(diag)))
