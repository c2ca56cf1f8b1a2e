"""Dense complex linear algebra, the Dirichlet kernel and the seeded PRNG.

Matrices and vectors are plain ``complex128`` numpy arrays; the helpers
:func:`as_matrix` and :func:`as_vector` enforce shape and finiteness.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class ShapeError(ValueError):
    """Raised when operand dimensions do not conform."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative factorisation fails to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, name="vector"):
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def matmul(a, b):
    """Complex matrix product ``a @ b`` with a dimension check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


@dataclass(frozen=True)
class SvdResult:
    """``a = u @ diag(s) @ vh``; ``s`` is sorted descending."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    @property
    def v(self):
        return self.vh.conj().T

    def reconstruct(self):
        k = self.s.shape[0]
        return (self.u[:, :k] * self.s) @ self.vh[:k, :]


def svd(a, full_matrices=False):
    """Singular value decomposition backed by LAPACK.

    ``gesdd`` is tried first; on non-convergence the slower but more robust
    ``gesvd`` driver is used before giving up with :class:`ConvergenceError`.
    """
    a = as_matrix(a)
    if min(a.shape) < 1:
        raise ShapeError("svd needs at least one row and one column")
    for driver in ("gesdd", "gesvd"):
        try:
            u, s, vh = scipy.linalg.svd(a, full_matrices=full_matrices,
                                        lapack_driver=driver, check_finite=False)
        except np.linalg.LinAlgError:
            continue
        return SvdResult(u, s, vh)
    raise ConvergenceError(f"SVD of {a.shape} matrix did not converge", iterations=None)


def lstsq_min_norm(a, b, rank_tol=1e-12):
    """Minimum-norm least-squares solution of ``a x ~ b``.

    Singular values below ``rank_tol * s_max`` are treated as zero.
    """
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"a has {a.shape[0]} rows but b has length {b.shape[0]}")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    res = svd(a)
    if res.s.size == 0 or res.s[0] == 0.0:
        return np.zeros(a.shape[1], dtype=complex)
    keep = res.s > rank_tol * res.s[0]
    coef = (res.u[:, keep].conj().T @ b) / res.s[keep]
    return res.vh[keep, :].conj().T @ coef


def projector_complement(phi):
    """Orthogonal projector onto ``span{phi}``'s complement: ``I - phi phi^* / |phi|^2``."""
    phi = as_vector(phi, "phi")
    nrm2 = np.vdot(phi, phi).real
    if nrm2 == 0.0:
        raise ValueError("cannot project against a zero vector")
    return np.eye(phi.shape[0], dtype=complex) - np.outer(phi, phi.conj()) / nrm2


def dirichlet_kernel(n, x):
    """``sum_{k=0}^{n-1} exp(i k x)``, closed form away from multiples of 2*pi.

    Near ``x = 0 (mod 2 pi)`` the sum is taken directly. Accepts scalar or
    array ``x``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    half = np.sin(0.5 * xs)
    near = np.abs(half) < 1e-6
    out = np.empty(xs.shape, dtype=complex)
    safe = np.where(near, 1.0, half)
    out[:] = np.exp(0.5j * (n - 1) * xs) * np.sin(0.5 * n * xs) / safe
    if near.any():
        k = np.arange(n)
        out[near] = np.exp(1j * np.outer(xs[near], k)).sum(axis=1)
    return complex(out[0]) if np.ndim(x) == 0 else out


class Prng:
    """Seeded 64-bit generator (numpy's PCG64 bit stream).

    Uniform doubles are built from the raw 64-bit output by taking the top 53
    bits, so the stream is defined by PCG64 alone and not by numpy's
    distribution code. Use :meth:`spawn` for independent substreams.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._bits = np.random.PCG64(np.random.SeedSequence(self.seed))

    def spawn(self, index):
        child = Prng.__new__(Prng)
        child.seed = self.seed
        child._bits = np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(int(index),)))
        return child

    def raw(self, size):
        return self._bits.random_raw(size)

    def uniform(self, size=None):
        """Doubles in [0, 1)."""
        n = 1 if size is None else int(size)
        u = (self.raw(n) >> np.uint64(11)).astype(float) * 2.0 ** -53
        return float(u[0]) if size is None else u

    def normals(self, npairs):
        """``2 * npairs`` standard normals via Box-Muller, pair by pair."""
        r = self.raw(2 * int(npairs)).reshape(-1, 2)
        u1 = ((r[:, 0] >> np.uint64(11)).astype(float) + 1.0) * 2.0 ** -53  # (0, 1]
        u2 = (r[:, 1] >> np.uint64(11)).astype(float) * 2.0 ** -53
        rad = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        return np.column_stack((rad * np.cos(ang), rad * np.sin(ang))).ravel()


def gaussian_pair(rng):
    """Two independent standard normal draws from ``rng``."""
    a, b = rng.normals(1)
    return float(a), float(b)
