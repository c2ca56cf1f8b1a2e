"""Greedy sparse least squares in the batch-OMP style.

Atom selection in the batch path needs only the Gram matrix ``G = D^* D``,
the correlation ``c = D^* b`` and ``|b|^2``. After each atom is added the
coefficients are refit on the whole support through an incrementally
updated Cholesky factor of ``G[S, S]`` and the correlations are updated as
``c - G[:, S] x_S``. The squared residual is ``|b|^2 - c_S^* x_S`` for
Gram-only problems; when the dictionary is known it is recomputed from
``b - D_S x_S``, since the difference form loses about half the digits as
the residual approaches zero.

The naive path recomputes the residual vector explicitly and exists to check
the batch path.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .numeric import ShapeError, as_matrix, as_vector

STALL_RTOL = 1e-12
PIVOT_RTOL = 1e-12
EXCLUDE_RTOL = 1e-14

K_REACHED = "k-reached"
TOL_REACHED = "tol-reached"
STALLED = "stalled"
INFEASIBLE_CAP = "infeasible-cap"


@dataclass
class SparseProblem:
    """Sparse least-squares instance ``min |D h - b|`` over sparse ``h``.

    Build with :meth:`from_dictionary` or, when only the normal equations are
    available, :meth:`from_gram`.
    """

    gram: np.ndarray
    correlation: np.ndarray
    target_norm_sq: float
    dictionary: np.ndarray = None
    target: np.ndarray = None
    psd: bool = True
    norms: np.ndarray = field(init=False)
    excluded: np.ndarray = field(init=False)

    def __post_init__(self):
        diag = np.abs(np.real(np.diag(self.gram)))
        self.norms = np.sqrt(diag)
        top = self.norms.max() if self.norms.size else 0.0
        self.excluded = self.norms <= EXCLUDE_RTOL * top

    @classmethod
    def from_dictionary(cls, dictionary, target, gram=None, correlation=None):
        d = as_matrix(dictionary, "dictionary")
        b = as_vector(target, "target")
        if d.shape[0] != b.shape[0]:
            raise ShapeError("dictionary rows must match target length")
        if gram is None:
            gram = d.conj().T @ d
        if correlation is None:
            correlation = d.conj().T @ b
        return cls(np.asarray(gram, dtype=complex), np.asarray(correlation, dtype=complex),
                   float(np.vdot(b, b).real), d, b)

    @classmethod
    def from_gram(cls, gram, correlation, target_norm_sq, psd=True):
        """``psd=False`` swaps the Cholesky updates for dense solves."""
        g = as_matrix(gram, "gram")
        c = as_vector(correlation, "correlation")
        if g.shape != (c.shape[0], c.shape[0]):
            raise ShapeError("gram must be square and match the correlation")
        return cls(g, c, float(target_norm_sq), psd=psd)

    @property
    def atoms(self):
        return self.correlation.shape[0]

    @property
    def target_norm(self):
        return float(np.sqrt(max(self.target_norm_sq, 0.0)))


@dataclass
class SparseSolveReport:
    support: list
    coefficients: np.ndarray
    residual_norm: float
    trace: list
    termination: str

    def solution(self, atoms):
        h = np.zeros(atoms, dtype=complex)
        h[self.support] = self.coefficients
        return h


class _Greedy:
    """Shared state of one OMP run."""

    def __init__(self, problem, naive=False):
        if naive and problem.dictionary is None:
            raise ValueError("naive OMP needs the explicit dictionary")
        self.p = problem
        self.naive = naive
        self.support = []
        self.coef = np.zeros(0, dtype=complex)
        self.alpha = problem.correlation.copy()
        self.chol = np.zeros((0, 0), dtype=complex)
        self.res_sq = problem.target_norm_sq
        self.trace = [np.sqrt(max(self.res_sq, 0.0))]
        self.stall = STALL_RTOL * problem.target_norm
        self.blocked = problem.excluded.copy()

    @property
    def residual_norm(self):
        return self.trace[-1]

    def _pivot(self, j):
        """Schur complement of atom ``j`` against the support, and the solve vector."""
        g = self.p.gram
        if not self.support:
            return g[j, j].real, np.zeros(0, dtype=complex)
        col = g[self.support, j]
        if self.p.psd:
            w = scipy.linalg.solve_triangular(self.chol, col, lower=True)
            return g[j, j].real - np.vdot(w, w).real, w
        w = np.linalg.solve(g[np.ix_(self.support, self.support)], col)
        return (g[j, j] - np.vdot(col, w)).real, w

    def step(self):
        """Add one atom; return False if nothing usable is left."""
        p = self.p
        while True:
            scores = np.abs(self.alpha) / np.where(self.blocked, 1.0, p.norms)
            scores[self.blocked] = -1.0
            j = int(np.argmax(scores))  # first maximum: lowest index wins ties
            if scores[j] <= self.stall:
                return False
            pivot, w = self._pivot(j)
            if p.psd and pivot > PIVOT_RTOL * p.norms[j] ** 2:
                break
            if not p.psd and abs(pivot) > PIVOT_RTOL * p.norms[j] ** 2:
                break
            # numerically dependent on the current support
            self.blocked[j] = True
        if p.psd:
            n = len(self.support)
            chol = np.zeros((n + 1, n + 1), dtype=complex)
            chol[:n, :n] = self.chol
            chol[n, :n] = w.conj()
            chol[n, n] = np.sqrt(pivot)
            self.chol = chol
        self.support.append(j)
        self.blocked[j] = True
        if self.naive:
            ds = p.dictionary[:, self.support]
            self.coef = np.linalg.lstsq(ds, p.target, rcond=None)[0]
            resid = p.target - ds @ self.coef
            self.alpha = p.dictionary.conj().T @ resid
            self.res_sq = np.vdot(resid, resid).real
        else:
            cs = p.correlation[self.support]
            if p.psd:
                self.coef = scipy.linalg.cho_solve((self.chol, True), cs)
            else:
                self.coef = np.linalg.solve(p.gram[np.ix_(self.support, self.support)], cs)
            self.alpha = p.correlation - p.gram[:, self.support] @ self.coef
            if p.dictionary is not None:
                # |b|^2 - c_S^* x cancels badly near zero residual
                resid = p.target - p.dictionary[:, self.support] @ self.coef
                self.res_sq = np.vdot(resid, resid).real
            else:
                self.res_sq = p.target_norm_sq - np.vdot(cs, self.coef).real
        self.trace.append(float(np.sqrt(max(self.res_sq, 0.0))))
        return True

    def report(self, reason):
        return SparseSolveReport(list(self.support), self.coef.copy(),
                                 self.residual_norm, list(self.trace), reason)


def omp_k(problem, sparsity, naive=False):
    """Greedy solve of ``min |D h - b|`` subject to ``|h|_0 <= sparsity``.

    Atoms are chosen by largest ``|<d_j, r>| / |d_j|``. Stops at the requested
    support size (capped by the atom count) or when the best normalized
    correlation drops to ``1e-12 |b|``.
    """
    if sparsity < 0:
        raise ValueError("sparsity must be >= 0")
    run = _Greedy(problem, naive)
    limit = min(int(sparsity), problem.atoms)
    while len(run.support) < limit:
        if not run.step():
            return run.report(STALLED)
    return run.report(K_REACHED)


def omp_err(problem, tol, cap, naive=False):
    """Grow the support until ``|D h - b| <= tol`` or ``cap`` atoms are used.

    Exiting without meeting ``tol`` (cap hit or no usable atom left) reports
    ``infeasible-cap``.
    """
    if tol < 0 or cap < 0:
        raise ValueError("tol and cap must be nonnegative")
    run = _Greedy(problem, naive)
    while run.residual_norm > tol:
        if len(run.support) >= cap or not run.step():
            return run.report(INFEASIBLE_CAP)
    return run.report(TOL_REACHED)


BRUTE_MAX_ATOMS = 16
BRUTE_MAX_SPARSITY = 3


def brute_force_sparse(problem, sparsity):
    """Exhaustive search over every support of size ``<= sparsity``.

    Residuals within ``1e-13 |b|`` count as ties; ties go to the smaller
    support, then the lexicographically smallest one. Guarded to 16 atoms and
    sparsity 3.
    """
    if problem.dictionary is None:
        raise ValueError("brute force needs the explicit dictionary")
    n = problem.atoms
    if n > BRUTE_MAX_ATOMS or sparsity > BRUTE_MAX_SPARSITY:
        raise ValueError(f"brute force limited to {BRUTE_MAX_ATOMS} atoms and "
                         f"sparsity {BRUTE_MAX_SPARSITY}")
    d, b = problem.dictionary, problem.target
    tie = 1e-13 * problem.target_norm
    best = (problem.target_norm, (), np.zeros(0, dtype=complex))
    usable = [j for j in range(n) if not problem.excluded[j]]
    for size in range(1, min(sparsity, len(usable)) + 1):
        for supp in itertools.combinations(usable, size):
            ds = d[:, list(supp)]
            x = np.linalg.lstsq(ds, b, rcond=None)[0]
            r = float(np.linalg.norm(b - ds @ x))
            if r < best[0] - tie:
                best = (r, supp, x)
    r, supp, x = best
    trace = [problem.target_norm] + ([r] if supp else [])
    return SparseSolveReport(list(supp), x, r, trace, K_REACHED)
