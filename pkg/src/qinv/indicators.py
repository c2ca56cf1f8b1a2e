"""Indicator functionals evaluated at a single probe.

Every indicator acts on the column index of the data matrix ``L``: a probe
``phi`` has one entry per column and ``phi_hat = phi / |phi|``. The two losses
are

* mode 0: ``K(g) = |L g|^2``
* mode 1: ``K(g) = |g^* L g|^2`` (square data only)

and the sampling indicators minimise ``K(phi_hat + P h)`` over different sets
of ``h``, where ``P`` projects onto the orthogonal complement of ``phi``:
``h = 0`` (dsm), ``|h|_0 <= k`` (kdsm), unconstrained (infcrit). errdsm
reports the smallest support meeting ``K <= delta``.

Per-data precomputations (``L^* L``, factorisations, SVD) live in
:class:`Evaluator`; the module-level functions are one-shot wrappers.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .numeric import lstsq_min_norm, svd
from .sparse import INFEASIBLE_CAP, SparseProblem, omp_err, omp_k

METHODS = ("dsm", "kdsm", "errdsm", "infcrit", "capon", "music")
TOLERANCE_MODES = ("absolute", "relative")

CAPON_REG_RTOL = 1e-10
MUSIC_CEILING = 1e16
NON_PSD_RTOL = 1e-8
DB_FLOOR = -300.0

_PARAMS = {
    "dsm": set(),
    "kdsm": {"sparsity"},
    "errdsm": {"tolerance", "tolerance_mode", "cap"},
    "infcrit": set(),
    "capon": set(),
    "music": {"subspace_dim"},
}
_OPTIONAL = {"capon": {"reg"}}


@dataclass(frozen=True)
class IndicatorSpec:
    """Which indicator to evaluate and its parameters.

    A parameter must be given exactly when the method uses it; ``reg`` is an
    optional absolute Capon loading (default ``1e-10 * lambda_max(L^* L)``).
    """

    method: str
    mode: int = 0
    sparsity: int = None
    tolerance: float = None
    tolerance_mode: str = None
    cap: int = None
    subspace_dim: int = None
    reg: float = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.mode not in (0, 1):
            raise ValueError("mode must be 0 or 1")
        if self.method in ("capon", "music") and self.mode != 0:
            raise ValueError(f"{self.method} has no mode-1 variant")
        required = _PARAMS[self.method]
        allowed = required | _OPTIONAL.get(self.method, set())
        for name in ("sparsity", "tolerance", "tolerance_mode", "cap", "subspace_dim", "reg"):
            given = getattr(self, name) is not None
            if name in required and not given:
                raise ValueError(f"{self.method} requires {name}")
            if given and name not in allowed:
                raise ValueError(f"{self.method} does not take {name}")
        if self.sparsity is not None and self.sparsity < 0:
            raise ValueError("sparsity must be >= 0")
        if self.tolerance is not None and not self.tolerance >= 0:
            raise ValueError("tolerance must be >= 0")
        if self.tolerance_mode is not None and self.tolerance_mode not in TOLERANCE_MODES:
            raise ValueError(f"tolerance_mode must be one of {TOLERANCE_MODES}")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.subspace_dim is not None and self.subspace_dim < 1:
            raise ValueError("subspace_dim must be >= 1")
        if self.reg is not None and not self.reg >= 0:
            raise ValueError("reg must be >= 0")

    @property
    def name(self):
        if self.method == "kdsm":
            return f"kdsm{self.sparsity}"
        return self.method


@dataclass(frozen=True)
class IndicatorValue:
    value: float
    flags: frozenset = frozenset()


def _matrix(data):
    return getattr(data, "matrix", data)


def _vector(probe):
    return np.asarray(getattr(probe, "vector", probe), dtype=complex)


def _unit(phi):
    nrm = np.linalg.norm(phi)
    if nrm == 0.0:
        raise ValueError("probe vector is zero")
    return phi / nrm


def loss(data, g, mode):
    """``|L g|^2`` (mode 0) or ``|g^* L g|^2`` (mode 1)."""
    mat = _matrix(data)
    g = np.asarray(g, dtype=complex)
    if g.shape[0] != mat.shape[1]:
        raise ValueError("g must have one entry per data column")
    if mode == 0:
        lg = mat @ g
        return float(np.vdot(lg, lg).real)
    if mode == 1:
        if mat.shape[0] != mat.shape[1]:
            raise ValueError("mode 1 needs square data")
        return float(abs(np.vdot(g, mat @ g)) ** 2)
    raise ValueError("mode must be 0 or 1")


def to_db(values):
    """``10 log10`` with zeros (and anything below it) clamped to -300 dB."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.where(v > 0, v, 1.0))
    return np.where(v > 0, np.maximum(out, DB_FLOOR), DB_FLOOR)


class Evaluator:
    """Indicator of one spec against one data matrix, callable per probe."""

    def __init__(self, data, spec):
        self.spec = spec
        self.mat = np.asarray(_matrix(data), dtype=complex)
        m, n = self.mat.shape
        method = spec.method
        if spec.mode == 1 and m != n:
            raise ValueError("mode 1 indicators need square data")
        if method in ("kdsm", "errdsm", "infcrit"):
            if spec.mode == 0:
                self.gram = self.mat.conj().T @ self.mat
            else:
                self.herm = 0.5 * (self.mat + self.mat.conj().T)
        elif method == "capon":
            gram = self.mat.conj().T @ self.mat
            eig = np.linalg.eigvalsh(gram)
            top = max(eig[-1], 0.0)
            reg = CAPON_REG_RTOL * top if spec.reg is None else spec.reg
            if reg == 0.0 and eig[0] <= 1e-14 * top:
                raise ValueError("L^* L is singular; give capon a positive regularization floor")
            try:
                self.chol = scipy.linalg.cho_factor(gram + reg * np.eye(n), lower=True)
            except np.linalg.LinAlgError as exc:
                raise ValueError("capon matrix is not positive definite; "
                                 "use a positive regularization floor") from exc
            self.reg = reg
        elif method == "music":
            p = spec.subspace_dim
            if not 1 <= p < min(m, n):
                raise ValueError(f"subspace_dim must lie in [1, {min(m, n) - 1}]")
            self.noise_rows = svd(self.mat, full_matrices=True).vh[p:, :]

    def __call__(self, probe):
        phat = _unit(_vector(probe))
        if phat.shape[0] != self.mat.shape[1]:
            raise ValueError("probe length must equal the data column count")
        return getattr(self, "_" + self.spec.method)(phat)

    # -- individual methods --------------------------------------------

    def _dsm(self, phat):
        return IndicatorValue(loss(self.mat, phat, self.spec.mode))

    def _kdsm(self, phat):
        if self.spec.sparsity == 0:
            return self._dsm(phat)
        problem, flags = self._problem(phat)
        rep = omp_k(problem, self.spec.sparsity)
        return IndicatorValue(self._value(problem, rep, phat), flags)

    def _infcrit(self, phat):
        if self.spec.mode == 0:
            lp = self.mat @ phat
            dictionary = self.mat - np.outer(lp, phat.conj())
            h = lstsq_min_norm(dictionary, -lp)
            r = dictionary @ h + lp
            return IndicatorValue(float(np.vdot(r, r).real))
        problem, flags = self._problem(phat)
        h = lstsq_min_norm(problem.gram, problem.correlation)
        return IndicatorValue(loss(self.mat, self._perturbed(phat, h), 1), flags)

    def _errdsm(self, phat):
        spec = self.spec
        delta = spec.tolerance
        if spec.tolerance_mode == "relative":
            delta = delta * loss(self.mat, phat, spec.mode)
        # solver tolerance is on the residual norm: K = r^2 (mode 0), ~ r^4 (mode 1)
        tol = math.sqrt(delta) if spec.mode == 0 else delta ** 0.25
        problem, flags = self._problem(phat)
        rep = omp_err(problem, tol, spec.cap)
        if rep.termination == INFEASIBLE_CAP:
            return IndicatorValue(float(spec.cap), flags | {"infeasible-cap"})
        return IndicatorValue(float(len(rep.support)), flags)

    def _capon(self, phat):
        w = scipy.linalg.cho_solve(self.chol, phat)
        denom = np.vdot(phat, w).real
        return IndicatorValue(loss(self.mat, w / denom, 0))

    def _music(self, phat):
        proj = self.noise_rows @ phat
        p2 = float(np.vdot(proj, proj).real)
        return IndicatorValue(1.0 / max(p2, 1.0 / MUSIC_CEILING))

    # -- helpers ---------------------------------------------------------

    def _problem(self, phat):
        """Sparse problem over ``h`` for the projected loss at ``phat``."""
        if self.spec.mode == 0:
            lp = self.mat @ phat
            a = self.gram @ phat
            beta = np.vdot(phat, a).real
            gram = (self.gram - np.outer(a, phat.conj()) - np.outer(phat, a.conj())
                    + beta * np.outer(phat, phat.conj()))
            corr = -(a - beta * phat)
            return SparseProblem(gram, corr, float(np.vdot(lp, lp).real)), frozenset()
        hp = self.herm @ phat
        gamma = np.vdot(phat, hp).real
        gram = (self.herm - np.outer(hp, phat.conj()) - np.outer(phat, hp.conj())
                + gamma * np.outer(phat, phat.conj()))
        corr = -(hp - gamma * phat)
        # the normal equations do not change under a global sign flip
        sign = 1.0 if np.trace(gram).real >= 0 else -1.0
        gram, corr, c0 = sign * gram, sign * corr, sign * gamma
        eig = np.linalg.eigvalsh(gram)
        psd = eig[0] >= -NON_PSD_RTOL * max(eig[-1], 0.0)
        flags = frozenset() if psd else frozenset({"non-psd"})
        return SparseProblem(gram, corr, c0, psd=bool(psd)), flags

    @staticmethod
    def _perturbed(phat, h):
        return phat + h - phat * np.vdot(phat, h)

    def _value(self, problem, rep, phat):
        if self.spec.mode == 0:
            return rep.residual_norm ** 2
        return loss(self.mat, self._perturbed(phat, rep.solution(problem.atoms)), 1)


def evaluate(data, probe, spec):
    return Evaluator(data, spec)(probe)


def dsm(data, probe, mode=0):
    return evaluate(data, probe, IndicatorSpec("dsm", mode))


def kdsm(data, probe, mode=0, sparsity=1):
    return evaluate(data, probe, IndicatorSpec("kdsm", mode, sparsity=sparsity))


def errdsm(data, probe, mode=0, tolerance=0.0, tolerance_mode="absolute", cap=1):
    spec = IndicatorSpec("errdsm", mode, tolerance=tolerance,
                         tolerance_mode=tolerance_mode, cap=cap)
    return evaluate(data, probe, spec)


def infcrit(data, probe, mode=0):
    return evaluate(data, probe, IndicatorSpec("infcrit", mode))


def capon(data, probe, reg=None):
    return evaluate(data, probe, IndicatorSpec("capon", reg=reg))


def music(data, probe, subspace_dim):
    return evaluate(data, probe, IndicatorSpec("music", subspace_dim=subspace_dim))
