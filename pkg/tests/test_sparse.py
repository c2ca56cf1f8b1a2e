import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_complex
from qinv.numeric import lstsq_min_norm
from qinv.sparse import (INFEASIBLE_CAP, K_REACHED, STALLED, TOL_REACHED, SparseProblem,
                         brute_force_sparse, omp_err, omp_k)


def _orthonormal(rng, m, n):
    q, _ = np.linalg.qr(random_complex(rng, m, n))
    return q


def test_sparsity_zero():
    rng = np.random.default_rng(1)
    p = SparseProblem.from_dictionary(random_complex(rng, 5, 4), random_complex(rng, 5))
    rep = omp_k(p, 0)
    assert rep.support == [] and rep.residual_norm == pytest.approx(p.target_norm)
    assert brute_force_sparse(p, 0).residual_norm == pytest.approx(p.target_norm)


def test_exact_single_atom():
    rng = np.random.default_rng(2)
    d = random_complex(rng, 6, 5)
    rep = omp_k(SparseProblem.from_dictionary(d, 2.5 * d[:, 3]), 3)
    assert rep.support == [3]
    assert rep.coefficients[0] == pytest.approx(2.5, abs=1e-12)
    assert rep.residual_norm <= 1e-12
    assert rep.termination == STALLED


def test_two_sparse_orthonormal_recovery():
    rng = np.random.default_rng(3)
    d = _orthonormal(rng, 10, 8)
    b = (1 - 2j) * d[:, 1] + 0.7 * d[:, 6]
    p = SparseProblem.from_dictionary(d, b)
    rep = omp_k(p, 2)
    assert sorted(rep.support) == [1, 6] and rep.residual_norm <= 1e-10
    np.testing.assert_allclose(rep.solution(8)[[1, 6]], [1 - 2j, 0.7], atol=1e-10)
    assert sorted(brute_force_sparse(p, 2).support) == [1, 6]


def test_truncates_at_atom_count():
    rng = np.random.default_rng(4)
    p = SparseProblem.from_dictionary(random_complex(rng, 8, 3), random_complex(rng, 8))
    rep = omp_k(p, 10)
    assert len(rep.support) == 3 and rep.termination == K_REACHED


def test_omp_err_basic_cases():
    rng = np.random.default_rng(5)
    d = random_complex(rng, 6, 6)
    b = random_complex(rng, 6)
    p = SparseProblem.from_dictionary(d, b)
    assert omp_err(p, p.target_norm, 3).support == []
    full = omp_err(p, 0.0, 6)
    assert full.termination == TOL_REACHED or full.residual_norm <= 1e-10
    assert full.residual_norm <= 1e-10
    np.testing.assert_allclose(full.solution(6), lstsq_min_norm(d, b), atol=1e-8)
    tall = SparseProblem.from_dictionary(random_complex(rng, 8, 3), random_complex(rng, 8))
    rep = omp_err(tall, 0.0, 2)
    assert rep.termination == INFEASIBLE_CAP and len(rep.support) == 2


def test_excluded_atoms_never_selected():
    rng = np.random.default_rng(6)
    d = random_complex(rng, 6, 5)
    d[:, 2] = 0
    p = SparseProblem.from_dictionary(d, random_complex(rng, 6))
    assert p.excluded[2]
    assert 2 not in omp_k(p, 5).support
    assert 2 not in brute_force_sparse(p, 3).support


def test_lowest_index_wins_ties():
    d = np.eye(4, dtype=complex)
    b = np.array([1, 0, 1, 1], dtype=complex)
    assert omp_k(SparseProblem.from_dictionary(d, b), 1).support == [0]


def test_brute_force_enumeration_count_and_minimum():
    rng = np.random.default_rng(7)
    d = random_complex(rng, 5, 6)
    b = random_complex(rng, 5)
    p = SparseProblem.from_dictionary(d, b)
    supports = [()] + [c for s in (1, 2) for c in itertools.combinations(range(6), s)]
    assert len(supports) == 1 + 6 + 15
    best = min(np.linalg.norm(b - d[:, list(s)] @ np.linalg.lstsq(d[:, list(s)], b, rcond=None)[0])
               if s else np.linalg.norm(b) for s in supports)
    assert brute_force_sparse(p, 2).residual_norm == pytest.approx(best, rel=1e-12)


def test_brute_force_guard():
    rng = np.random.default_rng(8)
    p = SparseProblem.from_dictionary(random_complex(rng, 4, 17), random_complex(rng, 4))
    with pytest.raises(ValueError):
        brute_force_sparse(p, 2)
    p = SparseProblem.from_dictionary(random_complex(rng, 4, 5), random_complex(rng, 4))
    with pytest.raises(ValueError):
        brute_force_sparse(p, 4)


def test_gram_only_problem_matches_dictionary_problem():
    rng = np.random.default_rng(9)
    d, b = random_complex(rng, 7, 5), random_complex(rng, 7)
    full = SparseProblem.from_dictionary(d, b)
    gram = SparseProblem.from_gram(d.conj().T @ d, d.conj().T @ b, np.vdot(b, b).real)
    a, g = omp_k(full, 3), omp_k(gram, 3)
    assert a.support == g.support
    assert a.residual_norm == pytest.approx(g.residual_norm, abs=1e-10)


def test_non_psd_gram_path_runs():
    g = np.diag([2.0, -1.0, 0.5]).astype(complex)
    c = np.array([1.0, 0.3, 0.2], dtype=complex)
    rep = omp_k(SparseProblem.from_gram(g, c, 1.0, psd=False), 2)
    assert rep.support == [0, 1]
    np.testing.assert_allclose(rep.coefficients, [0.5, -0.3])


def _instance(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(3, 12))
    n = int(rng.integers(1, 17))
    return SparseProblem.from_dictionary(random_complex(rng, m, n), random_complex(rng, m))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 8))
def test_batch_and_naive_paths_agree(seed, k):
    p = _instance(seed)
    a, b = omp_k(p, k), omp_k(p, k, naive=True)
    assert a.support == b.support
    assert a.residual_norm == pytest.approx(b.residual_norm, abs=1e-10 * max(1.0, p.target_norm))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 8))
def test_trace_monotone_and_nested(seed, k):
    p = _instance(seed)
    rep = omp_k(p, k + 1)
    slack = 1e-12 * p.target_norm
    assert all(b <= a + slack for a, b in zip(rep.trace, rep.trace[1:]))
    assert len(set(rep.support)) == len(rep.support)
    assert rep.residual_norm <= omp_k(p, k).residual_norm + slack


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_omp_err_support_nonincreasing_in_tol(seed):
    p = _instance(seed)
    tols = np.linspace(0, p.target_norm, 10)
    sizes = [len(omp_err(p, t, p.atoms).support) for t in tols]
    assert all(b <= a for a, b in zip(sizes, sizes[1:]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3))
def test_brute_force_never_worse_than_omp(seed, k):
    p = _instance(seed)
    assert brute_force_sparse(p, k).residual_norm <= omp_k(p, k).residual_norm + 1e-12
