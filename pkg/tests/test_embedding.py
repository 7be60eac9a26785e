"""Structured feedback matrices, exact accumulation, matrix-exponential
embeddings, and spectral estimates.

Reference values come from two routes that never share code with the
module under test: closed-form results for diagonal matrices, and
scipy.linalg.expm for dense ones.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from vsep.embedding import (
    DENSE_CAP,
    AccumulatedOperator,
    Embedding,
    FeedbackMatrix,
    ScheduleError,
    accumulate,
    approximation_violations,
    dense_embedding,
    dense_reference,
    largest_eigenvalue,
    log_guard,
    power_iteration_norm,
    project_embedding,
    projection_dimension,
    spectral_norm,
    structured_entries,
    taylor_terms,
    zero_feedback,
    _taylor_apply,
)

F = Fraction


# ---------------------------------------------------------------------------
# independent dense assemblers for the structured terms
# ---------------------------------------------------------------------------

def edge_laplacian(n, i, j):
    m = np.zeros((n, n))
    m[i, i] += 1
    m[j, j] += 1
    m[i, j] -= 1
    m[j, i] -= 1
    return m


def spread_matrix(n, s):
    """|S| diag(1_S) - 1_S 1_S^T, assembled directly."""
    ind = np.zeros(n)
    ind[list(s)] = 1
    return len(s) * np.diag(ind) - np.outer(ind, ind)


def path_matrix(n, p):
    """Sum of hop Laplacians minus the endpoint Laplacian."""
    m = np.zeros((n, n))
    for u, v in zip(p, p[1:]):
        m += edge_laplacian(n, u, v)
    return m - edge_laplacian(n, p[0], p[-1])


def entries_to_dense(n, entries):
    m = np.zeros((n, n))
    for (i, j), v in entries.items():
        m[i, j] += float(v)
        if i != j:
            m[j, i] += float(v)
    return m


# ---------------------------------------------------------------------------
# structured entries and FeedbackMatrix
# ---------------------------------------------------------------------------

def test_structured_entries_match_direct_assembly():
    n = 7
    y = (F(1), F(-2), F(0), F(3, 2), F(0), F(5), F(-1, 3))
    spread = (((0, 2, 5), F(1, 4)),)
    paths = (((1, 3, 4), F(2, 3)), ((0, 6), F(1, 2)))
    lam = (((1, 3), F(1, 5)), ((2, 4), F(3)))
    got = entries_to_dense(n, structured_entries(y, spread, paths, lam))
    want = np.diag([float(v) for v in y])
    want += 0.25 * spread_matrix(n, (0, 2, 5))
    want += (2 / 3) * path_matrix(n, (1, 3, 4)) + 0.5 * path_matrix(n, (0, 6))
    want -= 0.2 * edge_laplacian(n, 1, 3) + 3 * edge_laplacian(n, 2, 4)
    assert np.allclose(got, want, atol=1e-12)


def test_two_vertex_path_term_is_identically_zero():
    # a single-hop path matrix is its own endpoint Laplacian
    entries = structured_entries(
        (F(0),) * 4, (), (((1, 3), F(7, 2)),), ()
    )
    assert entries == {}


def test_path_term_cancels_against_edge_coefficient():
    # the hop (0,1) of the path and lambda_01 = f erase each other exactly
    f = F(1, 3)
    entries = structured_entries(
        (F(0),) * 3, (), (((0, 1, 2), f),), (((0, 1), f),)
    )
    assert (0, 1) not in entries
    assert entries[(1, 2)] == -f
    assert entries[(0, 2)] == f
    assert entries[(0, 0)] == -f  # hop +f, endpoint -f, lambda -f
    assert entries[(1, 1)] == f  # two hops +2f, lambda -f
    assert (2, 2) not in entries  # hop +f, endpoint -f


def test_feedback_matrix_dense_and_inner():
    n = 5
    fm = FeedbackMatrix(
        n=n,
        alpha=F(1),
        xi=F(9, 16),
        y=(F(1, 5),) * n,
        easy_set=((0, 1, 2), F(1, 10)),
        path_terms=(((0, 2, 4), F(1, 7)),),
        lam=(((1, 2), F(2, 9)),),
        case="custom",
        width_bound=10.0,
    )
    want = np.diag([0.2] * n)
    want += 0.1 * spread_matrix(n, (0, 1, 2))
    want += (1 / 7) * path_matrix(n, (0, 2, 4))
    want -= (2 / 9) * edge_laplacian(n, 1, 2)
    assert np.allclose(fm.assemble_dense(), want, atol=1e-12)

    x = np.arange(n * n, dtype=float).reshape(n, n)
    x = (x + x.T) / 2
    direct = sum(
        want[i, j] * x[i, j] for i in range(n) for j in range(n)
    )
    assert math.isclose(fm.inner(x), direct, rel_tol=1e-10)

    assert fm.budget_total == n * F(1, 5) + F(9, 16) * 25 * F(1, 10)
    assert fm.lambda_degrees()[1] == F(2, 9)
    assert fm.lambda_degrees()[3] == 0
    assert fm.degree_ok([1, 1, 1, 1, 1])


def test_feedback_matrix_validation():
    ok = dict(n=3, alpha=F(0), xi=F(9, 16), y=(F(0),) * 3)
    FeedbackMatrix(**ok)
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "y": (F(0),) * 2})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "easy_set": ((0, 0), F(1))})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "easy_set": ((0, 1), F(-1))})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "path_terms": (((0, 1, 0), F(1)),)})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "path_terms": (((2,), F(1)),)})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "lam": (((2, 1), F(1)),)})
    with pytest.raises(ValueError):
        FeedbackMatrix(**{**ok, "lam": (((1, 2), F(-1)),)})
    with pytest.raises(ValueError):
        # budget: sum(y) = 0 < alpha = 1
        FeedbackMatrix(**{**ok, "alpha": F(1)})


def test_zero_feedback():
    fm = zero_feedback(4)
    assert fm.entries() == {}
    assert fm.budget_total == 0
    assert np.array_equal(fm.assemble_dense(), np.zeros((4, 4)))


# ---------------------------------------------------------------------------
# accumulation
# ---------------------------------------------------------------------------

def make_random_feedback(rng, n):
    # y stays non-negative so sum(y) >= alpha = 0 always holds
    y = tuple(F(rng.integers(0, 6).item(), rng.integers(1, 7).item()) for _ in range(n))
    paths = []
    for _ in range(rng.integers(0, 3)):
        length = int(rng.integers(2, min(n, 5) + 1))
        p = tuple(int(v) for v in rng.permutation(n)[:length])
        paths.append((p, F(rng.integers(0, 4).item(), 3)))
    lam = []
    i, j = sorted(rng.permutation(n)[:2].tolist())
    lam.append(((int(i), int(j)), F(rng.integers(0, 5).item(), 2)))
    return FeedbackMatrix(
        n=n,
        alpha=F(0),
        xi=F(9, 16),
        y=y,
        path_terms=tuple(paths),
        lam=tuple(lam),
        width_bound=float(rng.integers(1, 10)),
    )


def test_accumulate_permutation_invariant_and_exact():
    rng = np.random.default_rng(7)
    n = 8
    history = [make_random_feedback(rng, n) for _ in range(12)]
    eta = F(3, 7)
    a = accumulate(history, eta)
    b = accumulate(list(reversed(history)), eta)
    assert np.array_equal(a.dense(), b.dense())
    assert math.isclose(a.lambda_max_bound, b.lambda_max_bound, rel_tol=1e-12)
    # exact route: sum entries as Fractions, then convert once
    total = np.zeros((n, n))
    for fm in history:
        total += entries_to_dense(n, {k: v * eta for k, v in fm.entries().items()})
    assert np.allclose(a.dense(), total, atol=1e-12)
    assert math.isclose(
        a.lambda_max_bound,
        float(eta) * sum(fm.width_bound for fm in history),
        rel_tol=1e-12,
    )


def test_accumulate_empty_history():
    op = accumulate([], F(1, 2), n=6)
    assert op.n == 6
    assert op.lambda_max_bound == 0.0
    assert np.array_equal(op.dense(), np.zeros((6, 6)))
    with pytest.raises(ValueError):
        accumulate([], F(1, 2))
    with pytest.raises(ValueError):
        accumulate([zero_feedback(3), zero_feedback(4)], F(1))


def test_accumulated_operator_matvec():
    a = np.array([[2.0, -1.0], [-1.0, 3.0]])
    op = AccumulatedOperator.from_dense(a, lambda_max_bound=4.0)
    u = np.array([1.0, 2.0])
    assert np.allclose(op.matvec(u), a @ u)
    assert np.array_equal(op.dense(), a)


# ---------------------------------------------------------------------------
# matrix-exponential embeddings
# ---------------------------------------------------------------------------

def test_dense_reference_diagonal_closed_form():
    # for A = diag(a), X = n * diag(exp(a_i)) / sum(exp(a_j)), exactly
    a = np.diag([0.3, -1.2, 0.0, 2.5])
    v = dense_reference(a)
    gram = v.T @ v
    exps = [math.exp(x) for x in (0.3, -1.2, 0.0, 2.5)]
    total = sum(exps)
    want = np.diag([4 * e / total for e in exps])
    assert np.allclose(gram, want, atol=1e-12)


def test_dense_reference_matches_scipy_expm():
    rng = np.random.default_rng(11)
    for _ in range(5):
        n = int(rng.integers(3, 13))
        sym = rng.standard_normal((n, n))
        sym = (sym + sym.T) / 2
        v = dense_reference(sym)
        ex = scipy.linalg.expm(sym)
        want = n * ex / np.trace(ex)
        assert np.allclose(v.T @ v, want, atol=1e-8)


def test_dense_reference_guards():
    with pytest.raises(ValueError):
        dense_reference(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        dense_reference(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        dense_reference(np.zeros((65, 65)), dense_cap=64)
    # large entries must not overflow thanks to the spectral shift
    v = dense_reference(np.diag([1000.0, 0.0]))
    assert np.isfinite(v).all()
    gram = v.T @ v
    assert math.isclose(gram[0, 0], 2.0, rel_tol=1e-9)


def test_taylor_apply_scalar_partial_sum():
    # one-dimensional case: partial sums of exp(0.7), computed two ways
    k = 12
    u = np.array([[1.0]])
    got = _taylor_apply(lambda w: 0.7 * w, u, k)[0, 0]
    want = sum(0.7 ** j / math.factorial(j) for j in range(k + 1))
    assert math.isclose(got, want, rel_tol=1e-13)
    assert math.isclose(got, math.exp(0.7), rel_tol=1e-9)


def test_dimension_and_term_formulas():
    assert projection_dimension(64, 0.25) == math.ceil(
        4.0 * math.log(64) / 0.0625
    )
    assert projection_dimension(2, 0.25) == math.ceil(4.0 / 0.0625)  # log guard
    assert taylor_terms(64, 0.125, 1.0) == math.ceil(
        4.0 * math.log(64 ** 2.5 / 0.125)
    )
    assert taylor_terms(4, 10.0, 9.0) == math.ceil(4.0 * 81)
    assert log_guard(2) == 1.0
    assert math.isclose(log_guard(100), math.log(100))


def test_project_embedding_deterministic_and_normalized():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((10, 10))
    a = (a + a.T) / 4
    op = AccumulatedOperator.from_dense(a, lambda_max_bound=float(spectral_norm(a)))
    e1 = project_embedding(op, 0.25, 0.125, op.lambda_max_bound, seed=42)
    e2 = project_embedding(op, 0.25, 0.125, op.lambda_max_bound, seed=42)
    e3 = project_embedding(op, 0.25, 0.125, op.lambda_max_bound, seed=43)
    assert np.array_equal(e1.vectors, e2.vectors)
    assert not np.array_equal(e1.vectors, e3.vectors)
    assert math.isclose(float(np.sum(e1.norms_sq)), 10.0, rel_tol=1e-9)


def test_project_embedding_guards():
    op = accumulate([], F(1), n=4)
    with pytest.raises(ValueError):
        project_embedding(op, 0.6, 0.125, 0.0, seed=0)
    with pytest.raises(ValueError):
        project_embedding(op, 0.25, 0.0, 0.0, seed=0)
    with pytest.raises(ScheduleError):
        project_embedding(op, 0.25, 0.125, 0.0, seed=0, d_cap=2)
    with pytest.raises(ScheduleError):
        project_embedding(op, 0.25, 0.125, 0.0, seed=0, k_cap=2)


def test_projection_accuracy_against_dense():
    # aggregate sketch-accuracy rate over a few seeds and operators; the
    # per-pair failure rate scales like exp(-c_d log n / 2), so small n
    # warrants a looser gate here.  The acceptance suite runs the
    # full-size version at the sizes the guarantee targets.
    rng = np.random.default_rng(19)
    bad = total = 0
    for trial in range(5):
        n = int(rng.integers(16, 33))
        a = rng.standard_normal((n, n))
        a = (a + a.T) / (2 * n)  # keep ||A|| modest, as the schedule does
        lam = float(spectral_norm(a))
        op = AccumulatedOperator.from_dense(a, lambda_max_bound=lam)
        emb = project_embedding(op, 0.25, 0.125, lam, seed=trial)
        exact = dense_reference(a)
        b, t = approximation_violations(emb, exact)
        bad += b
        total += t
    assert total > 500
    assert bad <= 0.025 * total


def test_dense_embedding_is_exact():
    rng = np.random.default_rng(23)
    a = rng.standard_normal((8, 8))
    a = (a + a.T) / 4
    op = AccumulatedOperator.from_dense(a, lambda_max_bound=10.0)
    emb = dense_embedding(op)
    exact = dense_reference(a)
    bad, total = approximation_violations(emb, exact)
    assert bad == 0 and total == 8 + 28
    assert math.isclose(float(np.sum(emb.norms_sq)), 8.0, rel_tol=1e-12)


def test_spread_over_matches_double_loop():
    rng = np.random.default_rng(5)
    emb = Embedding(vectors=rng.standard_normal((6, 9)), gamma=0.25, tau=0.125)
    s = [1, 3, 4, 8]
    direct = sum(
        emb.dist_sq(s[i], s[j])
        for i in range(len(s))
        for j in range(i + 1, len(s))
    )
    assert math.isclose(emb.spread_over(s), direct, rel_tol=1e-10)
    assert emb.spread_over([2]) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# spectral estimates
# ---------------------------------------------------------------------------

def test_spectral_norm_dense_exact():
    m = np.diag([3.0, -5.0, 1.0])
    assert spectral_norm(m) == 5.0
    assert largest_eigenvalue(m) == 3.0


def test_power_iteration_within_tolerance():
    rng = np.random.default_rng(31)
    m = rng.standard_normal((30, 30))
    m = (m + m.T) / 2
    exact = float(np.max(np.abs(np.linalg.eigvalsh(m))))
    est = power_iteration_norm(lambda u: m @ u, 30, iters=200, seed=0)
    assert abs(est - exact) <= 0.05 * exact
    assert power_iteration_norm(lambda u: 0.0 * u, 30) == 0.0


def test_largest_eigenvalue_power_path_negative_definite():
    # force the power-iteration branch with a tiny cap: the plain norm
    # sees |lambda_min|, the shifted pass must recover lambda_max < 0
    rng = np.random.default_rng(41)
    q, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    vals = -np.linspace(1.0, 9.0, 40)
    m = (q * vals) @ q.T
    est = largest_eigenvalue(m, dense_cap=10, seed=1)
    assert abs(est - (-1.0)) <= 0.05 * 9.0
    norm_est = spectral_norm(m, dense_cap=10, seed=1)
    assert abs(norm_est - 9.0) <= 0.05 * 9.0
