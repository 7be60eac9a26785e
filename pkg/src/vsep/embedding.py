"""Feedback matrices and low-dimensional embeddings of the exponential
iterate.

The update loop maintains X = n * exp(A) / Tr(exp(A)) for an accumulated
symmetric A.  This module provides:

* :class:`FeedbackMatrix`, the structured symmetric matrices produced by
  the oracle, with exact rational coefficients;
* :func:`accumulate`, compiling a history of feedback matrices into an
  implicit operator with a certified spectral-norm bound;
* :func:`project_embedding`, a randomized sketch of the Gram columns of X
  (Gaussian probes against a truncated Taylor expansion of exp(A/2));
* :func:`dense_reference` / :func:`dense_embedding`, the exact
  eigendecomposition-based versions used for validation and at small n;
* spectral-norm estimation helpers.

Floating point is used for everything spectral; the structured
coefficients stay exact rationals so that certificate identities can be
verified without rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

Rational = Union[int, Fraction]

DEFAULT_GAMMA = 0.25
DEFAULT_TAU = 0.125
DEFAULT_C_D = 4.0
DEFAULT_C_K = 4.0
DEFAULT_D_CAP = 5000
DEFAULT_K_CAP = 2000
DENSE_CAP = 64


class ScheduleError(RuntimeError):
    """Projection parameters demand more dimensions/terms than the caps
    allow; the calling schedule is mis-set for this instance size."""


def log_guard(n: int) -> float:
    """max(ln n, 1): keeps schedule formulas positive at tiny n."""
    return max(np.log(max(n, 1)), 1.0)


def _frac(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def structured_entries(
    y: Iterable[Fraction],
    spread_terms: Iterable[tuple[tuple[int, ...], Fraction]],
    path_terms: Iterable[tuple[tuple[int, ...], Fraction]],
    lam: Iterable[tuple[tuple[int, int], Fraction]],
) -> dict[tuple[int, int], Fraction]:
    """Exact upper-triangle entries of diag(y) + sum_S z_S K_S
    + sum_p f_p T_p - sum_ij lambda_ij L_ij.

    Exact accumulation makes structural cancellation (e.g. path terms
    against edge coefficients) produce true zeros, which are dropped.
    """
    e: dict[tuple[int, int], Fraction] = {}

    def add(i: int, j: int, v: Fraction) -> None:
        key = (i, j) if i <= j else (j, i)
        e[key] = e.get(key, Fraction(0)) + v

    for i, yi in enumerate(y):
        if yi:
            add(i, i, yi)
    for s, z in spread_terms:
        if not z:
            continue
        k = len(s)
        for i in s:
            add(i, i, z * (k - 1))
        ss = sorted(s)
        for a in range(k):
            for b in range(a + 1, k):
                add(ss[a], ss[b], -z)
    for p, f in path_terms:
        if not f:
            continue
        for a, b in zip(p, p[1:]):
            add(a, a, f)
            add(b, b, f)
            add(a, b, -f)
        add(p[0], p[0], -f)
        add(p[-1], p[-1], -f)
        add(p[0], p[-1], f)
    for (i, j), lmb in lam:
        if lmb:
            add(i, i, -lmb)
            add(j, j, -lmb)
            add(i, j, lmb)
    return {k: v for k, v in e.items() if v}


@dataclass(frozen=True, eq=False)
class FeedbackMatrix:
    """One oracle feedback step N = diag(y) + sum_p f_p T_p + sum_S z_S K_S
    - sum_ij lambda_ij L_ij, kept in structured form.

    T_p is the path-inequality matrix of path p (sum of hop Laplacians
    minus the endpoint Laplacian), K_S the pairwise-spread matrix of set S
    (|S| diag(1_S) - 1_S 1_S^T), and L_ij the single-edge Laplacian.  All
    coefficients are exact rationals; ``width_bound`` is the certified
    spectral-norm bound for this instance of the case that produced it.
    """

    n: int
    alpha: Fraction
    xi: Fraction
    y: tuple[Fraction, ...]
    easy_set: Optional[tuple[tuple[int, ...], Fraction]] = None
    path_terms: tuple[tuple[tuple[int, ...], Fraction], ...] = ()
    lam: tuple[tuple[tuple[int, int], Fraction], ...] = ()
    case: str = "custom"
    width_bound: float = 0.0

    def __post_init__(self):
        if len(self.y) != self.n:
            raise ValueError("y must have one entry per vertex")
        if self.easy_set is not None:
            s, z = self.easy_set
            if z < 0:
                raise ValueError("spread coefficient must be non-negative")
            if len(set(s)) != len(s) or any(not 0 <= i < self.n for i in s):
                raise ValueError("easy set must be distinct in-range vertices")
        for p, f in self.path_terms:
            if f < 0:
                raise ValueError("path coefficients must be non-negative")
            if len(p) < 2 or len(set(p)) != len(p):
                raise ValueError("path must have at least 2 distinct vertices")
            if any(not 0 <= i < self.n for i in p):
                raise ValueError("path vertex out of range")
        for (i, j), lam in self.lam:
            if lam < 0:
                raise ValueError("edge coefficients must be non-negative")
            if not (0 <= i < j < self.n):
                raise ValueError("edge coefficients must use ordered vertex pairs")
        if self.budget_total < self.alpha:
            raise ValueError(
                "feedback violates sum(y) + xi n^2 sum(z) >= alpha"
            )

    @property
    def budget_total(self) -> Fraction:
        """sum_i y_i + xi n^2 sum_S z_S, exact."""
        total = sum(self.y, Fraction(0))
        if self.easy_set is not None:
            total += self.xi * self.n * self.n * self.easy_set[1]
        return total

    def lambda_degrees(self) -> list[Fraction]:
        """Per-vertex sums of incident edge coefficients, exact."""
        deg = [Fraction(0)] * self.n
        for (i, j), lam in self.lam:
            deg[i] += lam
            deg[j] += lam
        return deg

    def degree_ok(self, weights: Sequence[int]) -> bool:
        return all(d <= w for d, w in zip(self.lambda_degrees(), weights))

    def entries(self) -> dict[tuple[int, int], Fraction]:
        """Exact upper-triangle entries (i <= j) of the assembled matrix.

        Exact accumulation makes structural cancellation (e.g. path terms
        against edge coefficients) produce true zeros, which are dropped.
        """
        spread = (self.easy_set,) if self.easy_set is not None else ()
        return structured_entries(self.y, spread, self.path_terms, self.lam)

    @cached_property
    def _dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for (i, j), v in self.entries().items():
            m[i, j] += float(v)
            if i != j:
                m[j, i] += float(v)
        return m

    def assemble_dense(self) -> np.ndarray:
        return self._dense.copy()

    @property
    def nnz(self) -> int:
        """Structural non-zeros, upper triangle including the diagonal."""
        return len(self.entries())

    def inner(self, x: np.ndarray) -> float:
        """Frobenius inner product N . X for a dense symmetric X."""
        return float(np.sum(self._dense * x))


def zero_feedback(n: int, alpha: Rational = 0, xi: Rational = 0) -> FeedbackMatrix:
    return FeedbackMatrix(
        n=n,
        alpha=_frac(alpha),
        xi=_frac(xi),
        y=tuple(Fraction(0) for _ in range(n)),
        case="zero",
    )


@dataclass(frozen=True, eq=False)
class AccumulatedOperator:
    """Implicit symmetric operator A = eta * sum_r N^(r).

    Matrix-vector products run off a compiled sparse matrix, in time
    proportional to the total number of non-zeros.  ``lambda_max_bound``
    is the certified bound eta * sum_r width_bound(N^(r)) >= ||A||.
    """

    n: int
    matrix: sp.csr_matrix = field(repr=False)
    lambda_max_bound: float = 0.0

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @classmethod
    def from_dense(cls, a: np.ndarray, lambda_max_bound: float) -> "AccumulatedOperator":
        return cls(
            n=a.shape[0],
            matrix=sp.csr_matrix(a),
            lambda_max_bound=lambda_max_bound,
        )


def accumulate(
    history: Sequence[FeedbackMatrix], eta: Rational, n: Optional[int] = None
) -> AccumulatedOperator:
    """Compile A = eta * sum of the history into an implicit operator.

    Entries are summed exactly before a single float conversion, so the
    result is invariant under permutation of the history.  ``n`` is only
    required when the history is empty (A = 0).
    """
    eta = _frac(eta)
    if not history:
        if n is None:
            raise ValueError("empty history needs an explicit vertex count")
        return AccumulatedOperator(
            n=n, matrix=sp.csr_matrix((n, n)), lambda_max_bound=0.0
        )
    n = history[0].n
    if any(fm.n != n for fm in history):
        raise ValueError("feedback matrices span different vertex sets")
    total: dict[tuple[int, int], Fraction] = {}
    for fm in history:
        for key, v in fm.entries().items():
            total[key] = total.get(key, Fraction(0)) + v
    rows, cols, vals = [], [], []
    for (i, j), v in total.items():
        v = v * eta
        if not v:
            continue
        rows.append(i)
        cols.append(j)
        vals.append(float(v))
        if i != j:
            rows.append(j)
            cols.append(i)
            vals.append(float(v))
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    bound = float(eta) * sum(fm.width_bound for fm in history)
    return AccumulatedOperator(n=n, matrix=mat, lambda_max_bound=bound)


@dataclass(frozen=True, eq=False)
class Embedding:
    """Columns of a d x n sketch whose Gram matrix approximates X.

    ``vectors[:, i]`` is the embedded vector of vertex i.  After trace
    normalization the squared column norms sum to n.
    """

    vectors: np.ndarray
    gamma: float
    tau: float
    trace_normalized: bool = True

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    def col(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    @cached_property
    def norms_sq(self) -> np.ndarray:
        return np.sum(self.vectors * self.vectors, axis=0)

    def norm_sq(self, i: int) -> float:
        return float(self.norms_sq[i])

    def dist_sq(self, i: int, j: int) -> float:
        diff = self.vectors[:, i] - self.vectors[:, j]
        return float(diff @ diff)

    def gram(self) -> np.ndarray:
        return self.vectors.T @ self.vectors

    def spread_over(self, s: Sequence[int]) -> float:
        """Sum of squared distances over unordered pairs of s."""
        cols = self.vectors[:, list(s)]
        norms = np.sum(cols * cols, axis=0)
        center = np.sum(cols, axis=1)
        return float(len(s) * np.sum(norms) - center @ center)


def projection_dimension(n: int, gamma: float, c_d: float = DEFAULT_C_D) -> int:
    return int(np.ceil(c_d * log_guard(n) / (gamma * gamma)))


def taylor_terms(
    n: int, tau: float, lambda_max: float, c_k: float = DEFAULT_C_K
) -> int:
    need = max(lambda_max * lambda_max, np.log(n ** 2.5 / tau), 1.0)
    return int(np.ceil(c_k * need))


def _taylor_apply(matvec: Callable[[np.ndarray], np.ndarray], u: np.ndarray, k: int) -> np.ndarray:
    """Sum of the first k+1 Taylor terms of exp applied to u."""
    acc = u.copy()
    term = u
    for j in range(1, k + 1):
        term = matvec(term) / j
        acc = acc + term
    return acc


def project_embedding(
    op: AccumulatedOperator,
    gamma: float,
    tau: float,
    lambda_max: float,
    seed,
    c_d: float = DEFAULT_C_D,
    c_k: float = DEFAULT_C_K,
    d_cap: int = DEFAULT_D_CAP,
    k_cap: int = DEFAULT_K_CAP,
) -> Embedding:
    """Randomized embedding of the Gram columns of n exp(A)/Tr(exp(A)).

    Multiplies d scaled Gaussian probes by a k-term Taylor expansion of
    exp(A/2) and trace-normalizes the result.  Deterministic for a fixed
    seed (an int or a numpy Generator).
    """
    if not (0 < gamma < 0.5):
        raise ValueError("gamma must lie in (0, 1/2)")
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = op.n
    d = projection_dimension(n, gamma, c_d)
    k = taylor_terms(n, tau, lambda_max, c_k)
    if d > d_cap or k > k_cap:
        raise ScheduleError(
            f"projection needs d={d}, k={k} (caps {d_cap}, {k_cap}); "
            "the schedule is mis-set for this instance"
        )
    rng = np.random.default_rng(seed)
    probes = rng.standard_normal((d, n)) / np.sqrt(d)
    half = op.matrix * 0.5
    sketch = _taylor_apply(lambda u: (half @ u.T).T, probes, k)
    trace = float(np.sum(sketch * sketch))
    if trace <= 0:
        raise ScheduleError("sketch collapsed to zero; increase dimensions")
    sketch = sketch * np.sqrt(n / trace)
    return Embedding(vectors=sketch, gamma=gamma, tau=tau, trace_normalized=True)


def dense_reference(a: np.ndarray, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Exact Gram columns of X = n exp(A)/Tr(exp(A)) for small dense A.

    Returns V with X = V^T V; eigenvalues are shifted by the max before
    exponentiation so the computation never overflows.
    """
    n = a.shape[0]
    if n > dense_cap:
        raise ValueError(f"dense reference limited to n <= {dense_cap}")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("accumulated matrix must be symmetric")
    vals, vecs = np.linalg.eigh(a)
    e = np.exp(vals - vals.max())
    scale = n * e / e.sum()
    return (vecs * np.sqrt(scale)).T


def dense_embedding(
    op: AccumulatedOperator,
    gamma: float = DEFAULT_GAMMA,
    tau: float = DEFAULT_TAU,
    dense_cap: int = DENSE_CAP,
) -> Embedding:
    """Exact embedding (d = n) from the dense reference decomposition."""
    v = dense_reference(op.dense(), dense_cap)
    return Embedding(vectors=v, gamma=gamma, tau=tau, trace_normalized=True)


def approximation_violations(
    emb: Embedding, exact_cols: np.ndarray, gamma: Optional[float] = None, tau: Optional[float] = None
) -> tuple[int, int]:
    """Count failures of the two sketch-accuracy inequalities.

    Checks |~n_i - n_i| <= gamma (~n_i + tau) for the n squared norms and
    the analogous bound for all n(n-1)/2 squared pairwise distances,
    where n_i comes from the exact Gram columns.  Returns
    (violations, checks).
    """
    g = emb.gamma if gamma is None else gamma
    t = emb.tau if tau is None else tau
    n = emb.n
    approx_n = emb.norms_sq
    exact_n = np.sum(exact_cols * exact_cols, axis=0)
    bad = int(np.sum(np.abs(approx_n - exact_n) > g * (approx_n + t)))
    total = n
    approx_g = emb.gram()
    exact_g = exact_cols.T @ exact_cols
    for i in range(n):
        for j in range(i + 1, n):
            da = approx_n[i] + approx_n[j] - 2 * approx_g[i, j]
            de = exact_n[i] + exact_n[j] - 2 * exact_g[i, j]
            if abs(da - de) > g * (da + t):
                bad += 1
            total += 1
    return bad, total


def power_iteration_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    n: int,
    iters: int = 200,
    seed=0,
) -> float:
    """Spectral-norm estimate of a symmetric operator by power iteration."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = matvec(x)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        est = norm
        x = y / norm
    return float(est)


def spectral_norm(m: np.ndarray, dense_cap: int = DENSE_CAP, seed=0) -> float:
    """||M|| for symmetric M: exact under the dense cap, else estimated."""
    if m.shape[0] <= dense_cap:
        return float(np.max(np.abs(np.linalg.eigvalsh(m))))
    return power_iteration_norm(lambda u: m @ u, m.shape[0], seed=seed)


def largest_eigenvalue(m: np.ndarray, dense_cap: int = DENSE_CAP, seed=0) -> float:
    """lambda_max(M) for symmetric M: exact under the dense cap, else via
    a spectral shift of power iteration."""
    if m.shape[0] <= dense_cap:
        return float(np.max(np.linalg.eigvalsh(m)))
    shift = power_iteration_norm(lambda u: m @ u, m.shape[0], seed=seed) + 1.0
    shifted = power_iteration_norm(
        lambda u: m @ u + shift * u, m.shape[0], seed=seed
    )
    return float(shifted - shift)
