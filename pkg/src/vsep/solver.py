"""Multiplicative-weights driver and the outer search over the objective
guess.

One run at guess alpha maintains X = n exp(eta * sum N) / Tr(...), asks
the oracle for feedback against the current embedding, and either stops
at a separator the oracle found or completes the scheduled horizon and
assembles the averaged dual certificate proving the relaxation value is
at least alpha - delta.  The outer driver sweeps alpha geometrically,
keeps the best separator seen anywhere, and the largest certified alpha.

Schedule quantities are floats; everything entering a certificate stays
an exact rational so the budget and degree identities can be asserted
with == rather than tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations, permutations
from typing import Optional, Union

import numpy as np

from .embedding import (
    DEFAULT_GAMMA,
    DENSE_CAP,
    AccumulatedOperator,
    Embedding,
    Rational,
    ScheduleError,
    dense_reference,
    largest_eigenvalue,
    log_guard,
    project_embedding,
    spectral_norm,
    structured_entries,
)
from .graphs import (
    SeparatorSolution,
    WeightedGraph,
    brute_force_opt,
    validate_separator,
)
from .oracle import (
    OracleCounters,
    OracleError,
    OracleParams,
    SeparatorOutcome,
    run_oracle,
)

# substream tags of the documented splitting scheme
# SeedSequence([seed, _EMBED_STREAM, t])       projection probes, iteration t
# SeedSequence([seed, _ORACLE_STREAM, t, r])   oracle directions, replica r
# SeedSequence([seed, _SEARCH_STREAM, i])      per-run child seed, run index i
_EMBED_STREAM = 1
_ORACLE_STREAM = 2
_SEARCH_STREAM = 3


class CertificationError(RuntimeError):
    """An internal soundness check failed: a certificate flunked its own
    spectral test, an identity that holds by construction broke, or a
    returned separator failed validation.  Signals mis-tuned constants or
    a bug, never a bad input; surfaced with diagnostics in the message."""


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def _child_seed(seed: int, index: int) -> int:
    return int(
        np.random.SeedSequence([int(seed), _SEARCH_STREAM, index]).generate_state(1)[0]
    )


def clamp_epsilon(epsilon: float, n: int) -> tuple[float, bool]:
    """Clamp the locality exponent into [1/(4 L(n)), 1].

    The window's endpoints are soft constants, so out-of-range values are
    pulled in rather than rejected; the caller surfaces a warning.
    """
    lo = 1.0 / (4.0 * log_guard(n))
    clamped = min(max(epsilon, lo), 1.0)
    return clamped, clamped != epsilon


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the solve pipeline.

    ``c`` is the target balance, ``c_prime`` the achieved balance of
    returned separators (default c/8), ``epsilon`` the locality exponent
    trading approximation for flow work.  ``t_cap`` truncates runs whose
    scheduled horizon is asymptotic-scale; a truncated run is reported as
    inconclusive, never as a certificate.  ``sigma`` is the projection
    separation margin; with ``auto_halve_sigma`` a fruitless replica
    halves it (consuming replication slots, so call accounting is
    unaffected).  ``rho_override`` substitutes a trusted width bound for
    the composite one; runs abort if an emitted matrix exceeds it.
    """

    c: Fraction = Fraction(1, 3)
    epsilon: float = 0.5
    c_prime: Optional[Fraction] = None
    sigma: float = 0.05
    sigma_floor: float = 1e-4
    auto_halve_sigma: bool = True
    chain_rounds_const: float = 1.0
    path_exponent: float = 0.25
    throughput_margin: Fraction = Fraction(1, 4)
    gamma: float = DEFAULT_GAMMA
    tau: Optional[float] = None
    t_cap: int = 10_000
    dense_cap: int = DENSE_CAP
    brute_cap: int = 14
    brute_bypass: bool = True
    replication: Optional[int] = None
    replication_cap: int = 64
    certification_tol: float = 1e-6
    consistency_cap: float = 1e9
    restrict_sort_to_s: bool = True
    refine_steps: int = 2
    guard_band: float = 1e-9
    rho_override: Optional[float] = None
    telemetry: bool = False

    def __post_init__(self):
        if not (0 < self.c < Fraction(1, 2)):
            raise ValueError("balance c must lie in (0, 1/2)")
        if self.c_prime is not None and not (0 < self.c_prime <= self.c):
            raise ValueError("achieved balance c' must lie in (0, c]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.throughput_margin < Fraction(1, 2)):
            raise ValueError("throughput margin must lie in (0, 1/2)")
        if self.t_cap < 1 or self.brute_cap < 0:
            raise ValueError("caps must be positive")
        if self.replication is not None and self.replication < 1:
            raise ValueError("replication width must be >= 1")
        if self.sigma < 0 or self.sigma_floor < 0:
            raise ValueError("sigma must be non-negative")
        if self.refine_steps < 0:
            raise ValueError("refine_steps must be >= 0")

    def resolved_c_prime(self) -> Fraction:
        return self.c_prime if self.c_prime is not None else self.c / 8

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        xi = Fraction(9, 4) * self.c * self.c
        return float(min(Fraction(2), xi / 2))

    def resolved_replication(self, n: int, epsilon: float) -> int:
        if self.replication is not None:
            return self.replication
        width = math.ceil(n**epsilon * log_guard(n))
        return max(1, min(width, self.replication_cap))


def rationalize_beta(
    beta0: float, n: int, margin: Fraction = Fraction(1, 4)
) -> tuple[int, int]:
    """Integer throughput p/q with p = ceil((2n/c'') beta0), q = floor(2n/c'').

    Guarantees p/q in [beta0, 2 beta0] and keeps both polynomially
    bounded.  pre: beta0 >= c''/n, else the ceiling could overshoot the
    doubling and the guarantee breaks.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < margin < Fraction(1, 2)):
        raise ValueError("margin must lie in (0, 1/2)")
    b0 = Fraction(beta0)
    if b0 < margin / n:
        raise ValueError(
            f"beta0={beta0} below the rationalization floor {float(margin) / n:.3g}"
        )
    ratio = 2 * n / margin
    q = math.floor(ratio)
    p = math.ceil(b0 * ratio)
    return p, q


def make_oracle_params(
    g: WeightedGraph,
    alpha: Rational,
    config: SolverConfig,
    sigma: Optional[float] = None,
) -> OracleParams:
    """Instantiate the oracle constants for one run at objective guess alpha.

    Delta = sqrt(eps/L(n)) is the squared-distance slack, beta0 the
    per-terminal throughput 6 alpha / (c' n Delta) before rationalization,
    K the matchings per chain attempt, and the harvest target n^(1-eps/4)
    paths by default.
    """
    n = g.n
    alpha = Fraction(alpha)
    eps, _ = clamp_epsilon(config.epsilon, n)
    lg = log_guard(n)
    delta_spread = math.sqrt(eps / lg)
    c_prime = config.resolved_c_prime()
    beta0 = float(6 * alpha / (c_prime * n)) / delta_spread
    p, q = rationalize_beta(beta0, n, config.throughput_margin)
    k_rounds = max(1, math.ceil(config.chain_rounds_const * delta_spread * lg))
    path_min = max(1, math.ceil(n ** (1.0 - config.path_exponent * eps)))
    attempt_budget = k_rounds * max(1, math.ceil(n**eps * lg))
    return OracleParams(
        n=n,
        alpha=alpha,
        c=config.c,
        c_prime=c_prime,
        sigma=config.sigma if sigma is None else sigma,
        epsilon=eps,
        delta_spread=delta_spread,
        beta_p=p,
        beta_q=q,
        k_rounds=k_rounds,
        path_min=path_min,
        attempt_budget=attempt_budget,
        restrict_sort_to_s=config.restrict_sort_to_s,
        guard_band=config.guard_band,
    )


@dataclass(frozen=True)
class MMWUSchedule:
    """Update schedule of one run: delta = alpha/2 exactly,
    eta = delta / (2 n rho^2), T = ceil(4 n^2 rho^2 L(n) / delta^2).

    rho is the a-priori width bound, the max of the three per-case bounds
    in ``case_bounds``; the run additionally checks every emitted matrix
    against its case bound and aborts on violation, so a configured
    override of rho stays sound.
    """

    alpha: Fraction
    delta: Fraction
    rho: float
    eta: float
    iterations: int
    iteration_cap: int
    case_bounds: dict = field(repr=False)

    @property
    def run_iterations(self) -> int:
        return min(self.iterations, self.iteration_cap)

    @property
    def completes(self) -> bool:
        return self.iterations <= self.iteration_cap

    @property
    def consistency(self) -> float:
        """eta * rho * T, the dimensionless budget of the regret algebra."""
        return self.eta * self.rho * self.iterations

    @staticmethod
    def case_width_bounds(params: OracleParams) -> dict:
        """A-priori spectral-norm bound per feedback case.

        easy:  max eigenvalue magnitude alpha (2/xi - 1) / n;
        flow:  alpha/n + 2 beta (endpoint mass is throughput-capped);
        chain: alpha/n + 12 alpha / Delta (each of the exactly path_min
               paths touches a vertex at most twice in hops, once as an
               endpoint).
        """
        n = params.n
        alpha = params.alpha
        easy = float(alpha * (2 / params.xi - 1) / n)
        flow = float(alpha / n + 2 * params.beta)
        per_path = 2 * float(alpha) / (params.path_min * params.delta_spread)
        chain = float(alpha / n) + per_path * 2 * (2 * params.path_min + params.path_min)
        return {"easy": easy, "flow": flow, "chain": chain}

    @classmethod
    def plan(cls, params: OracleParams, config: SolverConfig) -> "MMWUSchedule":
        n = params.n
        alpha = params.alpha
        bounds = cls.case_width_bounds(params)
        rho = max(bounds.values())
        if config.rho_override is not None:
            rho = config.rho_override
            bounds = {k: min(v, rho) for k, v in bounds.items()}
        delta = alpha / 2
        eta = float(delta) / (2 * n * rho * rho)
        iterations = math.ceil(
            4 * n * n * rho * rho * log_guard(n) / float(delta) ** 2
        )
        sched = cls(
            alpha=alpha,
            delta=delta,
            rho=rho,
            eta=eta,
            iterations=iterations,
            iteration_cap=config.t_cap,
            case_bounds=bounds,
        )
        if eta * rho > 1.0:
            raise ScheduleError(f"eta*rho = {eta * rho:.3g} > 1 breaks the regret algebra")
        if sched.consistency > config.consistency_cap:
            raise ScheduleError(
                f"schedule consistency eta*rho*T = {sched.consistency:.3g} "
                f"exceeds the configured cap {config.consistency_cap:.3g}"
            )
        return sched


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Averaged dual solution certifying the relaxation value >= alpha - delta.

    y_i = -delta/n + mean_t y_i^(t); z, f, lam are plain averages, keyed
    by vertex set, path, and edge.  Feasibility needs z, f, lam >= 0, the
    per-vertex degree bound on lam, and the assembled matrix
    diag(y) + sum f T + sum z K - sum lam L to be negative semidefinite
    (measured top eigenvalue below tolerance); the objective then equals
    alpha - delta exactly.
    """

    n: int
    alpha: Fraction
    delta: Fraction
    xi: Fraction
    y: tuple[Fraction, ...]
    z: tuple[tuple[tuple[int, ...], Fraction], ...]
    f: tuple[tuple[tuple[int, ...], Fraction], ...]
    lam: tuple[tuple[tuple[int, int], Fraction], ...]
    lambda_max_estimate: float
    norm_scale: float

    @property
    def certified_lower_bound(self) -> Fraction:
        return self.alpha - self.delta

    def objective(self) -> Fraction:
        """sum(y) + xi n^2 sum(z); equals alpha - delta by the averaging."""
        zsum = sum((v for _, v in self.z), Fraction(0))
        return sum(self.y, Fraction(0)) + self.xi * self.n * self.n * zsum

    def entries(self) -> dict[tuple[int, int], Fraction]:
        return structured_entries(self.y, self.z, self.f, self.lam)

    def assemble_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for (i, j), v in self.entries().items():
            out[i, j] += float(v)
            if i != j:
                out[j, i] += float(v)
        return out

    def nonneg_ok(self) -> bool:
        return (
            all(v >= 0 for _, v in self.z)
            and all(v >= 0 for _, v in self.f)
            and all(v >= 0 for _, v in self.lam)
        )

    def lambda_degrees(self) -> dict[int, Fraction]:
        deg: dict[int, Fraction] = {}
        for (i, j), v in self.lam:
            deg[i] = deg.get(i, Fraction(0)) + v
            deg[j] = deg.get(j, Fraction(0)) + v
        return deg

    def degree_ok(self, g: WeightedGraph) -> bool:
        return all(v <= g.weights[i] for i, v in self.lambda_degrees().items())


@dataclass(frozen=True, eq=False)
class RunDiagnostics:
    """Measured quantities of one completed run, for regret arithmetic."""

    alpha: Fraction
    eta: float
    rho: float
    iterations_run: int
    iterations_scheduled: int
    mean_inner: float
    sum_matrix: np.ndarray = field(repr=False)
    case_counts: dict = field(repr=False)
    widths_max: float = 0.0
    replication: int = 1
    sigma_final: float = 0.0


@dataclass(frozen=True, eq=False)
class SeparatorFound:
    separator: SeparatorSolution
    alpha: Fraction
    kappa: Optional[float]
    iteration: int
    via: str


@dataclass(frozen=True, eq=False)
class CertificateFound:
    certificate: DualCertificate
    diagnostics: RunDiagnostics


@dataclass(frozen=True, eq=False)
class Inconclusive:
    reason: str
    iterations_run: int
    alpha: Fraction


MMWUOutcome = Union[SeparatorFound, CertificateFound, Inconclusive]


def mmwu_run(
    g: WeightedGraph,
    alpha: Rational,
    config: SolverConfig,
    seed: int,
    counters: Optional[OracleCounters] = None,
) -> MMWUOutcome:
    """One run at objective guess alpha.

    Each iteration embeds the current exponential iterate (exactly under
    the dense cap, by randomized projection above it), then asks the
    oracle, replicating over independent substreams until one replica
    produces an outcome.  A separator outcome returns immediately; a full
    horizon of feedback assembles the averaged certificate and verifies
    it spectrally.  Capped or width-violating or oracle-exhausted runs
    return Inconclusive.  pre: alpha in [1, w(V)], seed >= 0.
    """
    alpha = Fraction(alpha)
    n = g.n
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    if not (1 <= alpha <= g.total_weight()):
        raise ValueError(f"alpha must lie in [1, w(V)] = [1, {g.total_weight()}]")
    if config.brute_bypass and n <= config.brute_cap:
        _, sol = brute_force_opt(g, config.c, cap=config.brute_cap)
        return SeparatorFound(
            separator=sol, alpha=alpha, kappa=None, iteration=0, via="brute"
        )

    params = make_oracle_params(g, alpha, config)
    sched = MMWUSchedule.plan(params, config)
    replication = config.resolved_replication(n, params.epsilon)
    tau_val = config.resolved_tau()
    counters = counters if counters is not None else OracleCounters(
        telemetry=[] if config.telemetry else None
    )

    a_eta = np.zeros((n, n))
    eta_width_sum = 0.0
    y_sum = [Fraction(0)] * n
    z_sum: dict[tuple[int, ...], Fraction] = {}
    f_sum: dict[tuple[int, ...], Fraction] = {}
    lam_sum: dict[tuple[int, int], Fraction] = {}
    inner_sum = 0.0
    sum_matrix = np.zeros((n, n))
    case_counts: dict[str, int] = {}
    widths_max = 0.0
    sigma_now = params.sigma
    dense_mode = n <= config.dense_cap
    t_run = sched.run_iterations

    for t in range(t_run):
        if dense_mode:
            emb = Embedding(
                vectors=dense_reference(a_eta, config.dense_cap),
                gamma=config.gamma,
                tau=tau_val,
            )
        else:
            op = AccumulatedOperator.from_dense(a_eta, lambda_max_bound=eta_width_sum)
            try:
                emb = project_embedding(
                    op,
                    config.gamma,
                    tau_val,
                    lambda_max=eta_width_sum,
                    seed=_substream(seed, _EMBED_STREAM, t),
                )
            except ScheduleError as exc:
                return Inconclusive(
                    reason=f"projection schedule: {exc}", iterations_run=t, alpha=alpha
                )

        outcome = None
        for r in range(replication):
            if params.sigma != sigma_now:
                params = replace(params, sigma=sigma_now)
            try:
                outcome = run_oracle(
                    g, emb, params, _substream(seed, _ORACLE_STREAM, t, r), counters
                )
                break
            except OracleError as exc:
                if (
                    config.auto_halve_sigma
                    and getattr(exc, "harvested", None) == 0
                    and sigma_now > config.sigma_floor
                ):
                    sigma_now = max(sigma_now / 2.0, config.sigma_floor)
        if outcome is None:
            return Inconclusive(
                reason=f"oracle exhausted {replication} replicas at iteration {t}",
                iterations_run=t,
                alpha=alpha,
            )

        if isinstance(outcome, SeparatorOutcome):
            sol = outcome.separator
            ok, msg = validate_separator(g, sol, sol.balance_achieved)
            if not ok:
                raise CertificationError(f"oracle separator failed validation: {msg}")
            kappa = float(2 * params.c_prime * params.beta * n / alpha)
            return SeparatorFound(
                separator=sol, alpha=alpha, kappa=kappa, iteration=t, via="oracle"
            )

        fm = outcome.feedback
        bound = sched.case_bounds.get(fm.case)
        if bound is None or fm.width_bound > bound * (1 + 1e-9):
            return Inconclusive(
                reason=(
                    f"width {fm.width_bound:.6g} exceeds the {fm.case} "
                    f"bound {bound:.6g} at iteration {t}"
                ),
                iterations_run=t,
                alpha=alpha,
            )
        inner = fm.inner(emb.gram())
        if inner > 0:
            raise CertificationError(
                f"feedback lost its sign: N.X = {inner:.6g} > 0 "
                f"(case {fm.case}, iteration {t})"
            )

        for i, yi in enumerate(fm.y):
            y_sum[i] += yi
        if fm.easy_set is not None:
            s, zv = fm.easy_set
            z_sum[s] = z_sum.get(s, Fraction(0)) + zv
        for pth, fv in fm.path_terms:
            f_sum[pth] = f_sum.get(pth, Fraction(0)) + fv
        for edge, lv in fm.lam:
            lam_sum[edge] = lam_sum.get(edge, Fraction(0)) + lv
        nd = fm._dense
        sum_matrix += nd
        a_eta = a_eta + sched.eta * nd
        eta_width_sum += sched.eta * fm.width_bound
        inner_sum += inner
        case_counts[fm.case] = case_counts.get(fm.case, 0) + 1
        widths_max = max(widths_max, fm.width_bound)

    if not sched.completes:
        return Inconclusive(
            reason=(
                f"iteration cap {t_run} reached before the scheduled "
                f"horizon {sched.iterations}"
            ),
            iterations_run=t_run,
            alpha=alpha,
        )

    shift = -sched.delta / n
    y_avg = tuple(shift + ys / t_run for ys in y_sum)
    z_avg = tuple((s, v / t_run) for s, v in sorted(z_sum.items()))
    f_avg = tuple((p, v / t_run) for p, v in sorted(f_sum.items()))
    lam_avg = tuple((e, v / t_run) for e, v in sorted(lam_sum.items()))
    cert = DualCertificate(
        n=n,
        alpha=alpha,
        delta=sched.delta,
        xi=params.xi,
        y=y_avg,
        z=z_avg,
        f=f_avg,
        lam=lam_avg,
        lambda_max_estimate=0.0,
        norm_scale=0.0,
    )
    dense_n = cert.assemble_dense()
    lam_max = largest_eigenvalue(dense_n, config.dense_cap, seed=seed)
    scale = spectral_norm(dense_n, config.dense_cap, seed=seed)
    cert = replace(cert, lambda_max_estimate=lam_max, norm_scale=scale)

    if not cert.nonneg_ok():
        raise CertificationError("averaged dual has a negative z/f/lambda")
    if not cert.degree_ok(g):
        raise CertificationError("averaged lambda degrees exceed vertex weights")
    if cert.objective() != alpha - sched.delta:
        raise CertificationError(
            f"dual objective {cert.objective()} != alpha - delta "
            f"= {alpha - sched.delta}"
        )
    tol = config.certification_tol * max(scale, 1e-12)
    if lam_max > tol:
        raise CertificationError(
            f"certificate rejected: lambda_max {lam_max:.3e} > tolerance "
            f"{tol:.3e} (alpha={alpha}, T={t_run}, eta={sched.eta:.3g}, "
            f"rho={sched.rho:.3g}, cases={case_counts})"
        )
    diagnostics = RunDiagnostics(
        alpha=alpha,
        eta=sched.eta,
        rho=sched.rho,
        iterations_run=t_run,
        iterations_scheduled=sched.iterations,
        mean_inner=inner_sum / t_run,
        sum_matrix=sum_matrix,
        case_counts=case_counts,
        widths_max=widths_max,
        replication=replication,
        sigma_final=sigma_now,
    )
    return CertificateFound(certificate=cert, diagnostics=diagnostics)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Everything one solve produced.

    ``alpha_star`` is the largest guess whose run certified a lower
    bound, ``certificate`` that run's certificate, ``kappa`` the
    guarantee factor 2 c' beta n / alpha of the run that produced the
    returned separator (None for brute/fallback separators).
    ``cost_vs_bound_ok`` records cost >= (alpha_star - delta)/4 whenever
    a certificate is present.
    """

    separator: SeparatorSolution
    alpha_star: Optional[Fraction]
    certificate: Optional[DualCertificate]
    certified_lower_bound: Optional[Fraction]
    kappa: Optional[float]
    separator_alpha: Optional[Fraction]
    separator_via: str
    ratio_vs_brute: Optional[Fraction]
    brute_opt: Optional[int]
    cost_vs_bound_ok: Optional[bool]
    counters: dict = field(repr=False)
    alphas_tried: tuple[Fraction, ...]
    seed: int
    epsilon_used: float
    notes: tuple[str, ...] = ()


def binary_search_solve(g: WeightedGraph, config: SolverConfig, seed: int) -> SolveReport:
    """Geometric sweep over alpha in [1, w(V)] plus integer refinement.

    Keeps the cheapest separator seen at any guess and the largest
    certified guess; inconclusive runs count as failed certifications
    (conservative toward larger separators, never toward false lower
    bounds).  The all-separator fallback C = V makes failure impossible.
    Small instances delegate to brute force when ``brute_bypass`` is on.
    """
    n = g.n
    notes: list[str] = []
    eps_used, warned = clamp_epsilon(config.epsilon, n)
    if warned:
        notes.append(
            f"epsilon clamped from {config.epsilon:.6g} to {eps_used:.6g} at n={n}"
        )
    counters = OracleCounters(telemetry=[] if config.telemetry else None)
    totals = {"mmwu_runs": 0, "iterations": 0}

    if config.brute_bypass and n <= config.brute_cap:
        opt, sol = brute_force_opt(g, config.c, cap=config.brute_cap)
        ratio = Fraction(sol.cost, opt) if opt > 0 else None
        if opt == 0:
            notes.append("brute-force optimum is 0; ratio undefined")
        return SolveReport(
            separator=sol,
            alpha_star=None,
            certificate=None,
            certified_lower_bound=None,
            kappa=None,
            separator_alpha=None,
            separator_via="brute",
            ratio_vs_brute=ratio,
            brute_opt=opt,
            cost_vs_bound_ok=None,
            counters=_counter_dict(counters, totals),
            alphas_tried=(),
            seed=seed,
            epsilon_used=eps_used,
            notes=tuple(notes),
        )

    w_total = g.total_weight()
    ladder: list[Fraction] = [Fraction(1)]
    while ladder[-1] * 2 <= w_total:
        ladder.append(ladder[-1] * 2)

    best_sep: Optional[SeparatorFound] = None
    best_cert: Optional[CertificateFound] = None
    alphas_tried: list[Fraction] = []

    def run_at(a: Fraction) -> MMWUOutcome:
        idx = totals["mmwu_runs"]
        totals["mmwu_runs"] += 1
        alphas_tried.append(a)
        res = mmwu_run(g, a, config, _child_seed(seed, idx), counters)
        if isinstance(res, SeparatorFound):
            totals["iterations"] += res.iteration + 1
        elif isinstance(res, CertificateFound):
            totals["iterations"] += res.diagnostics.iterations_run
        else:
            totals["iterations"] += res.iterations_run
            notes.append(f"alpha={a}: inconclusive ({res.reason})")
        return res

    def consider(res: MMWUOutcome) -> None:
        nonlocal best_sep, best_cert
        if isinstance(res, SeparatorFound):
            if best_sep is None or res.separator.cost < best_sep.separator.cost:
                best_sep = res
        elif isinstance(res, CertificateFound):
            if (
                best_cert is None
                or res.certificate.alpha > best_cert.certificate.alpha
            ):
                best_cert = res

    separator_alphas: list[Fraction] = []
    for a in ladder:
        res = run_at(a)
        consider(res)
        if isinstance(res, SeparatorFound):
            separator_alphas.append(a)

    lo = best_cert.certificate.alpha if best_cert is not None else None
    hi_candidates = [a for a in separator_alphas if lo is None or a > lo]
    hi = min(hi_candidates) if hi_candidates else None
    for _ in range(config.refine_steps):
        if lo is None or hi is None or hi - lo <= 1:
            break
        mid = Fraction(math.floor((lo + hi) / 2))
        res = run_at(mid)
        consider(res)
        if isinstance(res, CertificateFound):
            lo = mid
        else:
            hi = mid

    if best_sep is not None:
        sol = best_sep.separator
        kappa = best_sep.kappa
        sep_alpha: Optional[Fraction] = best_sep.alpha
        via = best_sep.via
    else:
        sol = SeparatorSolution.build(
            g, [], [], list(range(n)), balance_achieved=config.c
        )
        kappa = None
        sep_alpha = None
        via = "fallback"
        notes.append("no run produced a separator; falling back to C = V")
    ok, msg = validate_separator(g, sol, sol.balance_achieved)
    if not ok:
        raise CertificationError(f"final separator failed validation: {msg}")

    certificate = best_cert.certificate if best_cert is not None else None
    alpha_star = certificate.alpha if certificate is not None else None
    bound = certificate.certified_lower_bound if certificate is not None else None
    cost_vs_bound_ok = None
    if bound is not None:
        cost_vs_bound_ok = Fraction(sol.cost) >= bound / 4

    ratio: Optional[Fraction] = None
    brute_opt: Optional[int] = None
    if n <= config.brute_cap:
        brute_opt, _ = brute_force_opt(g, config.c, cap=config.brute_cap)
        if brute_opt > 0:
            ratio = Fraction(sol.cost, brute_opt)
        else:
            notes.append("brute-force optimum is 0; ratio undefined")
        if bound is not None and 4 * brute_opt < bound:
            raise CertificationError(
                f"certified bound {bound} exceeds 4*OPT = {4 * brute_opt}"
            )

    return SolveReport(
        separator=sol,
        alpha_star=alpha_star,
        certificate=certificate,
        certified_lower_bound=bound,
        kappa=kappa,
        separator_alpha=sep_alpha,
        separator_via=via,
        ratio_vs_brute=ratio,
        brute_opt=brute_opt,
        cost_vs_bound_ok=cost_vs_bound_ok,
        counters=_counter_dict(counters, totals),
        alphas_tried=tuple(alphas_tried),
        seed=seed,
        epsilon_used=eps_used,
        notes=tuple(notes),
    )


def _counter_dict(counters: OracleCounters, totals: dict) -> dict:
    return {
        "mmwu_runs": totals["mmwu_runs"],
        "iterations": totals["iterations"],
        "maxflow_calls": counters.maxflow_calls,
        "matching_calls": counters.matching_calls,
        "chain_attempts": counters.chain_attempts,
        "oracle_outcomes": dict(sorted(counters.outcome_tags.items())),
    }


@dataclass(frozen=True)
class PrimalWitness:
    """Feasible primal assignment certifying value <= 4 w(C)."""

    x: tuple[int, ...]
    v: tuple[int, ...]
    objective: int
    checks: tuple[str, ...]


def _most_balanced_extension(a_side, b_side, separator) -> tuple[set[int], set[int]]:
    """Split V into (A-hat, B-hat) extending (A, B), as balanced as the
    free separator vertices allow; greedy to the smaller side."""
    a_hat, b_hat = set(a_side), set(b_side)
    for i in sorted(separator):
        if len(a_hat) <= len(b_hat):
            a_hat.add(i)
        else:
            b_hat.add(i)
    return a_hat, b_hat


def primal_witness(
    g: WeightedGraph,
    s: SeparatorSolution,
    c: Rational,
    seed: int = 0,
    path_samples: int = 200,
    set_samples: int = 200,
    exhaustive_cap: int = 16,
) -> PrimalWitness:
    """x in {0,4}, v in {-1,+1} built from a valid c-balanced separator.

    Verifies, in exact integer/rational arithmetic: edge slack
    x_i + x_j >= |v_i - v_j|^2; unit norms; the path (triangle) family
    exhaustively up to 3 hops (all distinct-vertex sequences, sampled
    beyond); the pairwise-spread family over every admissible S when n is
    under ``exhaustive_cap`` (sampled beyond); non-negativity.  The Gram
    matrix of a one-dimensional +-1 assignment is PSD structurally.
    Objective equals 4 w(C) exactly.
    """
    c = Fraction(c)
    n = g.n
    ok, msg = validate_separator(g, s, c)
    if not ok:
        raise ValueError(f"witness needs a valid separator at balance {c}: {msg}")
    a_hat, b_hat = _most_balanced_extension(s.a_side, s.b_side, s.separator)
    sep = set(s.separator)
    v = tuple(-1 if i in a_hat else 1 for i in range(n))
    x = tuple(4 if i in sep else 0 for i in range(n))
    checks: list[str] = []

    for (i, j) in g.edges:
        if x[i] + x[j] < (v[i] - v[j]) ** 2:
            raise CertificationError(f"edge inequality broke on ({i}, {j})")
    checks.append(f"edge-slack[{g.m}]")

    if any(vi * vi != 1 for vi in v):
        raise CertificationError("unit-norm constraint broke")
    checks.append(f"unit-norm[{n}]")

    def path_gap(p: tuple[int, ...]) -> int:
        hops = sum((v[a] - v[b]) ** 2 for a, b in zip(p, p[1:]))
        return hops - (v[p[0]] - v[p[-1]]) ** 2

    tested = 0
    if n <= exhaustive_cap:
        for ln in (2, 3, 4):
            if ln > n:
                break
            for p in permutations(range(n), ln):
                if path_gap(p) < 0:
                    raise CertificationError(f"path inequality broke on {p}")
                tested += 1
        checks.append(f"path-family-exhaustive<=3hops[{tested}]")
    rng = np.random.default_rng(seed)
    sampled = 0
    for _ in range(path_samples):
        ln = int(rng.integers(2, min(n, 8) + 1)) if n >= 2 else 0
        if ln < 2:
            break
        p = tuple(rng.permutation(n)[:ln])
        if path_gap(p) < 0:
            raise CertificationError(f"path inequality broke on sampled {p}")
        sampled += 1
    checks.append(f"path-family-sampled[{sampled}]")

    xi = Fraction(9, 4) * c * c
    spread_floor = xi * n * n
    min_size = math.ceil((1 - c / 4) * n)
    max_deficiency = n - min_size

    def spread_of(s_set) -> int:
        a_in = sum(1 for i in s_set if i in a_hat)
        b_in = len(s_set) - a_in
        return 4 * a_in * b_in

    def check_set(s_set) -> None:
        if Fraction(spread_of(s_set)) < spread_floor:
            raise CertificationError(
                f"spread inequality broke on |S|={len(s_set)}: "
                f"{spread_of(s_set)} < {float(spread_floor):.6g}"
            )

    universe = list(range(n))
    if n <= exhaustive_cap:
        count = 0
        for k in range(max_deficiency + 1):
            for drop in combinations(universe, k):
                s_set = set(universe) - set(drop)
                check_set(s_set)
                count += 1
        checks.append(f"spread-family-exhaustive[{count}]")
    else:
        for _ in range(set_samples):
            k = int(rng.integers(0, max_deficiency + 1))
            drop = set(map(int, rng.permutation(n)[:k]))
            check_set(set(universe) - drop)
        checks.append(f"spread-family-sampled[{set_samples}]")

    if any(xv < 0 for xv in x):
        raise CertificationError("negative x")
    checks.append("nonneg")
    checks.append("psd-structural")

    objective = sum(g.weights[i] * x[i] for i in range(n))
    if objective != 4 * s.cost:
        raise CertificationError(f"objective {objective} != 4 w(C) = {4 * s.cost}")
    checks.append("objective-4wC")
    return PrimalWitness(x=x, v=v, objective=objective, checks=tuple(checks))


def report_to_dict(report: SolveReport) -> dict:
    """JSON-ready tree with every report field; rationals as strings."""

    def frac(v: Optional[Fraction]):
        return None if v is None else str(v)

    sol = report.separator
    cert = report.certificate
    cert_dict = None
    if cert is not None:
        cert_dict = {
            "alpha": frac(cert.alpha),
            "delta": frac(cert.delta),
            "objective": frac(cert.objective()),
            "lambda_max_estimate": cert.lambda_max_estimate,
            "norm_scale": cert.norm_scale,
            "terms": {
                "spread_sets": len(cert.z),
                "paths": len(cert.f),
                "edges": len(cert.lam),
            },
        }
    return {
        "separator": {
            "a": list(sol.a_side),
            "b": list(sol.b_side),
            "c": list(sol.separator),
            "cost": sol.cost,
            "balance": frac(Fraction(sol.balance_achieved)),
        },
        "alpha_star": frac(report.alpha_star),
        "certified_lower_bound": frac(report.certified_lower_bound),
        "certificate": cert_dict,
        "kappa": report.kappa,
        "separator_alpha": frac(report.separator_alpha),
        "separator_via": report.separator_via,
        "ratio_vs_brute": frac(report.ratio_vs_brute),
        "brute_opt": report.brute_opt,
        "cost_vs_bound_ok": report.cost_vs_bound_ok,
        "counters": report.counters,
        "alphas_tried": [frac(a) for a in report.alphas_tried],
        "seed": report.seed,
        "epsilon_used": report.epsilon_used,
        "notes": list(report.notes),
    }
