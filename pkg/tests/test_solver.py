"""Schedule planning, single runs, the alpha sweep, and primal witnesses.

Numeric expectations are frozen from hand-derived arithmetic stated next
to each assertion; graph optima reuse the independently argued values
from test_graphs.
"""

import json
import math
from fractions import Fraction

import pytest

from vsep.embedding import ScheduleError
from vsep.graphs import (
    SeparatorSolution,
    complete_graph,
    grid_graph,
    path_graph,
    two_blobs_graph,
    with_weights,
)
from vsep.solver import (
    CertificateFound,
    CertificationError,
    DualCertificate,
    Inconclusive,
    MMWUSchedule,
    SeparatorFound,
    SolverConfig,
    binary_search_solve,
    clamp_epsilon,
    make_oracle_params,
    mmwu_run,
    primal_witness,
    rationalize_beta,
    report_to_dict,
    _most_balanced_extension,
)

F = Fraction


# ---------------------------------------------------------------------------
# configuration and parameter derivation
# ---------------------------------------------------------------------------

def test_clamp_epsilon_window():
    # the log guard pins L(2) = 1, so the window is [1/4, 1]
    assert clamp_epsilon(0.1, 2) == (0.25, True)
    assert clamp_epsilon(0.5, 2) == (0.5, False)
    assert clamp_epsilon(2.0, 2) == (1.0, True)
    lo, warned = clamp_epsilon(0.01, 100)
    assert warned and math.isclose(lo, 1.0 / (4.0 * math.log(100)))


def test_config_validation_and_resolution():
    with pytest.raises(ValueError):
        SolverConfig(c=F(1, 2))
    with pytest.raises(ValueError):
        SolverConfig(c=F(1, 3), c_prime=F(2, 5))
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(replication=0)
    with pytest.raises(ValueError):
        SolverConfig(refine_steps=-1)
    cfg = SolverConfig()
    assert cfg.resolved_c_prime() == F(1, 24)
    assert cfg.resolved_tau() == 0.125  # min(2, xi/2) at c = 1/3
    assert SolverConfig(c_prime=F(1, 4)).resolved_c_prime() == F(1, 4)
    assert SolverConfig(tau=0.3).resolved_tau() == 0.3
    # ceil(16^0.5 * ln 16) = ceil(11.09) = 12, under the cap
    assert cfg.resolved_replication(16, 0.5) == 12
    assert SolverConfig(replication=3).resolved_replication(16, 0.5) == 3
    assert cfg.resolved_replication(10 ** 6, 1.0) == 64  # capped


def test_rationalize_beta_examples():
    # ratio = 2n/margin = 32; p = ceil(2 * 32) = 64 -> exactly beta0
    assert rationalize_beta(2.0, 4) == (64, 32)
    # ratio = 80; p = ceil(0.3 * 80) = 24 -> 24/80 = 0.3
    assert rationalize_beta(0.3, 10) == (24, 80)
    with pytest.raises(ValueError):
        rationalize_beta(0.001, 10)  # below the margin/n floor
    with pytest.raises(ValueError):
        rationalize_beta(1.0, 0)


def test_rationalize_beta_bracket_property():
    import random

    rng = random.Random(123)
    for _ in range(500):
        n = rng.randint(1, 500)
        beta0 = rng.uniform(0.25 / n, 1000.0)
        p, q = rationalize_beta(beta0, n)
        ratio = F(p, q)
        b0 = F(beta0)
        assert b0 <= ratio <= 2 * b0
        assert q == math.floor(2 * n / F(1, 4))


def test_make_oracle_params_frozen_values():
    # n = 16, alpha = 4, eps = 0.5, c' = 1/4:
    #   Delta = sqrt(0.5/ln 16) = 0.42466...
    #   k_rounds = ceil(Delta * ln 16) = ceil(1.177) = 2
    #   path_min = ceil(16^(1 - 0.125)) = ceil(11.31) = 12
    #   attempt_budget = 2 * ceil(sqrt(16) * ln 16) = 2 * 12 = 24
    g = grid_graph(4, 4)
    cfg = SolverConfig(c_prime=F(1, 4))
    params = make_oracle_params(g, 4, cfg)
    assert params.delta_spread == pytest.approx(math.sqrt(0.5 / math.log(16)))
    assert params.k_rounds == 2
    assert params.path_min == 12
    assert params.attempt_budget == 24
    assert params.beta_q == 128  # floor(2 * 16 / (1/4))
    beta0 = F(6 * 4, 4) / F(params.delta_spread)
    assert beta0 <= params.beta <= 2 * beta0
    assert params.epsilon == 0.5
    assert params.alpha == 4


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------

def test_schedule_formulas_and_bounds():
    g = grid_graph(4, 4)
    cfg = SolverConfig(c_prime=F(1, 4), t_cap=100)
    params = make_oracle_params(g, 4, cfg)
    sched = MMWUSchedule.plan(params, cfg)
    n, alpha = 16, F(4)
    assert sched.delta == alpha / 2
    rho = sched.rho
    assert sched.eta == pytest.approx(float(sched.delta) / (2 * n * rho * rho))
    lg = math.log(n)
    want_t = math.ceil(4 * n * n * rho * rho * lg / float(sched.delta) ** 2)
    assert sched.iterations == want_t
    assert sched.eta * rho <= 1.0
    assert sched.consistency == pytest.approx(sched.eta * rho * sched.iterations)

    bounds = sched.case_bounds
    assert set(bounds) == {"easy", "flow", "chain"}
    # easy: (2/xi - 1) alpha / n = 7 alpha / n at c = 1/3
    assert bounds["easy"] == pytest.approx(7 * 4 / 16)
    assert bounds["flow"] == pytest.approx(4 / 16 + 2 * float(params.beta))
    assert bounds["chain"] == pytest.approx(
        4 / 16 + 12 * 4 / params.delta_spread
    )
    assert rho == max(bounds.values())
    assert not sched.completes and sched.run_iterations == 100


def test_schedule_rho_override_caps_bounds():
    g = grid_graph(4, 4)
    cfg = SolverConfig(c_prime=F(1, 4), rho_override=5.0)
    params = make_oracle_params(g, 4, cfg)
    sched = MMWUSchedule.plan(params, cfg)
    assert sched.rho == 5.0
    assert sched.case_bounds["easy"] == pytest.approx(1.75)  # unchanged
    assert sched.case_bounds["flow"] == 5.0
    assert sched.case_bounds["chain"] == 5.0
    assert sched.iterations == math.ceil(
        4 * 256 * 25.0 * math.log(16) / 4.0
    )


def test_schedule_consistency_cap():
    g = grid_graph(4, 4)
    cfg = SolverConfig(c_prime=F(1, 4), consistency_cap=1.0)
    params = make_oracle_params(g, 4, cfg)
    with pytest.raises(ScheduleError):
        MMWUSchedule.plan(params, cfg)


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------

def test_mmwu_run_brute_bypass():
    out = mmwu_run(path_graph(5), 3, SolverConfig(), seed=0)
    assert isinstance(out, SeparatorFound)
    assert out.via == "brute"
    assert out.kappa is None
    assert out.iteration == 0
    assert out.alpha == 3
    assert out.separator.cost == 1


def test_mmwu_run_input_validation():
    cfg = SolverConfig()
    with pytest.raises(ValueError):
        mmwu_run(path_graph(5), 3, cfg, seed=-1)
    with pytest.raises(ValueError):
        mmwu_run(path_graph(5), F(1, 2), cfg, seed=0)
    with pytest.raises(ValueError):
        mmwu_run(path_graph(5), 6, cfg, seed=0)  # above w(V) = 5


def test_mmwu_run_finds_separator_on_path():
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 4))
    out = mmwu_run(path_graph(5), 5, cfg, seed=1)
    assert isinstance(out, SeparatorFound)
    assert out.via == "oracle"
    params = make_oracle_params(path_graph(5), 5, cfg)
    assert out.separator.cost <= params.separator_cost_bound
    assert out.kappa == pytest.approx(
        float(2 * F(1, 4) * params.beta * 5 / 5)
    )
    # deterministic: the same seed reproduces the same outcome
    again = mmwu_run(path_graph(5), 5, cfg, seed=1)
    assert isinstance(again, SeparatorFound)
    assert again.separator == out.separator
    assert again.iteration == out.iteration


def test_mmwu_run_no_false_certificate_on_k4():
    # at alpha = 1 the throughput outruns K4's unit weights, so the run
    # must yield a separator (never a lower-bound certificate above OPT)
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 4))
    out = mmwu_run(complete_graph(4), 1, cfg, seed=0)
    assert isinstance(out, SeparatorFound)
    assert out.iteration == 0


def test_mmwu_run_iteration_cap_is_inconclusive():
    # heavy K4 schedules ~80k iterations; a tight cap must surface as
    # inconclusive rather than as a certificate or an error
    g = with_weights(complete_graph(4), [64, 64, 64, 64])
    cfg = SolverConfig(
        c=F(49, 100), c_prime=F(6, 25), epsilon=1.0,
        brute_bypass=False, t_cap=50,
    )
    out = mmwu_run(g, 1, cfg, seed=0)
    assert isinstance(out, Inconclusive)
    assert "iteration cap" in out.reason
    assert out.iterations_run == 50
    assert out.alpha == 1


def test_mmwu_run_oracle_starvation_is_inconclusive():
    # floor(2 c' n) = 0 slices: every oracle replica fails, no outcome
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 100))
    out = mmwu_run(path_graph(15), 2, cfg, seed=0)
    assert isinstance(out, Inconclusive)
    assert "replicas" in out.reason
    assert out.iterations_run == 0


# ---------------------------------------------------------------------------
# dual certificate container
# ---------------------------------------------------------------------------

def test_dual_certificate_bookkeeping():
    cert = DualCertificate(
        n=2,
        alpha=F(2),
        delta=F(1),
        xi=F(1, 4),
        y=(F(1, 2), F(1, 2)),
        z=(),
        f=(),
        lam=(((0, 1), F(1, 4)),),
        lambda_max_estimate=0.0,
        norm_scale=1.0,
    )
    assert cert.certified_lower_bound == 1
    assert cert.objective() == 1  # sum(y), no z terms
    assert cert.nonneg_ok()
    assert cert.lambda_degrees() == {0: F(1, 4), 1: F(1, 4)}
    assert cert.degree_ok(path_graph(2))
    dense = cert.assemble_dense()
    assert dense[0, 0] == pytest.approx(0.25)  # 1/2 - 1/4
    assert dense[0, 1] == pytest.approx(0.25)

    with_z = DualCertificate(
        n=2, alpha=F(2), delta=F(1), xi=F(1, 4),
        y=(F(0), F(0)), z=(((0, 1), F(1)),), f=(), lam=(),
        lambda_max_estimate=0.0, norm_scale=1.0,
    )
    assert with_z.objective() == F(1, 4) * 4  # xi n^2 z


# ---------------------------------------------------------------------------
# binary search solve
# ---------------------------------------------------------------------------

def test_solve_brute_bypass_report():
    r = binary_search_solve(path_graph(5), SolverConfig(), seed=0)
    assert r.separator_via == "brute"
    assert r.brute_opt == 1
    assert r.ratio_vs_brute == 1
    assert r.alpha_star is None and r.certificate is None
    assert r.alphas_tried == ()
    assert r.counters["mmwu_runs"] == 0
    assert r.separator.cost == 1


def test_solve_grid_separator_sweep():
    g = grid_graph(4, 4)
    cfg = SolverConfig(brute_bypass=False)
    r = binary_search_solve(g, cfg, seed=0)
    assert r.separator_via == "oracle"
    assert r.separator.cost == 1  # a corner peels off at balance c/8
    assert r.alphas_tried == (F(1), F(2), F(4), F(8), F(16))
    assert r.counters["mmwu_runs"] == 5
    # the guess ladder plus refinement can never exceed this
    w = g.total_weight()
    assert r.counters["mmwu_runs"] <= math.ceil(math.log2(w)) + 1 + cfg.refine_steps
    assert r.kappa is not None and r.kappa > 0
    assert r.brute_opt is None  # n = 16 sits above the brute cap
    assert r.cost_vs_bound_ok is None  # no certificate on this sweep


def test_solve_two_blobs_ratio_under_eight():
    g = two_blobs_graph(8, 8, 2)
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 4))
    r = binary_search_solve(g, cfg, seed=3)
    assert r.separator_via in ("oracle", "fallback")
    assert r.brute_opt == 2
    assert r.ratio_vs_brute is not None
    assert r.ratio_vs_brute <= 8


def test_solve_fallback_covers_all_vertices():
    # starved oracle at every guess: the solve must still return a valid
    # (trivial) separator and say so
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 100))
    g = path_graph(15)
    r = binary_search_solve(g, cfg, seed=0)
    assert r.separator_via == "fallback"
    assert r.separator.separator == tuple(range(15))
    assert r.separator.cost == 15
    assert any("falling back" in note for note in r.notes)
    assert any("inconclusive" in note for note in r.notes)


def test_solve_epsilon_clamp_note():
    cfg = SolverConfig(brute_bypass=False, epsilon=0.01)
    r = binary_search_solve(grid_graph(4, 4), cfg, seed=0)
    assert r.epsilon_used == pytest.approx(1.0 / (4.0 * math.log(16)))
    assert any("epsilon clamped" in note for note in r.notes)


def test_solve_deterministic_report():
    g = two_blobs_graph(8, 8, 2)
    cfg = SolverConfig(brute_bypass=False, c_prime=F(1, 4))
    r1 = binary_search_solve(g, cfg, seed=7)
    r2 = binary_search_solve(g, cfg, seed=7)
    d1, d2 = report_to_dict(r1), report_to_dict(r2)
    assert d1 == d2
    json.dumps(d1)  # JSON-serializable throughout


# ---------------------------------------------------------------------------
# primal witness
# ---------------------------------------------------------------------------

def test_most_balanced_extension():
    a, b = _most_balanced_extension((0, 1), (2, 3, 4), (5, 6, 7))
    assert a == {0, 1, 5, 6}
    assert b == {2, 3, 4, 7}


def test_primal_witness_path():
    g = path_graph(5)
    sol = SeparatorSolution.build(g, [0, 1], [3, 4], [2], balance_achieved=F(1, 3))
    w = primal_witness(g, sol, F(1, 3))
    assert w.objective == 4  # 4 * w(C) with unit weight
    assert w.x == (0, 0, 4, 0, 0)
    assert set(w.v) == {-1, 1}
    assert sum(1 for vi in w.v if vi == -1) == 3  # separator joins A side
    joined = " ".join(w.checks)
    assert "edge-slack[4]" in joined
    assert "path-family-exhaustive" in joined
    assert "spread-family-exhaustive" in joined
    assert "objective-4wC" in joined


def test_primal_witness_weighted():
    g = with_weights(complete_graph(4), [7, 9, 1, 1])
    # removing {0, 1} leaves the edge (2, 3) on one side
    sol = SeparatorSolution.build(g, [2, 3], [], [0, 1], balance_achieved=F(1, 3))
    w = primal_witness(g, sol, F(1, 3))
    assert w.objective == 4 * 16
    assert w.x.count(4) == 2


def test_primal_witness_empty_a_side():
    g = path_graph(5)
    sol = SeparatorSolution.build(g, [], [1, 3], [0, 2, 4], balance_achieved=F(1, 3))
    w = primal_witness(g, sol, F(1, 3))
    assert w.objective == 12
    assert sum(1 for vi in w.v if vi == -1) == 3


def test_primal_witness_rejects_invalid():
    g = path_graph(4)
    crossing = SeparatorSolution.build(g, [0, 1], [2, 3], [], balance_achieved=F(1, 3))
    with pytest.raises(ValueError):
        primal_witness(g, crossing, F(1, 3))
    # at c = 1/3 the side cap is floor(8/3) = 2, so |A| = 3 is unbalanced
    lopsided = SeparatorSolution.build(g, [0, 1, 2], [], [3], balance_achieved=F(1, 3))
    with pytest.raises(ValueError):
        primal_witness(g, lopsided, F(1, 3))
