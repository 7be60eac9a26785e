"""Oracle layer of the multiplicative-weights loop.

Given the current embedding, the oracle either (a) returns a balanced
separator it stumbled on, (b) returns a feedback matrix N with
N . X_tilde <= 0 certifying dual progress, or (c) fails its attempt
budget.  Three routes produce feedback:

* the easy case: the small-norm vertex set is insufficiently spread;
* the flow case: routed A-to-B flow crosses large embedded distances;
* the chaining case: composed matchings yield many paths whose hop
  lengths undercut their endpoint distance (triangle-inequality
  violations).

Flow amounts, capacities, and all matrix coefficients are exact
rationals; embedded distances and thresholds on them are floats with
explicit guard bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .embedding import Embedding, FeedbackMatrix
from .flow import FlowError, build_split_network, max_flow
from .graphs import SeparatorSolution, WeightedGraph


class OracleError(RuntimeError):
    """The oracle could not produce an outcome (bad sizing or exhausted
    attempt budget); the caller decides whether to retry elsewhere."""


@dataclass(frozen=True)
class OracleParams:
    """Per-invocation constants of the oracle.

    ``delta_spread`` is the squared-distance slack (written Delta in the
    hop-length checks), ``beta_p``/``beta_q`` the rationalized per-terminal
    throughput, ``k_rounds`` the number of matchings composed per chain
    attempt, ``path_min`` the harvest size that triggers the chaining
    feedback, and ``attempt_budget`` the maximum number of matching calls
    (equivalently max-flow computations) one chain invocation may spend.
    """

    n: int
    alpha: Fraction
    c: Fraction
    c_prime: Fraction
    sigma: float
    epsilon: float
    delta_spread: float
    beta_p: int
    beta_q: int
    k_rounds: int
    path_min: int
    attempt_budget: int
    restrict_sort_to_s: bool = True
    guard_band: float = 1e-9

    def __post_init__(self):
        if not (0 < self.c < Fraction(1, 2)):
            raise ValueError("balance constant must lie in (0, 1/2)")
        if not (0 < self.c_prime <= self.c):
            raise ValueError("relaxed balance must lie in (0, c]")
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        if self.beta_p <= 0 or self.beta_q <= 0:
            raise ValueError("throughput must be positive")
        if self.k_rounds < 1 or self.path_min < 1 or self.attempt_budget < 1:
            raise ValueError("k_rounds, path_min, attempt_budget must be >= 1")
        if self.delta_spread <= 0:
            raise ValueError("distance slack must be positive")
        if self.sigma < 0:
            raise ValueError("separation margin must be non-negative")

    @property
    def xi(self) -> Fraction:
        return Fraction(9, 4) * self.c * self.c

    @property
    def beta(self) -> Fraction:
        return Fraction(self.beta_p, self.beta_q)

    @property
    def ab_size(self) -> int:
        return math.floor(2 * self.c_prime * self.n)

    @property
    def cut_threshold_scaled(self) -> Fraction:
        """Scaled-integer form of the cut test c' n beta (scale 2q)."""
        return 2 * self.c_prime * self.n * self.beta_p

    @property
    def separator_cost_bound(self) -> Fraction:
        return 2 * self.c_prime * self.n * self.beta

    @property
    def norm_cap(self) -> float:
        """Membership threshold 4/c of the small-norm set."""
        return float(4 / self.c)


@dataclass
class OracleCounters:
    """Mutable accounting shared across oracle invocations."""

    maxflow_calls: int = 0
    matching_calls: int = 0
    chain_attempts: int = 0
    outcome_tags: dict = field(default_factory=dict)
    telemetry: Optional[list] = None

    def note(self, tag: str) -> None:
        self.outcome_tags[tag] = self.outcome_tags.get(tag, 0) + 1

    def log(self, line: str) -> None:
        if self.telemetry is not None:
            self.telemetry.append(line)


@dataclass(frozen=True)
class SeparatorOutcome:
    separator: SeparatorSolution
    cut_scaled: int


@dataclass(frozen=True)
class FeedbackOutcome:
    feedback: FeedbackMatrix


@dataclass(frozen=True)
class MatchingOutcome:
    pairs: tuple[tuple[int, int], ...]


OracleOutcome = Union[SeparatorOutcome, FeedbackOutcome, MatchingOutcome]


def small_norm_set(emb: Embedding, params: OracleParams) -> list[int]:
    """Vertices with squared norm at most 4/c; holds >= (1 - c/4)n of V
    because the squared norms sum to n."""
    cap = params.norm_cap
    return [i for i in range(emb.n) if emb.norm_sq(i) <= cap]


def easy_case(emb: Embedding, params: OracleParams) -> Optional[FeedbackMatrix]:
    """Spread shortcut: fires when the small-norm set is clustered.

    If the pairwise spread of S = {i : ||v_i||^2 <= 4/c} is below
    xi n^2 / 4, returns N = diag(-alpha/n) + (2 alpha / (xi n^2)) K_S.
    The fire condition itself bounds N . X_tilde <= -alpha/2 < 0; the
    budget identity sum(y) + xi n^2 z = alpha holds exactly.
    """
    n = params.n
    s = small_norm_set(emb, params)
    spread = emb.spread_over(s)
    threshold = float(params.xi * n * n) / 4.0
    if spread >= threshold:
        return None
    alpha = params.alpha
    z = 2 * alpha / (params.xi * n * n)
    y = tuple(-alpha / n for _ in range(n))
    # exact eigenvalues are -alpha/n and -alpha/n + z |S|
    width = max(float(alpha / n), abs(float(-alpha / n + z * len(s))))
    return FeedbackMatrix(
        n=n,
        alpha=alpha,
        xi=params.xi,
        y=y,
        easy_set=(tuple(s), z),
        case="easy",
        width_bound=width,
    )


def _canonical_direction(u: np.ndarray) -> tuple[np.ndarray, bool]:
    """Flip u so its first non-zero component is positive.

    Running the matching on the canonical sign and reversing pairs on
    flip makes Matching(-u) exactly the reverse of Matching(u).
    """
    for comp in u:
        if comp > 0:
            return u, False
        if comp < 0:
            return -u, True
    return u, False


def _original_path(nodes: Sequence[int]) -> tuple[int, ...]:
    """Original-graph vertices of a split-network source-sink path."""
    inner = nodes[1:-1]
    return tuple(inner[i] // 2 for i in range(0, len(inner), 2))


def matching(
    g: WeightedGraph,
    emb: Embedding,
    u: np.ndarray,
    params: OracleParams,
    counters: Optional[OracleCounters] = None,
) -> OracleOutcome:
    """One projection-sort-flow round.

    Projects embedded vectors onto u, takes the extreme slices A and B,
    routes flow from A to B through the vertex-capacitated split network,
    and returns the first of: a cheap separator (small min cut), a flow
    feedback matrix (routed mass crosses large embedded distances), or a
    directed matching of short well-separated pairs.
    """
    counters = counters if counters is not None else OracleCounters()
    n = g.n
    if n != emb.n or n != params.n:
        raise OracleError("graph, embedding, and params disagree on n")
    ab = params.ab_size
    if ab < 1:
        raise OracleError(
            f"need floor(2 c' n) >= 1 slice vertices, got {ab} (n too small)"
        )
    u_canon, flipped = _canonical_direction(np.asarray(u, dtype=float))
    counters.matching_calls += 1

    domain = small_norm_set(emb, params) if params.restrict_sort_to_s else list(range(n))
    if len(domain) < 2 * ab:
        raise OracleError(
            f"sort domain has {len(domain)} vertices, need {2 * ab} for the slices"
        )
    proj = emb.vectors.T @ u_canon
    order = sorted(domain, key=lambda x: (proj[x], x))
    a_side = sorted(order[:ab])
    b_side = sorted(order[-ab:])

    net = build_split_network(g, a_side, b_side, params.beta_p, params.beta_q)
    counters.maxflow_calls += 1
    result = max_flow(net.net)

    if result.value < params.cut_threshold_scaled:
        t_side = set(result.t_cut)
        sep = net.separator_from_cut(result)
        x_side = [
            x for x in range(n) if 2 * x not in t_side and 2 * x + 1 not in t_side
        ]
        y_side = [x for x in range(n) if 2 * x in t_side and 2 * x + 1 in t_side]
        solution = SeparatorSolution.build(
            g, x_side, y_side, sep, balance_achieved=params.c_prime
        )
        if Fraction(solution.cost) * 2 * params.beta_q > 2 * params.cut_threshold_scaled:
            raise FlowError("separator cost exceeds the cut bound")
        counters.note("separator")
        counters.log(
            f"matching outcome=separator cut={result.value} "
            f"bound={float(params.cut_threshold_scaled):.6g}"
        )
        return SeparatorOutcome(separator=solution, cut_scaled=result.value)

    scale = 2 * params.beta_q
    pair_mass: dict[tuple[int, int], int] = {}
    for a, b, amount in net.routed_pairs(result):
        pair_mass[(a, b)] = pair_mass.get((a, b), 0) + amount

    # line-7 test: routed mass weighted by embedded squared distances
    routed_cost = (
        sum(m * emb.dist_sq(x, y) for (x, y), m in pair_mass.items()) / scale
    )
    fire_at = 2 * float(params.alpha)
    if routed_cost >= fire_at + params.guard_band * max(1.0, fire_at):
        fm = _flow_feedback(g, net, result, params, flipped)
        counters.note("flow")
        counters.log(
            f"matching outcome=flow routed_cost={routed_cost:.6g} "
            f"threshold={fire_at:.6g}"
        )
        return FeedbackOutcome(feedback=fm)

    # select in canonical orientation, then mirror the output if u was
    # flipped: Matching(-u) is the exact reverse of Matching(u)
    w_of = {x: proj[x] for x in domain}
    a_set, b_set = set(a_side), set(b_side)
    m_all = [
        (x, y)
        for (x, y) in sorted(pair_mass)
        if x in a_set and y in b_set and w_of[y] - w_of[x] >= params.sigma
    ]
    m_short = [
        (x, y) for (x, y) in m_all if emb.dist_sq(x, y) <= params.delta_spread
    ]
    used: set[int] = set()
    chosen: list[tuple[int, int]] = []
    for x, y in m_short:
        if x not in used and y not in used:
            chosen.append((x, y))
            used.add(x)
            used.add(y)
    counters.note("matching")
    counters.log(
        f"matching outcome=matching routed_cost={routed_cost:.6g} "
        f"|M_all|={len(m_all)} |M_short|={len(m_short)} |M|={len(chosen)}"
    )
    if flipped:
        chosen = [(y, x) for (x, y) in chosen]
    return MatchingOutcome(pairs=tuple(chosen))


def _flow_feedback(
    g: WeightedGraph,
    net,
    result,
    params: OracleParams,
    flipped: bool,
) -> FeedbackMatrix:
    """Assemble the flow-case feedback from the decomposed max flow.

    Path terms come from the decomposition and the edge coefficients from
    per-arc flows, so the assembled matrix telescopes exactly to
    diag(alpha/n) - L(D) with D the endpoint-mass matrix.
    """
    n = g.n
    alpha = params.alpha
    scale = 2 * params.beta_q
    path_terms = []
    for path in result.paths:
        orig = _original_path(path.nodes)
        if flipped:
            orig = tuple(reversed(orig))
        if len(orig) >= 2:
            path_terms.append((orig, Fraction(path.amount, scale)))
    lam = []
    for (uu, vv) in g.edges:
        flow_uv = result.flow[net.edge_arc[(uu, vv)]]
        flow_vu = result.flow[net.edge_arc[(vv, uu)]]
        total = flow_uv + flow_vu
        if total:
            lam.append(((uu, vv), Fraction(total, scale)))
    y = tuple(alpha / n for _ in range(n))
    deg_mass: dict[int, Fraction] = {}
    for p, f in path_terms:
        deg_mass[p[0]] = deg_mass.get(p[0], Fraction(0)) + f
        deg_mass[p[-1]] = deg_mass.get(p[-1], Fraction(0)) + f
    max_deg = max(deg_mass.values(), default=Fraction(0))
    width = float(alpha / n) + 2 * float(max_deg)
    return FeedbackMatrix(
        n=n,
        alpha=alpha,
        xi=params.xi,
        y=y,
        path_terms=tuple(path_terms),
        lam=tuple(lam),
        case="flow",
        width_bound=width,
    )


def check_violating(path: Sequence[int], emb: Embedding, delta_spread: float) -> bool:
    """True iff the path's hop lengths undercut its endpoint distance:
    sum_j ||p_j - p_{j-1}||^2 <= ||p_end - p_0||^2 - delta."""
    if len(path) < 2:
        return False
    hops = sum(emb.dist_sq(a, b) for a, b in zip(path, path[1:]))
    return hops <= emb.dist_sq(path[0], path[-1]) - delta_spread


def _compose(matchings: Sequence[Sequence[tuple[int, int]]]) -> list[tuple[int, ...]]:
    """Full K-fold composition: survive-all chains keyed by endpoints."""
    chains: dict[int, tuple[int, ...]] = {}
    first = True
    for m in matchings:
        if first:
            chains = {y: (x, y) for (x, y) in m}
            first = False
            continue
        nxt: dict[int, tuple[int, ...]] = {}
        for (x, y) in m:
            if x in chains:
                nxt[y] = chains[x] + (y,)
        chains = nxt
        if not chains:
            break
    return [chains[k] for k in sorted(chains)]


def _harvest_violating(
    chains: Sequence[tuple[int, ...]], emb: Embedding, delta_spread: float
) -> list[tuple[int, ...]]:
    """First distinct-vertex violating contiguous subpath of each chain.

    Keeping only the violating core keeps every harvested path's own
    inequality intact, which the feedback matrix relies on.
    """
    out = []
    for chain_nodes in chains:
        ln = len(chain_nodes)
        found = None
        for i in range(ln - 2):
            if found:
                break
            for j in range(i + 2, ln):
                sub = chain_nodes[i : j + 1]
                if len(set(sub)) != len(sub):
                    continue
                if check_violating(sub, emb, delta_spread):
                    found = sub
                    break
        if found:
            out.append(found)
    return out


def chain(
    g: WeightedGraph,
    emb: Embedding,
    params: OracleParams,
    rng: np.random.Generator,
    counters: Optional[OracleCounters] = None,
) -> OracleOutcome:
    """Compose matchings into chains and harvest violating paths.

    Each attempt samples K directions, runs the matching round on each,
    and composes the results; the mirrored (sign-flipped) composition
    comes for free from skew-symmetry.  Separator or feedback outcomes of
    any matching round short-circuit.  Harvested paths accumulate across
    attempts; at ``path_min`` of them the chaining feedback is emitted.
    Exhausting the matching-call budget raises OracleError.
    """
    counters = counters if counters is not None else OracleCounters()
    harvested: dict[tuple[int, ...], None] = {}
    calls_spent = 0
    while True:
        counters.chain_attempts += 1
        forward: list[tuple[tuple[int, int], ...]] = []
        for _ in range(params.k_rounds):
            if calls_spent >= params.attempt_budget:
                counters.log(
                    f"chain budget exhausted: calls={calls_spent} "
                    f"harvested={len(harvested)} need={params.path_min}"
                )
                err = OracleError(
                    f"chain attempt budget exhausted after {calls_spent} "
                    f"matching calls with {len(harvested)}/{params.path_min} paths"
                )
                err.harvested = len(harvested)
                raise err
            u = rng.standard_normal(emb.d)
            calls_spent += 1
            outcome = matching(g, emb, u, params, counters)
            if isinstance(outcome, (SeparatorOutcome, FeedbackOutcome)):
                return outcome
            forward.append(outcome.pairs)
        mirrored = [tuple((y, x) for (x, y) in m) for m in forward]
        for chains in (_compose(forward), _compose(mirrored)):
            for sub in _harvest_violating(chains, emb, params.delta_spread):
                harvested.setdefault(sub, None)
        counters.log(
            f"chain attempt={counters.chain_attempts} "
            f"harvested={len(harvested)} need={params.path_min}"
        )
        if len(harvested) >= params.path_min:
            # exactly path_min paths: keeps the coefficient and the a-priori
            # width bound of this case a function of the schedule alone
            fm = _chain_feedback(list(harvested)[: params.path_min], params)
            counters.note("chain")
            return FeedbackOutcome(feedback=fm)


def _chain_feedback(
    paths: Sequence[tuple[int, ...]], params: OracleParams
) -> FeedbackMatrix:
    """N = diag(alpha/n) + f * (L(F) - L(D)) with f = 2 alpha/(|P| Delta)."""
    n = params.n
    alpha = params.alpha
    f = 2 * alpha / (len(paths) * Fraction(params.delta_spread))
    deg_f: dict[int, int] = {}
    deg_d: dict[int, int] = {}
    for p in paths:
        for a, b in zip(p, p[1:]):
            deg_f[a] = deg_f.get(a, 0) + 1
            deg_f[b] = deg_f.get(b, 0) + 1
        deg_d[p[0]] = deg_d.get(p[0], 0) + 1
        deg_d[p[-1]] = deg_d.get(p[-1], 0) + 1
    width = float(alpha / n) + float(f) * 2 * (
        max(deg_f.values(), default=0) + max(deg_d.values(), default=0)
    )
    y = tuple(alpha / n for _ in range(n))
    return FeedbackMatrix(
        n=n,
        alpha=alpha,
        xi=params.xi,
        y=y,
        path_terms=tuple((p, f) for p in paths),
        case="chain",
        width_bound=width,
    )


def run_oracle(
    g: WeightedGraph,
    emb: Embedding,
    params: OracleParams,
    rng: np.random.Generator,
    counters: Optional[OracleCounters] = None,
) -> OracleOutcome:
    """Full oracle: easy-case shortcut, then the chaining procedure."""
    counters = counters if counters is not None else OracleCounters()
    fm = easy_case(emb, params)
    if fm is not None:
        counters.note("easy")
        counters.log("oracle outcome=easy")
        return FeedbackOutcome(feedback=fm)
    return chain(g, emb, params, rng, counters)
