"""Integer max flow (Dinic), minimum cuts with minimal sink side, and
path decomposition of flows.

Capacities are integers throughout; the split-network builder scales all
rational capacities up front so that flow values, cuts, and decompositions
are exact.  "Infinite" arcs use a sentinel capacity strictly larger than
the sum of all finite capacities, so they can never cross a minimum cut.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

CAP_LIMIT = 1 << 62  # reject capacities that would not fit a fixed-width int


class FlowError(ValueError):
    pass


@dataclass
class FlowNetwork:
    """Directed network with integer arc capacities.

    Arcs are identified by insertion index.  ``add_arc`` returns that
    index; per-arc flows in :class:`FlowResult` use the same indexing.
    """

    num_nodes: int
    source: int
    sink: int
    tails: list[int] = field(default_factory=list)
    heads: list[int] = field(default_factory=list)
    caps: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not (0 <= self.source < self.num_nodes) or not (
            0 <= self.sink < self.num_nodes
        ):
            raise FlowError("source/sink out of range")
        if self.source == self.sink:
            raise FlowError("source and sink must differ")

    @property
    def num_arcs(self) -> int:
        return len(self.tails)

    def add_arc(self, u: int, v: int, cap: int) -> int:
        if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
            raise FlowError(f"arc ({u}, {v}) out of range")
        if cap < 0:
            raise FlowError(f"negative capacity on arc ({u}, {v})")
        if cap >= CAP_LIMIT:
            raise FlowError(f"capacity on arc ({u}, {v}) overflows the integer range")
        self.tails.append(u)
        self.heads.append(v)
        self.caps.append(int(cap))
        return len(self.tails) - 1


@dataclass(frozen=True)
class FlowPath:
    """One source-to-sink path of the decomposition."""

    nodes: tuple[int, ...]
    amount: int


@dataclass(frozen=True)
class FlowResult:
    """Max-flow output: value, per-arc flow, minimum cut, decomposition.

    ``t_cut`` is the unique inclusion-minimal sink side (all nodes that can
    reach the sink in the residual graph); ``s_cut`` is its complement.
    ``flow`` is acyclic: any cycles produced during augmentation are
    cancelled before it is reported, so the paths re-add exactly to it.
    """

    value: int
    flow: tuple[int, ...]
    s_cut: tuple[int, ...]
    t_cut: tuple[int, ...]
    paths: tuple[FlowPath, ...]
    cut_capacity: int


class _Dinic:
    def __init__(self, net: FlowNetwork):
        self.n = net.num_nodes
        self.to: list[int] = []
        self.res: list[int] = []  # residual capacity per directed half-arc
        self.adj: list[list[int]] = [[] for _ in range(self.n)]
        self.forward_ids: list[int] = []  # half-arc index of each input arc
        for u, v, c in zip(net.tails, net.heads, net.caps):
            self.forward_ids.append(len(self.to))
            self.adj[u].append(len(self.to))
            self.to.append(v)
            self.res.append(c)
            self.adj[v].append(len(self.to))
            self.to.append(u)
            self.res.append(0)
        self.caps = list(net.caps)

    def run(self, s: int, t: int) -> int:
        total = 0
        while True:
            level = self._levels(s)
            if level[t] < 0:
                return total
            it = [0] * self.n
            while True:
                pushed = self._dfs(s, t, level, it)
                if pushed == 0:
                    break
                total += pushed

    def _levels(self, s: int) -> list[int]:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for a in self.adj[v]:
                if self.res[a] > 0 and level[self.to[a]] < 0:
                    level[self.to[a]] = level[v] + 1
                    q.append(self.to[a])
        return level

    def _dfs(self, v: int, t: int, level: list[int], it: list[int]) -> int:
        # iterative blocking-flow walk to keep recursion depth flat
        path: list[int] = []
        node = v
        while True:
            if node == t:
                amt = min(self.res[a] for a in path)
                for a in path:
                    self.res[a] -= amt
                    self.res[a ^ 1] += amt
                return amt
            advanced = False
            while it[node] < len(self.adj[node]):
                a = self.adj[node][it[node]]
                u = self.to[a]
                if self.res[a] > 0 and level[u] == level[node] + 1:
                    path.append(a)
                    node = u
                    advanced = True
                    break
                it[node] += 1
            if not advanced:
                level[node] = -1  # dead end; prune
                if not path:
                    return 0
                a = path.pop()
                node = self.to[a ^ 1]
                it[node] += 1

    def arc_flows(self) -> list[int]:
        return [
            self.caps[i] - self.res[fa]
            for i, fa in enumerate(self.forward_ids)
        ]

    def residual_reaches_sink(self, t: int) -> list[bool]:
        """Nodes with a residual path to t (reverse BFS over residual arcs)."""
        rev_adj: list[list[int]] = [[] for _ in range(self.n)]
        for a in range(len(self.to)):
            if self.res[a] > 0:
                rev_adj[self.to[a]].append(a ^ 1)  # a: u->v, record v -> u
        reach = [False] * self.n
        reach[t] = True
        q = deque([t])
        while q:
            v = q.popleft()
            for a in rev_adj[v]:
                u = self.to[a]
                if not reach[u]:
                    reach[u] = True
                    q.append(u)
        return reach


def max_flow(net: FlowNetwork) -> FlowResult:
    """Maximum s-t flow with exact integer arithmetic.

    The input network is not mutated.  The reported minimum cut is the one
    with inclusion-minimal sink side, and the path decomposition re-adds
    arc-exactly to the reported (acyclic) flow.
    """
    dinic = _Dinic(net)
    value = dinic.run(net.source, net.sink)
    reach = dinic.residual_reaches_sink(net.sink)
    if reach[net.source]:
        raise FlowError("source still reaches sink in residual graph")
    t_cut = tuple(v for v in range(net.num_nodes) if reach[v])
    s_cut = tuple(v for v in range(net.num_nodes) if not reach[v])
    flows = dinic.arc_flows()
    paths, flows = decompose(net, flows)
    cut_cap = sum(
        c
        for u, v, c in zip(net.tails, net.heads, net.caps)
        if not reach[u] and reach[v]
    )
    if cut_cap != value:
        raise FlowError(
            f"internal check failed: cut capacity {cut_cap} != flow value {value}"
        )
    return FlowResult(
        value=value,
        flow=tuple(flows),
        s_cut=s_cut,
        t_cut=t_cut,
        paths=tuple(paths),
        cut_capacity=cut_cap,
    )


def _check_feasible(net: FlowNetwork, flows: Sequence[int]) -> None:
    if len(flows) != net.num_arcs:
        raise FlowError("flow vector length does not match arc count")
    excess = [0] * net.num_nodes
    for i, f in enumerate(flows):
        if f < 0 or f > net.caps[i]:
            raise FlowError(f"arc {i} flow {f} outside [0, cap]")
        excess[net.tails[i]] -= f
        excess[net.heads[i]] += f
    for v in range(net.num_nodes):
        if v not in (net.source, net.sink) and excess[v] != 0:
            raise FlowError(f"flow not conserved at node {v}")


def decompose(
    net: FlowNetwork, flows: Sequence[int]
) -> tuple[list[FlowPath], list[int]]:
    """Decompose a feasible flow into source-sink paths.

    Cycles (possible in principle with some augmenting solvers) are
    cancelled and discarded first; the returned per-arc flow is the
    cancelled, acyclic one and equals the sum of the returned paths.
    At most num_arcs paths are produced: every strip zeroes an arc.
    """
    _check_feasible(net, flows)
    work = [int(f) for f in flows]
    out_arcs: list[list[int]] = [[] for _ in range(net.num_nodes)]
    for i in range(net.num_arcs):
        if work[i] > 0:
            out_arcs[net.tails[i]].append(i)
    ptr = [0] * net.num_nodes

    def next_arc(v: int) -> Optional[int]:
        lst = out_arcs[v]
        while ptr[v] < len(lst):
            if work[lst[ptr[v]]] > 0:
                return lst[ptr[v]]
            ptr[v] += 1
        return None

    paths: list[FlowPath] = []
    stripped = [0] * net.num_arcs
    s, t = net.source, net.sink
    while next_arc(s) is not None:
        node_pos = {s: 0}
        nodes = [s]
        arcs: list[int] = []
        v = s
        while v != t:
            a = next_arc(v)
            if a is None:
                raise FlowError(f"flow walk stuck at node {v}")
            u = net.heads[a]
            if u in node_pos:
                # cancel the cycle we just closed and resume from u
                k = node_pos[u]
                cyc = arcs[k:] + [a]
                amt = min(work[i] for i in cyc)
                for i in cyc:
                    work[i] -= amt
                for w in nodes[k + 1 :]:
                    del node_pos[w]
                nodes = nodes[: k + 1]
                arcs = arcs[:k]
                v = u
                continue
            node_pos[u] = len(nodes)
            nodes.append(u)
            arcs.append(a)
            v = u
        amt = min(work[i] for i in arcs)
        for i in arcs:
            work[i] -= amt
            stripped[i] += amt
        paths.append(FlowPath(nodes=tuple(nodes), amount=amt))

    # anything left over is circulation; cancel it silently
    for start in range(net.num_nodes):
        while next_arc(start) is not None:
            node_pos = {start: 0}
            nodes = [start]
            arcs = []
            v = start
            while True:
                a = next_arc(v)
                if a is None:
                    raise FlowError(f"leftover flow walk stuck at node {v}")
                u = net.heads[a]
                if u in node_pos:
                    k = node_pos[u]
                    cyc = arcs[k:] + [a]
                    amt = min(work[i] for i in cyc)
                    for i in cyc:
                        work[i] -= amt
                    break
                node_pos[u] = len(nodes)
                nodes.append(u)
                arcs.append(a)
                v = u

    # stripped is acyclic by construction and equals the sum of the paths
    return paths, stripped


@dataclass(frozen=True)
class SplitNetwork:
    """Vertex-capacitated flow network over a split graph.

    Each original vertex x becomes an entry node 2x and an exit node 2x+1
    joined by an arc of capacity weight(x)*q; original edges become a pair
    of effectively infinite arcs exit->entry.  The source (node 2n) feeds
    every entry node of ``a_side`` and every exit node of ``b_side`` drains
    to the sink (node 2n+1), both at capacity 2p.  All capacities carry the
    integer scale q so that per-unit throughput p/q stays exact.
    """

    net: FlowNetwork
    n: int
    a_side: tuple[int, ...]
    b_side: tuple[int, ...]
    p: int
    q: int
    vertex_arc: dict[int, int]
    edge_arc: dict[tuple[int, int], int]
    source_arc: dict[int, int]
    sink_arc: dict[int, int]

    @property
    def source(self) -> int:
        return 2 * self.n

    @property
    def sink(self) -> int:
        return 2 * self.n + 1

    def separator_from_cut(self, result: FlowResult) -> tuple[int, ...]:
        """Vertices whose internal arc crosses the minimum cut.

        Removing them disconnects a_side from b_side in the original graph,
        and their total weight times q is at most the cut capacity.
        """
        t_side = set(result.t_cut)
        return tuple(
            x for x in range(self.n) if 2 * x not in t_side and 2 * x + 1 in t_side
        )

    def routed_pairs(self, result: FlowResult) -> list[tuple[int, int, int]]:
        """(a, b, scaled_amount) per decomposed path, a in A side, b in B."""
        out = []
        for path in result.paths:
            a = path.nodes[1] // 2
            b = path.nodes[-2] // 2
            out.append((a, b, path.amount))
        return out


def build_split_network(
    graph,
    a_side: Sequence[int],
    b_side: Sequence[int],
    p: int,
    q: int,
) -> SplitNetwork:
    """Build the scaled split network for routing flow from A to B.

    ``p``/``q`` is the per-terminal throughput; both must be positive
    integers.  A and B must be disjoint.
    """
    if p <= 0 or q <= 0:
        raise FlowError("throughput numerator and denominator must be positive")
    a_set, b_set = set(a_side), set(b_side)
    if a_set & b_set:
        raise FlowError("A and B sides overlap")
    n = graph.n
    for x in a_set | b_set:
        if not (0 <= x < n):
            raise FlowError(f"terminal vertex {x} out of range")
    finite_total = sum(graph.weights) * q + 2 * p * (len(a_set) + len(b_set))
    sentinel = finite_total + 1
    if sentinel >= CAP_LIMIT:
        raise FlowError("scaled capacities overflow the integer range")

    net = FlowNetwork(num_nodes=2 * n + 2, source=2 * n, sink=2 * n + 1)
    vertex_arc = {}
    for x in range(n):
        vertex_arc[x] = net.add_arc(2 * x, 2 * x + 1, graph.weights[x] * q)
    edge_arc = {}
    for u, v in graph.edges:
        edge_arc[(u, v)] = net.add_arc(2 * u + 1, 2 * v, sentinel)
        edge_arc[(v, u)] = net.add_arc(2 * v + 1, 2 * u, sentinel)
    source_arc = {}
    for a in sorted(a_set):
        source_arc[a] = net.add_arc(2 * n, 2 * a, 2 * p)
    sink_arc = {}
    for b in sorted(b_set):
        sink_arc[b] = net.add_arc(2 * b + 1, 2 * n + 1, 2 * p)
    return SplitNetwork(
        net=net,
        n=n,
        a_side=tuple(sorted(a_set)),
        b_side=tuple(sorted(b_set)),
        p=p,
        q=q,
        vertex_arc=vertex_arc,
        edge_arc=edge_arc,
        source_arc=source_arc,
        sink_arc=sink_arc,
    )
