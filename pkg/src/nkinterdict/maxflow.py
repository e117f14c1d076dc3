"""Combinatorial max-flow / min-cut on the load-shed relaxation graph.

The network-flow relaxation of the inner (defender) problem is a maximum-flow
problem: a super-source feeds every generator bus up to its capacity, every
load bus drains into a super-sink up to its demand, and each surviving line
carries flow in either direction up to its thermal limit.  The minimum load
shed is then total demand minus the maximum flow, and the max-flow min-cut
theorem certifies optimality.

The solver is Dinic's algorithm: repeated BFS level graphs with blocking-flow
DFS phases.  Arcs are scanned in ascending line-id order, so repeated runs
produce identical flow patterns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import UsageError
from .network import SubNetwork

SOURCE = -1
SINK = -2


class FlowGraph:
    """A directed graph with capacities, in adjacency-array form.

    Arcs are stored in pairs: arc ``2i`` and its reverse ``2i + 1``.  For grid
    lines both directions carry capacity ``t``; for source/sink arcs the
    reverse capacity is zero.  ``line_arcs`` maps a grid line id to the index
    of its forward (from-bus to to-bus) arc.
    """

    def __init__(self):
        self._node_ids = {}
        self.nodes = []
        self.head = []      # arc -> target node index
        self.cap = []       # arc -> capacity
        self.adj = []       # node index -> list of arc indices
        self.line_arcs = {}

    def node(self, node_id) -> int:
        idx = self._node_ids.get(node_id)
        if idx is None:
            idx = len(self.nodes)
            self._node_ids[node_id] = idx
            self.nodes.append(node_id)
            self.adj.append([])
        return idx

    def add_arc(self, u, v, cap: float, rev_cap: float = 0.0) -> int:
        """Add arc u->v with capacity ``cap`` and its reverse with ``rev_cap``."""
        if cap < 0 or rev_cap < 0:
            raise UsageError(f"negative capacity on arc {u}->{v}")
        ui, vi = self.node(u), self.node(v)
        idx = len(self.head)
        self.head.extend((vi, ui))
        self.cap.extend((float(cap), float(rev_cap)))
        self.adj[ui].append(idx)
        self.adj[vi].append(idx + 1)
        return idx


@dataclass
class FlowResult:
    """A maximum flow with its min-cut certificate.

    ``flow`` maps arc index -> net flow on that arc (antisymmetric with its
    reverse).  ``reachable`` is the set of node indices reachable from the
    source in the final residual graph; arcs leaving it form a minimum cut.
    """

    value: float
    flow: list
    reachable: set
    graph: FlowGraph

    def line_flow(self, line_id: int) -> float:
        """Signed flow on a grid line (positive in the from->to direction)."""
        arc = self.graph.line_arcs[line_id]
        return self.flow[arc]

    def cut_capacity(self) -> float:
        """Capacity of the certificate cut; equals ``value`` at optimality."""
        g = self.graph
        total = 0.0
        for u in self.reachable:
            for a in g.adj[u]:
                if g.head[a] not in self.reachable:
                    total += g.cap[a]
        return total


def max_flow(g: FlowGraph, source=SOURCE, sink=SINK) -> FlowResult:
    """Dinic's algorithm.  Disconnected source/sink yields flow 0."""
    if source == sink:
        raise UsageError("source and sink must differ")
    s = g.node(source)
    t = g.node(sink)
    n = len(g.nodes)
    cap = g.cap
    head = g.head
    adj = g.adj
    flow = [0.0] * len(cap)
    INF = float("inf")

    def bfs_levels():
        level = [-1] * n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for a in adj[u]:
                v = head[a]
                if level[v] < 0 and cap[a] - flow[a] > 1e-12:
                    level[v] = level[u] + 1
                    q.append(v)
        return level if level[t] >= 0 else None

    def dfs_block(level, it):
        # iterative blocking-flow DFS with per-node arc cursors
        total = 0.0
        while True:
            path = []
            u = s
            pushed = False
            while True:
                if u == t:
                    aug = min(cap[a] - flow[a] for a in path)
                    for a in path:
                        flow[a] += aug
                        flow[a ^ 1] -= aug
                    total += aug
                    pushed = True
                    # restart from source, keeping cursors
                    break
                advanced = False
                while it[u] < len(adj[u]):
                    a = adj[u][it[u]]
                    v = head[a]
                    if cap[a] - flow[a] > 1e-12 and level[v] == level[u] + 1:
                        path.append(a)
                        u = v
                        advanced = True
                        break
                    it[u] += 1
                if not advanced:
                    if u == s:
                        return total
                    # dead end: exhaust the arc that led here and backtrack
                    a = path.pop()
                    u = head[a ^ 1]
                    it[u] += 1
            if not pushed:
                return total

    while True:
        level = bfs_levels()
        if level is None:
            break
        dfs_block(level, [0] * n)

    value = sum(flow[a] for a in adj[s] if a % 2 == 0) - sum(flow[a ^ 1] for a in adj[s] if a % 2 == 1)
    # residual reachability certificate
    reachable = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for a in adj[u]:
            v = head[a]
            if v not in reachable and cap[a] - flow[a] > 1e-12:
                reachable.add(v)
                q.append(v)
    return FlowResult(value=value, flow=flow, reachable=reachable, graph=g)


def build_nf_graph(sub: SubNetwork) -> FlowGraph:
    """Build the load-shed max-flow graph for an operational subnetwork.

    Source arcs carry each bus's aggregate generation ceiling (clamped below
    at zero; capacitated flows have no lower bounds, consistent with treating
    generator minimums as breakable during contingencies).  Negative demand is
    added to the bus's supply.  Sink arcs carry positive demand.  Line arcs
    carry flow both ways up to the thermal limit.
    """
    g = FlowGraph()
    g.node(SOURCE)
    g.node(SINK)
    for bus in sub.buses:
        supply = max(bus.pg_hi, 0.0)
        if bus.pd < 0:
            supply += -bus.pd
        if supply > 0:
            g.add_arc(SOURCE, bus.id, supply)
        if bus.pd > 0:
            g.add_arc(bus.id, SINK, bus.pd)
    for line in sorted(sub.operational, key=lambda l: l.id):
        g.line_arcs[line.id] = g.add_arc(line.from_bus, line.to_bus, line.t, rev_cap=line.t)
    return g


def nf_shed(sub: SubNetwork) -> tuple[float, FlowResult]:
    """Minimum load shed under the network-flow relaxation, with its flow."""
    g = build_nf_graph(sub)
    res = max_flow(g)
    total = sum(b.pd for b in sub.buses if b.pd > 0)
    return max(total - res.value, 0.0), res


def nf_cut_coefficients(res: FlowResult, sub: SubNetwork) -> dict:
    """Per-line load-shed cut coefficients from a maximum flow.

    For surviving lines the coefficient is the magnitude of the line's net
    flow (the larger of the two directed arc flows; at most one is positive);
    interdicted lines get zero.
    """
    alpha = {}
    for line in sub.net.lines:
        if line.id in sub.interdicted:
            alpha[line.id] = 0.0
        else:
            alpha[line.id] = abs(res.line_flow(line.id))
    return alpha
