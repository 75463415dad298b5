"""Adaptive adversaries that build the tree while the agents explore it.

``StarAdversary`` hides the long rays of a star behind short ones.
``LowerBoundAdversary`` grows ``l`` subtrees below hubs at depth ``d1`` whose
paths end exactly when the exploring agent can only just return; a budget
``N_i`` per subtree caps the number of non-leaf vertices handed out.

Both adversaries finalize into an ordinary :class:`~treexplore.tree.Tree`
that is consistent with everything the agents observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import ExplorationState, Stub, init_run
from .tree import Tree


class InfeasibleParams(ValueError):
    pass


# -- parameters ----------------------------------------------------------

def lb_delta(l: int, B: int) -> int:
    """ceil(sqrt(2 l B)) + 2 l, computed exactly."""
    x = 2 * l * B
    root = math.isqrt(x)
    if root * root < x:
        root += 1
    return root + 2 * l


@dataclass(frozen=True)
class LBParams:
    l: int
    B: int
    d1: int
    d2: int
    delta: int

    @property
    def k(self) -> int:
        return 2 * self.l - 1

    @property
    def b1(self) -> Fraction:
        return Fraction(self.d1, self.B)

    @property
    def case1_bump(self) -> int:
        return (self.B + self.d2) // 2 - self.d1 + 2 * self.delta

    def describe(self) -> str:
        return f"l={self.l};B={self.B};d1={self.d1};d2={self.d2};delta={self.delta}"


def lb_violations(l: int, B: int, d1: int, d2: int) -> list[str]:
    delta = lb_delta(l, B) if l >= 1 and B >= 0 else 0
    out = []
    if l < 2:
        out.append(f"l={l} < 2")
    for name, val in (("B", B), ("d1", d1), ("d2", d2)):
        if val % 2:
            out.append(f"{name}={val} is odd")
    if not d1 + delta < d2:
        out.append(f"d1+delta={d1 + delta} >= d2={d2}")
    if not 3 * d2 <= 5 * d1:
        out.append(f"d2={d2} > 5*d1/3")
    if not 3 * d1 < B:
        out.append(f"3*d1={3 * d1} >= B={B}")
    if not B <= d1 + 2 * d2:
        out.append(f"B={B} > d1+2*d2={d1 + 2 * d2}")
    return out


def lb_params(l: int, B: int, d1: int, d2: int | None = None) -> LBParams:
    """Validated parameters; ``d2`` defaults to ``(B - d1) / 2``."""
    if d2 is None:
        if (B - d1) % 2:
            raise InfeasibleParams(f"B-d1={B - d1} is odd, so (B-d1)/2 is not an integer")
        d2 = (B - d1) // 2
    bad = lb_violations(l, B, d1, d2)
    if bad:
        raise InfeasibleParams("infeasible parameters: " + "; ".join(bad))
    return LBParams(l, B, d1, d2, lb_delta(l, B))


# -- star ------------------------------------------------------------------

class StarAdversary:
    """Root of degree k + kB/2; every ray entered first is a single leaf
    until the k*B/2 short rays are used up."""

    def __init__(self, k: int, B: int):
        if B % 2:
            raise ValueError("star adversary needs an even budget")
        self.k, self.B = k, B
        self.root = 0
        self.short_total = k * B // 2
        self.short_used = 0
        self.long_used = 0
        self.ray_kind: dict[int, str] = {}
        self.next_id = 1

    def root_degree(self) -> int:
        return self.k + self.short_total

    def reveal(self, state, agent, v, port, energy):
        w = self.next_id
        self.next_id += 1
        depth = state.known.depth[v] + 1
        if v == self.root:
            if self.short_used < self.short_total:
                self.short_used += 1
                self.ray_kind[port] = "short"
                return w, 1
            self.long_used += 1
            self.ray_kind[port] = "long"
        return w, (1 if depth >= self.B else 2)

    def on_arrive(self, state, agent, v):
        pass

    def pending(self) -> bool:
        return False

    def finalize(self, state: ExplorationState) -> Tree:
        """Complete the star: unexplored rays get the remaining lengths,
        short rays first in port order."""
        known = state.known
        adj = {v: list(nbrs) for v, nbrs in known.nbr.items()}
        next_id = max(adj) + 1
        short_left = self.short_total - self.short_used
        for p in range(len(adj[self.root])):
            if adj[self.root][p] is not None:
                continue
            length = 1 if short_left > 0 else self.B
            short_left -= length == 1
            prev = self.root
            for i in range(length):
                w = next_id
                next_id += 1
                adj[w] = [prev]
                if prev == self.root:
                    adj[prev][p] = w
                else:
                    adj[prev].append(w)
                prev = w
        # a long ray cut short by the run keeps growing to length B
        for v in list(known.nbr):
            for p, w in enumerate(adj[v]):
                if w is None:
                    depth = known.depth[v] + 1
                    prev = v
                    for d in range(depth, self.B + 1):
                        w = next_id
                        next_id += 1
                        adj[w] = [prev]
                        if prev == v:
                            adj[v][p] = w
                        else:
                            adj[prev].append(w)
                        prev = w
        return _tree_from_dict(self.root, adj)


def _tree_from_dict(root: int, adj: dict[int, list[int]]) -> Tree:
    ids = sorted(adj)
    assert ids == list(range(len(ids))), "vertex ids are not contiguous"
    return Tree(root, tuple(tuple(adj[v]) for v in ids))


def run_star(k: int, B: int, strategy: str = "dnd", seed: int = 0):
    from .strategies import run_strategy

    adv = StarAdversary(k, B)
    state = init_run(adv, k, B)
    result = run_strategy(strategy, state, seed)
    return adv, state, result


# -- lower-bound adversary -----------------------------------------------

SKELETON, REGION1, REGION2 = 0, 1, 2


@dataclass
class SubtreeLog:
    index: int
    hub1: int | None = None
    hub2: int | None = None
    N: int = 2
    nonleaf: int = 0
    depleted: bool = False
    active1: bool = True
    active2: bool = True
    fresh: list[int] = field(default_factory=list)
    second: list[int] = field(default_factory=list)
    cases: list[str] = field(default_factory=list)
    regime_d2: bool = False
    regime_d1: bool = False
    designated: Stub | None = None
    v2_branch: int | None = None
    case2_a1_count: int | None = None
    vertices: list[int] = field(default_factory=list)

    @property
    def A1(self) -> int | None:
        return self.fresh[0] if self.fresh else None

    def has_case(self, *names) -> bool:
        return any(c in names for c in self.cases)


class LowerBoundAdversary:
    """Budgeted adversary with Cases 1, 2a, 2b, 2c and 3."""

    def __init__(self, params: LBParams):
        self.p = params
        self.root = 0
        self.next_id = 1
        self.subtrees = [SubtreeLog(i) for i in range(params.l)]
        # per-vertex metadata, keyed by id
        self.sub: dict[int, int] = {0: -1}
        self.region: dict[int, int] = {0: SKELETON}
        self.branch: dict[int, int | None] = {0: None}
        self.explorer: dict[int, int] = {}
        self.visits: dict[int, list[int]] = {}
        self.B_A: dict[int, int] = {}
        self.events: list[str] = []

    # World protocol
    def root_degree(self) -> int:
        return self.p.l

    def pending(self) -> bool:
        return False

    def reveal(self, state, agent, v, port, energy):
        p = self.p
        w = self.next_id
        self.next_id += 1
        d = state.known.depth[v] + 1
        self.explorer[w] = agent
        if self.region[v] == SKELETON:
            i = port if v == self.root else self.sub[v]
            self.sub[w] = i
            self.branch[w] = None
            if d == p.d1:
                S = self.subtrees[i]
                S.hub1 = w
                S.vertices.append(w)
                self.region[w] = REGION1
                self._count_nonleaf(S)
                return w, p.delta + 1
            self.region[w] = SKELETON
            return w, 2
        i = self.sub[v]
        S = self.subtrees[i]
        S.vertices.append(w)
        self.sub[w] = i
        region = REGION2 if (v == S.hub2 or self.region[v] == REGION2) else REGION1
        self.region[w] = region
        self.branch[w] = port if v == S.hub1 else self.branch[v]
        deg = self._decide(state, S, agent, v, port, w, d, energy, region)
        if deg > 1:
            self._count_nonleaf(S)
        return w, deg

    def _count_nonleaf(self, S: SubtreeLog) -> None:
        S.nonleaf += 1
        assert S.nonleaf <= S.N, f"subtree {S.index}: non-leaf count exceeds budget"
        if S.nonleaf >= S.N:
            S.depleted = True
            S.active1 = S.active2 = False
            self.events.append(f"T{S.index}: budget depleted at N={S.N}")

    def _decide(self, state, S, agent, v, port, w, d, e, region) -> int:
        p = self.p
        if S.depleted:
            return 1
        if S.designated is not None and S.designated == (v, port):
            if d == p.d2:
                S.hub2 = w
                S.designated = None
                self.events.append(f"T{S.index}: hub2 {w} created on the designated path")
                return p.delta + 1
            S.designated = Stub(w, 1)
            return 2
        if (region == REGION1 and not S.active1) or (region == REGION2 and not S.active2):
            return 1
        if (region == REGION1 and S.hub2 is None and S.designated is None
                and not S.has_case("2a", "2b", "2c") and agent == S.A1 and d == p.d2):
            S.hub2 = w
            self.events.append(f"T{S.index}: hub2 {w} discovered by agent {agent}")
            return p.delta + 1
        if self._stops(S, agent, w, d, e, region):
            return 1
        return 2

    def _stops(self, S, agent, w, d, e, region) -> bool:
        p = self.p
        if agent == S.A1 and d > p.d2 and e <= d - p.d2:
            return True
        if S.regime_d2 and d > p.d2 and e <= d - p.d2:
            return True
        if S.regime_d1 and d > p.d1 and e <= d - p.d1:
            return True
        if agent in S.second:
            if region == REGION2 and d > p.d2 and e <= d - p.d2:
                return True
            if (region == REGION1 and self.branch[w] != S.v2_branch
                    and d > p.d1 and e <= d - p.d1):
                return True
        return False

    def on_arrive(self, state, agent, v):
        i = self.sub.get(v, -1)
        if i < 0 or self.subtrees[i].hub1 != v:
            return
        visited = self.visits.setdefault(agent, [])
        if i in visited:
            return
        S = self.subtrees[i]
        energy = state.agents[agent].energy
        if not visited:
            S.fresh.append(agent)
            if len(S.fresh) == 1:
                S.cases.append("1")
                S.N += self.p.case1_bump
            elif len(S.fresh) == 2:
                self._case2(state, S)
        else:
            assert len(visited) == 1, f"agent {agent} entered a third subtree"
            S.second.append(agent)
            self.B_A[agent] = energy
            S.N += energy // 2 + 2
            S.cases.append("3")
        visited.append(i)

    def _case2(self, state, S: SubtreeLog) -> None:
        p = self.p
        a1 = S.A1
        cnt = sum(1 for v in S.vertices
                  if v != S.hub1 and self.explorer.get(v) == a1 and v in state.known)
        S.case2_a1_count = cnt
        if 2 * cnt <= p.d1 + p.d2:
            S.cases.append("2a")
            S.active1 = S.active2 = False
            return
        if S.hub2 is not None:
            S.cases.append("2b")
            S.active1 = False
            S.regime_d2 = True
            S.v2_branch = self.branch[S.hub2]
            return
        target = self._designate(state, S)
        if target is not None:
            S.cases.append("2b")
            S.active1 = False
            S.regime_d2 = True
            S.designated = target
            S.v2_branch = target.port if target.vertex == S.hub1 else self.branch[target.vertex]
            self.events.append(f"T{S.index}: designated path through stub {tuple(target)}")
            return
        S.cases.append("2c")
        S.regime_d1 = True

    def _designate(self, state, S: SubtreeLog) -> Stub | None:
        """Cheapest region-1 stub from which agent A1 can still reach depth d2."""
        p = self.p
        known = state.known
        a = state.agents[S.A1]
        best = None
        for stub in self._stubs_below(known, S.hub1):
            if self.region[stub.vertex] != REGION1 and stub.vertex != S.hub1:
                continue
            sd = known.depth[stub.vertex] + 1
            if sd > p.d2:
                continue
            cost = known.distance(a.position, stub.vertex) + 1 + (p.d2 - sd)
            if cost > a.energy:
                continue
            key = (cost, -sd, stub.vertex, stub.port)
            if best is None or key < best[0]:
                best = (key, stub)
        return None if best is None else best[1]

    @staticmethod
    def _stubs_below(known, top):
        stack = [top]
        while stack:
            v = stack.pop()
            for q in known.child_ports(v):
                w = known.nbr[v][q]
                if w is None:
                    yield Stub(v, q)
                elif known.stubs_below[w] > 0:
                    stack.append(w)

    # -- accounting ------------------------------------------------------

    def a1_path(self, known, S: SubtreeLog) -> list[int]:
        """Explored vertices on the hub1 -> hub2 path, all credited to A1."""
        top = S.hub2
        if top is None and S.designated is not None:
            top = S.designated.vertex
            if top == S.hub1 or self.region.get(top) != REGION1:
                return []
        if top is None or S.hub1 is None:
            return []
        out = [top]
        while top != S.hub1:
            top = known.parent[top]
            out.append(top)
        return out

    def credited(self, known, trace) -> dict[int, dict[int, int]]:
        """Per subtree, the number of its vertices explored by each agent."""
        first = {}
        for ev in trace:
            if ev.newly_explored:
                first[ev.dst] = ev.agent
        counts: dict[int, dict[int, int]] = {S.index: {} for S in self.subtrees}
        for S in self.subtrees:
            owner = dict((v, first[v]) for v in S.vertices if v in first)
            if S.A1 is not None:
                for v in self.a1_path(known, S):
                    if v in owner:
                        owner[v] = S.A1
            for a in owner.values():
                counts[S.index][a] = counts[S.index].get(a, 0) + 1
        return counts

    def subtree_explored(self, known, S: SubtreeLog) -> bool:
        return S.hub1 is not None and known.stubs_below[S.hub1] == 0


def run_lower_bound(params: LBParams, strategy: str = "dnd", seed: int = 0):
    from .strategies import run_strategy

    adv = LowerBoundAdversary(params)
    state = init_run(adv, params.k, params.B)
    result = run_strategy(strategy, state, seed)
    return adv, state, result


# -- classification and lemma checks ---------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f" ({self.detail})" if self.detail else "")


def classify_M(adv: LowerBoundAdversary, state: ExplorationState) -> tuple[set, set, set]:
    known = state.known
    M0, M1, M2 = set(), set(), set()
    for S in adv.subtrees:
        i = S.index
        b = [adv.B_A.get(a, 0) for a in S.fresh]
        explored = adv.subtree_explored(known, S)
        if all(x > 0 for x in b) or S.has_case("2a"):
            M0.add(i)
        if not explored and any(x == 0 for x in b) and not S.has_case("2a"):
            M1.add(i)
        if explored and S.has_case("2b", "2c"):
            M2.add(i)
    return M0, M1, M2


def completely_explored_count(adv: LowerBoundAdversary, state: ExplorationState) -> int:
    return sum(adv.subtree_explored(state.known, S) for S in adv.subtrees)


def check_lemma3(adv: LowerBoundAdversary, state: ExplorationState, trace) -> list[Check]:
    p = adv.p
    known = state.known
    counts = adv.credited(known, trace)
    out = []
    worst = max([adv.B_A.get(a, 0) for a in range(p.k)] or [0])
    out.append(Check("lemma3.1", worst <= p.B - 3 * p.d1, f"max B_A={worst}, B-3d1={p.B - 3 * p.d1}"))
    ok2 = all(adv.B_A.get(S.A1, 0) == 0 for S in adv.subtrees if S.has_case("2b", "2c"))
    out.append(Check("lemma3.2", ok2))
    bad3 = []
    for S in adv.subtrees:
        for a in S.second:
            c = counts[S.index].get(a, 0)
            if c > adv.B_A[a] // 2 + 2:
                bad3.append(f"T{S.index} agent {a}: {c} > {adv.B_A[a] // 2 + 2}")
    out.append(Check("lemma3.3", not bad3, "; ".join(bad3)))
    bad4 = []
    for S in adv.subtrees:
        if S.A1 is not None:
            c = counts[S.index].get(S.A1, 0)
            if c > p.case1_bump:
                bad4.append(f"T{S.index}: {c} > {p.case1_bump}")
    out.append(Check("lemma3.4", not bad4, "; ".join(bad4)))
    bad5 = []
    for S in adv.subtrees:
        if len(S.fresh) <= 1:
            n_i = sum(counts[S.index].values())
            if not n_i < S.N:
                bad5.append(f"T{S.index}: explored {n_i} >= N={S.N}")
    out.append(Check("lemma3.5", not bad5, "; ".join(bad5)))
    bad6 = []
    for S in adv.subtrees:
        if S.active1 and not S.depleted and S.hub1 is not None:
            depths = [known.depth[s.vertex] + 1 for s in adv._stubs_below(known, S.hub1)]
            if not depths or min(depths) > p.d1 + p.delta:
                bad6.append(f"T{S.index}: shallowest stub at {min(depths) if depths else None}")
    out.append(Check("lemma3.6", not bad6, "; ".join(bad6)))
    return out


def check_lemma4(adv: LowerBoundAdversary, state: ExplorationState, trace) -> list[Check]:
    p = adv.p
    known = state.known
    counts = adv.credited(known, trace)
    M0, M1, M2 = classify_M(adv, state)
    everything = set(range(p.l))
    partition = (M0 | M1 | M2 == everything and not (M0 & M1) and not (M0 & M2)
                 and not (M1 & M2))
    out = [Check("lemma4.1", partition, f"M0={sorted(M0)} M1={sorted(M1)} M2={sorted(M2)}")]
    w = p.B - 3 * p.d1
    bad = {2: [], 3: [], 4: [], 5: []}
    for S in adv.subtrees:
        i = S.index
        size2 = 2 * sum(counts[i].values())  # doubled to stay integral
        sum2 = sum(adv.B_A[a] for a in S.second)
        sum1 = sum(adv.B_A.get(a, 0) for a in S.fresh)
        base2 = (p.B + p.d2) - 2 * p.d1
        if size2 > base2 + 12 * p.delta + sum2:
            bad[2].append(f"T{i}")
        if i in M0 and size2 > base2 + 8 * p.delta + (len(S.fresh) - 2) * w + sum2 - sum1:
            bad[3].append(f"T{i}")
        if i in M1 and sum1 > (len(S.fresh) - 1) * w:
            bad[4].append(f"T{i}")
        if i in M2 and sum1 > (len(S.fresh) - 2) * w:
            bad[5].append(f"T{i}")
    for j in (2, 3, 4, 5):
        out.append(Check(f"lemma4.ineq{j}", not bad[j], ", ".join(bad[j])))
    return out


def alg_upper_bound(p: LBParams, t: int) -> Fraction:
    """The ALG bound l((B+d2)/2 + 6 delta) + (l-1-t)(B-3 d1)/2."""
    return Fraction(p.l * (p.B + p.d2 + 12 * p.delta) + (p.l - 1 - t) * (p.B - 3 * p.d1), 2)


def opt_lower_bound(p: LBParams, t: int) -> int:
    return (p.l - t) * p.B + (p.l - 1 + t) * (p.B - p.d1 - p.delta)


# -- finalization ----------------------------------------------------------

@dataclass
class FinalizedReport:
    params: LBParams
    t: int
    cases: dict[int, list[str]]
    M: tuple[list[int], list[int], list[int]]
    opt_bound: int
    alg: int
    opt_replay: int
    u: dict[int, int]
    u1_subtree: int
    u1_depth: int
    tree: Tree = field(repr=False)
    plan: list[list[int]] = field(repr=False, default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"params {self.params.describe()}",
            f"t {self.t}",
        ]
        for i in sorted(self.cases):
            lines.append(f"cases T{i} {','.join(self.cases[i]) or '-'}")
        lines.append("M0 " + (",".join(map(str, self.M[0])) or "-"))
        lines.append("M1 " + (",".join(map(str, self.M[1])) or "-"))
        lines.append("M2 " + (",".join(map(str, self.M[2])) or "-"))
        lines.append(f"u1 T{self.u1_subtree} depth {self.u1_depth}")
        lines.append(f"opt_bound {self.opt_bound}")
        lines.append(f"opt_replay {self.opt_replay}")
        lines.append(f"alg {self.alg}")
        return "\n".join(lines) + "\n"


def finalize(adv: LowerBoundAdversary, state: ExplorationState) -> FinalizedReport:
    p = adv.p
    known = state.known
    l, B = p.l, p.B
    t = completely_explored_count(adv, state)
    assert t < l, "every subtree completely explored"

    # shallowest stub in every root branch that is not completely explored
    stubs_by_branch: dict[int, list[Stub]] = {i: [] for i in range(l)}
    for s in known.stubs():
        if s.vertex == adv.root:
            stubs_by_branch[s.port].append(s)
        else:
            stubs_by_branch[adv.sub[s.vertex]].append(s)
    open_ = [S.index for S in adv.subtrees if not adv.subtree_explored(known, S)]
    u_stub = {}
    for i in open_:
        cands = stubs_by_branch[i]
        assert cands, f"T{i} not completely explored but has no stub"
        u_stub[i] = min(cands, key=lambda s: (known.depth[s.vertex], s.vertex, s.port))
    first = [S.index for S in adv.subtrees if len(S.fresh) <= 1]
    assert first, "no subtree with at most one fresh agent"
    i1 = first[0]
    assert i1 in u_stub, f"T{i1} has at most one fresh agent yet is completely explored"
    u1_depth = known.depth[u_stub[i1].vertex] + 1
    assert u1_depth <= p.d1 + p.delta, f"shallowest unexplored vertex of T{i1} at depth {u1_depth}"

    adj = {v: list(nbrs) for v, nbrs in known.nbr.items()}
    next_id = max(adj) + 1
    u_vertex: dict[int, int] = {}
    path_heads: dict[int, list[list[int]]] = {}

    def new_child(parent: int, port: int | None) -> int:
        nonlocal next_id
        w = next_id
        next_id += 1
        adj[w] = [parent]
        if port is None:
            adj[parent].append(w)
        else:
            adj[parent][port] = w
        return w

    u_of_stub = {u_stub[i]: i for i in u_stub}
    for s in list(known.stubs()):
        w = new_child(s.vertex, s.port)
        i = u_of_stub.get(s)
        if i is None:
            continue
        u_vertex[i] = w
        n_paths = 2 * l - 1 if i == i1 else 1
        paths = []
        for _ in range(n_paths):
            prev, path = w, []
            for _ in range(B):
                prev = new_child(prev, None)
                path.append(prev)
            paths.append(path)
        path_heads[i] = paths
    tree = _tree_from_dict(adv.root, adj)

    # OPT plan: one agent per open subtree, the rest share u1
    plan = []
    free_paths = {i: list(path_heads[i]) for i in path_heads}
    for i in open_:
        plan.append(_route(tree, u_vertex[i], free_paths[i].pop(0)))
    while len(plan) < p.k:
        plan.append(_route(tree, u_vertex[i1], free_paths[i1].pop(0)))
    replay = init_run(tree, p.k, B)
    for a, route in enumerate(plan):
        cur = tree.root
        for nxt in route:
            if replay.agents[a].energy < 1:
                break
            replay.traverse(a, tree.port_to(cur, nxt))
            cur = nxt
    opt_replay = replay.result().alg_excl
    M0, M1, M2 = classify_M(adv, state)
    return FinalizedReport(
        params=p, t=t, cases={S.index: list(S.cases) for S in adv.subtrees},
        M=(sorted(M0), sorted(M1), sorted(M2)), opt_bound=opt_lower_bound(p, t),
        alg=len(known) - 1, opt_replay=opt_replay, u=u_vertex, u1_subtree=i1,
        u1_depth=u1_depth, tree=tree, plan=plan,
    )


def _route(tree: Tree, u: int, path: list[int]) -> list[int]:
    up = []
    v = u
    while v != tree.root:
        up.append(v)
        v = tree.parent[v]
    return up[::-1] + path
