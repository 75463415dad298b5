"""Agent programs: L-DFS, R-DFS, Divide & Explore and simple baselines."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .engine import ExplorationState, KnownMap, RunResult, Stub
from .tree import Tree


class NoUnexplored(LookupError):
    pass


# -- DFS sequences on a fully known tree ---------------------------------

def _dfs_sequence(tree: Tree, largest: bool) -> list[tuple[int, int]]:
    seq = []
    root = tree.root

    def ports(v):
        ps = range(tree.degree(v)) if v == root else range(1, tree.degree(v))
        return reversed(ps) if largest else ps

    stack = [(root, iter(ports(root)))]
    while stack:
        v, it = stack[-1]
        for p in it:
            w = tree.neighbor(v, p)
            seq.append((v, w))
            stack.append((w, iter(ports(w))))
            break
        else:
            stack.pop()
            if stack:
                seq.append((v, stack[-1][0]))
    return seq


def ldfs_sequence(tree: Tree) -> list[tuple[int, int]]:
    """Directed edges of a full L-DFS from the root (root ports from 0)."""
    return _dfs_sequence(tree, largest=False)


def rdfs_sequence(tree: Tree) -> list[tuple[int, int]]:
    return _dfs_sequence(tree, largest=True)


# -- subtrees of the shared map ----------------------------------------------

@dataclass
class Subtree:
    """Rooted subtree ``root`` plus, optionally, only some branches at the root.

    Membership is by branch: vertices revealed later under an allowed root
    port belong to this subtree.
    """

    root: int
    branches: tuple[int, ...] | None = None
    index: int = 0

    def root_ports(self, known: KnownMap):
        if self.branches is not None:
            return self.branches
        return known.child_ports(self.root)

    def ports_at(self, known: KnownMap, v: int):
        return self.root_ports(known) if v == self.root else known.child_ports(v)

    def n_stubs(self, known: KnownMap) -> int:
        if self.branches is None:
            return known.stubs_below[self.root]
        total = 0
        for p in self.branches:
            w = known.nbr[self.root][p]
            total += 1 if w is None else known.stubs_below[w]
        return total

    def has_unexplored(self, known: KnownMap) -> bool:
        return self.n_stubs(known) > 0

    def contains(self, known: KnownMap, v: int) -> bool:
        if v not in known or not known.is_ancestor(self.root, v):
            return False
        if v == self.root or self.branches is None:
            return True
        return _branch_port(known, self.root, v) in self.branches


def _branch_port(known: KnownMap, top: int, v: int) -> int:
    """Port at ``top`` of the branch containing its proper descendant ``v``."""
    while known.parent[v] != top:
        v = known.parent[v]
    return known.parent_port[v]


def _stub_branch(known: KnownMap, top: int, stub: Stub) -> int:
    if stub.vertex == top:
        return stub.port
    return _branch_port(known, top, stub.vertex)


def _extreme_unexplored(known: KnownMap, S: Subtree, largest: bool) -> Stub:
    x = S.root
    ports = S.root_ports(known)
    while True:
        order = reversed(ports) if largest else ports
        for p in order:
            w = known.nbr[x][p]
            if w is None:
                return Stub(x, p)
            if known.stubs_below[w] > 0:
                x = w
                ports = known.child_ports(w)
                break
        else:
            raise NoUnexplored(f"subtree rooted at {S.root} is completely explored")


def leftmost_unexplored(known: KnownMap, S: Subtree) -> Stub:
    return _extreme_unexplored(known, S, largest=False)


def rightmost_unexplored(known: KnownMap, S: Subtree) -> Stub:
    return _extreme_unexplored(known, S, largest=True)


def move_roots_down(subtrees: list[Subtree], known: KnownMap) -> list[Subtree]:
    for S in subtrees:
        if not S.has_unexplored(known):
            continue
        while True:
            ports = S.root_ports(known)
            if any(known.nbr[S.root][p] is None for p in ports):
                break
            leading = [p for p in ports if known.stubs_below[known.nbr[S.root][p]] > 0]
            if len(leading) != 1:
                break
            S.root = known.nbr[S.root][leading[0]]
            S.branches = None
    return subtrees


def split(S: Subtree, v_R: Stub, known: KnownMap, v_L: Stub | None = None,
          next_index: int = 0) -> tuple[Subtree, Subtree]:
    """Cut off the root branch containing ``v_R``; returns ``(S1, S2)``."""
    port = _stub_branch(known, S.root, v_R)
    if v_L is not None:
        assert _stub_branch(known, S.root, v_L) != port, \
            "leftmost and rightmost unexplored vertices share a root branch"
    rest = tuple(p for p in S.root_ports(known) if p != port)
    assert rest, "split would leave an empty subtree"
    return (Subtree(S.root, rest, next_index), Subtree(S.root, (port,), next_index + 1))


# -- single-agent programs -----------------------------------------------

def _run_dfs(state: ExplorationState, agent: int, S: Subtree, start, largest: bool) -> None:
    known = state.known
    if isinstance(start, Stub):
        if not S.contains(known, start.vertex) or start.port not in S.ports_at(known, start.vertex):
            raise ValueError(f"start {start} not in subtree")
        if not state.walk_to_stub(agent, start):
            return
    else:
        if not S.contains(known, start):
            raise ValueError(f"start {start} not in subtree")
        if not state.walk_to(agent, start):
            return
    a = state.agents[agent]
    while a.energy > 0 and S.has_unexplored(known):
        x = a.position
        ports = S.ports_at(known, x)
        order = reversed(ports) if largest else ports
        for p in order:
            if known.has_unexplored(x, p):
                state.traverse(agent, p)
                break
        else:
            if x == S.root:
                break
            state.traverse(agent, 0)


def run_ldfs(state: ExplorationState, agent: int, S: Subtree | None = None, start=None) -> None:
    S = S or Subtree(state.root)
    _run_dfs(state, agent, S, S.root if start is None else start, largest=False)


def run_rdfs(state: ExplorationState, agent: int, S: Subtree | None = None, start=None) -> None:
    S = S or Subtree(state.root)
    _run_dfs(state, agent, S, S.root if start is None else start, largest=True)


# -- Divide & Explore ----------------------------------------------------

@dataclass
class IterationRecord:
    t: int
    root: int
    root_depth: int
    k_t: int
    action: str
    agents: tuple[tuple[int, str], ...] = ()
    vl_depth: int | None = None
    vr_depth: int | None = None
    roots: tuple[int, ...] = ()  # roots of all subtrees at the end of the iteration


@dataclass
class DivideExplore:
    state: ExplorationState
    subtrees: list[Subtree] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)
    next_agent: int = 0
    next_index: int = 0

    def _dispatch(self, mode: str, S: Subtree, start) -> tuple[int, str]:
        a = self.next_agent
        self.next_agent += 1
        self.state.agents[a].dispatched = True
        (run_ldfs if mode == "L" else run_rdfs)(self.state, a, S, start)
        return a, mode

    def _new_subtree(self, root, branches=None) -> Subtree:
        S = Subtree(root, branches, self.next_index)
        self.next_index += 1
        return S

    def run(self) -> RunResult:
        st = self.state
        known = st.known
        k, B = st.k, st.B
        T = self._new_subtree(st.root)
        self.subtrees = [T]
        st.iteration = 0
        used = [self._dispatch("L", T, st.root)]
        if k >= 2:
            used.append(self._dispatch("R", T, st.root))
        self.records.append(IterationRecord(0, st.root, 0, len(used), "INIT", tuple(used),
                                            roots=(st.root,)))
        t = 0
        while not st.is_fully_explored() and self.next_agent < k:
            t += 1
            st.iteration = t
            move_roots_down(self.subtrees, known)
            S = min((S for S in self.subtrees if S.has_unexplored(known)),
                    key=lambda S: (known.depth[S.root], S.index))
            dr = known.depth[S.root]
            v_L = leftmost_unexplored(known, S)
            v_R = rightmost_unexplored(known, S)
            dl, dR = known.stub_depth(v_L), known.stub_depth(v_R)
            # exact form of d(v) - d(r_S) <= max{1, (B - d(r_S)) / 3}
            limit3 = max(3, B - dr)
            if 3 * (dl - dr) <= limit3:
                used = [self._dispatch("L", S, v_L)]
                action = "LDFS"
            elif 3 * (dR - dr) <= limit3:
                used = [self._dispatch("R", S, v_R)]
                action = "RDFS"
            else:
                S1, S2 = split(S, v_R, known, v_L, self.next_index)
                self.next_index += 2
                self.subtrees.remove(S)
                self.subtrees += [S1, S2]
                used = [self._dispatch("R", S1, S1.root)]
                if self.next_agent < k:
                    used.append(self._dispatch("L", S2, S2.root))
                action = "SPLIT"
            self.records.append(IterationRecord(t, S.root, dr, len(used), action, tuple(used), dl, dR,
                                                tuple(X.root for X in self.subtrees)))
        return st.result(self.records)


def divide_and_explore(state: ExplorationState) -> RunResult:
    return DivideExplore(state).run()


# -- baselines -----------------------------------------------------------

def _sequential(state: ExplorationState, mode: str) -> RunResult:
    records = []
    for a in range(state.k):
        if state.is_fully_explored():
            break
        state.iteration = a
        state.agents[a].dispatched = True
        (run_ldfs if mode == "L" else run_rdfs)(state, a)
        records.append(IterationRecord(a, state.root, 0, 1, "LDFS" if mode == "L" else "RDFS",
                                       ((a, mode),)))
    return state.result(records)


def sequential_ldfs(state: ExplorationState) -> RunResult:
    """Agents run L-DFS from the root one after another."""
    return _sequential(state, "L")


def sequential_rdfs(state: ExplorationState) -> RunResult:
    return _sequential(state, "R")


def _nearest_stubs(known: KnownMap, src: int) -> tuple[int, list[Stub]]:
    """All stubs at minimum distance from ``src`` (BFS over the known map)."""
    dist = {src: 0}
    queue = deque([src])
    best, found = None, []
    while queue:
        v = queue.popleft()
        d = dist[v]
        if best is not None and d + 1 > best:
            break
        for p, w in enumerate(known.nbr[v]):
            if w is None:
                if v != known.root and p == 0:
                    continue
                best = d + 1
                found.append(Stub(v, p))
            elif w not in dist:
                dist[w] = d + 1
                queue.append(w)
    return (best if best is not None else -1), found


def greedy_nearest(state: ExplorationState, seed: int = 0) -> RunResult:
    """Each agent in turn repeatedly explores a closest stub; ties broken by seed."""
    rng = random.Random(seed)
    records = []
    for a in range(state.k):
        if state.is_fully_explored():
            break
        state.iteration = a
        agent = state.agents[a]
        agent.dispatched = True
        while agent.energy > 0 and not state.is_fully_explored():
            d, stubs = _nearest_stubs(state.known, agent.position)
            if not stubs or d > agent.energy:
                break
            state.walk_to_stub(a, stubs[rng.randrange(len(stubs))])
        records.append(IterationRecord(a, state.root, 0, 1, "GREEDY", ((a, "G"),)))
    return state.result(records)


STRATEGIES = {
    "dnd": lambda state, seed=0: divide_and_explore(state),
    "ldfs": lambda state, seed=0: sequential_ldfs(state),
    "rdfs": lambda state, seed=0: sequential_rdfs(state),
    "greedy-nearest": greedy_nearest,
}


def run_strategy(name: str, state: ExplorationState, seed: int = 0) -> RunResult:
    try:
        fn = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    return fn(state, seed)
