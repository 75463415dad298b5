"""Move execution on a (possibly lazily revealed) tree with a shared map.

Agents move one at a time.  The first time any agent enters a vertex, the
world reveals that vertex's degree; every unused port at an explored vertex is
a *stub*, i.e. a known but unvisited child.  All agents see the same map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

from .tree import Instance, Tree


class OutOfEnergy(RuntimeError):
    pass


class InvalidPort(ValueError):
    pass


class MoveIntoFinishedRun(RuntimeError):
    pass


class Stub(NamedTuple):
    """Unexplored child reached from explored ``vertex`` through ``port``."""

    vertex: int
    port: int


class MoveEvent(NamedTuple):
    step: int
    agent: int
    src: int
    dst: int
    port: int
    energy_left: int
    newly_explored: bool
    iteration: int

    def line(self) -> str:
        return (f"{self.step} {self.agent} {self.src} {self.dst} {self.port} "
                f"{self.energy_left} {int(self.newly_explored)} {self.iteration}")


class World(Protocol):
    """Source of ground truth; answers reveal queries."""

    root: int

    def root_degree(self) -> int: ...

    def reveal(self, state: "ExplorationState", agent: int, v: int, port: int,
               energy: int) -> tuple[int, int]:
        """Return ``(vertex id, degree)`` of the child behind stub ``(v, port)``.

        ``energy`` is the agent's remaining energy after the move.
        """

    def on_arrive(self, state: "ExplorationState", agent: int, v: int) -> None: ...

    def pending(self) -> bool: ...


class TreeWorld:
    """World backed by a fully known, normalized tree."""

    def __init__(self, tree: Tree):
        if not tree.is_normalized():
            raise ValueError("tree must be port-normalized")
        self.tree = tree
        self.root = tree.root

    def root_degree(self) -> int:
        return self.tree.degree(self.root)

    def reveal(self, state, agent, v, port, energy):
        w = self.tree.neighbor(v, port)
        return w, self.tree.degree(w)

    def on_arrive(self, state, agent, v):
        pass

    def pending(self) -> bool:
        return False


class KnownMap:
    """Globally shared knowledge: explored vertices, their ports and stubs."""

    def __init__(self, root: int, root_degree: int):
        self.root = root
        self.nbr: dict[int, list[int | None]] = {root: [None] * root_degree}
        self.parent: dict[int, int] = {root: -1}
        self.parent_port: dict[int, int] = {root: -1}
        self.depth: dict[int, int] = {root: 0}
        self.stubs_below: dict[int, int] = {root: root_degree}
        self.n_stubs = root_degree
        self.order: list[int] = [root]

    def __contains__(self, v) -> bool:
        return v in self.nbr

    def __len__(self) -> int:
        return len(self.nbr)

    def degree(self, v: int) -> int:
        return len(self.nbr[v])

    def is_stub(self, v: int, port: int) -> bool:
        return self.nbr[v][port] is None

    def child(self, v: int, port: int) -> int | None:
        return self.nbr[v][port]

    def child_ports(self, v: int) -> range:
        return range(0 if v == self.root else 1, len(self.nbr[v]))

    def stub_depth(self, stub: Stub) -> int:
        return self.depth[stub.vertex] + 1

    def has_unexplored(self, v: int, port: int) -> bool:
        """True if the edge ``(v, port)`` leads to a stub or into a subtree with one."""
        w = self.nbr[v][port]
        return w is None or self.stubs_below[w] > 0

    def stubs(self):
        for v in self.order:
            for p in self.child_ports(v):
                if self.nbr[v][p] is None:
                    yield Stub(v, p)

    def add(self, v: int, port: int, w: int, degree: int) -> None:
        if w in self.nbr:
            raise RuntimeError(f"vertex {w} revealed twice")
        self.nbr[v][port] = w
        self.nbr[w] = [v] + [None] * (degree - 1)
        self.parent[w] = v
        self.parent_port[w] = port
        self.depth[w] = self.depth[v] + 1
        self.stubs_below[w] = degree - 1
        self.order.append(w)
        delta = degree - 2
        self.n_stubs += delta
        if delta:
            x = v
            while x != -1:
                self.stubs_below[x] += delta
                x = self.parent[x]

    def path(self, u: int, v: int) -> list[int]:
        """Vertices on the tree path from ``u`` to ``v`` excluding ``u``."""
        up, down = [], []
        a, b = u, v
        while self.depth[a] > self.depth[b]:
            a = self.parent[a]
            up.append(a)
        while self.depth[b] > self.depth[a]:
            down.append(b)
            b = self.parent[b]
        while a != b:
            a = self.parent[a]
            up.append(a)
            down.append(b)
            b = self.parent[b]
        return up + down[::-1]

    def distance(self, u: int, v: int) -> int:
        du, dv = self.depth[u], self.depth[v]
        d = 0
        while du > dv:
            u = self.parent[u]
            du -= 1
            d += 1
        while dv > du:
            v = self.parent[v]
            dv -= 1
            d += 1
        while u != v:
            u = self.parent[u]
            v = self.parent[v]
            d += 2
        return d

    def is_ancestor(self, a: int, v: int) -> bool:
        da = self.depth[a]
        while self.depth[v] > da:
            v = self.parent[v]
        return v == a


@dataclass
class AgentState:
    id: int
    position: int
    energy: int
    dispatched: bool = False
    moves: int = 0


@dataclass
class RunResult:
    alg_incl: int
    alg_excl: int
    trace: list[MoveEvent]
    iterations: list = field(default_factory=list)
    agents: list[AgentState] = field(default_factory=list)
    explored: tuple[int, ...] = ()
    fully_explored: bool = False
    B: int = 0
    k: int = 0

    def trace_text(self) -> str:
        return format_trace(self.trace)


class ExplorationState:
    def __init__(self, world: World, k: int, B: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        if B < 0:
            raise ValueError("B must be >= 0")
        self.world = world
        self.k = k
        self.B = B
        root = world.root
        self.known = KnownMap(root, world.root_degree())
        self.agents = [AgentState(i, root, B) for i in range(k)]
        self.trace: list[MoveEvent] = []
        self.iteration = 0
        self.finished = False

    @property
    def root(self) -> int:
        return self.known.root

    def traverse(self, agent: int, port: int) -> MoveEvent:
        if self.finished:
            raise MoveIntoFinishedRun("run already finished")
        a = self.agents[agent]
        if a.energy < 1:
            raise OutOfEnergy(f"agent {agent} has no energy left")
        v = a.position
        nbrs = self.known.nbr[v]
        if not 0 <= port < len(nbrs):
            raise InvalidPort(f"port {port} invalid at vertex {v}")
        a.energy -= 1
        a.moves += 1
        w = nbrs[port]
        newly = w is None
        if newly:
            w, deg = self.world.reveal(self, agent, v, port, a.energy)
            self.known.add(v, port, w, deg)
        a.position = w
        ev = MoveEvent(len(self.trace), agent, v, w, port, a.energy, newly, self.iteration)
        self.trace.append(ev)
        self.world.on_arrive(self, agent, w)
        return ev

    def step_to(self, agent: int, w: int) -> MoveEvent:
        """Move one edge to the known neighbor ``w``."""
        v = self.agents[agent].position
        if self.known.parent.get(v) == w:
            return self.traverse(agent, 0)
        return self.traverse(agent, self.known.parent_port[w])

    def walk_to(self, agent: int, target: int) -> bool:
        """Walk the shortest known path; halt early if energy runs out."""
        a = self.agents[agent]
        for w in self.known.path(a.position, target):
            if a.energy < 1:
                return False
            self.step_to(agent, w)
        return True

    def walk_to_stub(self, agent: int, stub: Stub) -> bool:
        if not self.walk_to(agent, stub.vertex):
            return False
        if self.agents[agent].energy < 1:
            return False
        self.traverse(agent, stub.port)
        return True

    def is_fully_explored(self) -> bool:
        return self.known.n_stubs == 0 and not self.world.pending()

    def result(self, iterations=None) -> RunResult:
        n = len(self.known)
        return RunResult(
            alg_incl=n,
            alg_excl=n - 1,
            trace=list(self.trace),
            iterations=list(iterations or []),
            agents=[AgentState(**vars(a)) for a in self.agents],
            explored=tuple(self.known.order),
            fully_explored=self.is_fully_explored(),
            B=self.B,
            k=self.k,
        )


def init_run(source, k: int | None = None, B: int | None = None) -> ExplorationState:
    """Start a run from an :class:`Instance`, a :class:`Tree` or a world object."""
    if isinstance(source, Instance):
        k = source.k if k is None else k
        B = source.B if B is None else B
        return ExplorationState(TreeWorld(source.tree), k, B)
    if isinstance(source, Tree):
        return ExplorationState(TreeWorld(source), k, B)
    return ExplorationState(source, k, B)


def format_trace(events) -> str:
    return "".join(ev.line() + "\n" for ev in events)


def parse_trace(text: str) -> list[MoveEvent]:
    events = []
    for ln in text.splitlines():
        if not ln.strip():
            continue
        s, a, u, v, p, e, x, it = (int(t) for t in ln.split())
        events.append(MoveEvent(s, a, u, v, p, e, bool(x), it))
    return events
