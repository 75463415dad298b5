"""Rooted port-labeled trees and the TREE v1 instance format.

Every vertex ``v`` stores an ordered list ``adj[v]`` mapping port number to
neighbor id.  After normalization the parent of every non-root vertex sits at
port 0; at the root every port leads to a child.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property


class TreeFormatError(ValueError):
    """Raised for malformed or invalid TREE v1 input."""


@dataclass(frozen=True, eq=False)
class Tree:
    root: int
    adj: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _validate(self.root, self.adj)

    @property
    def n(self) -> int:
        return len(self.adj)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbor(self, v: int, port: int) -> int:
        return self.adj[v][port]

    def port_to(self, v: int, w: int) -> int:
        return self.adj[v].index(w)

    def edges(self):
        """Yield ``(u, v, port_u, port_v)`` with ``u < v``, sorted."""
        out = []
        for u, nbrs in enumerate(self.adj):
            for pu, v in enumerate(nbrs):
                if u < v:
                    out.append((u, v, pu, self.adj[v].index(u)))
        out.sort()
        return out

    @cached_property
    def _meta(self):
        parent = [-1] * self.n
        depth = [0] * self.n
        order = []
        seen = [False] * self.n
        seen[self.root] = True
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in self.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    queue.append(w)
        size = [1] * self.n
        for v in reversed(order):
            if parent[v] >= 0:
                size[parent[v]] += size[v]
        return tuple(parent), tuple(depth), tuple(size), tuple(order)

    @property
    def parent(self) -> tuple[int, ...]:
        return self._meta[0]

    @property
    def depth(self) -> tuple[int, ...]:
        return self._meta[1]

    @property
    def subtree_size(self) -> tuple[int, ...]:
        return self._meta[2]

    @property
    def bfs_order(self) -> tuple[int, ...]:
        return self._meta[3]

    def children(self, v: int) -> list[int]:
        """Children of ``v`` in port order."""
        p = self.parent[v]
        return [w for w in self.adj[v] if w != p]

    def child_ports(self, v: int) -> list[int]:
        p = self.parent[v]
        return [i for i, w in enumerate(self.adj[v]) if w != p]

    def is_normalized(self) -> bool:
        return all(v == self.root or self.adj[v][0] == self.parent[v] for v in range(self.n))

    def __eq__(self, other):
        return isinstance(other, Tree) and self.root == other.root and self.adj == other.adj

    def __hash__(self):
        return hash((self.root, self.adj))

    def __repr__(self):
        return f"Tree(n={self.n}, root={self.root})"


@dataclass(frozen=True)
class Instance:
    tree: Tree
    k: int = 1
    B: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.B < 0:
            raise ValueError(f"B must be >= 0, got {self.B}")


@dataclass
class TreeBuilder:
    """Incremental construction helper; ports are assigned in insertion order."""

    adj: list[list[int]] = field(default_factory=lambda: [[]])
    root: int = 0

    def add_child(self, parent: int) -> int:
        v = len(self.adj)
        self.adj.append([parent])
        self.adj[parent].append(v)
        return v

    def add_path(self, start: int, length: int) -> list[int]:
        path = []
        v = start
        for _ in range(length):
            v = self.add_child(v)
            path.append(v)
        return path

    def build(self) -> Tree:
        return Tree(self.root, tuple(tuple(a) for a in self.adj))


def _validate(root: int, adj) -> None:
    n = len(adj)
    if n < 1:
        raise TreeFormatError("tree needs at least one vertex")
    if not 0 <= root < n:
        raise TreeFormatError(f"root {root} out of range")
    n_arcs = 0
    for v, nbrs in enumerate(adj):
        if len(set(nbrs)) != len(nbrs):
            raise TreeFormatError(f"duplicate edge at vertex {v}")
        for w in nbrs:
            if not 0 <= w < n:
                raise TreeFormatError(f"neighbor id {w} out of range")
            if w == v:
                raise TreeFormatError(f"self loop at {v}")
            if v not in adj[w]:
                raise TreeFormatError(f"edge {v}-{w} not symmetric")
        n_arcs += len(nbrs)
    if n_arcs != 2 * (n - 1):
        raise TreeFormatError(f"expected {n - 1} edges, found {n_arcs // 2}")
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        raise TreeFormatError("graph is disconnected or cyclic")


def normalize_ports(tree: Tree) -> Tree:
    """Swap the parent-edge label with label 0 at every non-root vertex."""
    parent = tree.parent
    adj = []
    for v, nbrs in enumerate(tree.adj):
        nbrs = list(nbrs)
        if v != tree.root:
            p = nbrs.index(parent[v])
            nbrs[0], nbrs[p] = nbrs[p], nbrs[0]
        adj.append(tuple(nbrs))
    return Tree(tree.root, tuple(adj))


def parse_tree(text: str | bytes, normalize: bool = True) -> tuple[Tree, dict[str, int]]:
    """Parse TREE v1 text; returns the tree and any ``k``/``B`` parameter lines."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 3 or lines[0] != "TREE v1":
        raise TreeFormatError("missing 'TREE v1' header")
    n = _header_int(lines[1], "n")
    root = _header_int(lines[2], "root")
    if n < 1:
        raise TreeFormatError("n must be positive")
    if not 0 <= root < n:
        raise TreeFormatError(f"root {root} out of range")
    slots: list[dict[int, int]] = [dict() for _ in range(n)]
    params: dict[str, int] = {}
    seen_edges = set()
    for ln in lines[3:]:
        tok = ln.split()
        if tok[0] in ("k", "B") and len(tok) == 2:
            params[tok[0]] = _int(tok[1], ln)
            continue
        if tok[0] != "edge" or len(tok) != 5:
            raise TreeFormatError(f"malformed line: {ln!r}")
        u, v, pu, pv = (_int(t, ln) for t in tok[1:])
        if not (0 <= u < n and 0 <= v < n):
            raise TreeFormatError(f"vertex id out of range: {ln!r}")
        if u == v:
            raise TreeFormatError(f"self loop: {ln!r}")
        key = (min(u, v), max(u, v))
        if key in seen_edges:
            raise TreeFormatError(f"duplicate edge: {ln!r}")
        seen_edges.add(key)
        for x, px, y in ((u, pu, v), (v, pv, u)):
            if px < 0:
                raise TreeFormatError(f"negative port: {ln!r}")
            if px in slots[x]:
                raise TreeFormatError(f"port collision at vertex {x} port {px}")
            slots[x][px] = y
    if len(seen_edges) != n - 1:
        raise TreeFormatError(f"expected {n - 1} edges, found {len(seen_edges)}")
    adj = []
    for v, s in enumerate(slots):
        if sorted(s) != list(range(len(s))):
            raise TreeFormatError(f"ports at vertex {v} are not 0..{len(s) - 1}")
        adj.append(tuple(s[p] for p in range(len(s))))
    tree = Tree(root, tuple(adj))
    return (normalize_ports(tree) if normalize else tree), params


def parse_instance(text: str | bytes, k: int | None = None, B: int | None = None) -> Instance:
    """Parse an instance; explicit ``k``/``B`` arguments override the file."""
    tree, params = parse_tree(text)
    return Instance(tree, k if k is not None else params.get("k", 1),
                    B if B is not None else params.get("B", 0))


def serialize_tree(tree: Tree) -> str:
    lines = ["TREE v1", f"n {tree.n}", f"root {tree.root}"]
    lines += [f"edge {u} {v} {pu} {pv}" for u, v, pu, pv in tree.edges()]
    return "\n".join(lines) + "\n"


def serialize_instance(instance: Instance) -> str:
    return serialize_tree(instance.tree) + f"k {instance.k}\nB {instance.B}\n"


def _header_int(line: str, key: str) -> int:
    tok = line.split()
    if len(tok) != 2 or tok[0] != key:
        raise TreeFormatError(f"expected '{key} <int>', got {line!r}")
    return _int(tok[1], line)


def _int(tok: str, line: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TreeFormatError(f"malformed line: {line!r}") from None
