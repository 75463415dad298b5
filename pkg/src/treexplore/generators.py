"""Deterministic instance families and seeded random trees."""

from __future__ import annotations

import random
import re

from .tree import Instance, Tree, TreeBuilder, normalize_ports


def spider(lengths) -> Tree:
    """Root with one path per entry of ``lengths``, root ports in list order."""
    b = TreeBuilder()
    for length in lengths:
        b.add_path(0, length)
    return b.build()


def gen_tightness(k: int, d: int) -> Instance:
    """k paths of length d followed by k paths of length B = 3(d-1)."""
    if k < 2:
        raise ValueError("tightness family needs k >= 2")
    if d < 3:
        raise ValueError("tightness family needs d >= 3")
    B = 3 * (d - 1)
    return Instance(spider([d] * k + [B] * k), k, B)


def gen_star_static(k: int, B: int) -> Instance:
    """Completed star: k*B/2 rays of length 1 (ports first), then k rays of length B."""
    if B % 2:
        raise ValueError("star family needs an even budget")
    return Instance(spider([1] * (k * B // 2) + [B] * k), k, B)


def gen_random(n: int, max_degree: int | None = None, seed: int = 0,
               k: int = 1, B: int = 0) -> Instance:
    """Random recursive tree, degrees capped at ``max_degree``, ports shuffled."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if max_degree is not None and n > 2 and max_degree < 2:
        raise ValueError("max_degree < 2 cannot hold more than two vertices")
    rng = random.Random(seed)
    adj: list[list[int]] = [[]]
    open_ = [0]
    for v in range(1, n):
        p = open_[rng.randrange(len(open_))]
        adj.append([p])
        adj[p].append(v)
        if max_degree is not None and len(adj[p]) >= max_degree:
            open_.remove(p)
        if max_degree is None or max_degree > 1:
            open_.append(v)
    for nbrs in adj:
        rng.shuffle(nbrs)
    tree = normalize_ports(Tree(0, tuple(tuple(a) for a in adj)))
    return Instance(tree, k, B)


def _canon(children: list[list[int]], v: int) -> str:
    return "(" + "".join(sorted(_canon(children, c) for c in children[v])) + ")"


def all_rooted_trees(n: int) -> list[Tree]:
    """Every rooted unlabeled tree on ``n`` vertices, once each."""
    if n < 1:
        return []
    seen = {}

    def rec(parents):
        m = len(parents) + 1
        if m == n:
            children = [[] for _ in range(n)]
            for v, p in enumerate(parents, start=1):
                children[p].append(v)
            key = _canon(children, 0)
            if key not in seen:
                b = TreeBuilder()
                ids = {0: 0}
                stack = [0]
                while stack:
                    v = stack.pop()
                    for c in children[v]:
                        ids[c] = b.add_child(ids[v])
                        stack.append(c)
                seen[key] = b.build()
            return
        for p in range(m):
            rec(parents + [p])

    rec([])
    return [seen[key] for key in sorted(seen)]


_FAMILY_PATTERNS = {
    "tight": re.compile(r"tight_k(\d+)_d(\d+)$"),
    "star": re.compile(r"star_k(\d+)_B(\d+)$"),
    "random": re.compile(r"random_n(\d+)(?:_deg(\d+))?_s(\d+)$"),
}


def family_instance(name: str) -> Instance | None:
    """Resolve names such as ``tight_k3_d3``, ``star_k2_B4``, ``random_n12_deg3_s7``."""
    m = _FAMILY_PATTERNS["tight"].match(name)
    if m:
        return gen_tightness(int(m[1]), int(m[2]))
    m = _FAMILY_PATTERNS["star"].match(name)
    if m:
        return gen_star_static(int(m[1]), int(m[2]))
    m = _FAMILY_PATTERNS["random"].match(name)
    if m:
        return gen_random(int(m[1]), int(m[2]) if m[2] else None, int(m[3]))
    return None
