"""Exact offline optimum for small instances and analytic optima for families.

``opt_exact`` treats each agent's route as a root-containing connected vertex
set ``S``; the cheapest walk from the root visiting ``S`` costs
``2(|S|-1) - max depth``.  ``opt_naive_walks`` enumerates walks directly and
serves as the independent check of that identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .tree import Instance, Tree


class SizeGuardExceeded(ValueError):
    pass


@dataclass(frozen=True)
class CoveragePlan:
    value: int
    sets: tuple[frozenset[int], ...]
    ends: tuple[int, ...]


def walk_cost_min(tree: Tree, S) -> int:
    S = set(S)
    if tree.root not in S:
        raise ValueError("set must contain the root")
    for v in S:
        if v != tree.root and tree.parent[v] not in S:
            raise ValueError("set is not connected")
    return 2 * (len(S) - 1) - max(tree.depth[v] for v in S)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def feasible_maximal_sets(tree: Tree, B: int) -> list[int]:
    """Bitmasks of inclusion-maximal root-connected sets with walk cost <= B."""
    depth = tree.depth
    children = [tree.children(v) for v in range(tree.n)]
    out = []

    def cost(size, maxd):
        return 2 * (size - 1) - maxd

    def rec(mask, size, maxd, frontier):
        maximal = True
        for i, v in enumerate(frontier):
            nd = max(maxd, depth[v])
            if cost(size + 1, nd) > B:
                continue
            maximal = False
            rec(mask | (1 << v), size + 1, nd, frontier[i + 1:] + children[v])
        if maximal and all(cost(size + 1, max(maxd, depth[v])) > B for v in _frontier(mask)):
            out.append(mask)

    def _frontier(mask):
        return [c for v in _bits(mask) for c in children[v] if not mask >> c & 1]

    rec(1 << tree.root, 1, 0, list(children[tree.root]))
    return sorted(set(out), key=lambda m: (-bin(m).count("1"), m))


def _check_guard(instance: Instance, max_n, max_k, max_B):
    if instance.tree.n > max_n or instance.k > max_k or instance.B > max_B:
        raise SizeGuardExceeded(
            f"instance (n={instance.tree.n}, k={instance.k}, B={instance.B}) exceeds guard "
            f"(n<={max_n}, k<={max_k}, B<={max_B})")


def opt_exact_plan(instance: Instance, max_n: int = 20, max_k: int = 4, max_B: int = 12) -> CoveragePlan:
    _check_guard(instance, max_n, max_k, max_B)
    tree, k, B = instance.tree, instance.k, instance.B
    cands = feasible_maximal_sets(tree, B)
    n = tree.n
    maxd = max(tree.depth)
    # each set adds at most floor((B + maxdepth) / 2) non-root vertices
    per_agent = (B + min(B, maxd)) // 2

    best_val, best_pick = 0, ()
    # greedy seed for the incumbent
    union, pick = 0, []
    for _ in range(k):
        j = max(range(len(cands)), key=lambda j: (bin(cands[j] & ~union).count("1"), -j))
        union |= cands[j]
        pick.append(j)
    best_val, best_pick = bin(union).count("1"), tuple(sorted(pick))

    def search(start, union, left, pick):
        nonlocal best_val, best_pick
        u = bin(union).count("1")
        if u > best_val:
            best_val, best_pick = u, tuple(pick)
        if left == 0 or best_val == n:
            return
        if u + min(left * per_agent, n - u) <= best_val:
            return
        gains = [bin(cands[j] & ~union).count("1") for j in range(start, len(cands))]
        if not gains or u + min(left * max(gains), n - u) <= best_val:
            return
        for off, g in enumerate(gains):
            if g == 0:
                continue
            j = start + off
            search(j, union | cands[j], left - 1, pick + [j])

    search(0, 1 << tree.root, k, [])
    sets = [frozenset(_bits(cands[j])) for j in best_pick]
    sets += [frozenset([tree.root])] * (k - len(sets))
    ends = tuple(max(S, key=lambda v: (tree.depth[v], -v)) for S in sets)
    return CoveragePlan(best_val, tuple(sets), ends)


def opt_exact(instance: Instance, max_n: int = 20, max_k: int = 4, max_B: int = 12) -> int:
    """Maximum number of vertices (root included) k agents with budget B can visit."""
    return opt_exact_plan(instance, max_n, max_k, max_B).value


def walk_vertex_sets(tree: Tree, B: int) -> set[int]:
    """Visited-vertex bitmasks of every walk of length <= B from the root."""
    results = set()
    seen = set()
    stack = [(tree.root, 1 << tree.root, B)]
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        v, mask, left = state
        results.add(mask)
        if left:
            for w in tree.adj[v]:
                stack.append((w, mask | (1 << w), left - 1))
    return results


def opt_naive_walks(instance: Instance, max_n: int = 8, max_k: int = 2, max_B: int = 6) -> int:
    _check_guard(instance, max_n, max_k, max_B)
    masks = sorted(walk_vertex_sets(instance.tree, instance.B))
    best = 0
    for combo in combinations_with_replacement(masks, instance.k):
        union = 0
        for m in combo:
            union |= m
        best = max(best, bin(union).count("1"))
    return best


def opt_analytic(family: str, **params) -> int:
    """Exact OPT (excluding the root) for ``star``/``tightness``; a certified
    lower bound for ``lb217`` (finalized adversarial tree)."""
    if family == "star":
        k, B = params["k"], params["B"]
        if B % 2:
            raise ValueError("star family needs an even budget")
        return k * B
    if family == "tightness":
        k, d = params["k"], params["d"]
        if k < 2 or d < 3:
            raise ValueError("tightness family needs k >= 2 and d >= 3")
        return 3 * k * (d - 1)
    if family == "lb217":
        l, B, d1, delta, t = (params[x] for x in ("l", "B", "d1", "delta", "t"))
        if not 0 <= t < l:
            raise ValueError("need 0 <= t < l")
        return (l - t) * B + (l - 1 + t) * (B - d1 - delta)
    raise ValueError(f"unknown family {family!r}")
