import pytest
from hypothesis import given, settings

from treexplore.generators import all_rooted_trees, gen_random, gen_star_static, gen_tightness
from treexplore.oracle import (
    SizeGuardExceeded,
    opt_analytic,
    opt_exact,
    opt_exact_plan,
    opt_naive_walks,
    walk_cost_min,
    walk_vertex_sets,
)
from treexplore.tree import Instance

from conftest import path_tree, small_instances, star_tree


def test_walk_cost_examples():
    assert walk_cost_min(path_tree(2), {0, 1, 2}) == 2
    assert walk_cost_min(star_tree(2), {0, 1, 2}) == 3
    assert walk_cost_min(path_tree(2), {0}) == 0
    with pytest.raises(ValueError):
        walk_cost_min(path_tree(2), {0, 2})


def _connected_root_sets(tree):
    out = []
    def rec(S, frontier):
        out.append(frozenset(S))
        for i, v in enumerate(frontier):
            rec(S | {v}, frontier[i + 1:] + tree.children(v))
    rec({tree.root}, tree.children(tree.root))
    return out


def test_walk_cost_identity_against_walk_enumeration():
    # every root-connected set is visited by some walk of length <= B iff its cost is <= B
    for n in range(1, 8):
        for tree in all_rooted_trees(n):
            for B in range(0, 8):
                walks = {frozenset(i for i in range(n) if m >> i & 1)
                         for m in walk_vertex_sets(tree, B)}
                sets = {S for S in _connected_root_sets(tree) if walk_cost_min(tree, S) <= B}
                assert walks == sets


def test_opt_examples():
    assert opt_exact(Instance(path_tree(3), 1, 2)) == 3
    assert opt_exact(Instance(star_tree(2), 1, 2)) == 2
    assert opt_naive_walks(Instance(star_tree(2), 1, 2)) == 2
    assert opt_naive_walks(Instance(path_tree(1), 1, 1)) == 2
    assert opt_naive_walks(Instance(star_tree(2), 2, 1)) == 3


def test_opt_tightness_k3_d3():
    assert opt_exact(gen_tightness(3, 3), max_n=30) == 19


def test_exhaustive_equivalence_grid():
    count = 0
    for n in range(1, 8):
        for tree in all_rooted_trees(n):
            for k in (1, 2):
                for B in range(6):
                    inst = Instance(tree, k, B)
                    assert opt_exact(inst) == opt_naive_walks(inst), (tree.adj, k, B)
                    count += 1
    assert count >= 200


def test_plan_is_consistent():
    for seed in range(60):
        inst = Instance(gen_random(14, 3, seed).tree, 1 + seed % 3, seed % 9)
        plan = opt_exact_plan(inst)
        assert len(plan.sets) == inst.k
        union = set()
        for S, end in zip(plan.sets, plan.ends):
            assert inst.tree.root in S and end in S
            assert walk_cost_min(inst.tree, S) <= inst.B
            union |= S
        assert len(union) == plan.value


@settings(max_examples=60, deadline=None)
@given(small_instances(max_n=12, max_k=3, max_B=8))
def test_monotone_and_bounded(inst):
    v = opt_exact(inst)
    assert v <= min(inst.tree.n, inst.k * inst.B + 1)
    assert opt_exact(Instance(inst.tree, inst.k, inst.B + 1)) >= v
    assert opt_exact(Instance(inst.tree, inst.k + 1, inst.B)) >= v


@pytest.mark.parametrize("k,B", [(1, 2), (2, 2), (1, 4), (2, 4), (3, 2)])
def test_star_exact_matches_analytic(k, B):
    inst = gen_star_static(k, B)
    assert opt_exact(inst) - 1 == opt_analytic("star", k=k, B=B)


@pytest.mark.parametrize("k,d", [(2, 3), (3, 3), (2, 4), (2, 5)])
def test_tightness_exact_matches_analytic(k, d):
    assert opt_exact(gen_tightness(k, d), max_n=40) - 1 == opt_analytic("tightness", k=k, d=d)


def test_analytic_values_and_errors():
    assert opt_analytic("star", k=2, B=4) == 8
    assert opt_analytic("tightness", k=3, d=3) == 18
    assert opt_analytic("lb217", l=2, B=1024, d1=260, delta=68, t=0) == 2744
    with pytest.raises(ValueError):
        opt_analytic("cube", k=1)
    with pytest.raises(ValueError):
        opt_analytic("lb217", l=2, B=1024, d1=260, delta=68, t=2)


def test_guards():
    with pytest.raises(SizeGuardExceeded):
        opt_exact(Instance(path_tree(25), 1, 3))
    with pytest.raises(SizeGuardExceeded):
        opt_naive_walks(Instance(path_tree(3), 3, 3))
