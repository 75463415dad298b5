import pytest
from hypothesis import given, settings

from treexplore.engine import Stub, init_run
from treexplore.generators import gen_random, gen_tightness
from treexplore.strategies import (
    NoUnexplored,
    Subtree,
    divide_and_explore,
    ldfs_sequence,
    leftmost_unexplored,
    move_roots_down,
    rdfs_sequence,
    rightmost_unexplored,
    run_ldfs,
    run_rdfs,
    run_strategy,
    split,
)
from treexplore.adversary import run_star
from treexplore.tree import Instance, TreeBuilder

from conftest import path_tree, small_instances


def test_ldfs_sequence_path():
    assert ldfs_sequence(path_tree(2)) == [(0, 1), (1, 2), (2, 1), (1, 0)]


def test_ldfs_sequence_root_ports_in_order():
    b = TreeBuilder()
    b.add_child(0)
    b.add_child(0)
    assert ldfs_sequence(b.build()) == [(0, 1), (1, 0), (0, 2), (2, 0)]


def _simulated_ldfs(tree):
    """Independent L-DFS: walk with an explicit 'next port' counter per vertex."""
    nxt = {v: (0 if v == tree.root else 1) for v in range(tree.n)}
    seq, v = [], tree.root
    while True:
        if nxt[v] < tree.degree(v):
            w = tree.adj[v][nxt[v]]
            nxt[v] += 1
            seq.append((v, w))
            v = w
        elif v == tree.root:
            return seq
        else:
            seq.append((v, tree.parent[v]))
            v = tree.parent[v]


def test_ldfs_sequence_matches_simulation_and_duality():
    for seed in range(100):
        tree = gen_random(1 + seed % 30, None, seed).tree
        seq = ldfs_sequence(tree)
        assert seq == _simulated_ldfs(tree)
        assert len(seq) == 2 * (tree.n - 1)
        assert rdfs_sequence(tree) == [(w, v) for v, w in reversed(seq)]


def test_run_ldfs_path_stops_once_explored():
    st = init_run(Instance(path_tree(3), 1, 6))
    run_ldfs(st, 0)
    # the loop ends as soon as nothing is left to explore, so no walk back
    assert len(st.known) == 4
    assert st.agents[0].position == 3 and st.agents[0].energy == 3


def test_rdfs_explores_rightmost_long_path():
    inst = gen_tightness(3, 3)
    st = init_run(inst)
    run_rdfs(st, 0)
    assert len(st.known) - 1 == 6
    assert all(inst.tree.depth[v] <= 6 for v in st.known.order)


def test_ldfs_on_tightness_explores_2d_minus_3():
    d = 3
    st = init_run(gen_tightness(3, d))
    run_ldfs(st, 0)
    assert len(st.known) - 1 == 2 * d - 3


def test_leftmost_after_first_two_agents_at_depth_d_minus_2():
    for d in (3, 5, 8):
        st = init_run(gen_tightness(3, d))
        run_ldfs(st, 0)
        run_rdfs(st, 1)
        vl = leftmost_unexplored(st.known, Subtree(st.root))
        assert st.known.stub_depth(vl) == d - 2


def test_leftmost_rightmost_small_cases():
    # root: port 0 stub, port 1 explored child with a stub
    b = TreeBuilder()
    a = b.add_child(0)
    c = b.add_child(0)
    b.add_child(c)
    st = init_run(Instance(b.build(), 1, 2))
    st.traverse(0, 1)
    known = st.known
    assert leftmost_unexplored(known, Subtree(0)) == Stub(0, 0)
    assert rightmost_unexplored(known, Subtree(0)) == Stub(c, 1)
    st2 = init_run(Instance(path_tree(1), 1, 2))
    st2.traverse(0, 0)
    with pytest.raises(NoUnexplored):
        leftmost_unexplored(st2.known, Subtree(0))
    del a


def test_move_roots_down():
    # root - a - {x, y}
    b = TreeBuilder()
    a = b.add_child(0)
    b.add_child(a)
    b.add_child(a)
    st = init_run(Instance(b.build(), 1, 2))
    st.traverse(0, 0)
    subs = move_roots_down([Subtree(0)], st.known)
    assert subs[0].root == a
    # root with a stub child stays
    st = init_run(Instance(path_tree(2), 1, 1))
    assert move_roots_down([Subtree(0)], st.known)[0].root == 0


def test_move_roots_down_two_branches_unchanged():
    b = TreeBuilder()
    for _ in range(2):
        c = b.add_child(0)
        b.add_child(c)
    st = init_run(Instance(b.build(), 2, 1))
    st.traverse(0, 0)
    st.traverse(1, 1)
    assert move_roots_down([Subtree(0)], st.known)[0].root == 0


def test_split_three_branches():
    b = TreeBuilder()
    for _ in range(3):
        c = b.add_child(0)
        b.add_child(c)
    st = init_run(Instance(b.build(), 3, 1))
    for a in range(3):
        st.traverse(a, a)
    known = st.known
    S = Subtree(0)
    v_L, v_R = leftmost_unexplored(known, S), rightmost_unexplored(known, S)
    S1, S2 = split(S, v_R, known, v_L)
    assert S1.branches == (0, 1) and S2.branches == (2,)
    assert S1.root == S2.root == 0


def _edges_of(S, known):
    out = set()
    stack = [S.root]
    while stack:
        v = stack.pop()
        for p in S.ports_at(known, v):
            w = known.nbr[v][p]
            out.add((v, p))
            if w is not None:
                stack.append(w)
    return out


def test_split_partitions_edges_random():
    checked = 0
    for seed in range(400):
        tree = gen_random(25, 4, seed).tree
        st = init_run(Instance(tree, 2, 5))
        run_ldfs(st, 0)
        run_rdfs(st, 1)
        known = st.known
        S = Subtree(0)
        move_roots_down([S], known)
        if not S.has_unexplored(known):
            continue
        v_L, v_R = leftmost_unexplored(known, S), rightmost_unexplored(known, S)
        try:
            S1, S2 = split(S, v_R, known, v_L)
        except AssertionError:
            continue
        e, e1, e2 = _edges_of(S, known), _edges_of(S1, known), _edges_of(S2, known)
        assert e1 | e2 == e and not e1 & e2
        checked += 1
        if checked == 50:
            break
    assert checked == 50


@pytest.mark.parametrize("k,d", [(k, d) for k in range(2, 7) for d in range(3, 9)])
def test_dnd_tightness_count(k, d):
    r = divide_and_explore(init_run(gen_tightness(k, d)))
    assert r.alg_excl == 5 * d - 6 + (k - 2) * d


def test_dnd_star_adversary_kB_over_2():
    _, _, r = run_star(2, 4, "dnd")
    assert r.alg_excl == 4


def test_dnd_path_k1():
    r = divide_and_explore(init_run(Instance(path_tree(2), 1, 4)))
    assert r.fully_explored and r.alg_excl == 2
    assert len(r.iterations) == 1


@settings(max_examples=80, deadline=None)
@given(small_instances(max_n=30, max_k=6, max_B=14))
def test_dnd_record_invariants(inst):
    r = divide_and_explore(init_run(inst))
    depths = [rec.root_depth for rec in r.iterations]
    assert depths == sorted(depths)
    agents = [a for rec in r.iterations for a, _ in rec.agents]
    assert len(agents) == len(set(agents)) <= inst.k
    assert sum(rec.k_t for rec in r.iterations) == len(agents)
    for rec in r.iterations[1:]:
        assert rec.k_t in (1, 2)
        assert (rec.k_t == 2) == (rec.action == "SPLIT" and len(rec.agents) == 2)
        lim = max(3, inst.B - rec.root_depth)
        if rec.action == "LDFS":
            assert 3 * (rec.vl_depth - rec.root_depth) <= lim
        elif rec.action == "RDFS":
            assert 3 * (rec.vl_depth - rec.root_depth) > lim
            assert 3 * (rec.vr_depth - rec.root_depth) <= lim
        else:
            assert 3 * (rec.vr_depth - rec.root_depth) > lim


def test_unknown_strategy():
    with pytest.raises(ValueError):
        run_strategy("bfs", init_run(Instance(path_tree(1), 1, 1)))


def test_greedy_seed_determinism():
    inst = Instance(gen_random(30, 4, 3).tree, 3, 7)
    a = run_strategy("greedy-nearest", init_run(inst), 5).trace_text()
    b = run_strategy("greedy-nearest", init_run(inst), 5).trace_text()
    assert a == b
