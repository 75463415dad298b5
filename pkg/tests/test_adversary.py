from fractions import Fraction

import pytest

from treexplore import adversary as adv_mod
from treexplore.adversary import (
    InfeasibleParams,
    LowerBoundAdversary,
    StarAdversary,
    alg_upper_bound,
    check_lemma3,
    check_lemma4,
    classify_M,
    finalize,
    lb_delta,
    lb_params,
    opt_lower_bound,
    run_lower_bound,
    run_star,
)
from treexplore.engine import init_run
from treexplore.oracle import opt_exact
from treexplore.strategies import STRATEGIES, run_strategy

ALGOS = sorted(STRATEGIES)
P2 = lb_params(2, 1024, 260)


# -- parameters -------------------------------------------------------------

def test_lb_delta():
    assert lb_delta(2, 1024) == 68
    assert lb_delta(4, 4096) == 190
    assert lb_delta(1, 2) == 2 + 2  # sqrt(4) is exact


def test_lb_params_feasible():
    assert P2 == adv_mod.LBParams(2, 1024, 260, 382, 68)
    assert P2.k == 3 and P2.b1 == Fraction(260, 1024)
    p4 = lb_params(4, 4096, 1048)
    assert (p4.delta, p4.d2) == (190, 1524)


def test_lb_params_infeasible_lists_violation():
    with pytest.raises(InfeasibleParams, match=r"d1\+delta=100 >= d2=96"):
        lb_params(2, 256, 64)
    with pytest.raises(InfeasibleParams, match="odd"):
        lb_params(2, 1024, 262)


# -- star -------------------------------------------------------------------

def test_star_first_root_query_is_leaf_then_long_ray():
    k, B = 2, 4
    adv = StarAdversary(k, B)
    st = init_run(adv, 3, 2 * B)
    ev = st.traverse(0, 0)
    assert st.known.degree(ev.dst) == 1
    st.traverse(0, 0)
    for port in range(1, k * B // 2):
        st.traverse(port % 3, port)
        st.traverse(port % 3, 0)
    ev = st.traverse(2, k * B // 2)
    assert st.known.degree(ev.dst) == 2


def test_star_finalize_without_moves():
    adv = StarAdversary(2, 4)
    st = init_run(adv, 2, 4)
    tree = adv.finalize(st)
    assert tree.degree(0) == 6 and tree.n == 13


@pytest.mark.parametrize("k", [2, 4])
@pytest.mark.parametrize("B", [4, 8])
@pytest.mark.parametrize("algo", ALGOS)
def test_star_every_strategy_at_most_half(k, B, algo):
    adv, st, r = run_star(k, B, algo, seed=1)
    assert 2 * r.alg_excl <= k * B
    tree = adv.finalize(st)
    lengths = sorted(_ray_length(tree, c) for c in tree.adj[0])
    assert lengths == [1] * (k * B // 2) + [B] * k
    # the run is consistent with the completed star
    replay = run_strategy(algo, init_run(tree, k, B), seed=1)
    assert replay.trace_text() == r.trace_text()


def _ray_length(tree, v):
    n = 1
    while tree.degree(v) == 2:
        v = tree.adj[v][1]
        n += 1
    return n


def test_star_finalized_opt_small():
    adv, st, _ = run_star(2, 4, "dnd")
    tree = adv.finalize(st)
    from treexplore.tree import Instance

    assert opt_exact(Instance(tree, 2, 4)) - 1 == 8


# -- lower-bound adversary: local rules --------------------------------------

def _walk_to_hub(st, agent, branch):
    st.traverse(agent, branch)
    while st.known.degree(st.agents[agent].position) == 2:
        st.traverse(agent, 1)
    return st.agents[agent].position


def test_hub1_degree_and_case1_budget():
    adv = LowerBoundAdversary(P2)
    st = init_run(adv, P2.k, P2.B)
    hub = _walk_to_hub(st, 0, 0)
    assert st.known.depth[hub] == P2.d1
    assert st.known.degree(hub) == P2.delta + 1
    S = adv.subtrees[0]
    assert S.fresh == [0] and S.cases == ["1"]
    assert S.N == 2 + P2.case1_bump


def test_first_agent_creates_hub2_then_stops():
    adv = LowerBoundAdversary(P2)
    st = init_run(adv, P2.k, P2.B)
    _walk_to_hub(st, 0, 0)
    st.traverse(0, 1)
    while st.known.depth[st.agents[0].position] < P2.d2:
        assert st.known.degree(st.agents[0].position) == 2
        st.traverse(0, 1)
    hub2 = st.agents[0].position
    assert adv.subtrees[0].hub2 == hub2
    assert st.known.degree(hub2) == P2.delta + 1
    # keep diving: the path ends once energy <= depth - d2
    while st.known.degree(st.agents[0].position) > 1:
        st.traverse(0, 1)
    a = st.agents[0]
    d = st.known.depth[a.position]
    assert d > P2.d2 and a.energy <= d - P2.d2
    assert a.energy > d - 1 - P2.d2  # the previous vertex did not stop


def _scripted(keep, dive):
    """A1 explores shallow prefixes of hub ports, optionally dives, then A2 enters."""
    P = P2
    adv = LowerBoundAdversary(P)
    st = init_run(adv, P.k, P.B)
    kn = st.known
    hub = _walk_to_hub(st, 0, 0)
    cap = P.d1 + 6
    port = 1
    while st.agents[0].energy > keep + 2 * (cap - P.d1) and port <= P.delta:
        st.traverse(0, port)
        port += 1
        while kn.depth[st.agents[0].position] < cap and kn.degree(st.agents[0].position) > 1:
            st.traverse(0, 1)
        while st.agents[0].position != hub:
            st.traverse(0, 0)
    if dive:
        st.traverse(0, port)
        for _ in range(8):
            st.traverse(0, 1)
    _walk_to_hub(st, 1, 0)
    for agent, pick in ((1, -1), (0, 0)):
        while st.agents[agent].energy:
            x = st.agents[agent].position
            ports = [p for p in kn.child_ports(x) if kn.has_unexplored(x, p)]
            st.traverse(agent, ports[pick] if ports else 0)
    return adv, st


@pytest.mark.parametrize("keep, case", [(100, "2c"), (112, "2c"), (116, "2b"), (124, "2b"),
                                        (128, "2a"), (132, "2a")])
def test_scripted_case2(keep, case):
    adv, st = _scripted(keep, dive=True)
    S = adv.subtrees[0]
    assert S.cases == ["1", case]
    if case == "2a":
        assert 2 * S.case2_a1_count <= P2.d1 + P2.d2
        assert not S.active1 and not S.active2
    if case == "2b":
        assert S.regime_d2 and S.hub2 is not None
    if case == "2c":
        assert S.regime_d1 and S.hub2 is None
    checks = check_lemma3(adv, st, st.trace) + check_lemma4(adv, st, st.trace)
    assert all(c.ok for c in checks), [c.line() for c in checks if not c.ok]


def test_classify_empty_subtree_is_M0():
    adv = LowerBoundAdversary(P2)
    st = init_run(adv, P2.k, P2.B)
    M0, M1, M2 = classify_M(adv, st)
    assert M0 == {0, 1} and not M1 and not M2


# -- full runs ------------------------------------------------------------------

@pytest.mark.parametrize("algo", ALGOS)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lemma_checks_l2(algo, seed):
    adv, st, r = run_lower_bound(P2, algo, seed)
    checks = check_lemma3(adv, st, r.trace) + check_lemma4(adv, st, r.trace)
    assert len(checks) == 11
    assert all(c.ok for c in checks), [c.line() for c in checks if not c.ok]
    rep = finalize(adv, st)
    assert rep.alg <= alg_upper_bound(P2, rep.t)
    assert rep.opt_bound == opt_lower_bound(P2, rep.t)
    assert rep.opt_replay >= rep.opt_bound


@pytest.mark.parametrize("algo", ["dnd", "ldfs"])
def test_finalized_tree_replays_the_run(algo):
    adv, st, r = run_lower_bound(P2, algo)
    rep = finalize(adv, st)
    again = run_strategy(algo, init_run(rep.tree, P2.k, P2.B))
    assert again.trace_text() == r.trace_text()
    u1 = rep.u[rep.u1_subtree]
    assert rep.tree.degree(u1) == 2 * P2.l
    for i, u in rep.u.items():
        if i != rep.u1_subtree:
            assert rep.tree.degree(u) == 2
    assert len(rep.plan) == P2.k


def test_finalize_rejects_all_explored(monkeypatch):
    adv, st, _ = run_lower_bound(P2, "dnd")
    monkeypatch.setattr(adv_mod, "completely_explored_count", lambda a, s: P2.l)
    with pytest.raises(AssertionError):
        finalize(adv, st)


def test_report_text_fields():
    adv, st, _ = run_lower_bound(P2, "dnd")
    text = finalize(adv, st).to_text()
    keys = [ln.split()[0] for ln in text.splitlines()]
    for key in ("params", "t", "cases", "M0", "M1", "M2", "opt_bound", "alg"):
        assert key in keys
