import random

import pytest
from hypothesis import strategies as st

from treexplore.generators import gen_random
from treexplore.tree import Instance, TreeBuilder


def path_tree(length):
    b = TreeBuilder()
    b.add_path(0, length)
    return b.build()


def star_tree(leaves):
    b = TreeBuilder()
    for _ in range(leaves):
        b.add_child(0)
    return b.build()


@st.composite
def small_instances(draw, max_n=14, max_k=3, max_B=8):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    deg = draw(st.sampled_from([None, 2, 3, 4]))
    k = draw(st.integers(1, max_k))
    B = draw(st.integers(0, max_B))
    return Instance(gen_random(n, deg, seed).tree, k, B)


def seeded_small_instances(count, seed=0):
    """The same deterministic sample the CLI's ratio3/lemma1 suites use."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(1, 14)
        k = rng.randint(1, 3)
        B = rng.randint(0, 8)
        out.append((seed + i, Instance(gen_random(n, None, seed + i).tree, k, B)))
    return out


@pytest.fixture
def path3():
    return path_tree(3)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    lines = [RESULTS[k] for k in sorted(k for k in RESULTS if isinstance(k, int))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
