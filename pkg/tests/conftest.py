import itertools

import numpy as np
import pytest

from ozlab.lattice import LatticeSpec, edges_of_box, neighbours


def bfs_kappa(spec, open_bits, bc="free"):
    """Independent component count: plain BFS over coordinate tuples.

    Wired: every boundary vertex is glued to a ghost vertex.
    """
    edges = edges_of_box(spec)
    adj = {}
    verts = [tuple(int(c) for c in v) for v in itertools.product(*[range(s) for s in spec.shape])]
    for v in verts:
        adj[v] = set()
    adj["ghost"] = set()
    for e, b in zip(edges, open_bits):
        if b:
            adj[e.lo].add(e.hi)
            adj[e.hi].add(e.lo)
    if bc == "wired":
        for v in verts:
            if any(c == 0 or c == s - 1 for c, s in zip(v, spec.shape)):
                adj[v].add("ghost")
                adj["ghost"].add(v)
    seen, k = set(), 0
    for v in verts:
        if v in seen:
            continue
        k += 1
        stack = [v]
        seen.add(v)
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return k


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
