import numpy as np
import pytest
from hypothesis import given, strategies as st

from ozlab.lattice import (Cone, Edge, LatticeSpec, Plaquette, Slab, dual, edges_of_box,
                           in_cone, outer_shell, principal_axis, slab_index, strip)


@pytest.mark.parametrize("d,L,n", [(1, 2, 1), (2, 2, 4), (3, 2, 12), (2, 3, 12), (2, (2, 3), 7)])
def test_edge_counts(d, L, n):
    assert len(edges_of_box(LatticeSpec(d, L))) == n


def test_edges_unique_and_nearest():
    spec = LatticeSpec(3, 3)
    es = edges_of_box(spec)
    assert len(set(es)) == len(es) == 3 * 3 * 3 * 2
    for e in es:
        assert sum(abs(a - b) for a, b in zip(e.lo, e.hi)) == 1
        assert spec.contains(e.hi)
    # axis-major order
    assert [e.axis for e in es] == sorted(e.axis for e in es)


def test_index_roundtrip():
    spec = LatticeSpec(3, (2, 3, 4), centered=True)
    for i in range(spec.n_vertices):
        assert spec.index(spec.coords(i)) == i


def test_dual_involution():
    for e in edges_of_box(LatticeSpec(3, 2)):
        assert dual(dual(e)) == e
        assert isinstance(dual(e), Plaquette)


def test_edge_from_endpoints():
    assert Edge.from_endpoints((1, 0), (0, 0)) == Edge((0, 0), 0)
    with pytest.raises(ValueError):
        Edge.from_endpoints((0, 0), (1, 1))


def test_in_cone_examples():
    assert in_cone((2, 1, 0), Cone((2, 1, 0), 0.01))
    assert not in_cone((0, 1, 0), Cone((1, 0, 0), 0.5))
    assert in_cone((1, 1, 0), Cone((1, 0, 0), 0.3))      # 1 >= 0.7*sqrt(2)
    assert in_cone((0, 0, 0), Cone((1, 0, 0), 0.1))
    with pytest.raises(ValueError):
        Cone((0, 0), 0.5)


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3),
       st.lists(st.integers(-3, 3), min_size=3, max_size=3).filter(any),
       st.floats(0.01, 0.98), st.floats(0.0, 0.5))
def test_cone_nesting(x, t, e1, de):
    e2 = min(e1 + de, 0.99)
    if in_cone(x, Cone(tuple(t), e1)):
        assert in_cone(x, Cone(tuple(t), e2))


def test_slab_index_examples():
    assert slab_index((15, 0), (1, 0), 10) == 1
    assert slab_index((0, 3), (1, 0), 10) == 0
    assert slab_index((-1, 0), (1, 0), 10) is None
    with pytest.raises(ValueError):
        slab_index((1, 0), (0, 0), 3)


@given(st.lists(st.integers(0, 40), min_size=2, max_size=2), st.integers(1, 7))
def test_slab_partition(x, N):
    i = slab_index(x, (1, 0), N)
    assert i * N <= x[0] < (i + 1) * N


def test_strip_and_slab():
    s = strip((1, 0), (0, 0), (3, 5))
    assert s.contains((3, -7)) and s.contains((0, 9)) and not s.contains((4, 0))
    with pytest.raises(ValueError):
        Slab((1, 0), 2, 1)


def test_principal_axis_ties():
    assert principal_axis((1, 1, 0)) == 0
    assert principal_axis((0.2, 1, 1)) == 1


def test_outer_shell_size():
    spec = LatticeSpec(2, 2)
    assert len(outer_shell(spec)) == 8
    spec = LatticeSpec(3, (1, 2, 3))
    assert len(outer_shell(spec)) == 2 * (6 + 3 + 2)
