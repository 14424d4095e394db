import itertools
import math

import numpy as np
import pytest

from ozlab.lattice import Edge, LatticeSpec, Plaquette, plaquette_neighbours
from ozlab.polymer import (PolymerBudgetError, PolymerModel, activity_psi, anchor_plaquette,
                           cluster_logZ, count_polymers, enumerate_plaquette_polymers, estimate_c3,
                           incompatible, kp_check, lattice_kp_check, norm_bound, p0_threshold,
                           partition_brute, partition_direct, plaquette_model, polymer_counts,
                           polymer_norm, random_model)
from ozlab.rc_measure import RCParams

# fixed bond animals on the square lattice (the d=2 plaquette graph is the
# square lattice's bond-adjacency graph); sets through a given bond = n A_n / 2
BOND_ANIMALS = [2, 6, 22, 88, 372, 1628, 7312, 33466]


def model(z, edges, n=None):
    n = len(z) if n is None else n
    A = np.eye(n, dtype=bool)
    for i, j in edges:
        A[i, j] = A[j, i] = True
    return PolymerModel(np.ones(n, int), z, A)


# --- abstract models ------------------------------------------------------------

def test_partition_examples():
    assert partition_direct(model([], []), []) == 1.0
    assert partition_direct(model([0.2], [])) == pytest.approx(1.2)
    assert partition_direct(model([0.2, 0.1], [(0, 1)])) == pytest.approx(1.3)
    assert partition_direct(model([0.2, 0.1], [])) == pytest.approx(1.2 * 1.1)


def test_partition_matches_brute(rng):
    for _ in range(200):
        m = random_model(rng, max_n=9)
        assert partition_direct(m) == pytest.approx(partition_brute(m), rel=1e-12)
        S = [i for i in range(m.n) if rng.random() < 0.5]
        assert partition_direct(m, S) == pytest.approx(partition_brute(m, S), rel=1e-12)


def test_theta_examples():
    cw = cluster_logZ(model([0.3], []))
    assert cw.theta == {1: pytest.approx(math.log(1.3))}
    cw = cluster_logZ(model([0.3, 0.2], []))
    assert 3 not in cw.theta and cw.theta_all[3] == pytest.approx(0, abs=1e-15)
    cw = cluster_logZ(model([0.3, 0.2], [(0, 1)]))
    assert cw.theta[3] == pytest.approx(math.log(1.5) - math.log(1.3) - math.log(1.2))


def test_theta_inversion_and_factorization(rng):
    for _ in range(100):
        m = random_model(rng)
        cw = cluster_logZ(m)
        assert math.exp(cw.total) == pytest.approx(partition_direct(m), rel=1e-10)
        assert cw.max_split_theta() < 1e-10


def test_budgets():
    with pytest.raises(PolymerBudgetError):
        cluster_logZ(model(np.full(13, 0.1), []))
    with pytest.raises(PolymerBudgetError):
        partition_direct(model(np.full(21, 0.1), []))


def test_model_validation():
    with pytest.raises(ValueError):
        PolymerModel([1, 1], [0.1, 0.1], np.array([[1, 1], [0, 1]], bool))
    with pytest.raises(ValueError):
        PolymerModel([1], [0.1], np.zeros((1, 1), bool))


def test_json_roundtrip(rng):
    m = random_model(rng)
    m2 = PolymerModel.from_json(m.to_json())
    assert np.array_equal(m.incompat, m2.incompat)
    assert np.allclose(m.activities, m2.activities)


def test_kp_examples():
    zero = model([0.0, 0.0], [(0, 1)])
    r = kp_check(zero)
    assert r.passed and np.all(r.sums == 0)
    r = kp_check(model([0.1], []), a=[1.0])
    assert r.passed and r.sums[0] == pytest.approx(math.e * 0.1)
    r = kp_check(model([1.0], []), a=[1.0])
    assert not r.passed and r.sums[0] == pytest.approx(math.e)


def test_kp_tilt_only_adds():
    m = model([0.05, 0.05], [(0, 1)])
    r0 = kp_check(m)
    r1 = kp_check(m, ell=[1, 2], c8=1.0)
    assert np.all(r1.sums > r0.sums)


def test_p0_formula():
    assert p0_threshold(2, 47, 1) == pytest.approx(1 / (1 + (math.e / 94) / 3))
    assert p0_threshold(2, 47, 1) == pytest.approx(0.99046, abs=1e-5)
    assert p0_threshold(2, 47, 1e-9) > 1 - 1e-8
    assert p0_threshold(4, 47, 1) > p0_threshold(2, 47, 1)
    # corrected exponent: c3 e^{c8} (1-p0) q / p0 = c8 / (2 + c8)
    p0 = p0_threshold(2, 47, 1, corrected=True)
    assert 47 * math.e * (1 - p0) * 2 / p0 == pytest.approx(1 / 3)


# --- plaquette polymers -------------------------------------------------------------

def test_neighbour_counts():
    assert len(set(plaquette_neighbours(anchor_plaquette(3)))) == 12
    assert len(set(plaquette_neighbours(anchor_plaquette(2)))) == 6
    two = [s for s in enumerate_plaquette_polymers(anchor_plaquette(3), 2) if len(s) == 2]
    assert len(two) == 12


def test_enumerator_single():
    assert list(enumerate_plaquette_polymers(anchor_plaquette(3), 1)) == [
        frozenset({anchor_plaquette(3)})]


def test_enumerator_unique_connected_and_matches_kernel():
    for d, K in ((2, 5), (3, 4)):
        polys = list(enumerate_plaquette_polymers(anchor_plaquette(d), K))
        assert len(set(polys)) == len(polys)
        by = np.bincount([len(s) for s in polys], minlength=K + 1)
        assert by.tolist() == count_polymers(d, K).tolist()
        for s in polys[:: max(1, len(polys) // 50)]:
            # connectivity via BFS
            s = set(s)
            start = next(iter(s))
            seen, st = {start}, [start]
            while st:
                p = st.pop()
                for r in plaquette_neighbours(p):
                    if r in s and r not in seen:
                        seen.add(r)
                        st.append(r)
            assert seen == s


def test_counts_match_bond_animals():
    c = polymer_counts(2, 8)
    assert c[1:].tolist() == [n * a // 2 for n, a in zip(range(1, 9), BOND_ANIMALS)]


def test_enumerator_budget():
    with pytest.raises(PolymerBudgetError):
        next(enumerate_plaquette_polymers(anchor_plaquette(3), 9))


@pytest.mark.slow
def test_frozen_counts_reproduce():
    assert count_polymers(3, 7).tolist() == polymer_counts(3, 7).tolist()


def test_c3_estimates():
    assert 5.0 < estimate_c3(polymer_counts(2, 10)) < 5.4    # square-lattice bond animals ~ 5.21
    assert 13.0 < estimate_c3(polymer_counts(3, 8)) < 17.0


def test_single_plaquette_activity():
    pp = RCParams(2.0, 0.9)
    s = [anchor_plaquette(3)]
    assert polymer_norm(s, "wired") == 0
    assert activity_psi(s, pp, "wired") == pytest.approx(0.1 / 0.9)
    # q-independent when the norm vanishes
    assert activity_psi(s, RCParams(5.0, 0.9)) == activity_psi(s, pp)


def test_free_norm_on_path():
    spec = LatticeSpec(1, 3)
    s = [Plaquette(Edge((1,), 0))]
    assert polymer_norm(s, "free", spec) == 1
    assert activity_psi(s, RCParams(2.0, 0.6), "free", spec) == pytest.approx(0.4 / 0.6 * 2)


def test_cube_around_vertex_has_norm_one():
    cube = [Plaquette(Edge((0, 0, 0), k)) for k in range(3)] + \
           [Plaquette(Edge(tuple(-1 if j == k else 0 for j in range(3)), k)) for k in range(3)]
    assert polymer_norm(cube, "wired") == 1
    assert polymer_norm(cube, "wired", margin=4) == 1


def test_norm_margin_insensitive_and_bounded():
    polys = list(enumerate_plaquette_polymers(anchor_plaquette(3), 4))
    for s in polys[::37]:
        a = polymer_norm(s, "wired", margin=3)
        assert a == polymer_norm(s, "wired", margin=4)
        assert a <= norm_bound(len(s), 3)


def test_wired_norm_below_free_norm():
    spec = LatticeSpec(3, 4)
    anchor = Plaquette(Edge((1, 1, 1), 0))
    for s in itertools.islice(enumerate_plaquette_polymers(anchor, 4, spec), 0, 2000, 40):
        assert polymer_norm(s, "wired") <= polymer_norm(s, "free", spec)


def test_activity_bound():
    pp = RCParams(3.0, 0.8)
    for s in itertools.islice(enumerate_plaquette_polymers(anchor_plaquette(3), 6), 0, 5000, 97):
        assert activity_psi(s, pp) <= ((1 - pp.p) * pp.q / pp.p) ** len(s) + 1e-15


def test_plaquette_model_incompatibility():
    a = anchor_plaquette(3)
    far = Plaquette(Edge((5, 5, 5), 0))
    near = next(iter(plaquette_neighbours(a)))
    m = plaquette_model([[a], [far], [near]], RCParams(2.0, 0.9))
    assert not m.incompat[0, 1] and m.incompat[0, 2]
    assert incompatible([a], [a])
    cw = cluster_logZ(m)
    assert math.exp(cw.total) == pytest.approx(partition_direct(m))


def test_lattice_kp_threshold():
    assert lattice_kp_check(RCParams(2.0, 0.99)).passed
    assert not lattice_kp_check(RCParams(2.0, 0.7)).passed
    # the crude bound ||s|| <= |s| needs p closer to 1
    assert not lattice_kp_check(RCParams(2.0, 0.99), norm="size").passed
    assert lattice_kp_check(RCParams(2.0, 0.995), norm="size").passed
