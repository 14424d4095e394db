import warnings

import numpy as np
import pytest

from ozlab.estimator import (ConnectivityTable, bernoulli_finite_series, circle_grid,
                             convexity_curvature_check, default_box, ellipsoid_gauss,
                             equidecay_surface, exact_two_point, finite_two_point_mc, icosphere,
                             polar_body, random_pairs, spherical_mesh, supermultiplicativity_check,
                             surface_from_norm, tau_fit, tau_fit_table)
from ozlab.lattice import LatticeSpec
from ozlab.rc_measure import RCParams, WIRED


# --- two-point estimates -----------------------------------------------------------------

@pytest.mark.parametrize("x,cutoff", [((1, 0), "none"), ((1, 1), "none"), ((0, 0), "boundary")])
def test_mc_matches_enumeration_3x3(x, cutoff):
    spec = LatticeSpec(2, 3, centered=True)
    pp = RCParams(2.0, 0.6)
    ex = exact_two_point((0, 0), x, spec, pp, cutoff=cutoff)
    r = finite_two_point_mc(x, spec, pp, n_samples=20_000, seed=11, margin=1, cutoff=cutoff)
    assert r.hits <= r.samples and r.cutoff == cutoff
    assert abs(r.estimate - ex) <= 4 * r.stderr


def test_isolated_centre_exact():
    # in a 3x3 box only the centre is interior: its cluster avoids the
    # boundary iff its four edges are closed
    spec = LatticeSpec(2, 3, centered=True)
    pp = RCParams(1.0, 0.3)
    assert exact_two_point((0, 0), (0, 0), spec, pp) == pytest.approx(0.7 ** 4)
    assert exact_two_point((0, 0), (1, 0), spec, pp) == 0.0


def test_box_too_small():
    with pytest.raises(ValueError):
        finite_two_point_mc((3, 0), LatticeSpec(2, 5, centered=True), RCParams(1.0, 0.5))
    with pytest.raises(ValueError):
        finite_two_point_mc((1, 0, 0), LatticeSpec(2, 9, centered=True), RCParams(1.0, 0.5))


def test_wired_never_finite_at_boundary():
    spec = LatticeSpec(2, 5, centered=True)
    r = finite_two_point_mc((2, 0), spec, RCParams(2.0, 0.5), WIRED, n_samples=500, margin=0)
    assert r.hits == 0


def test_series_leading_term():
    p = 0.9999
    lead = p * (1 - p) ** 10
    assert bernoulli_finite_series((1, 0, 0), p, 2) == pytest.approx(lead, rel=1e-12)
    two = bernoulli_finite_series((1, 0, 0), p, 3)
    # next clusters have 3 sites and 14 boundary edges
    assert 0 < two - lead < 20 * (1 - p) ** 14


def test_series_matches_mc_d2():
    p = 0.7
    spec = default_box(2, (1, 0), margin=4)
    r = finite_two_point_mc((1, 0), spec, RCParams(1.0, p), n_samples=100_000, seed=5)
    s = bernoulli_finite_series((1, 0), p, 7)
    assert abs(r.estimate - s) <= 4 * r.stderr


def test_origin_cluster_finite_small():
    # q=1, p=0.99, d=3: P(|C(0)| < inf) ~ (1-p)^6 << 1e-3
    spec = default_box(3, (0, 0, 0), margin=3)
    r = finite_two_point_mc((0, 0, 0), spec, RCParams(1.0, 0.99), n_samples=2000, seed=1)
    assert r.estimate < 1e-3
    assert bernoulli_finite_series((0, 0, 0), 0.99, 3) < 1e-3


def test_table_csv_and_along():
    t = ConnectivityTable()
    for k in (1, 2, 3, 4):
        t.add(finite_two_point_mc((k, 0), LatticeSpec(2, 13, centered=True), RCParams(1.0, 0.6),
                                  n_samples=50, seed=k))
    a = t.along((1, 0))
    assert a[:, 0].tolist() == [1, 2, 3, 4]
    lines = t.to_csv().splitlines()
    assert lines[0].startswith("# ozlab") and lines[1].startswith("x,samples,hits")
    assert len(lines) == 6


# --- tau fits -------------------------------------------------------------------------------

def test_tau_synthetic():
    r = np.arange(1, 9, dtype=float)
    f = tau_fit((1, 0, 0), r, np.exp(-0.5 * r))
    assert f.tau == pytest.approx(0.5, abs=1e-12) and f.err < 1e-12
    g = r ** -1.0 * np.exp(-0.5 * r)
    assert tau_fit((1, 0, 0), r, g, oz=True).tau == pytest.approx(0.5, abs=1e-12)


def test_tau_zero_radii():
    r = np.arange(1, 7, dtype=float)
    g = np.exp(-r)
    g[2] = 0
    with pytest.warns(UserWarning):
        f = tau_fit((1, 0), r, g)
    assert f.excluded.tolist() == [3.0] and f.tau == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tau_fit((1, 0), r, np.zeros(6))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError):
            tau_fit((1, 0), r, np.array([1, 0, 0, 0, 1e-3, 1e-4]))


def test_tau_symmetry_mc():
    spec = LatticeSpec(2, 11, centered=True)
    pp = RCParams(1.0, 0.55)
    t = ConnectivityTable()
    for s in (1, -1):
        for k in range(1, 5):
            t.add(finite_two_point_mc((s * k, 0), spec, pp, n_samples=40_000, seed=100 + 10 * s + k))
    f1, f2 = tau_fit_table(t, (1, 0)), tau_fit_table(t, (-1, 0))
    assert abs(f1.tau - f2.tau) <= 4 * np.hypot(f1.err, f2.err)


def test_tau_grows_as_p_approaches_one():
    # exact low-density series for q=1 (finite connections get rarer as p -> 1)
    taus = []
    for p in (0.85, 0.95):
        g = [bernoulli_finite_series((r, 0, 0), p, r + 2) for r in range(1, 5)]
        taus.append(tau_fit((1, 0, 0), np.arange(1, 5), g).tau)
    assert taus[1] > taus[0]


# --- surfaces --------------------------------------------------------------------------------

def test_grids():
    U = icosphere(2)
    assert U.shape == (162, 3) and np.allclose(np.linalg.norm(U, axis=1), 1)
    D, shape, h = spherical_mesh(10)
    assert shape == (17, 36) and D.shape == (17 * 36, 3)
    assert np.allclose(circle_grid(4), [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)


def test_sphere_polar_ball():
    U = icosphere(2)
    s = equidecay_surface(U, np.ones(len(U)))
    assert np.allclose(s.radius, 1)
    assert np.max(np.abs(s.support(U) - 1)) < 1e-9
    assert np.all(np.linalg.norm(s.polar_vertices, axis=1) >= 1 - 1e-12)
    assert np.all(np.linalg.norm(s.polar_vertices, axis=1) < 1.05)


def test_l1_type_norm_polar_box():
    U = icosphere(2)
    w = np.array([2.0, 1.0, 1.0])
    s = equidecay_surface(U, np.abs(U) @ w)
    assert np.max(np.abs(s.support(U) - s.tau)) < 1e-9
    corners = np.array([[a * 2, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)])
    V = s.polar_vertices
    for c in corners:
        assert np.min(np.linalg.norm(V - c, axis=1)) < 1e-9
    assert np.all(np.abs(V) <= w + 1e-9)


def test_polar_round_trip_random_norms(rng):
    U = icosphere(2)
    for _ in range(5):
        A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        tau = np.linalg.norm(U @ A.T, axis=1)
        s = equidecay_surface(U, tau)
        assert np.max(np.abs(s.support(U) - tau)) < 1e-9


def test_polar_errors():
    U = circle_grid(8)
    with pytest.raises(ValueError):
        equidecay_surface(U, np.r_[np.ones(7), 0.0])
    flat = np.column_stack([circle_grid(12), np.zeros(12)])
    with pytest.raises(ValueError):
        polar_body(flat, np.ones(12))
    with pytest.raises(ValueError):
        polar_body(circle_grid(3), np.ones(3))
    half = np.array([[1, 0], [0.8, 0.6], [0.8, -0.6], [0.6, 0.8], [0.6, -0.8]])
    with pytest.raises(ValueError):
        polar_body(half, np.ones(5))


def test_sphere_curvature():
    rep = convexity_curvature_check(surface_from_norm(np.linalg.norm, 3, 10))
    assert rep.convex and rep.positive
    assert np.all(np.abs(rep.gauss - 1) < 0.05) and np.all(np.abs(rep.kmin - 1) < 0.05)
    rep2 = convexity_curvature_check(surface_from_norm(np.linalg.norm, 2, 10))
    assert np.all(np.abs(rep2.gauss - 1) < 0.05)


def test_ellipsoid_curvature():
    a = np.array([2.0, 1.0, 1.0])
    rep = convexity_curvature_check(surface_from_norm(lambda u: np.sqrt(np.sum(u ** 2 / a ** 2)), 3))
    assert rep.convex and rep.positive
    exact = ellipsoid_gauss(a, rep.points)
    ratio = rep.gauss.min() / rep.gauss.max()
    assert ratio == pytest.approx(exact.min() / exact.max(), rel=0.1)
    assert ratio == pytest.approx(1 / 16, rel=0.1)
    assert np.all(np.abs(rep.gauss / exact - 1) < 0.1)


def test_dimple_reported():
    def norm(u):
        ang = np.arccos(np.clip(u[0] / np.linalg.norm(u), -1, 1))
        return 1 / (1 - 0.3 * np.exp(-(ang / 0.3) ** 2))

    for d in (2, 3):
        rep = convexity_curvature_check(surface_from_norm(norm, d, 10))
        assert not rep.convex and rep.violations
        s = surface_from_norm(norm, d, 10)
        i, j, k, ex = rep.violations[0]
        assert ex > 0 and np.arccos(s.directions[k][0]) < 0.6     # witness inside the dimple
        assert not rep.positive


def test_curvature_needs_mesh():
    s = equidecay_surface(icosphere(1), np.ones(42))
    with pytest.raises(ValueError):
        convexity_curvature_check(s)


def test_curvature_error_bars():
    s = surface_from_norm(np.linalg.norm, 3, 10, err=np.full(17 * 36, 1e-3))
    rep = convexity_curvature_check(s)
    assert rep.convex and rep.min_eig_err > 0


# --- supermultiplicativity ---------------------------------------------------------------------

def test_supermult_example():
    spec = LatticeSpec(2, 3)
    rep = supermultiplicativity_check((1, 0), (2, 0), spec, RCParams(2.0, 0.6))
    assert rep.exact and rep.holds and rep.g0x > 0


def test_supermult_x_origin():
    spec = LatticeSpec(2, 3)
    rep = supermultiplicativity_check((0, 0), (2, 1), spec, RCParams(2.0, 0.6))
    assert rep.g0x == pytest.approx(1.0) and rep.slack == pytest.approx(0, abs=1e-15)


def test_supermult_random_pairs(rng):
    spec = LatticeSpec(2, 3)
    for q, p in ((2.0, 0.6), (1.5, 0.3), (4.0, 0.8)):
        for x, y in random_pairs(spec, 10, rng):
            assert supermultiplicativity_check(x, y, spec, RCParams(q, p)).holds


def test_supermult_boundary_cutoff():
    spec = LatticeSpec(2, (4, 3))
    inner = [(1, 1), (2, 1)]
    for o in inner:
        for x in inner:
            for y in inner:
                rep = supermultiplicativity_check(x, y, spec, RCParams(2.0, 0.6), cutoff="boundary",
                                                  origin=o)
                assert rep.holds
