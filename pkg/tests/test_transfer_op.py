import math

import numpy as np
import pytest

from ozlab.transfer_op import (IrreducibleAlphabet, NonUniqueError, PotentialSpec,
                               alphabet_from_displacements, alphabet_to_json, fit_prefactor,
                               leading_eig, load_alphabet, log_lambda, mean_displacement, memoryless,
                               potential_from_function, prefactor_fit, pressure_surface, renewal_mass,
                               ruelle_apply, solve_tilt, tilt)

GOLDEN = (1 + math.sqrt(5)) / 2


def golden_potential():
    M = np.array([[1.0, 1.0], [1.0, 1e-300]])   # M[ctx, s]
    return PotentialSpec(np.log(M).T)


def brute_mass(alph, pot, R):
    """Enumerate every string with total level <= R."""
    out = {tuple([0] * alph.d): 1.0}
    lv = alph.levels

    def rec(pos, last, w, lvl):
        for s in range(alph.K):
            if lvl + lv[s] > R:
                continue
            if last is None:
                ws = w * math.exp(pot.init[s])
            elif pot.m == 1:
                ws = w * math.exp(pot.xi[s])
            else:
                ws = w * math.exp(pot.xi[s, last])
            x = tuple(pos + alph.X[s])
            out[x] = out.get(x, 0.0) + ws
            rec(pos + alph.X[s], s, ws, lvl + lv[s])

    rec(np.zeros(alph.d, np.int64), None, 1.0, 0)
    return out


def test_apply_memoryless():
    pot = memoryless(np.log([0.2, 0.3, 0.1]))
    assert float(ruelle_apply(1.0, None, pot)) == pytest.approx(0.6)
    one = memoryless([-0.7])
    assert float(ruelle_apply(2.0, None, one)) == pytest.approx(2 * math.exp(-0.7))


def test_apply_matrix():
    f = np.array([0.3, 2.0])
    assert np.allclose(ruelle_apply(f, None, golden_potential()), [2.3, 0.3])


def test_leading_eig_examples():
    pot = memoryless(np.log([0.2, 0.3, 0.1]))
    e = leading_eig(None, pot)
    assert e.lam == pytest.approx(0.6, rel=1e-12) and np.allclose(e.h, 1)
    e = leading_eig(None, golden_potential())
    assert e.lam == pytest.approx(GOLDEN, rel=1e-12)
    assert e.h.max() == pytest.approx(1) and e.mu.sum() == pytest.approx(1)
    assert e.residual <= 1e-12 * e.lam * 10


def test_reducible_flagged():
    M = np.array([[1.0, 1e-300], [1e-300, 1.0]])
    with pytest.raises(NonUniqueError):
        leading_eig(None, PotentialSpec(np.log(M).T))


def test_zero_alphabet():
    with pytest.raises(ValueError):
        leading_eig(None, PotentialSpec(np.full((2, 2), -np.inf)))


def test_eig_matches_numpy(rng):
    for _ in range(20):
        K = int(rng.integers(2, 5))
        xi = rng.normal(size=(K, K))
        lam = max(abs(np.linalg.eigvals(np.exp(xi).T)))
        assert leading_eig(None, PotentialSpec(xi)).lam == pytest.approx(lam, rel=1e-10)


def test_tilt_examples():
    al = IrreducibleAlphabet([[1, 0], [1, 1]], (1, 0))
    pot = memoryless(np.log([0.3, 0.2]))
    assert np.array_equal(tilt(al, pot, [0, 0]).xi, pot.xi)
    v = np.array([0.4, -0.3])
    assert np.allclose(np.exp(tilt(al, pot, v).xi), [0.3 * math.exp(0.4), 0.2 * math.exp(0.1)])
    one = IrreducibleAlphabet([[2, 1]], (1, 0))
    p1 = memoryless([-1.5])
    for v in ([0.0, 0.0], [0.3, -0.2], [-1.0, 2.0]):
        assert log_lambda(one, p1, v) == pytest.approx(2 * v[0] + v[1] - 1.5, abs=1e-12)
    with pytest.raises(ValueError):
        tilt(al, pot, [np.inf, 0])
    with pytest.raises(OverflowError):
        tilt(al, pot, [1e4, 0])


def test_alphabet_validation():
    with pytest.raises(ValueError):
        IrreducibleAlphabet([[0, 1]], (1, 0))        # level 0
    with pytest.raises(ValueError):
        IrreducibleAlphabet([[1, 3]], (1, 0), eps=0.3)
    with pytest.raises(ValueError):
        IrreducibleAlphabet([[1, 0]], (1, 1))


def test_renewal_single_symbol():
    al = IrreducibleAlphabet([[1, 0, 0]], (1, 0, 0))
    tb = renewal_mass(al, memoryless([math.log(0.7)]), R=30)
    for n in range(31):
        assert tb.mass((n, 0, 0)) == pytest.approx(0.7 ** n, rel=1e-12)
    assert tb.mass((0, 0, 0)) == 1.0


def test_renewal_binomial():
    al = IrreducibleAlphabet([[1, 0], [1, 1]], (1, 0))
    w1, w2 = 0.3, 0.45
    tb = renewal_mass(al, memoryless(np.log([w1, w2])), R=25)
    for a in range(1, 26):
        for b in range(0, a + 1):
            assert tb.mass((a, b)) == pytest.approx(math.comb(a, b) * w1 ** (a - b) * w2 ** b,
                                                   rel=1e-12)
    assert tb.mass((3, -1)) == 0.0


def test_renewal_matches_enumeration(rng):
    al = IrreducibleAlphabet([[1, 0], [2, 1], [1, -1], [3, 0]], (1, 0))
    for m in (1, 2):
        xi = rng.normal(-1.0, 0.4, size=(4,) * m)
        pot = PotentialSpec(xi, rng.normal(-1.0, 0.4, 4) if m == 2 else None)
        tb = renewal_mass(al, pot, R=9)
        ref = brute_mass(al, pot, 9)
        assert set(ref) == {x for x in tb.points() if tb.mass(x) > 0}
        for x, w in ref.items():
            assert tb.mass(x) == pytest.approx(w, rel=1e-11)


def test_renewal_tilt_identity():
    al, pot = load_alphabet("d2")
    v = np.array([0.3, -0.2])
    t0 = renewal_mass(al, pot, R=40)
    tv = renewal_mass(al, pot, v, R=40)
    assert t0.points() == tv.points()
    for x in t0.points():
        assert tv.log_mass[x] == pytest.approx(t0.log_mass[x] + float(v @ x), abs=1e-12)


def test_renewal_axis_window_exact():
    al, pot = load_alphabet("d3_7")
    full = renewal_mass(al, pot, R=24)
    axis = renewal_mass(al, pot, R=24, keep="axis")
    for k in range(25):
        assert axis.log_mass[(k, 0, 0)] == pytest.approx(full.log_mass[(k, 0, 0)], abs=1e-12)


def test_renewal_divergence_flag():
    al, pot = load_alphabet("d2")
    assert not renewal_mass(al, pot, R=5).divergent
    v = solve_tilt(al, pot, target=0.1)
    assert renewal_mass(al, pot, v, R=5).divergent


def test_renewal_budget():
    al, pot = load_alphabet("d3_7")
    with pytest.raises(MemoryError):
        renewal_mass(al, pot, R=2000, max_cells=10 ** 6)


def test_mass_csv_header():
    al = IrreducibleAlphabet([[1, 0], [1, 1]], (1, 0))
    txt = renewal_mass(al, memoryless(np.log([0.3, 0.2])), R=3).to_csv()
    lines = txt.splitlines()
    assert lines[0].startswith("#") and "empty string" in lines[0]
    assert lines[1] == "x1,x2,mass,log_mass"
    assert lines[2].startswith("0,0,1.0,")


def test_fit_synthetic():
    r = np.arange(10, 60, dtype=float)
    f = fit_prefactor(r, -np.log(r) - 0.5 * r)
    assert f.tau == pytest.approx(0.5, abs=1e-6) and f.alpha == pytest.approx(1.0, abs=1e-6)
    assert f.log_amplitude == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        fit_prefactor(r[:5], -r[:5])
    with pytest.raises(ValueError):
        fit_prefactor(r, np.full(r.size, -np.inf))


@pytest.mark.parametrize("name,alpha", [("d3_7", 1.0), ("d2", 0.5)])
def test_prefactor_exponent(name, alpha):
    al, pot = load_alphabet(name)
    tb = renewal_mass(al, pot, R=200, keep="axis")
    fit = prefactor_fit(tb, r_range=(50, 200))
    assert abs(fit.alpha - alpha) <= 0.05
    # tau is the tilt that makes the operator critical along the axis
    assert fit.tau == pytest.approx(solve_tilt(al, pot)[0], rel=1e-2)


def test_pressure_single_symbol_plane():
    al = IrreducibleAlphabet([[1, 1]], (1, 0))
    grid = np.array([[0.0, 0.0], [0.2, 0.5], [-1.0, 0.3]])
    vals, bad = pressure_surface(al, memoryless([-0.4]), grid)
    assert not bad.any()
    assert np.allclose(vals, grid.sum(1) - 0.4, atol=1e-12)
    _, bad = pressure_surface(al, memoryless([-0.4]), [[1e4, 0.0]])
    assert bad.all()


def test_pressure_convex_and_gradient(rng):
    al, pot = load_alphabet("d3_7")
    for _ in range(20):
        v1, v2 = rng.normal(0, 0.5, (2, 3))
        mid = log_lambda(al, pot, (v1 + v2) / 2)
        assert mid <= (log_lambda(al, pot, v1) + log_lambda(al, pot, v2)) / 2 + 1e-12
    h = 1e-5
    for _ in range(5):
        v = rng.normal(0, 0.5, 3)
        grad = [(log_lambda(al, pot, v + h * e) - log_lambda(al, pot, v - h * e)) / (2 * h)
                for e in np.eye(3)]
        assert np.allclose(grad, mean_displacement(al, pot, v), atol=1e-6)


def test_mean_displacement_memory2(rng):
    al = IrreducibleAlphabet([[1, 0], [1, 1], [2, -1]], (1, 0))
    pot = PotentialSpec(rng.normal(-1, 0.3, (3, 3)))
    h = 1e-5
    grad = [(log_lambda(al, pot, h * e) - log_lambda(al, pot, -h * e)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(grad, mean_displacement(al, pot), atol=1e-6)


def test_holder_truncation_stability():
    K, theta, c = 3, 0.4, 0.5
    base = np.log([0.3, 0.2, 0.25])
    g = np.array([[0.3, -0.2, 0.1], [-0.1, 0.4, 0.0], [0.2, 0.1, -0.3]])

    def fn(s, ctx):
        return base[s] + sum(c * theta ** (k + 1) * g[s, a] for k, a in enumerate(ctx))

    lams = [leading_eig(None, potential_from_function(fn, K, m, theta)).lam for m in range(1, 5)]
    pots = [potential_from_function(fn, K, m, theta) for m in range(1, 5)]
    assert all(p.holder_ok(1.0) for p in pots)
    for m in range(1, 4):
        assert abs(lams[m] - lams[m - 1]) <= 2 * theta ** m


def test_variations():
    pot = PotentialSpec(np.array([[0.0, 0.5], [1.0, 1.2]]))   # xi[s, ctx]
    assert np.allclose(pot.variations(), [0.5, 0.0])
    assert pot.holder_ok(1.0, 0.5) and not pot.holder_ok(0.4, 0.5)


def test_json_roundtrip(tmp_path):
    al, pot = load_alphabet("d3_7")
    p = tmp_path / "a.json"
    p.write_text(alphabet_to_json(al, pot))
    al2, pot2 = load_alphabet(str(p))
    assert np.array_equal(al.X, al2.X) and np.allclose(pot.xi, pot2.xi) and al2.eps == al.eps


def test_alphabet_from_displacements():
    disp = [(1, 0)] * 6 + [(1, 1)] * 3 + [(2, 0)]
    al, pot = alphabet_from_displacements(disp, (1, 0))
    assert al.K == 3
    w = dict(zip(map(tuple, al.X.tolist()), np.exp(pot.xi)))
    assert w[(1, 0)] == pytest.approx(0.6) and w[(2, 0)] == pytest.approx(0.1)
    assert sum(w.values()) == pytest.approx(1.0)
