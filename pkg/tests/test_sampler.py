import numpy as np
import pytest

from ozlab import kernels
from ozlab.kernels import _nb, _np
from ozlab.lattice import LatticeSpec
from ozlab.rc_measure import (FREE, WIRED, BoundaryCondition, Event, RCParams, aux_graph,
                              edges_open, exact_probability, probabilities)
from ozlab.sampler import (EstimateWithCI, advance, batch_means, chain_diagnostics,
                           choose_algorithm, init_state, mc_estimate, sample_config)

ONE_EDGE = LatticeSpec(2, (1, 2))


def test_algorithm_choice():
    assert choose_algorithm(1) == "bernoulli"
    assert choose_algorithm(2) == "sw"
    assert choose_algorithm(2.5) == "cm"
    with pytest.raises(ValueError):
        choose_algorithm(0.5)
    with pytest.raises(ValueError):
        sample_config(ONE_EDGE, RCParams(1.5, 0.5), algorithm="sw")


def test_seed_determinism():
    spec = LatticeSpec(2, 4)
    P = RCParams(2.5, 0.6)
    a = sample_config(spec, P, WIRED, sweeps=30, seed=11, record=True).history
    b = sample_config(spec, P, WIRED, sweeps=30, seed=11, record=True).history
    c = sample_config(spec, P, WIRED, sweeps=30, seed=12, record=True).history
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_chunking_does_not_change_stream():
    spec = LatticeSpec(2, 3)
    P = RCParams(3, 0.5)
    s1 = sample_config(spec, P, FREE, sweeps=40, seed=5)
    s2 = init_state(spec, P, FREE, seed=5)
    for _ in range(4):
        advance(s2, spec, P, FREE, 10)
    assert np.array_equal(s1.config, s2.config)


@pytest.mark.parametrize("q,bc", [(2, FREE), (3, WIRED), (1.7, FREE), (2.4, WIRED), (1, FREE)])
def test_backends_agree(q, bc):
    spec = LatticeSpec(2, (3, 4))
    g = aux_graph(spec, bc)
    K = 25
    raw = np.random.default_rng(1).bit_generator.random_raw(K * ((g.n + g.eu.size + 1) // 2))
    alg = kernels.BERNOULLI if q == 1 else (kernels.SW if float(q).is_integer() else kernels.CM)
    out = []
    for mod in (_nb, _np):
        cfg = np.zeros(g.eu.size, np.bool_)
        lab = _np.label(g.n, g.eu, g.ev, cfg, g.fu, g.fv)
        h = np.zeros((K, g.eu.size), np.bool_)
        mod.sweeps(g.n, g.eu, g.ev, g.fu, g.fv, g.super_, cfg, lab, alg, float(q), 0.6, raw, K, h)
        out.append((h, lab))
    assert np.array_equal(out[0][0], out[1][0])
    assert np.array_equal(out[0][1], out[1][1])


def test_finite_roots_backends():
    spec = LatticeSpec(3, 6)
    st = sample_config(spec, RCParams(1.5, 0.3), FREE, sweeps=3, seed=4)
    from ozlab.lattice import boundary_vertices
    b = np.asarray(boundary_vertices(spec))
    r1 = _nb.finite_roots(st.labels, spec.n_vertices, b)
    r2 = _np.finite_roots(st.labels, spec.n_vertices, b)
    assert np.array_equal(r1, r2) and r1.size > 0


def test_labels_consistent():
    spec = LatticeSpec(2, 5)
    P = RCParams(2, 0.55)
    st = sample_config(spec, P, FREE, sweeps=5, seed=2)
    g = aux_graph(spec, FREE)
    for a, b, o in zip(g.eu, g.ev, st.config):
        if o:
            assert st.labels[a] == st.labels[b]
    assert np.array_equal(st.labels, _np.label(g.n, g.eu, g.ev, st.config, g.fu, g.fv))


def test_bernoulli_marginal():
    est = mc_estimate(edges_open([0], 1), ONE_EDGE, RCParams(1, 0.7), n_samples=40000, seed=3)
    assert abs(est.z(0.7)) < 4


def test_trivial_events():
    m = ONE_EDGE.n_edges
    never = Event(np.zeros(2, bool))
    est = mc_estimate(never, ONE_EDGE, RCParams(2, 0.5), n_samples=500, seed=1)
    assert est.estimate == 0 and est.stderr == 0
    always = Event(np.ones(2, bool))
    assert mc_estimate(always, ONE_EDGE, RCParams(2, 0.5), n_samples=500, seed=1).estimate == 1


def test_callable_event():
    spec = LatticeSpec(2, 3)
    P = RCParams(1.5, 0.6)
    a = mc_estimate(edges_open([0], spec.n_edges), spec, P, n_samples=3000, seed=9)
    b = mc_estimate(lambda s: s.config[0], spec, P, n_samples=3000, seed=9)
    assert a == b


@pytest.mark.parametrize("q,bc,alg", [(2, FREE, "cm"), (3, WIRED, None), (1.5, WIRED, None),
                                      (2, BoundaryCondition.pinned([1, 0, 0, 1, 1, 0, 0, 1]), None)])
def test_cylinders_vs_enumeration(q, bc, alg):
    spec = LatticeSpec(2, (2, 3)) if bc.kind != "pinned" else LatticeSpec(2, (1, 3))
    P = RCParams(q, 0.6)
    m = spec.n_edges
    st = init_state(spec, P, bc, seed=4, algorithm=alg)
    advance(st, spec, P, bc, 100)
    advance(st, spec, P, bc, 100000, record=True)
    ints = st.history.astype(np.int64) @ (1 << np.arange(m))
    pr = probabilities(spec, P, bc)
    for j in range(m):
        ev = edges_open([j], m)
        est = batch_means(ev.mask[ints].astype(float))
        assert abs(est.z(pr[ev.mask].sum())) < 4


def test_sw_cm_agree():
    spec = LatticeSpec(2, 2)
    P = RCParams(3, 0.5)
    ev = edges_open([0, 3], 4)
    a = mc_estimate(ev, spec, P, n_samples=60000, seed=1, algorithm="sw")
    b = mc_estimate(ev, spec, P, n_samples=60000, seed=2, algorithm="cm")
    assert abs(a.estimate - b.estimate) < 4 * np.hypot(a.stderr, b.stderr)


def test_diagnostics():
    rng = np.random.default_rng(0)
    d = chain_diagnostics(rng.random(20000))
    assert abs(d.tau_int[0] - 1) < 0.2 and d.ok
    d = chain_diagnostics(np.ones(500))
    assert d.degenerate[0] and not d.ok
    d = chain_diagnostics(np.tile([0.0, 1.0], 300))
    assert d.tau_int[0] == 1.0
    with pytest.raises(ValueError):
        chain_diagnostics(np.zeros(50))
    # AR(1) with rho=0.9: tau = (1+rho)/(1-rho) = 19
    x = np.zeros(200000)
    e = rng.normal(size=x.size)
    for i in range(1, x.size):
        x[i] = 0.9 * x[i - 1] + e[i]
    assert abs(chain_diagnostics(x).tau_int[0] - 19) < 2


def test_batch_means_iid():
    x = (np.random.default_rng(3).random(10000) < 0.3).astype(float)
    est = batch_means(x)
    assert est.stderr == pytest.approx(np.sqrt(0.21 / 10000), rel=0.3)
    assert isinstance(est, EstimateWithCI) and est.n == 10000
