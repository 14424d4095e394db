"""Time the numba kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--L 32] [--repeat 5]

Both implementations consume the same pre-drawn words, so their outputs are
also compared (labels and configurations must agree exactly).
"""
import argparse
import time

import numpy as np

from ozlab.kernels import _nb, _np
from ozlab.lattice import LatticeSpec, boundary_vertices
from ozlab.rc_measure import FREE, aux_graph


def best_of(f, repeat):
    f()                                   # warm-up (jit compile, caches)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def case_label(g, rng):
    cfg = rng.random(g.eu.size) < 0.5
    return lambda k: k.label(g.n, g.eu, g.ev, cfg, g.fu, g.fv)


def case_sweeps(g, rng, alg, q, p, K=5):
    words = (g.n + g.eu.size + 1) // 2
    raw = rng.integers(0, 2 ** 63, K * words, dtype=np.uint64)

    def run(k):
        cfg = np.zeros(g.eu.size, np.bool_)
        lab = k.label(g.n, g.eu, g.ev, cfg, g.fu, g.fv)
        k.sweeps(g.n, g.eu, g.ev, g.fu, g.fv, g.super_, cfg, lab, alg, q, p, raw, K,
                 np.zeros((0, g.eu.size), np.bool_))
        return cfg, lab
    return run


def case_roots(g, spec, rng):
    cfg = rng.random(g.eu.size) < 0.3
    lab = _np.label(g.n, g.eu, g.ev, cfg, g.fu, g.fv)
    bnd = np.asarray(boundary_vertices(spec), np.int64)
    return lambda k: k.finite_roots(lab, spec.n_vertices, bnd)


def case_kappa():
    g = aux_graph(LatticeSpec(2, (3, 3)), FREE)
    return lambda k: k.kappa_table(g.n, g.eu, g.ev, g.fu, g.fv, g.n)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=32)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    spec = LatticeSpec(a.d, a.L)
    g = aux_graph(spec, FREE)
    rng = np.random.default_rng(0)
    cases = [
        (f"label {a.L}^{a.d}", case_label(g, rng)),
        (f"SW sweep x5 q=2 {a.L}^{a.d}", case_sweeps(g, rng, _np.SW, 2.0, 0.6)),
        (f"CM sweep x5 q=1.5 {a.L}^{a.d}", case_sweeps(g, rng, _np.CM, 1.5, 0.9)),
        (f"finite_roots {a.L}^{a.d}", case_roots(g, spec, rng)),
        ("kappa_table 3x3 (2^12 configs)", case_kappa()),
    ]
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  agree")
    for name, f in cases:
        t_np = best_of(lambda: f(_np), a.repeat)
        t_nb = best_of(lambda: f(_nb), a.repeat)
        ok = same(f(_np), f(_nb))
        print(f"{name:34s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}x  {ok}")


if __name__ == "__main__":
    main()
