"""Monte-Carlo sampling of the random-cluster measure.

* q == 1         -- direct Bernoulli product sampling (exact in one sweep)
* integer q >= 2 -- Swendsen-Wang via the Edwards-Sokal coupling
* real q > 1     -- Chayes-Machta: activate each cluster w.p. 1/q and
                    resample bonds among active vertices as Bernoulli(p)

Boundary conditions use the auxiliary graph from ``rc_measure``.  The
component holding the extra node (the wired / pinned exterior) has its
colour fixed to 0 under SW and is always active under CM; both choices
leave the target measure unchanged.

Every sweep consumes ``ceil((n_nodes + n_edges) / 2)`` raw 64-bit PCG64
words, split into two 32-bit uniforms each (low half first).  The
configuration stream therefore depends only on the seed and the sweep
count, not on chunking, and the kernel backends are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lattice import LatticeSpec
from .rc_measure import FREE, BoundaryCondition, Event, RCParams, aux_graph

RNG_NAME = "numpy.random.PCG64 (SeedSequence-seeded), 32-bit uniforms from split 64-bit words"
_CHUNK_UNIFORMS = 1 << 22   # uniforms per block (upper bound)


def choose_algorithm(q: float) -> str:
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return "bernoulli"
    if float(q).is_integer():
        return "sw"
    return "cm"


_ALG_CODE = {"sw": kernels.SW, "cm": kernels.CM, "bernoulli": kernels.BERNOULLI}


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass
class ChainState:
    config: np.ndarray
    labels: np.ndarray
    rng: np.random.Generator
    sweeps: int = 0
    algorithm: str = "sw"
    history: np.ndarray | None = field(default=None, repr=False)

    def copy(self) -> "ChainState":
        rng = make_rng(0)
        rng.bit_generator.state = self.rng.bit_generator.state
        return ChainState(self.config.copy(), self.labels.copy(), rng, self.sweeps,
                          self.algorithm, None if self.history is None else self.history.copy())


def _check(spec, params, algorithm):
    alg = choose_algorithm(params.q) if algorithm is None else algorithm
    if alg not in _ALG_CODE:
        raise ValueError(f"unknown algorithm {alg!r}")
    if alg == "sw" and not float(params.q).is_integer():
        raise ValueError("Swendsen-Wang needs integer q")
    if alg == "bernoulli" and params.q != 1:
        raise ValueError("direct Bernoulli sampling is only valid at q = 1")
    return alg


def init_state(spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE, seed=0,
               algorithm=None, start: str = "closed") -> ChainState:
    alg = _check(spec, params, algorithm)
    m = spec.n_edges
    g = aux_graph(spec, bc)
    cfg = np.full(m, start == "open", dtype=np.bool_)
    lab = kernels.label(g.n, g.eu, g.ev, cfg, g.fu, g.fv)
    return ChainState(cfg, lab, make_rng(seed), 0, alg)


def advance(state: ChainState, spec: LatticeSpec, params: RCParams,
            bc: BoundaryCondition = FREE, sweeps: int = 1, record: bool = False) -> ChainState:
    """Run ``sweeps`` more sweeps in place; optionally keep per-sweep configs."""
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    g = aux_graph(spec, bc)
    m = g.eu.size
    words = (g.n + m + 1) // 2          # 64-bit words per sweep
    chunk = max(1, _CHUNK_UNIFORMS // (2 * words))
    code = _ALG_CODE[state.algorithm]
    hist_parts = []
    done = 0
    while done < sweeps:
        k = min(chunk, sweeps - done)
        raw = state.rng.bit_generator.random_raw(k * words)
        hist = np.zeros((k if record else 0, m), np.bool_)
        kernels.sweeps(g.n, g.eu, g.ev, g.fu, g.fv, g.super_, state.config, state.labels, code,
                       float(params.q), float(params.p), raw, k, hist)
        if record:
            hist_parts.append(hist)
        done += k
    state.sweeps += sweeps
    if record:
        state.history = np.concatenate(hist_parts)
    return state


def sample_config(spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE,
                  sweeps: int = 1, seed=0, algorithm=None, record: bool = False) -> ChainState:
    """Chain state after ``sweeps`` sweeps from the all-closed configuration."""
    st = init_state(spec, params, bc, seed, algorithm)
    return advance(st, spec, params, bc, sweeps, record)


# --- estimates -----------------------------------------------------------------

@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    stderr: float
    n: int
    batch_var: float

    def z(self, exact: float) -> float:
        """Deviation from ``exact`` in standard errors (inf if stderr is 0 and they differ)."""
        diff = self.estimate - exact
        if self.stderr == 0:
            return 0.0 if abs(diff) < 1e-15 else np.inf
        return diff / self.stderr


def batch_means(x, n_batches: int = 50) -> EstimateWithCI:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    b = min(n_batches, n)
    size = n // b
    means = x[: b * size].reshape(b, size).mean(axis=1)
    var = float(means.var(ddof=1)) if b > 1 else 0.0
    return EstimateWithCI(float(x.mean()), float(np.sqrt(var / b)), n, var)


def event_stream(event, spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE,
                 n_samples: int = 1000, thinning: int = 1, seed=0, burn_in: int | None = None,
                 algorithm=None) -> np.ndarray:
    """0/1 indicator of ``event`` on ``n_samples`` thinned chain states."""
    if n_samples < 1 or thinning < 1:
        raise ValueError("n_samples and thinning must be >= 1")
    st = init_state(spec, params, bc, seed, algorithm)
    if burn_in is None:
        burn_in = 0 if st.algorithm == "bernoulli" else 100
    if burn_in:
        advance(st, spec, params, bc, burn_in)
    m = spec.n_edges
    if isinstance(event, Event):
        weights = (1 << np.arange(m, dtype=np.int64))
        out = np.empty(n_samples, np.int8)
        per = max(1, (1 << 20) // max(m * thinning, 1))
        i = 0
        while i < n_samples:
            k = min(per, n_samples - i)
            advance(st, spec, params, bc, k * thinning, record=True)
            h = st.history[thinning - 1:: thinning]
            out[i: i + k] = event.mask[h.astype(np.int64) @ weights]
            i += k
        return out
    out = np.empty(n_samples, np.int8)
    for i in range(n_samples):
        advance(st, spec, params, bc, thinning)
        out[i] = bool(event(st))
    return out


def mc_estimate(event, spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE,
                n_samples: int = 1000, thinning: int = 1, seed=0, burn_in=None,
                algorithm=None) -> EstimateWithCI:
    """Frequency of ``event`` with a batch-means standard error.

    ``event`` is an ``Event`` mask (small boxes) or a callable receiving the
    ``ChainState``.
    """
    return batch_means(event_stream(event, spec, params, bc, n_samples, thinning, seed,
                                    burn_in, algorithm))


# --- diagnostics -----------------------------------------------------------------

@dataclass
class Diagnostics:
    tau_int: np.ndarray      # per observable, floored at 1
    window: np.ndarray
    degenerate: np.ndarray   # zero-variance observables
    flagged: np.ndarray      # tau_int > len / 50
    length: int

    @property
    def ok(self) -> bool:
        return not (self.flagged.any() or self.degenerate.any())


def _autocorr(x: np.ndarray) -> np.ndarray:
    n = x.size
    y = x - x.mean()
    f = np.fft.rfft(y, n=2 * n)
    ac = np.fft.irfft(f * np.conj(f))[:n]
    return ac / ac[0]


def integrated_time(x, c: float = 5.0) -> tuple[float, int]:
    """Sokal-windowed tau = 1 + 2 sum rho(t), window = first W >= c tau(W)."""
    rho = _autocorr(np.asarray(x, float))
    taus = 1 + 2 * np.cumsum(rho[1:])
    W = np.arange(1, rho.size)
    ok = W >= c * taus
    w = int(W[np.argmax(ok)]) if ok.any() else int(W[-1])
    return float(taus[w - 1]), w


def chain_diagnostics(history, min_len: int = 100, c: float = 5.0) -> Diagnostics:
    """Integrated autocorrelation time for each column of ``history``."""
    h = np.asarray(history, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    T = h.shape[0]
    if T < min_len:
        raise ValueError(f"need at least {min_len} recorded sweeps, got {T}")
    k = h.shape[1]
    tau = np.ones(k)
    win = np.zeros(k, int)
    degen = np.zeros(k, bool)
    for j in range(k):
        col = h[:, j]
        if np.ptp(col) == 0:
            degen[j] = True
            continue
        t, w = integrated_time(col, c)
        tau[j] = max(1.0, t)
        win[j] = w
    return Diagnostics(tau, win, degen, tau > T / 50, T)


# --- cluster harvesting ---------------------------------------------------------

def harvest_finite_clusters(spec: LatticeSpec, params: RCParams, n_clusters: int,
                            bc: BoundaryCondition = FREE, seed=0, min_size: int = 2,
                            burn_in: int = 100, thinning: int = 1, max_sweeps: int = 10 ** 7,
                            algorithm=None):
    """Yield (sweep, Cluster) for finite clusters (avoiding the box boundary) of
    at least ``min_size`` vertices, scanning every ``thinning``-th sweep.

    Stops after ``n_clusters`` clusters or ``max_sweeps`` sweeps.
    """
    from .cluster_geometry.clusters import Components
    from .lattice import boundary_vertices
    st = init_state(spec, params, bc, seed, algorithm)
    if burn_in:
        advance(st, spec, params, bc, burn_in)
    bnd = np.asarray(boundary_vertices(spec), np.int64)
    n = spec.n_vertices
    got = 0
    while got < n_clusters and st.sweeps < burn_in + max_sweeps:
        advance(st, spec, params, bc, thinning)
        roots = kernels.finite_roots(st.labels, n, bnd)
        if roots.size == 0:
            continue
        sizes = np.bincount(st.labels[:n], minlength=n)[roots]
        roots = roots[sizes >= min_size]
        if roots.size == 0:
            continue
        comps = Components.from_labels(st.labels, st.config, spec)
        for r in roots:
            yield st.sweeps, comps.cluster(int(r))
            got += 1
            if got >= n_clusters:
                return
