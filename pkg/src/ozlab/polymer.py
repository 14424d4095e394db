"""Abstract polymer models and the plaquette-polymer instance.

A model is a finite set of polymers 0..n-1 with sizes, activities and a
reflexive symmetric incompatibility relation.  Subsets are bitmasks.

* ``partition_direct``   -- Z(S) = sum over compatible families in S of the
                            product of activities (Z(empty) = 1)
* ``cluster_logZ``       -- theta(S') for every polymer cluster S' of S by
                            inclusion-exclusion of log Z over subsets
* ``kp_check``           -- Kotecky-Preiss sums for an abstract model
* ``lattice_kp_check``   -- the same sums for the translation-invariant
                            plaquette instance, counts bounded by c3^k

Plaquette polymers are connected sets in the graph whose vertices are
plaquettes and whose edges join plaquettes sharing a (d-2)-cell; two
polymers are incompatible when they share or touch a plaquette.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from . import kernels
from .lattice import Edge, LatticeSpec, Plaquette, plaquette_neighbours
from .rc_measure import FREE, WIRED, RCParams, kappa

MAX_DIRECT = 20      # polymers in partition_direct
MAX_THETA = 12       # polymers in cluster_logZ
MAX_PLAQ_SIZE = 8


class PolymerBudgetError(ValueError):
    pass


@dataclass
class PolymerModel:
    sizes: np.ndarray           # positive ints
    activities: np.ndarray      # nonnegative
    incompat: np.ndarray        # bool (n, n), symmetric, true diagonal
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, np.int64)
        self.activities = np.asarray(self.activities, float)
        A = np.asarray(self.incompat, bool)
        n = self.sizes.size
        if A.shape != (n, n) or self.activities.shape != (n,):
            raise ValueError("sizes, activities and incompatibility matrix disagree")
        if not np.array_equal(A, A.T):
            raise ValueError("incompatibility must be symmetric")
        if n and not A.diagonal().all():
            raise ValueError("every polymer is incompatible with itself")
        if np.any(self.activities < 0) or np.any(self.sizes < 1):
            raise ValueError("activities must be >= 0 and sizes >= 1")
        self.incompat = A
        if not self.labels:
            self.labels = list(range(n))

    @property
    def n(self) -> int:
        return int(self.sizes.size)

    def nbr_masks(self) -> np.ndarray:
        """Bitmask of polymers incompatible with i, i included."""
        w = np.int64(1) << np.arange(self.n, dtype=np.int64)
        return (self.incompat.astype(np.int64) * w).sum(axis=1)

    def to_json(self) -> str:
        return json.dumps({
            "ids": [str(x) for x in self.labels],
            "sizes": self.sizes.tolist(),
            "activities": self.activities.tolist(),
            "adjacency": [np.flatnonzero(r).tolist() for r in self.incompat],
        })

    @classmethod
    def from_json(cls, text: str) -> "PolymerModel":
        r = json.loads(text)
        n = len(r["sizes"])
        A = np.zeros((n, n), bool)
        for i, row in enumerate(r["adjacency"]):
            A[i, row] = True
        A |= A.T
        np.fill_diagonal(A, True)
        return cls(r["sizes"], r["activities"], A, r.get("ids", []))


def random_model(rng: np.random.Generator, n: int | None = None, max_n: int = 12,
                 zmax: float = 0.3, edge_prob: float | None = None) -> PolymerModel:
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    ep = rng.uniform(0.05, 0.6) if edge_prob is None else edge_prob
    A = np.triu(rng.random((n, n)) < ep, 1)
    A = A | A.T
    np.fill_diagonal(A, True)
    return PolymerModel(rng.integers(1, 6, n), rng.uniform(0, zmax, n), A)


# --- partition functions and cluster weights --------------------------------------

def _full(model: PolymerModel) -> int:
    return (1 << model.n) - 1


def _z_table(z, nb) -> np.ndarray:
    """Z(mask) for every mask over len(z) polymers.

    Splitting on the highest polymer i of the mask:
    Z(mask) = Z(mask - i) + z_i Z((mask - i) minus the neighbours of i).
    """
    n = len(z)
    Z = np.empty(1 << n)
    Z[0] = 1.0
    for i in range(n):
        lo = np.arange(1 << i, dtype=np.int64)
        Z[(1 << i) + lo] = Z[lo] + z[i] * Z[lo & ~nb[i]]
    return Z


def _restrict(model: PolymerModel, S):
    idx = list(range(model.n)) if S is None else sorted(set(int(i) for i in S))
    return idx, model.activities[idx], model.incompat[np.ix_(idx, idx)]


def partition_direct(model: PolymerModel, S=None) -> float:
    """Z(S); ``S`` is an iterable of polymer ids (default: all)."""
    idx, z, A = _restrict(model, S)
    if len(idx) > MAX_DIRECT:
        raise PolymerBudgetError(f"{len(idx)} polymers; direct summation capped at {MAX_DIRECT}")
    if not idx:
        return 1.0
    w = np.int64(1) << np.arange(len(idx), dtype=np.int64)
    nb = (A.astype(np.int64) * w).sum(axis=1)
    return float(_z_table(z, nb)[-1])


def partition_brute(model: PolymerModel, S=None) -> float:
    """Reference: explicit sum over all subsets that are pairwise compatible."""
    idx, z, A = _restrict(model, S)
    tot = 0.0
    for mask in range(1 << len(idx)):
        mem = [i for i in range(len(idx)) if mask >> i & 1]
        if all(not A[a, b] for k, a in enumerate(mem) for b in mem[k + 1:]):
            tot += float(np.prod(z[mem])) if mem else 1.0
    return tot


def _connected_masks(nb, n) -> np.ndarray:
    """Boolean over masks: the induced incompatibility graph is connected."""
    ok = np.zeros(1 << n, bool)
    for mask in range(1, 1 << n):
        low = mask & -mask
        seen = low
        frontier = low
        while frontier:
            i = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = int(nb[i]) & mask & ~seen
            seen |= new
            frontier |= new
        ok[mask] = seen == mask
    return ok


def _mobius(f: np.ndarray, n: int) -> np.ndarray:
    """g(S) = sum_{S' subset S} (-1)^{|S|-|S'|} f(S')."""
    g = f.copy()
    for i in range(n):
        v = g.reshape(-1, 2, 1 << i)
        v[:, 1, :] -= v[:, 0, :]
    return g


@dataclass
class ClusterWeights:
    ids: list                   # polymer ids, bit i of a mask = ids[i]
    theta: dict                 # cluster mask -> theta
    log_z: float
    theta_all: np.ndarray = field(repr=False, default=None)   # every mask
    connected: np.ndarray = field(repr=False, default=None)

    def members(self, mask: int) -> list:
        return [self.ids[i] for i in range(len(self.ids)) if mask >> i & 1]

    @property
    def total(self) -> float:
        return float(sum(self.theta.values()))

    def max_split_theta(self) -> float:
        """Largest |theta| over nonempty masks that split into compatible halves."""
        bad = ~self.connected
        bad[0] = False
        return float(np.abs(self.theta_all[bad]).max()) if bad.any() else 0.0


def cluster_logZ(model: PolymerModel, S=None) -> ClusterWeights:
    """theta(S') = sum_{S'' subset S'} (-1)^{|S'|-|S''|} log Z(S'') for every
    polymer cluster S' of S, and log Z(S) = sum of those theta."""
    idx, z, A = _restrict(model, S)
    n = len(idx)
    if n > MAX_THETA:
        raise PolymerBudgetError(f"{n} polymers; cluster weights capped at {MAX_THETA}")
    w = np.int64(1) << np.arange(n, dtype=np.int64)
    nb = (A.astype(np.int64) * w).sum(axis=1)
    Z = _z_table(z, nb)
    assert np.all(Z > 0), "nonpositive partition function"
    th = _mobius(np.log(Z), n)
    conn = _connected_masks(nb, n)
    theta = {int(m): float(th[m]) for m in np.flatnonzero(conn)}
    return ClusterWeights(idx, theta, float(np.log(Z[-1])), th, conn)


# --- Kotecky-Preiss --------------------------------------------------------------

@dataclass
class KPReport:
    passed: bool
    sums: np.ndarray
    targets: np.ndarray
    margin: float               # min over polymers of target - sum

    @property
    def margins(self) -> np.ndarray:
        return self.targets - self.sums


def kp_check(model: PolymerModel, a=None, ell=None, c8: float = 0.0) -> KPReport:
    """For every s: sum_{s' incompatible with s} exp(a(s') + (c8/2) ell(s')) |z(s')| <= a(s).

    ``a`` defaults to the polymer sizes; ``ell`` is an optional per-polymer
    diameter (tilt), used with weight c8/2.
    """
    a = model.sizes.astype(float) if a is None else np.asarray(a, float)
    if np.any(a <= 0):
        raise ValueError("KP weights must be positive")
    expo = a.copy()
    if ell is not None:
        expo = expo + 0.5 * c8 * np.asarray(ell, float)
    v = np.exp(expo) * np.abs(model.activities)
    sums = model.incompat.astype(float) @ v
    marg = a - sums
    return KPReport(bool(np.all(marg >= 0)), sums, a, float(marg.min()) if marg.size else np.inf)


def p0_threshold(q: float, c3: float, c8: float, corrected: bool = False) -> float:
    """p_0 = 1 / (1 + e^{c8}/(q c3) * c8/(2 + c8)).

    ``corrected=True`` uses e^{-c8}, which is what solving
    c3 e^{c8} (1-p) q / p <= c8 / (2 + c8) for p actually gives.
    """
    if q <= 0 or c3 <= 0 or c8 <= 0:
        raise ValueError("q, c3 and c8 must be positive")
    e = np.exp(-c8 if corrected else c8)
    return float(1.0 / (1.0 + e / (q * c3) * c8 / (2.0 + c8)))


# --- plaquette polymers --------------------------------------------------------------

def anchor_plaquette(d: int) -> Plaquette:
    return Plaquette(Edge((0,) * d, 0))


def enumerate_plaquette_polymers(anchor: Plaquette, max_size: int, spec: LatticeSpec | None = None):
    """Yield every connected plaquette set through ``anchor`` with at most
    ``max_size`` plaquettes, each exactly once (Redelmeier).

    With ``spec`` only plaquettes dual to box edges are used.
    """
    if max_size > MAX_PLAQ_SIZE:
        raise PolymerBudgetError(f"max_size {max_size} > {MAX_PLAQ_SIZE}")
    if max_size < 1:
        return
    if spec is not None:
        from .lattice import edges_of_box
        allowed = {Plaquette(e) for e in edges_of_box(spec)}
        ok = allowed.__contains__
    else:
        ok = lambda p: True   # noqa: E731
    cur = []
    seen = {anchor}

    def rec(untried):
        untried = list(untried)
        while untried:
            p = untried.pop()
            cur.append(p)
            yield frozenset(cur)
            if len(cur) < max_size:
                new = [r for r in plaquette_neighbours(p) if r not in seen and ok(r)]
                seen.update(new)
                yield from rec(untried + new)
                seen.difference_update(new)
            cur.pop()

    yield from rec([anchor])


def _local_graph(d: int, depth: int):
    a = anchor_plaquette(d)
    idx = {a: 0}
    order = [a]
    frontier = [a]
    for _ in range(depth):
        nxt = []
        for p in frontier:
            for r in plaquette_neighbours(p):
                if r not in idx:
                    idx[r] = len(order)
                    order.append(r)
                    nxt.append(r)
        frontier = nxt
    indptr, ind = [0], []
    for p in order:
        ind.extend(idx[r] for r in plaquette_neighbours(p) if r in idx)
        indptr.append(len(ind))
    return np.asarray(indptr, np.int64), np.asarray(ind, np.int64)


def count_polymers(d: int, kmax: int) -> np.ndarray:
    """Number of plaquette polymers through a fixed plaquette, by size 0..kmax."""
    ip, ix = _local_graph(d, max(kmax - 1, 0))
    return kernels.count_connected_sets(ip, ix, 0, kmax)


@lru_cache(maxsize=None)
def frozen_counts() -> dict:
    """Counts frozen from ``count_polymers`` (d -> list, index = size)."""
    txt = resources.files("ozlab").joinpath("data/polymer_counts.json").read_text()
    return {int(k): v for k, v in json.loads(txt)["counts"].items()}


def polymer_counts(d: int, kmax: int) -> np.ndarray:
    fc = frozen_counts().get(d)
    if fc is not None and len(fc) > kmax:
        return np.asarray(fc[: kmax + 1], np.int64)
    return count_polymers(d, kmax)


def estimate_c3(counts, n_fit: int = 4) -> float:
    """Growth constant by ratio extrapolation: fit a_k / a_{k-1} = c3 + b / k on
    the last ``n_fit`` ratios and return the intercept."""
    a = np.asarray(counts, float)[1:]
    k = np.arange(2, a.size + 1)
    r = a[1:] / a[:-1]
    k, r = k[-n_fit:], r[-n_fit:]
    X = np.column_stack([np.ones_like(r), 1.0 / k])
    coef, *_ = np.linalg.lstsq(X, r, rcond=None)
    return float(coef[0])


def norm_bound(k: int, d: int, kind: str = "isoperimetric") -> int:
    """Upper bound on the wired norm of a size-k plaquette polymer.

    "size": the crude |s|.  "isoperimetric": every finite component of the
    lattice minus the polymer's edges has at least 2d boundary edges, all
    removed, and an edge borders at most two such components, so the norm is
    0 below 2d and at most floor(k/d) otherwise.
    """
    if kind == "size":
        return k
    if kind == "isoperimetric":
        return 0 if k < 2 * d else k // d
    raise ValueError(f"unknown norm bound {kind!r}")


@dataclass
class LatticeKPReport:
    passed: bool
    c3: float
    alpha: float                # KP weight a(s) = alpha |s|  (alpha = c8 / 2)
    margin: float               # alpha - sum per unit size at the best alpha
    sums: np.ndarray            # per-unit-size KP sum on the alpha grid
    alphas: np.ndarray
    norm: str
    max_size: int

    @property
    def c8(self) -> float:
        return 2.0 * self.alpha


def lattice_kp_check(params: RCParams, d: int = 3, max_size: int = 8, c3: float | None = None,
                     norm: str = "isoperimetric", tilt: bool = False,
                     alphas=None) -> LatticeKPReport:
    """KP for the truncated plaquette instance with a(s) = alpha |s|.

    The number of polymers of size k incompatible with s is bounded by
    |s| c3^k and the activity by ((1-p)/p)^k q^{norm_bound(k)}, so the KP sum
    per unit size is  sum_{k<=max_size} c3^k e^{alpha k (1+tilt)} ((1-p)/p)^k q^{b(k)}
    (with ``tilt`` the diameter is bounded by the size).  The check passes
    when this is <= alpha for some alpha on the grid; the reported margin is
    the best alpha - sum.
    """
    if c3 is None:
        c3 = estimate_c3(polymer_counts(d, max_size))
    if alphas is None:
        alphas = np.linspace(0.01, 3.0, 300)
    alphas = np.asarray(alphas, float)
    k = np.arange(1, max_size + 1)
    x = (1 - params.p) / params.p
    b = np.array([norm_bound(int(j), d, norm) for j in k])
    base = k * np.log(c3 * x) + b * np.log(params.q)
    fac = 2.0 if tilt else 1.0
    sums = np.exp(base[None, :] + fac * alphas[:, None] * k[None, :]).sum(axis=1)
    marg = alphas - sums
    i = int(np.argmax(marg))
    return LatticeKPReport(bool(marg[i] > 0), float(c3), float(alphas[i]), float(marg[i]),
                           sums, alphas, norm, max_size)


# --- activities --------------------------------------------------------------------

def _edges_of(polymer):
    return [p.edge if isinstance(p, Plaquette) else p for p in polymer]


def polymer_norm(polymer, norm: str = "wired", spec: LatticeSpec | None = None,
                 margin: int = 3) -> int:
    """||s|| = kappa(s) - 1 after deleting the polymer's primal edges.

    wired: in the polymer's bounding box grown by ``margin`` with the box
    boundary identified (finite proxy for Z^d).  free: in the box ``spec``.
    """
    edges = _edges_of(polymer)
    if not edges:
        return 0
    if norm == "wired":
        pts = np.array([e.lo for e in edges] + [e.hi for e in edges])
        lo = pts.min(0) - margin
        shape = tuple(int(s) for s in pts.max(0) - lo + 1 + margin)
        box = LatticeSpec(len(lo), shape)
        shift = [Edge(tuple(int(c) for c in np.asarray(e.lo) - lo), e.axis) for e in edges]
        bc = WIRED
    elif norm == "free":
        if spec is None:
            raise ValueError("free norm needs the box spec")
        box, shift, bc = spec, edges, FREE
    else:
        raise ValueError(f"unknown norm {norm!r}")
    from .lattice import edge_index
    ei = edge_index(box)
    cfg = np.ones(box.n_edges, bool)
    for e in shift:
        if e not in ei:
            raise ValueError(f"polymer edge {e} is not in the box")
        cfg[ei[e]] = False
    base = kappa(np.ones(box.n_edges, bool), box, bc)
    return kappa(cfg, box, bc) - base


def activity_psi(polymer, params: RCParams, norm: str = "wired", spec: LatticeSpec | None = None,
                 margin: int = 3) -> float:
    """((1-p)/p)^{|s|} q^{||s||}."""
    k = len(polymer)
    return float(((1 - params.p) / params.p) ** k
                 * params.q ** polymer_norm(polymer, norm, spec, margin))


def incompatible(s1, s2) -> bool:
    """Plaquette polymers are incompatible when they share or touch a plaquette."""
    a, b = set(s1), set(s2)
    if a & b:
        return True
    return any(r in b for p in a for r in plaquette_neighbours(p))


def plaquette_model(polymers, params: RCParams, norm: str = "wired",
                    spec: LatticeSpec | None = None) -> PolymerModel:
    polymers = [frozenset(s) for s in polymers]
    n = len(polymers)
    A = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = A[j, i] = incompatible(polymers[i], polymers[j])
    z = [activity_psi(s, params, norm, spec) for s in polymers]
    labels = [sorted((p.edge.lo, p.edge.axis) for p in s) for s in polymers]
    return PolymerModel([len(s) for s in polymers], z, A, labels)
