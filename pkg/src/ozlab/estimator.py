"""Finite two-point connections, tau fits, equi-decay surfaces and their polar bodies.

g(x) = P(0 <-> x, common cluster finite).  In a finite box the "finite"
part is the cutoff rule: by default the common cluster must avoid the box's
boundary vertices.  For enumerable boxes the rule ``"none"`` (every cluster
of a free-bc box is finite) is also available.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from . import __version__, kernels
from .lattice import LatticeSpec, boundary_vertices, neighbours
from .rc_measure import (FREE, BoundaryCondition, EnumerationBudgetError, RCParams, aux_graph,
                         probabilities)
from .sampler import advance, batch_means, init_state

CUTOFFS = ("boundary", "none")
MAX_LABEL_EDGES = 20        # label table is 2^m x |V| int16


# --- connectivity tables -----------------------------------------------------------

@dataclass
class ConnectivityRow:
    x: tuple
    samples: int
    hits: int
    estimate: float
    stderr: float
    box: tuple
    cutoff: str


@dataclass
class ConnectivityTable:
    rows: list = field(default_factory=list)

    def add(self, row: ConnectivityRow):
        if row.hits > row.samples:
            raise ValueError("hits exceed samples")
        self.rows.append(row)

    def along(self, direction):
        """(radius, estimate, stderr) for rows on the ray through ``direction``."""
        u = np.asarray(direction, float)
        u = u / np.linalg.norm(u)
        out = []
        for r in self.rows:
            x = np.asarray(r.x, float)
            nx = np.linalg.norm(x)
            if nx > 0 and np.allclose(x / nx, u):
                out.append((nx, r.estimate, r.stderr))
        out.sort()
        return np.array(out).reshape(-1, 3)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# ozlab {__version__} estimator; estimate = probability (dimensionless), "
                  "x in lattice units\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "samples", "hits", "estimate", "stderr", "box", "cutoff"])
        for r in self.rows:
            w.writerow([" ".join(map(str, r.x)), r.samples, r.hits, repr(r.estimate),
                        repr(r.stderr), "x".join(map(str, r.box)), r.cutoff])
        return buf.getvalue()


def default_box(d: int, x, margin: int = 8) -> LatticeSpec:
    """Centred cube reaching ``margin`` lattice units beyond |x|_inf."""
    r = int(np.max(np.abs(x))) + margin
    return LatticeSpec(d, 2 * r + 1, centered=True)


def _hit(labels, i0, ix, bnd, cutoff) -> bool:
    lab = labels[i0]
    if labels[ix] != lab:
        return False
    return cutoff == "none" or not np.any(labels[bnd] == lab)


def finite_two_point_mc(x, spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE,
                        n_samples: int = 10_000, seed=0, thinning: int = 1, burn_in=None,
                        margin: int = 2, cutoff: str = "boundary") -> ConnectivityRow:
    """MC frequency of {0 <-> x, common cluster avoids the box boundary}."""
    x = tuple(int(c) for c in x)
    if cutoff not in CUTOFFS:
        raise ValueError(f"cutoff must be one of {CUTOFFS}")
    if len(x) != spec.d:
        raise ValueError("x has the wrong dimension")
    need = 2 * max(abs(c) for c in x) + margin
    if min(spec.shape) < need or not spec.contains((0,) * spec.d) or not spec.contains(x):
        raise ValueError(f"box {spec.shape} too small for x={x} (side >= {need} needed)")
    st = init_state(spec, params, bc, seed)
    if burn_in is None:
        burn_in = 0 if st.algorithm == "bernoulli" else 100
    if burn_in:
        advance(st, spec, params, bc, burn_in)
    i0, ix = spec.index((0,) * spec.d), spec.index(x)
    bnd = np.asarray(boundary_vertices(spec))
    hits = np.empty(n_samples, np.int8)
    for k in range(n_samples):
        advance(st, spec, params, bc, thinning)
        hits[k] = _hit(st.labels, i0, ix, bnd, cutoff)
    est = batch_means(hits)
    return ConnectivityRow(x, n_samples, int(hits.sum()), est.estimate, est.stderr,
                           spec.shape, cutoff)


@lru_cache(maxsize=16)
def _all_labels(spec: LatticeSpec, bc: BoundaryCondition) -> np.ndarray:
    g = aux_graph(spec, bc)
    m = g.eu.size
    if m > MAX_LABEL_EDGES:
        raise EnumerationBudgetError(f"{m} edges; labelled enumeration is capped at "
                                     f"{MAX_LABEL_EDGES}")
    out = np.empty((1 << m, g.n), np.int16)
    bits = np.arange(m)
    for c in range(1 << m):
        out[c] = kernels.label(g.n, g.eu, g.ev, ((c >> bits) & 1).astype(np.bool_), g.fu, g.fv)
    out.setflags(write=False)
    return out


def exact_two_point(a, b, spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE,
                    cutoff: str = "boundary") -> float:
    """Enumerated P(a <-> b, cutoff rule) on a small box."""
    if cutoff not in CUTOFFS:
        raise ValueError(f"cutoff must be one of {CUTOFFS}")
    pr = probabilities(spec, params, bc)
    lab = _all_labels(spec, bc)
    ia, ib = spec.index(a), spec.index(b)
    ev = lab[:, ia] == lab[:, ib]
    if cutoff == "boundary":
        bnd = np.asarray(boundary_vertices(spec))
        ev &= ~np.any(lab[:, bnd] == lab[:, ia][:, None], axis=1)
    return float(pr[ev].sum())


def cutoff_consistency(x, spec: LatticeSpec, params: RCParams, bc=FREE, n_samples=10_000,
                       seed=0, **kw) -> dict:
    """Compare the estimate in ``spec`` and in the box of doubled side (reported only)."""
    big = LatticeSpec(spec.d, tuple(2 * s + 1 for s in spec.shape), centered=True)
    r1 = finite_two_point_mc(x, spec, params, bc, n_samples, seed, **kw)
    r2 = finite_two_point_mc(x, big, params, bc, n_samples, seed, **kw)
    err = float(np.hypot(r1.stderr, r2.stderr))
    return {"small": r1, "large": r2, "diff": r2.estimate - r1.estimate, "err": err,
            "consistent": abs(r2.estimate - r1.estimate) <= max(err, 1e-300)}


# --- exact low-density series (q = 1) ----------------------------------------------

def _site_animals(d: int, size: int):
    """Connected vertex sets containing the origin with at most ``size`` sites."""
    origin = (0,) * d

    def key(v):
        return v

    def rec(cur, untried, seen):
        yield frozenset(cur)
        if len(cur) == size:
            return
        untried = list(untried)
        while untried:
            v = untried.pop()
            new = [w for w in neighbours(v) if w not in seen and key(w) > key(origin)]
            cur.append(v)
            yield from rec(cur, untried + new, seen | set(new))
            cur.pop()

    first = [w for w in neighbours(origin) if key(w) > key(origin)]
    # Redelmeier: sites below the origin in lexicographic order are excluded,
    # so every set is produced once with the origin as its minimum; translate
    # afterwards to get all sets through the origin.
    seen = set(first) | {origin}
    for s in rec([origin], first, seen):
        yield s


def _connect_prob(V, p) -> float:
    """P(open edges inside V connect all of V) for Bernoulli(p) bonds."""
    idx = {v: i for i, v in enumerate(V)}
    edges = [(idx[v], idx[w]) for v in V for w in neighbours(v) if w in idx and idx[w] > idx[v]]
    n, m = len(V), len(edges)
    if n == 1:
        return 1.0
    tot = 0.0
    for mask in range(1 << m):
        par = list(range(n))

        def find(a):
            while par[a] != a:
                par[a] = par[par[a]]
                a = par[a]
            return a

        k = n
        for j in range(m):
            if mask >> j & 1:
                a, b = find(edges[j][0]), find(edges[j][1])
                if a != b:
                    par[max(a, b)] = min(a, b)
                    k -= 1
        if k == 1:
            o = bin(mask).count("1")
            tot += p ** o * (1 - p) ** (m - o)
    return tot


def bernoulli_finite_series(x, p: float, max_sites: int) -> float:
    """Sum over finite clusters C with 0, x in C and |C| <= max_sites of P(C(0) = C), q = 1.

    P(C(0) = V) = P(V internally connected) (1-p)^{|edge boundary of V|}.
    A lower bound for g(x) in infinite volume, converging as max_sites grows
    when p is close to 1.
    """
    x = tuple(int(c) for c in x)
    d = len(x)
    tot = 0.0
    for A in _site_animals(d, max_sites):
        A = sorted(A)
        for a in A:
            # translate so that a sits at the origin; sets through 0 each once
            V = {tuple(v[i] - a[i] for i in range(d)) for v in A}
            if x not in V:
                continue
            bd = sum(1 for v in V for w in neighbours(v) if w not in V)
            tot += _connect_prob(V, p) * (1 - p) ** bd
    return tot


# --- tau fits ----------------------------------------------------------------------

@dataclass
class TauEstimate:
    direction: np.ndarray
    tau: float
    err: float
    residuals: np.ndarray
    radii: np.ndarray
    excluded: np.ndarray
    oz: bool = False


def _slope(r, y):
    X = np.column_stack([np.ones_like(r), -r])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[1]), y - X @ coef


def tau_fit(direction, radii, g, oz: bool = False, d: int | None = None) -> TauEstimate:
    """-log g(r) = c + tau r (+ (d-1)/2 log r if ``oz``); jackknife error over radii."""
    u = np.asarray(direction, float)
    r = np.asarray(radii, float)
    g = np.asarray(g, float)
    if r.shape != g.shape:
        raise ValueError("radii and estimates differ in length")
    bad = ~(g > 0)
    if bad.all():
        raise ValueError("all estimates are zero")
    if bad.any():
        warnings.warn(f"excluding zero-hit radii {r[bad].tolist()}", stacklevel=2)
    rr, y = r[~bad], np.log(g[~bad])
    if rr.size < 4:
        raise ValueError(f"need >= 4 radii with nonzero estimates, got {rr.size}")
    if oz:
        d = u.size if d is None else d
        y = y + 0.5 * (d - 1) * np.log(rr)
    tau, res = _slope(rr, y)
    jk = np.array([_slope(np.delete(rr, i), np.delete(y, i))[0] for i in range(rr.size)])
    n = rr.size
    err = float(np.sqrt((n - 1) / n * np.sum((jk - jk.mean()) ** 2)))
    return TauEstimate(u / np.linalg.norm(u), tau, err, res, rr, r[bad], oz)


def tau_fit_table(table: ConnectivityTable, direction, oz=False) -> TauEstimate:
    a = table.along(direction)
    return tau_fit(direction, a[:, 0], a[:, 1], oz, len(direction))


# --- direction grids -------------------------------------------------------------------

def circle_grid(n: int) -> np.ndarray:
    th = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(th), np.sin(th)])


def icosphere(level: int = 2) -> np.ndarray:
    """Unit vectors of the icosahedron refined ``level`` times by edge midpoints."""
    g = (1 + 5 ** 0.5) / 2
    V = [(-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0), (0, -1, g), (0, 1, g),
         (0, -1, -g), (0, 1, -g), (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1)]
    V = [np.array(v, float) / np.linalg.norm(v) for v in V]
    F = ConvexHull(np.array(V)).simplices.tolist()
    for _ in range(level):
        cache = {}

        def mid(i, j):
            k = (min(i, j), max(i, j))
            if k not in cache:
                m = V[i] + V[j]
                V.append(m / np.linalg.norm(m))
                cache[k] = len(V) - 1
            return cache[k]

        newF = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            newF += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        F = newF
    return np.array(V)


def spherical_mesh(step_deg: float = 10.0):
    """Directions on a (theta, phi) mesh avoiding the poles; returns (dirs, shape, h)."""
    h = np.deg2rad(step_deg)
    nth = int(round(np.pi / h)) - 1
    nph = int(round(2 * np.pi / h))
    th = h * (1 + np.arange(nth))
    ph = h * np.arange(nph)
    T, P = np.meshgrid(th, ph, indexing="ij")
    dirs = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1)
    return dirs.reshape(-1, 3), (nth, nph), h


def direction_grid(d: int, n: int = 36, level: int = 2):
    return circle_grid(n) if d == 2 else icosphere(level)


# --- equi-decay surface and polar body -----------------------------------------------------

@dataclass
class EquiDecaySurface:
    directions: np.ndarray
    tau: np.ndarray
    err: np.ndarray
    radius: np.ndarray
    polar_vertices: np.ndarray
    mesh: tuple | None = None      # (shape, step) of a structured angle grid
    wulff_vertices: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def support(self, u) -> np.ndarray:
        """Support function of the polar body at the rows of ``u``."""
        return np.max(np.atleast_2d(u) @ self.polar_vertices.T, axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# ozlab {__version__} estimator; tau in inverse lattice units, "
                  "radius in lattice units\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"u{i + 1}" for i in range(self.d)] + ["tau", "err", "radius"])
        for u, t, e, r in zip(self.directions, self.tau, self.err, self.radius):
            w.writerow([repr(float(c)) for c in u] + [repr(float(t)), repr(float(e)),
                                                      repr(float(r))])
        return buf.getvalue()


def polar_body(directions, values) -> np.ndarray:
    """Vertices of {w : <w, u_i> <= values_i for all i}."""
    U = np.asarray(directions, float)
    b = np.asarray(values, float)
    d = U.shape[1]
    if U.shape[0] < 2 * d:
        raise ValueError(f"need >= {2 * d} directions, got {U.shape[0]}")
    if np.any(~(b > 0)):
        raise ValueError("support values must be positive")
    try:
        hull = ConvexHull(U)
    except QhullError as e:
        raise ValueError("degenerate direction grid (directions do not span)") from e
    if np.any(hull.equations[:, -1] > -1e-9):
        raise ValueError("directions do not surround the origin: polar body unbounded")
    hs = np.column_stack([U, -b])
    hi = HalfspaceIntersection(hs, np.zeros(d))
    V = hi.intersections
    # merge near-duplicate vertices produced by degenerate facets
    V = np.unique(np.round(V, 12), axis=0)
    return V


def equidecay_surface(directions, tau, err=None, mesh=None, phi_bar=None) -> EquiDecaySurface:
    U = np.asarray(directions, float)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    tau = np.asarray(tau, float)
    if np.any(~(tau > 0)):
        raise ValueError("nonpositive tau in the direction grid")
    err = np.zeros_like(tau) if err is None else np.asarray(err, float)
    V = polar_body(U, tau)
    W = None if phi_bar is None else polar_body(U, phi_bar)
    return EquiDecaySurface(U, tau, err, 1 / tau, V, mesh, W)


def surface_from_norm(norm, d: int = 3, step_deg: float = 10.0, err=None) -> EquiDecaySurface:
    """Surface of a synthetic norm sampled on the structured angle mesh."""
    if d == 2:
        n = int(round(360 / step_deg))
        U = circle_grid(n)
        mesh = ((n,), np.deg2rad(step_deg))
    else:
        U, shape, h = spherical_mesh(step_deg)
        mesh = (shape, h)
    return equidecay_surface(U, np.array([norm(u) for u in U]), err, mesh)


# --- convexity and curvature ---------------------------------------------------------------

@dataclass
class CurvatureReport:
    convex: bool
    violations: list            # (i, j, k, excess) with u_k ~ (u_i + u_j)/|.|
    gauss: np.ndarray           # Gaussian curvature at interior mesh points (curvature in d=2)
    kmin: np.ndarray            # smallest principal curvature
    kmin_err: np.ndarray
    min_eig: float
    min_eig_err: float
    points: np.ndarray          # directions of the interior points

    @property
    def positive(self) -> bool:
        return self.min_eig > 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# ozlab {__version__} estimator; curvature in inverse lattice units "
                  "(radius units)\n")
        w = csv.writer(buf, lineterminator="\n")
        d = self.points.shape[1]
        w.writerow([f"u{i + 1}" for i in range(d)] + ["gauss", "min_eigenvalue", "err"])
        for u, g, k, e in zip(self.points, self.gauss, self.kmin, self.kmin_err):
            w.writerow([repr(float(c)) for c in u] + [repr(float(g)), repr(float(k)),
                                                      repr(float(e))])
        return buf.getvalue()


def _convexity(s: EquiDecaySurface, z: float = 4.0, max_angle: float | None = None):
    U, tau, err = s.directions, s.tau, s.err
    G = U @ U.T
    if max_angle is None:
        nn = np.sort(G, axis=1)[:, -2]          # nearest-neighbour cosine
        max_angle = 4 * float(np.arccos(np.clip(nn.min(), -1, 1)))
    out = []
    I, J = np.nonzero(np.triu(G > np.cos(max_angle), 1))
    for i, j in zip(I, J):
        m = U[i] + U[j]
        nm = np.linalg.norm(m)
        c = U @ (m / nm)
        k = int(np.argmax(c))
        if c[k] < 1 - 1e-9 or k in (i, j):
            continue
        excess = tau[k] * nm - tau[i] - tau[j]
        tol = z * float(np.sqrt(err[k] ** 2 * nm ** 2 + err[i] ** 2 + err[j] ** 2)) + 1e-12
        if excess > tol:
            out.append((int(i), int(j), k, float(excess)))
    return out


def _d1(f, h, axis, order):
    if order == 2:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)
    return (-np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis) - 8 * np.roll(f, 1, axis)
            + np.roll(f, 2, axis)) / (12 * h)


def _d2(f, h, axis, order):
    if order == 2:
        return (np.roll(f, -1, axis) - 2 * f + np.roll(f, 1, axis)) / h ** 2
    return (-np.roll(f, -2, axis) + 16 * np.roll(f, -1, axis) - 30 * f + 16 * np.roll(f, 1, axis)
            - np.roll(f, 2, axis)) / (12 * h ** 2)


def _curv2(r, h, order):
    r1, r2 = _d1(r, h, 0, order), _d2(r, h, 0, order)
    k = (r ** 2 + 2 * r1 ** 2 - r * r2) / (r ** 2 + r1 ** 2) ** 1.5
    return k, k


def _curv3(r, shape, h, order):
    nth, nph = shape
    th = h * (1 + np.arange(nth))
    ph = h * np.arange(nph)
    T, P = np.meshgrid(th, ph, indexing="ij")
    R = r.reshape(shape)
    X = R[..., None] * np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1)
    Xt, Xp = _d1(X, h, 0, order), _d1(X, h, 1, order)
    Xtt, Xpp = _d2(X, h, 0, order), _d2(X, h, 1, order)
    Xtp = _d1(_d1(X, h, 0, order), h, 1, order)
    n = np.cross(Xt, Xp)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    n *= np.sign(np.sum(n * X, axis=-1, keepdims=True))       # outward
    E, F, G = (np.sum(a * b, -1) for a, b in ((Xt, Xt), (Xt, Xp), (Xp, Xp)))
    L, M, N = (-np.sum(a * n, -1) for a in (Xtt, Xtp, Xpp))
    K = (L * N - M * M) / (E * G - F * F)
    H = (E * N - 2 * F * M + G * L) / (2 * (E * G - F * F))
    kmin = H - np.sqrt(np.maximum(H * H - K, 0))
    sl = (slice(2, nth - 2), slice(None))
    return K[sl].ravel(), kmin[sl].ravel()


def _curvature(s: EquiDecaySurface, r, order):
    shape, h = s.mesh
    if s.d == 2:
        return _curv2(r, h, order)
    return _curv3(r, shape, h, order)


def convexity_curvature_check(surface: EquiDecaySurface, z: float = 4.0, n_resample: int = 20,
                              seed: int = 0) -> CurvatureReport:
    """Midpoint support-function test plus principal curvatures on the angle mesh.

    Error bars combine the 2nd- vs 4th-order stencil difference with the
    spread over ``n_resample`` redraws of tau within its error.
    """
    s = surface
    if s.directions.shape[0] < 12:
        raise ValueError("need >= 12 directions")
    if s.mesh is None:
        raise ValueError("curvature needs a structured angle mesh")
    viol = _convexity(s, z)
    K, kmin = _curvature(s, s.radius, 4)
    _, kmin2 = _curvature(s, s.radius, 2)
    var = (kmin - kmin2) ** 2
    if np.any(s.err > 0) and n_resample > 1:
        rng = np.random.default_rng(seed)
        draws = np.array([_curvature(s, 1 / (s.tau + s.err * rng.standard_normal(s.tau.size)),
                                     4)[1] for _ in range(n_resample)])
        var = var + draws.var(axis=0, ddof=1)
    kerr = np.sqrt(var)
    if s.d == 2:
        pts = s.directions
    else:
        nth, nph = s.mesh[0]
        pts = s.directions.reshape(nth, nph, 3)[2: nth - 2].reshape(-1, 3)
    i = int(np.argmin(kmin))
    return CurvatureReport(not viol, viol, K, kmin, kerr, float(kmin[i]), float(kerr[i]), pts)


def ellipsoid_gauss(axes, u) -> np.ndarray:
    """Gaussian curvature of the ellipsoid sum x_i^2/a_i^2 = 1 at the points on rays ``u``."""
    a = np.asarray(axes, float)
    u = np.atleast_2d(u)
    x = u / np.sqrt(np.sum(u ** 2 / a ** 2, axis=1, keepdims=True))
    return 1 / (np.prod(a) ** 2 * np.sum(x ** 2 / a ** 4, axis=1) ** 2)


# --- supermultiplicativity ----------------------------------------------------------------

@dataclass
class SupermultReport:
    x: tuple
    y: tuple
    g0y: float
    g0x: float
    gxy: float
    err: float
    exact: bool

    @property
    def slack(self) -> float:
        return self.g0y - self.g0x * self.gxy

    @property
    def holds(self) -> bool:
        return self.slack >= (-1e-12 if self.exact else -4 * self.err)


def supermultiplicativity_check(x, y, spec: LatticeSpec, params: RCParams,
                                bc: BoundaryCondition = FREE, cutoff: str = "none",
                                origin=None, n_samples: int = 20_000, seed: int = 0):
    """g(0,y) >= g(0,x) g(x,y), exact on enumerable boxes, by MC (4 sigma) otherwise."""
    o = tuple([0] * spec.d) if origin is None else tuple(origin)
    x, y = tuple(int(c) for c in x), tuple(int(c) for c in y)
    for v in (o, x, y):
        if not spec.contains(v):
            raise ValueError(f"{v} is outside the box")
    if spec.n_edges <= MAX_LABEL_EDGES:
        g = lambda a, b: exact_two_point(a, b, spec, params, bc, cutoff)  # noqa: E731
        return SupermultReport(x, y, g(o, y), g(o, x), g(x, y), 0.0, True)

    def gmc(a, b, s):
        shift = np.asarray(a)
        rel = tuple(int(c) for c in np.asarray(b) - shift)
        if any(c != 0 for c in shift):
            raise ValueError("MC mode measures from the origin; pass origin-based pairs")
        r = finite_two_point_mc(rel, spec, params, bc, n_samples, s, cutoff=cutoff, margin=0)
        return r.estimate, r.stderr

    if any(o) or any(x):
        raise ValueError("MC mode supports only x = origin (translation needs a bigger box)")
    a, ea = gmc(o, y, seed)
    b, eb = gmc(o, x, seed + 1)
    c, ec = gmc(x, y, seed + 2)
    err = float(np.sqrt(ea ** 2 + (b * ec) ** 2 + (c * eb) ** 2))
    return SupermultReport(x, y, a, b, c, err, False)


def random_pairs(spec: LatticeSpec, n: int, rng) -> list:
    V = [tuple(int(c) for c in v) for v in spec.coords(np.arange(spec.n_vertices))]
    return [(V[i], V[j]) for i, j in rng.integers(0, len(V), size=(n, 2))]


__all__ = [n for n in dir() if not n.startswith("_") and n not in ("annotations", "csv", "io",
                                                                    "warnings")]
