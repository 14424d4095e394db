"""Slab renormalization of a dual surface: crossings, good/bad slabs,
N-blocks / N-sets, correct points and the m^+/- , r^+/- bookkeeping.

Slabs.  With y_i = floor(i N x^) for i <= t_N = floor(|x|/N) - 1 and
y_{t_N+1} = x, slab i is the region between the hyperplanes orthogonal to
t through y_i and y_{i+1}.  Levels are <t^, .>.  A plaquette belongs to
slab i when its centre level lies in [l_i, l_{i+1}) (the last slab is
closed); plaquettes behind 0 or beyond x belong to no slab.

Crossings.  Plaquettes of S_i are joined when they share a (d-2)-cell;
each plaquette is also joined to the slab-piece of the filled cluster that
contains its inner endpoint (pieces = components of the filled vertex set
inside the closed slab).  A component of that graph is a crossing when one
of its pieces reaches both bounding hyperplanes.  The slab is good when
the graph is a single component, that component is a crossing and
|S_i| < 2 phi_t(floor(N x^)).  Joining through the pieces makes the two
sides of a d=2 crossing (two disjoint dual paths) one crossing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.linalg import null_space

from ..lattice import Edge, _unit, in_cone_many, neighbours, plaquette_neighbours
from .clusters import Cluster, DualSurface, connected_parts
from .minimal import phi_t_oracle

TOL = 1e-9


def slab_levels(t, N: int, x) -> np.ndarray:
    """Levels <t^, y_i> for i = 0..t_N+1 (the last one is <t^, x>)."""
    if N < 2:
        raise ValueError("slab width N must be >= 2")
    th = _unit(t)
    x = np.asarray(x, float)
    nx = float(np.linalg.norm(x))
    tN = int(np.floor(nx / N + TOL)) - 1
    if tN < 1:
        raise ValueError(f"degenerate slab count t_N = {tN} (need |x| >= 2N)")
    xh = x / nx
    ys = [np.floor(i * N * xh + TOL) for i in range(tN + 1)] + [x]
    lv = np.array([float(th @ y) for y in ys])
    if np.any(np.diff(lv) <= TOL):
        raise ValueError("t is not transverse enough to x: slab levels do not increase")
    return lv


def _slab_of(level, levels):
    """Slab index of a level, or -1 outside [l_0, l_last]."""
    if level < levels[0] - TOL or level > levels[-1] + TOL:
        return -1
    i = int(np.searchsorted(levels, level + TOL, side="right")) - 1
    return min(i, len(levels) - 2)


def default_c_plus(d: int) -> float:
    """Empirical c_+ with phi(x) <= c_+ |x|: the largest ratio phi(x)/|x| found by
    the oracle is attained at x = e1, phi(e1) = 2(2d - 1)."""
    return 2.0 * (2 * d - 1)


@dataclass
class SlabReport:
    t: tuple
    N: int
    x: tuple
    levels: np.ndarray
    sizes: list                  # |S_i^t|
    n_crossings: list
    n_components: list           # components of S_i (joined through cluster pieces)
    good: list
    phi_ref: int
    delta: float | None = None
    M: float | None = None
    eps: float | None = None
    plaquettes: list = field(default_factory=list, repr=False)   # per slab
    m_plus: list = field(default_factory=list)
    r_plus: list = field(default_factory=list)
    m_minus: list = field(default_factory=list)
    r_minus: list = field(default_factory=list)
    correct: list = field(default_factory=list)

    @property
    def t_N(self) -> int:
        return len(self.sizes) - 1

    @property
    def g_N(self) -> int:
        return int(sum(self.good))

    @property
    def n_bad(self) -> int:
        return len(self.good) - self.g_N

    @property
    def good_slabs(self) -> list:
        return [i for i, g in enumerate(self.good) if g]

    @property
    def c_N(self) -> int:
        return len(set(self.m_plus) & set(self.m_minus))

    def bad_bound(self, delta: float | None = None) -> float:
        """2 delta |x| / N."""
        delta = self.delta if delta is None else delta
        return 2.0 * delta * float(np.linalg.norm(self.x)) / self.N


def _reference_crossing(t, N, x):
    x = np.asarray(x, float)
    yN = tuple(int(c) for c in np.floor(N * x / np.linalg.norm(x) + TOL))
    return phi_t_oracle(yN, t)


def _classify_one(plaqs, filled, th, lo, hi):
    """(n_components, n_crossings) of one slab."""
    if not plaqs:
        return 0, 0
    inside = [v for v in filled if lo - TOL <= float(th @ np.asarray(v, float)) <= hi + TOL]
    pieces = connected_parts(inside, _nn_edges(inside))
    piece_of = {}
    spans = []
    for k, P in enumerate(pieces):
        for v in P:
            piece_of[v] = k
        low = high = False
        for v in P:
            for w in (v, *neighbours(v)):
                if w is not v and w not in filled:
                    continue
                lv = float(th @ np.asarray(w, float))
                low |= lv <= lo + TOL
                high |= lv >= hi - TOL
        spans.append(low and high)
    # union-find over plaquettes and pieces
    nodes = list(plaqs) + [("piece", k) for k in range(len(pieces))]
    parent = {u: u for u in nodes}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    pset = set(plaqs)
    for p in plaqs:
        for q in plaquette_neighbours(p):
            if q in pset:
                union(p, q)
        e = p.edge
        v = e.lo if e.lo in filled else e.hi
        if v in piece_of:
            union(p, ("piece", piece_of[v]))
    # only components that contain a plaquette count
    comps = {find(p) for p in plaqs}
    crossing_roots = {find(("piece", k)) for k, s in enumerate(spans) if s}
    return len(comps), len(comps & crossing_roots)


def _nn_edges(vs):
    s = set(vs)
    out = []
    for v in s:
        for k in range(len(v)):
            w = list(v)
            w[k] += 1
            if tuple(w) in s:
                out.append(Edge(v, k))
    return out


def classify_slabs(surface: DualSurface, t, N: int, x, phi_ref: int | None = None,
                   delta: float | None = None, M: float | None = None,
                   c_plus: float | None = None, cluster: Cluster | None = None,
                   eps: float | None = None, hull: str = "cluster") -> SlabReport:
    """Good/bad classification of the slabs of ``surface`` between 0 and x.

    ``phi_ref`` is the minimal crossing size phi_t(floor(N x^)); by default it
    comes from the exhaustive oracle (axis-aligned t only).  When ``delta`` is
    given the m/r sequences are computed with ``M`` (default
    4 (1 + delta) c_+).  When ``cluster`` and ``eps`` are given the correct
    points are filled in as well.
    """
    if not surface.filled:
        raise ValueError("surface must carry its filled vertex set (use DualSurface.from_vertices)")
    th = _unit(t)
    levels = slab_levels(th, N, x)
    n_slabs = len(levels) - 1
    if phi_ref is None:
        phi_ref = _reference_crossing(th, N, x)
    per = [[] for _ in range(n_slabs)]
    for p in surface.plaquettes:
        lv = 0.5 * float(th @ np.asarray(p.center2(), float))
        i = _slab_of(lv, levels)
        if i >= 0:
            per[i].append(p)
    sizes, ncomp, ncross, good = [], [], [], []
    filled = set(surface.filled)
    for i in range(n_slabs):
        c, k = _classify_one(per[i], filled, th, levels[i], levels[i + 1])
        sizes.append(len(per[i]))
        ncomp.append(c)
        ncross.append(k)
        good.append(c == 1 and k == 1 and len(per[i]) < 2 * phi_ref)
    rep = SlabReport(tuple(th), int(N), tuple(int(c) for c in x), levels, sizes, ncross, ncomp,
                     good, int(phi_ref), delta, M, eps, per)
    if delta is not None:
        if M is None:
            cp = default_c_plus(th.size) if c_plus is None else c_plus
            M = 4.0 * (1.0 + delta) * cp
        rep.M = M
        rep.m_plus, rep.r_plus, rep.m_minus, rep.r_minus = m_r_sequences(sizes, good, N, M)
    if cluster is not None and eps is not None:
        rep.correct = correct_points(rep, cluster, th, eps, hull=hull)
    return rep


def m_r_sequences(sizes, good, N: int, M: float):
    """The forward (m^+, r^+) and backward (m^-, r^-) sequences used to
    count bad slabs.

    r is the first k (scanning away from m) where the accumulated surface
    over slabs m..k exceeds M N (|k - m| + 1), i.e. where the average per
    slab first exceeds M N; the next m is the first good slab past r.  When
    the average never exceeds M N, r = m and the next m is simply the next
    good slab.  Slab t_N + 1 (beyond x) has no surface.
    """
    sizes = list(sizes) + [0]
    T = len(sizes) - 1            # = t_N + 1
    goods = [i for i, g in enumerate(good) if g]
    mp, rp, mm, rm = [], [], [], []
    if not goods:
        return mp, rp, mm, rm
    m = goods[0]
    while m is not None:
        mp.append(m)
        acc, r = 0, None
        for k in range(m, T + 1):
            acc += sizes[k]
            if acc > M * N * (k - m + 1):
                r = k
                break
        r = m if r is None else r
        rp.append(r)
        m = next((g for g in goods if g > r), None)
    m = goods[-1]
    while m is not None:
        mm.append(m)
        acc, r = 0, None
        for k in range(m, -1, -1):
            acc += sizes[k]
            if acc > M * N * (m - k + 1):
                r = k
                break
        r = m if r is None else r
        rm.append(r)
        m = next((g for g in reversed(goods) if g < r), None)
    return mp, rp, mm[::-1], rm[::-1]


# --- N-blocks, N-sets and correct points --------------------------------------

def transverse_basis(t) -> np.ndarray:
    """Orthonormal basis v_2..v_d of the hyperplane orthogonal to t (rows).

    For axis-aligned t this is the remaining coordinate axes.
    """
    th = _unit(t)
    d = th.size
    nz = np.flatnonzero(np.abs(th) > 1e-12)
    if nz.size == 1:
        return np.eye(d)[[j for j in range(d) if j != nz[0]]]
    return null_space(th[None, :]).T


def n_block_corners(report: SlabReport, i: int) -> np.ndarray:
    """Corners of the N-blocks Q_N(i, n) met by the plaquettes of slab i
    (a plaquette is assigned to the block holding its centre)."""
    th = np.asarray(report.t, float)
    V = transverse_basis(th)
    N = report.N
    lo, hi = report.levels[i], report.levels[i + 1]
    blocks = set()
    for p in report.plaquettes[i]:
        c = 0.5 * np.asarray(p.center2(), float)
        blocks.add(tuple(int(b) for b in np.floor(V @ c / N + TOL)))
    out = []
    for n in blocks:
        for lv, off in product((lo, hi), product((0, 1), repeat=len(n))):
            coeff = (np.asarray(n) + np.asarray(off)) * N
            out.append(lv * th + coeff @ V)
    return np.asarray(out, float).reshape(-1, th.size)


def _slab_vertices(cluster, th, levels, i):
    lo, hi = levels[i], levels[i + 1]
    last = i == len(levels) - 2
    out = []
    for v in cluster.vertices:
        lv = float(th @ np.asarray(v, float))
        if lo - TOL <= lv and (lv < hi - TOL or (last and lv <= hi + TOL)):
            out.append(v)
    return out


def correct_points(report: SlabReport, cluster: Cluster, t, eps: float,
                   hull: str = "cluster") -> list:
    """(t, eps)-correct points of the good slabs, ordered by <t, .>.

    z in C_i (i good) is correct when everything of slabs j < i lies in
    z - C_eps(t) and everything of slabs j > i in z + C_eps(t).  With
    ``hull="blocks"`` "everything of slab j" is the N-set D_N(j) (convex hull
    of the N-blocks met by S_j, checked through the block corners); with
    ``hull="cluster"`` it is the convex hull of the cluster vertices C_j.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if hull not in ("cluster", "blocks"):
        raise ValueError("hull must be 'cluster' or 'blocks'")
    th = _unit(t)
    if not np.allclose(th, report.t):
        raise ValueError("report was computed for a different t")
    n_slabs = len(report.sizes)
    pts = []
    for i in range(n_slabs):
        if hull == "blocks":
            P = n_block_corners(report, i)
        else:
            vs = _slab_vertices(cluster, th, report.levels, i)
            P = np.asarray(vs, float).reshape(-1, th.size)
        pts.append(P)
    out = []
    for i in report.good_slabs:
        before = np.vstack([pts[j] for j in range(i)] + [np.zeros((0, th.size))])
        after = np.vstack([pts[j] for j in range(i + 1, n_slabs)] + [np.zeros((0, th.size))])
        for z in _slab_vertices(cluster, th, report.levels, i):
            zf = np.asarray(z, float)
            if before.size and not np.all(in_cone_many(zf - before, th, eps)):
                continue
            if after.size and not np.all(in_cone_many(after - zf, th, eps)):
                continue
            out.append(z)
    out.sort(key=lambda v: (float(th @ np.asarray(v, float)), v))
    return out


def surface_of(cluster: Cluster) -> DualSurface:
    return DualSurface.from_vertices(cluster.vertices)


__all__ = ["SlabReport", "classify_slabs", "correct_points", "m_r_sequences", "slab_levels",
           "transverse_basis", "n_block_corners", "default_c_plus", "surface_of"]
