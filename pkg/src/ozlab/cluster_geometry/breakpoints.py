"""t-break points, t-bonds, cone points and the irreducible decomposition.

Notation: levels are <t, v>; ``u`` is the first coordinate axis maximizing
<t, e_k>.  For x, y in a cluster with <t,x> <= <t,y>, C^t_{x,y} is the
component of x in the cluster restricted to the closed strip between the
hyperplanes through x and y.

A vertex b of C^t_{x,y} is a t-break point when
  1. <t, x+u> <= <t, b> <= <t, y-u>, and
  2. the only vertices of C^t_{x,y} with level in [<t,b-u>, <t,b+u>] are
     b-u, b, b+u.
It is a (t, eps)-cone point when, in addition, C^t_{b,y} lies in
b + C_eps(t) and C^t_{x,b} lies in b - C_eps(t).
"""
from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

from ..lattice import Edge, in_cone_many, principal_axis
from .clusters import Cluster, connected_parts

TOL = 1e-9


def _lvl(t, v) -> float:
    return float(np.dot(t, v))


def _axis_step(v, k, s=1):
    w = list(v)
    w[k] += s
    return tuple(w)


def strip_component(cluster: Cluster, t, x, y) -> Cluster:
    """C^t_{x,y}; raises if x and y are not connected inside the strip."""
    t = np.asarray(t, float)
    x, y = tuple(x), tuple(y)
    a, b = _lvl(t, x), _lvl(t, y)
    if a > b + TOL:
        raise ValueError("need <t,x> <= <t,y>")
    if x not in cluster.vertices or y not in cluster.vertices:
        raise ValueError("x and y must belong to the cluster")
    inside = {v for v in cluster.vertices if a - TOL <= _lvl(t, v) <= b + TOL}
    es = [e for e in cluster.edges if e.lo in inside and e.hi in inside]
    adj = {v: [] for v in inside}
    for e in es:
        adj[e.lo].append(e.hi)
        adj[e.hi].append(e.lo)
    seen = {x}
    stack = [x]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if y not in seen:
        raise ValueError("x and y are not connected inside the strip")
    return Cluster(frozenset(seen), frozenset(e for e in es if e.lo in seen), cluster.finite)


@dataclass
class BreakPointData:
    t: tuple
    u: int                                   # axis index of u
    points: list                             # B^t ordered by <t, .>
    bonds: list                              # E^t, edges {b, b+u}
    eps: float | None = None
    cone_points: list | None = None          # K^t_eps
    cone_bonds: list | None = None           # t-bonds with both ends in K^t_eps


def break_points(cluster: Cluster, t, x, y) -> BreakPointData:
    t = np.asarray(t, float)
    k = principal_axis(t)
    C = strip_component(cluster, t, x, y)
    step = float(t[k])
    lo, hi = _lvl(t, x) + step, _lvl(t, y) - step
    verts = sorted(C.vertices, key=lambda v: _lvl(t, v))
    levels = [_lvl(t, v) for v in verts]
    pts = []
    for b, lb in zip(verts, levels):
        if not (lo - TOL <= lb <= hi + TOL):
            continue
        bm, bp = _axis_step(b, k, -1), _axis_step(b, k, 1)
        if bm not in C.vertices or bp not in C.vertices:
            continue
        i0 = bisect_left(levels, lb - step - TOL)
        i1 = bisect_right(levels, lb + step + TOL)
        if i1 - i0 == 3:
            pts.append(b)
    pts.sort(key=lambda v: _lvl(t, v))
    pset = set(pts)
    bonds = [Edge(b, k) for b in pts if _axis_step(b, k) in pset]
    return BreakPointData(tuple(t), k, pts, bonds)


def _inside_cone(vertices, apex, t, eps, sign):
    X = np.asarray(list(vertices), float)
    return bool(np.all(in_cone_many(sign * (X - np.asarray(apex, float)), t, eps)))


def cone_points(cluster: Cluster, t, eps, x, y, data: BreakPointData | None = None) -> list:
    """K^t_eps(x, y), ordered by <t, .>."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if data is None:
        data = break_points(cluster, t, x, y)
    C = strip_component(cluster, t, x, y)
    out = []
    for b in data.points:
        fwd = strip_component(C, t, b, y)
        if not _inside_cone(fwd.vertices, b, t, eps, +1):
            continue
        bwd = strip_component(C, t, x, b)
        if _inside_cone(bwd.vertices, b, t, eps, -1):
            out.append(b)
    return out


def cone_data(cluster: Cluster, t, eps, x, y) -> BreakPointData:
    data = break_points(cluster, t, x, y)
    K = cone_points(cluster, t, eps, x, y, data)
    ks = set(K)
    data.eps = eps
    data.cone_points = K
    data.cone_bonds = [e for e in data.bonds if e.lo in ks and e.hi in ks]
    return data


@dataclass
class IrreducibleDecomposition:
    backward: Cluster
    pieces: list
    forward: Cluster
    displacements: list          # X(s_i) = b_{i+1} - b_i
    cone_bonds: list
    eps: float
    t: tuple
    degenerate: bool = False
    dropped_bonds: list = field(default_factory=list)   # cone bonds whose cut did not separate

    @property
    def n(self) -> int:
        return len(self.pieces)

    def all_pieces(self) -> list:
        return [self.backward, *self.pieces, self.forward]

    def reconstruct(self) -> tuple[frozenset, frozenset]:
        vs, es = set(), set()
        for p in self.all_pieces():
            vs |= p.vertices
            es |= p.edges
        return frozenset(vs), frozenset(es)

    def is_partition(self) -> bool:
        ps = self.all_pieces()
        nv = sum(len(p.vertices) for p in ps)
        ne = sum(len(p.edges) for p in ps)
        vs, es = self.reconstruct()
        return nv == len(vs) and ne == len(es)

    def reconstructs(self, cluster: Cluster) -> bool:
        vs, es = self.reconstruct()
        return self.is_partition() and vs == cluster.vertices and es == cluster.edges

    def to_json(self) -> str:
        def dump(c):
            return {"vertices": sorted(list(v) for v in c.vertices),
                    "edges": sorted([list(e.lo), e.axis] for e in c.edges)}
        return json.dumps({
            "t": list(self.t), "eps": self.eps, "n": self.n, "degenerate": self.degenerate,
            "cone_bonds": [[list(e.lo), e.axis] for e in self.cone_bonds],
            "displacements": [list(map(int, X)) for X in self.displacements],
            "backward": dump(self.backward), "forward": dump(self.forward),
            "pieces": [dump(p) for p in self.pieces],
        }, separators=(",", ":"))


def _empty():
    return Cluster(frozenset(), frozenset())


def irreducible_decomposition(cluster: Cluster, t, eps, x, y) -> IrreducibleDecomposition:
    """Cut the cluster at its cone bonds.

    Each cone bond {b, b+u} stays with the piece containing its lower end
    b, so pieces partition both the vertex and the edge set.  A cut that
    does not disconnect the cluster (possible when it reconnects outside
    the strip) is dropped and recorded.  Without cone bonds the result is
    the flagged trivial decomposition (whole cluster as backward piece).
    """
    t = tuple(float(c) for c in t)
    data = cone_data(cluster, t, eps, x, y)
    bonds = list(data.cone_bonds)
    dropped = []
    while True:
        if not bonds:
            return IrreducibleDecomposition(cluster, [], _empty(), [], [], eps, t, True, dropped)
        cut = set(bonds)
        parts = connected_parts(cluster.vertices, [e for e in cluster.edges if e not in cut])
        where = {}
        for i, p in enumerate(parts):
            for v in p:
                where[v] = i
        seq = [where[bonds[0].lo]] + [where[e.hi] for e in bonds]
        bad = [i for i in range(1, len(seq)) if seq[i] in seq[:i]]
        if not bad:
            break
        dropped.append(bonds.pop(bad[0] - 1))
    owner = {}
    for e in cluster.edges:
        owner.setdefault(where[e.lo], set()).add(e)
    pieces = []
    for i in seq:
        vs = frozenset(parts[i])
        pieces.append(Cluster(vs, frozenset(owner.get(i, ())), cluster.finite))
    disp = [tuple(int(a - b) for a, b in zip(e2.lo, e1.lo)) for e1, e2 in zip(bonds, bonds[1:])]
    return IrreducibleDecomposition(pieces[0], pieces[1:-1], pieces[-1], disp, bonds, eps, t,
                                    False, dropped)


def extremes(cluster: Cluster, t):
    """Lowest and highest vertex along t (ties broken lexicographically)."""
    vs = sorted(cluster.vertices, key=lambda v: (_lvl(t, v), v))
    return vs[0], vs[-1]


@dataclass
class DecompositionCheck:
    size: int
    n_pieces: list          # interior pieces per eps
    reconstructs: bool      # every eps reconstructs the cluster exactly
    nested: bool            # cone-point sets grow with eps
    cone_in_cone: bool      # every displacement lies in C_eps(t)
    dropped: int            # cone bonds dropped as non-separating (all eps)


def check_decompositions(cluster: Cluster, t, eps_list=(0.2, 0.4, 0.6, 0.8)) -> DecompositionCheck:
    """Decompose between the extremes along t for each eps and verify the invariants."""
    x, y = extremes(cluster, t)
    prev, ok_rec, ok_nest, ok_cone, drop, npcs = None, True, True, True, 0, []
    for eps in sorted(eps_list):
        dec = irreducible_decomposition(cluster, t, eps, x, y)
        ok_rec &= dec.reconstructs(cluster)
        if dec.displacements:
            ok_cone &= bool(np.all(in_cone_many(dec.displacements, t, eps)))
        drop += len(dec.dropped_bonds)
        npcs.append(dec.n)
        K = set(cone_points(cluster, t, eps, x, y))
        if prev is not None:
            ok_nest &= prev <= K
        prev = K
    return DecompositionCheck(len(cluster), npcs, bool(ok_rec), bool(ok_nest), bool(ok_cone), drop)
