"""Clusters of a bond configuration, external boundaries and dual surfaces.

Clusters live in absolute Z^d coordinates (tuples), independent of the box
they were sampled in.  Hole filling is done on the cluster's own bounding
box grown by one layer: a complement component that does not reach the
outer layer is enclosed by the cluster, hence a finite hole in Z^d.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .. import kernels
from ..lattice import Edge, LatticeSpec, Plaquette, boundary_vertices, edge_arrays


@dataclass(frozen=True)
class Cluster:
    vertices: frozenset
    edges: frozenset = frozenset()
    finite: bool = True

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(tuple(int(c) for c in v) for v in self.vertices))
        object.__setattr__(self, "edges", frozenset(self.edges))

    @property
    def d(self) -> int:
        return len(next(iter(self.vertices)))

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, x):
        return tuple(x) in self.vertices

    def coords(self) -> np.ndarray:
        return np.array(sorted(self.vertices), dtype=np.int64).reshape(-1, self.d)

    @classmethod
    def from_vertices(cls, vertices, finite=True) -> "Cluster":
        """Cluster with every nearest-neighbour pair inside ``vertices`` open."""
        vs = {tuple(int(c) for c in v) for v in vertices}
        es = set()
        for v in vs:
            for k in range(len(v)):
                w = list(v)
                w[k] += 1
                if tuple(w) in vs:
                    es.add(Edge(v, k))
        return cls(frozenset(vs), frozenset(es), finite)

    @classmethod
    def from_edges(cls, edges, extra_vertices=(), finite=True) -> "Cluster":
        es = set(edges)
        vs = {tuple(v) for v in extra_vertices}
        for e in es:
            vs.add(e.lo)
            vs.add(e.hi)
        return cls(frozenset(vs), frozenset(es), finite)

    def is_connected(self) -> bool:
        return len(connected_parts(self.vertices, self.edges)) <= 1

    def to_json(self) -> str:
        return json.dumps({
            "vertices": sorted(list(v) for v in self.vertices),
            "edges": sorted([list(e.lo), e.axis] for e in self.edges),
            "finite": self.finite,
        }, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "Cluster":
        r = json.loads(line)
        return cls(frozenset(tuple(v) for v in r["vertices"]),
                   frozenset(Edge(tuple(lo), k) for lo, k in r["edges"]), r["finite"])


def connected_parts(vertices, edges) -> list[set]:
    """Connected components of the graph (vertices, edges), via union-find."""
    parent = {v: v for v in vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in edges:
        ra, rb = find(e.lo), find(e.hi)
        if ra != rb:
            parent[ra] = rb
    parts = {}
    for v in vertices:
        parts.setdefault(find(v), set()).add(v)
    return list(parts.values())


class Components:
    """Component labelling of a box configuration."""

    def __init__(self, config, spec: LatticeSpec):
        self.spec = spec
        self.config = np.asarray(config, bool)
        eu, ev, _ = edge_arrays(spec)
        n = spec.n_vertices
        z = np.zeros(0, np.int64)
        self.labels = kernels.label(n, eu, ev, self.config, z, z)
        touch = np.zeros(n, bool)
        touch[self.labels[boundary_vertices(spec)]] = True
        self._touch = touch

    @classmethod
    def from_labels(cls, labels, config, spec):
        obj = cls.__new__(cls)
        obj.spec, obj.config = spec, np.asarray(config, bool)
        obj.labels = np.asarray(labels[: spec.n_vertices])
        touch = np.zeros(spec.n_vertices + 1, bool)
        touch[obj.labels[boundary_vertices(spec)]] = True
        obj._touch = touch
        return obj

    @property
    def n_components(self) -> int:
        return int(np.count_nonzero(self.labels == np.arange(self.labels.size)))

    def roots(self, finite_only: bool = False) -> np.ndarray:
        r = np.flatnonzero(self.labels == np.arange(self.labels.size))
        return r[~self._touch[r]] if finite_only else r

    def label_of(self, x) -> int:
        return int(self.labels[self.spec.index(x)])

    def cluster(self, root: int) -> Cluster:
        """Cluster whose minimal vertex index is ``root``."""
        members = np.flatnonzero(self.labels == root)
        eu, ev, ax = edge_arrays(self.spec)
        sel = self.config & (self.labels[eu] == root)
        lo = self.spec.coords(eu[sel])
        vs = [tuple(int(c) for c in v) for v in self.spec.coords(members)]
        es = [Edge(tuple(int(c) for c in a), int(k)) for a, k in zip(lo, ax[sel])]
        return Cluster(frozenset(vs), frozenset(es), not bool(self._touch[root]))

    def cluster_at(self, x) -> Cluster:
        return self.cluster(self.label_of(x))

    def finite_clusters(self):
        for r in self.roots(finite_only=True):
            yield self.cluster(int(r))


def components(config, spec: LatticeSpec) -> Components:
    return Components(config, spec)


# --- external boundary ---------------------------------------------------------

def filled_vertices(vertices) -> frozenset:
    """V together with every finite complement component (holes)."""
    X = np.array(sorted(vertices), dtype=np.int64)
    d = X.shape[1]
    lo = X.min(axis=0) - 1
    shape = tuple(X.max(axis=0) - lo + 2)
    grid = np.zeros(shape, bool)
    grid[tuple((X - lo).T)] = True
    lab, n = ndimage.label(~grid, structure=ndimage.generate_binary_structure(d, 1))
    if n <= 1:
        return frozenset(map(tuple, X.tolist()))
    outside = lab.flat[0]
    holes = (lab > 0) & (lab != outside)
    Y = np.argwhere(holes) + lo
    return frozenset(map(tuple, np.vstack([X, Y]).tolist()))


def boundary_edges(vertices) -> list[Edge]:
    """Edges of Z^d with exactly one endpoint in ``vertices``, sorted."""
    vs = set(vertices)
    out = []
    for v in vs:
        for k in range(len(v)):
            for s in (-1, 1):
                w = list(v)
                w[k] += s
                w = tuple(w)
                if w not in vs:
                    out.append(Edge(v if s > 0 else w, k))
    return sorted(out)


def boundary_size(vertices) -> int:
    vs = set(vertices)
    d = len(next(iter(vs)))
    inner = 0
    for v in vs:
        for k in range(d):
            w = list(v)
            w[k] += 1
            inner += tuple(w) in vs
    return 2 * d * len(vs) - 2 * inner


@dataclass(frozen=True)
class DualSurface:
    plaquettes: frozenset
    filled: frozenset = field(default=frozenset(), repr=False)

    def __len__(self):
        return len(self.plaquettes)

    def __iter__(self):
        return iter(sorted(self.plaquettes))

    @property
    def d(self) -> int:
        return len(next(iter(self.plaquettes)).edge.lo)

    def centers2(self) -> np.ndarray:
        """Doubled plaquette centres, one row per plaquette (sorted order)."""
        return np.array([p.center2() for p in self], dtype=np.int64)

    @classmethod
    def from_vertices(cls, vertices) -> "DualSurface":
        V = filled_vertices(vertices)
        return cls(frozenset(Plaquette(e) for e in boundary_edges(V)), V)


def external_boundary_and_surface(cluster: Cluster, spec: LatticeSpec | None = None):
    """(external boundary edges, dual surface) of a finite cluster."""
    if not cluster.finite:
        raise ValueError("external boundary is only defined for finite clusters")
    V = filled_vertices(cluster.vertices)
    edges = boundary_edges(V)
    return edges, DualSurface(frozenset(Plaquette(e) for e in edges), V)
