"""Geometry of Z^d: boxes, edges, dual plaquettes, cones, slabs.

Conventions
-----------
* A box is ``{0..L_0-1} x ... x {0..L_{d-1}-1}``; vertices are stored by
  row-major linear index (last axis fastest, as ``np.ravel_multi_index``).
* An edge is identified by ``(lo, axis)`` where ``lo`` is the endpoint with
  the smaller coordinate; the other endpoint is ``lo + e_axis``.
* Box edges are ordered axis-major: all axis-0 edges in row-major order of
  ``lo``, then axis-1 edges, and so on.  Bit ``i`` of a ``BondConfig``
  integer refers to edge ``i`` in this order.
* A plaquette carries the edge it is dual to, so duality is a bijection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

Vertex = tuple  # tuple[int, ...]


@dataclass(frozen=True)
class LatticeSpec:
    """Finite box of Z^d.

    ``L`` is either an int (cubic box) or a tuple of per-axis side lengths.
    ``centered=True`` shifts coordinates so the box centre sits at the
    origin (only meaningful for odd sides; even sides round down).
    """
    d: int
    L: int | tuple = 1
    centered: bool = False
    shape: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        shape = (self.L,) * self.d if np.isscalar(self.L) else tuple(self.L)
        shape = tuple(int(s) for s in shape)
        if len(shape) != self.d:
            raise ValueError(f"shape {shape} does not match d={self.d}")
        if min(shape) < 1:
            raise ValueError(f"side lengths must be >= 1, got {shape}")
        object.__setattr__(self, "shape", shape)

    @property
    def n_vertices(self) -> int:
        return int(np.prod(self.shape))

    @property
    def offset(self) -> np.ndarray:
        if not self.centered:
            return np.zeros(self.d, dtype=np.int64)
        return -(np.asarray(self.shape, dtype=np.int64) - 1) // 2

    def index(self, x) -> int:
        """Linear index of vertex ``x`` (absolute coordinates)."""
        a = np.asarray(x, dtype=np.int64) - self.offset
        return int(np.ravel_multi_index(tuple(a), self.shape))

    def coords(self, i) -> np.ndarray:
        """Absolute coordinates of linear index ``i`` (scalar or array)."""
        c = np.stack(np.unravel_index(np.asarray(i), self.shape), axis=-1)
        return c + self.offset

    def contains(self, x) -> bool:
        a = np.asarray(x, dtype=np.int64) - self.offset
        return bool(np.all(a >= 0) and np.all(a < np.asarray(self.shape)))

    @property
    def n_edges(self) -> int:
        return len(edge_arrays(self)[0])


class Edge(NamedTuple):
    lo: tuple
    axis: int

    @property
    def hi(self) -> tuple:
        h = list(self.lo)
        h[self.axis] += 1
        return tuple(h)

    @property
    def endpoints(self) -> tuple:
        return (self.lo, self.hi)

    @classmethod
    def from_endpoints(cls, x, y) -> "Edge":
        x, y = tuple(int(v) for v in x), tuple(int(v) for v in y)
        diff = [b - a for a, b in zip(x, y)]
        if sum(abs(v) for v in diff) != 1:
            raise ValueError(f"{x} and {y} are not nearest neighbours")
        k = next(i for i, v in enumerate(diff) if v != 0)
        return cls(x if diff[k] > 0 else y, k)


class Plaquette(NamedTuple):
    """(d-1)-cell dual to ``edge``."""
    edge: Edge

    def center2(self) -> tuple:
        """Doubled coordinates of the plaquette centre (= edge midpoint)."""
        c = [2 * v for v in self.edge.lo]
        c[self.edge.axis] += 1
        return tuple(c)


def dual(obj):
    """Edge -> Plaquette and Plaquette -> Edge."""
    if isinstance(obj, Plaquette):
        return obj.edge
    if isinstance(obj, Edge):
        return Plaquette(obj)
    raise TypeError(f"cannot dualize {type(obj).__name__}")


@lru_cache(maxsize=64)
def edge_arrays(spec: LatticeSpec):
    """(u, v, axis) int arrays of box edges in the documented order."""
    idx = np.arange(spec.n_vertices).reshape(spec.shape)
    us, vs, ax = [], [], []
    for k in range(spec.d):
        if spec.shape[k] < 2:
            continue
        lo = [slice(None)] * spec.d
        hi = [slice(None)] * spec.d
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        u = idx[tuple(lo)].ravel()
        us.append(u)
        vs.append(idx[tuple(hi)].ravel())
        ax.append(np.full(u.size, k))
    if not us:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e
    u, v, a = (np.concatenate(z).astype(np.int64) for z in (us, vs, ax))
    for z in (u, v, a):
        z.setflags(write=False)
    return u, v, a


def edges_of_box(spec: LatticeSpec) -> list[Edge]:
    """All nearest-neighbour pairs of the box, axis-major then row-major."""
    u, _, a = edge_arrays(spec)
    lo = spec.coords(u)
    return [Edge(tuple(int(c) for c in row), int(k)) for row, k in zip(lo, a)]


def edge_index(spec: LatticeSpec) -> dict:
    """Edge -> position in ``edges_of_box`` order."""
    return {e: i for i, e in enumerate(edges_of_box(spec))}


@lru_cache(maxsize=64)
def boundary_vertices(spec: LatticeSpec) -> np.ndarray:
    """Linear indices of vertices on the inner boundary of the box."""
    c = spec.coords(np.arange(spec.n_vertices)) - spec.offset
    shp = np.asarray(spec.shape)
    on = np.any((c == 0) | (c == shp - 1), axis=1)
    out = np.flatnonzero(on)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def outer_shell(spec: LatticeSpec):
    """Edges leaving the box, as (inner vertex index, axis, side).

    Ordered by axis, then side (-1 before +1), then inner vertex index.
    Pinned boundary conditions assign one bit to each of these.
    """
    c = spec.coords(np.arange(spec.n_vertices)) - spec.offset
    rows = []
    for k in range(spec.d):
        for side in (-1, 1):
            face = c[:, k] == (0 if side < 0 else spec.shape[k] - 1)
            for i in np.flatnonzero(face):
                rows.append((int(i), k, side))
    return tuple(rows)


# --- cones, half-spaces, slabs ---------------------------------------------

def _unit(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    n = np.linalg.norm(t)
    if not np.isfinite(n) or n == 0:
        raise ValueError("direction t must be a finite nonzero vector")
    return t / n


@dataclass(frozen=True)
class Cone:
    t: tuple
    eps: float

    def __post_init__(self):
        _unit(self.t)
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0,1), got {self.eps}")
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))


def in_cone(x, cone: Cone, apex=None) -> bool:
    """``<t^, x - apex> >= (1 - eps) |x - apex|``; the apex itself is inside."""
    x = np.asarray(x, dtype=float)
    if apex is not None:
        x = x - np.asarray(apex, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        return True
    # small slack so that points exactly on the cone surface are inside
    return float(_unit(cone.t) @ x) >= (1 - cone.eps) * nx - 1e-12 * nx


def in_cone_many(X, t, eps, apex=None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if apex is not None:
        X = X - np.asarray(apex, dtype=float)
    nx = np.linalg.norm(X, axis=-1)
    return X @ _unit(t) >= (1 - eps) * nx * (1 - 1e-12)


@dataclass(frozen=True)
class Slab:
    """{x : a <= <t^, x> <= b}."""
    t: tuple
    a: float
    b: float

    def __post_init__(self):
        _unit(self.t)
        if self.a > self.b:
            raise ValueError("slab needs a <= b")

    def contains(self, x) -> bool:
        s = float(_unit(self.t) @ np.asarray(x, dtype=float))
        return self.a <= s <= self.b


def strip(t, x, y) -> Slab:
    """S^t_{x,y}: the closed strip between the hyperplanes through x and y."""
    th = _unit(t)
    a, b = sorted((float(th @ np.asarray(x, float)), float(th @ np.asarray(y, float))))
    return Slab(tuple(th), a, b)


def slab_index(x, t, N) -> int | None:
    """Index i with iN <= <t^, x> < (i+1)N, or None behind the origin."""
    if N < 1:
        raise ValueError("slab width N must be >= 1")
    s = float(_unit(t) @ np.asarray(x, dtype=float))
    if s < -1e-12:
        return None
    return int(np.floor(s / N + 1e-12))


def principal_axis(t) -> int:
    """First axis k maximizing <t, e_k> (lowest index wins ties)."""
    t = np.asarray(t, dtype=float)
    _unit(t)
    return int(np.argmax(t))  # argmax returns the first maximizer


def unit_vector(d: int, k: int, sign: int = 1) -> tuple:
    e = [0] * d
    e[k] = sign
    return tuple(e)


def neighbours(x: Sequence[int]):
    """The 2d nearest neighbours of x in Z^d."""
    x = tuple(x)
    for k in range(len(x)):
        for s in (-1, 1):
            y = list(x)
            y[k] += s
            yield tuple(y)


def plaquette_neighbours(p: Plaquette):
    """Plaquettes sharing a (d-2)-cell with ``p``.

    Equivalently the dual edges lie on a common unit square: for each axis
    j != k there are two squares through the edge (a, k), each contributing
    three further edges.  6(d-1) neighbours in total.
    """
    a, k = p.edge
    d = len(a)
    for j in range(d):
        if j == k:
            continue
        aj = list(a); aj[j] += 1
        ak = list(a); ak[k] += 1
        am = list(a); am[j] -= 1
        akm = list(a); akm[k] += 1; akm[j] -= 1
        yield Plaquette(Edge(tuple(aj), k))
        yield Plaquette(Edge(tuple(ak), j))
        yield Plaquette(Edge(a, j))
        yield Plaquette(Edge(tuple(am), k))
        yield Plaquette(Edge(tuple(akm), j))
        yield Plaquette(Edge(tuple(am), j))
