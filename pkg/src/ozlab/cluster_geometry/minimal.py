"""Exhaustive minimal-surface oracles phi, psi and phi_t for small x.

All three run a Redelmeier enumeration of connected vertex sets through
the origin with branch-and-bound pruning.  The lower bound is the
projection bound: every lattice line along axis ``a`` that meets a finite
set carries at least two of its boundary edges, and the projection of a
connected set along ``a`` is at least as wide as its span in any other
direction.  The bound only grows when vertices are added, so pruning is
exact.  The oracles refuse (``SearchBudgetError``) rather than return an
unverified value when a still-viable set would exceed the vertex or node
budget.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .clusters import boundary_edges, boundary_size, filled_vertices


class SearchBudgetError(RuntimeError):
    pass


def _neigh(v):
    for k in range(len(v)):
        for s in (1, -1):
            w = list(v)
            w[k] += s
            yield tuple(w)


def _projection_bound(V, axes, min_width=0):
    """2 * sum over ``axes`` of max(|proj_a V|, span of V transverse to a, min_width)."""
    d = len(V[0])
    lo = [min(v[k] for v in V) for k in range(d)]
    hi = [max(v[k] for v in V) for k in range(d)]
    span = [h - l + 1 for l, h in zip(lo, hi)]
    tot = 0
    for a in axes:
        proj = len({v[:a] + v[a + 1:] for v in V})
        others = max((span[b] for b in range(d) if b != a), default=1)
        tot += max(proj, others, min_width)
    return 2 * tot


def _may_have_holes(n, d):
    # smallest enclosing sets: 8-ring in d=2, 18 vertices around a cube cell in d=3
    return n >= (8 if d == 2 else 18 if d == 3 else 2 * d * d)


def _surface(V, d):
    if _may_have_holes(len(V), d):
        return len(boundary_edges(filled_vertices(V)))
    return boundary_size(V)


def _straight_path(x):
    x = tuple(int(c) for c in x)
    cur = [0] * len(x)
    path = [tuple(cur)]
    for k, c in enumerate(x):
        s = 1 if c > 0 else -1
        for _ in range(abs(c)):
            cur[k] += s
            path.append(tuple(cur))
    return path


class _Search:
    """Redelmeier DFS with a caller-supplied bound, cost and goal."""

    def __init__(self, allowed, bound, cost, goal, max_vertices, node_budget):
        self.allowed, self.bound, self.cost, self.goal = allowed, bound, cost, goal
        self.max_vertices, self.node_budget = max_vertices, node_budget
        self.best = (np.inf, np.inf)   # (cost, size)
        self.nodes = 0

    def viable(self, lb, size):
        bc, bs = self.best
        return lb < bc or (lb == bc and size + 1 < bs)

    def run(self, root):
        self.seen = {root}
        self.V = []
        self._rec([root])
        return self.best

    def _rec(self, untried):
        untried = list(untried)
        while untried:
            v = untried.pop()
            self.V.append(v)
            self.nodes += 1
            if self.nodes > self.node_budget:
                raise SearchBudgetError(f"node budget {self.node_budget} exhausted")
            V = self.V
            if self.goal(V):
                c = self.cost(V)
                if (c, len(V)) < self.best:
                    self.best = (c, len(V))
            lb = self.bound(V)
            if self.viable(lb, len(V)):
                new = [w for w in _neigh(v) if w not in self.seen and self.allowed(w)]
                if new or untried:
                    if len(V) >= self.max_vertices:
                        raise SearchBudgetError(
                            f"minimal set may need more than {self.max_vertices} vertices")
                self.seen.update(new)
                self._rec(untried + new)
                self.seen.difference_update(new)
            self.V.pop()


def _box_allowed(x, cap):
    x = np.asarray(x)
    lo = np.minimum(0, x) - cap
    hi = np.maximum(0, x) + cap

    def allowed(w):
        return all(l <= c <= h for c, l, h in zip(w, lo, hi))
    return allowed


@lru_cache(maxsize=4096)
def _phi_psi(x, radius_cap, max_vertices, node_budget):
    d = len(x)
    if not any(x):
        return 0, 0
    path = _straight_path(x)
    xs = tuple(x)
    search = _Search(
        allowed=_box_allowed(x, radius_cap),
        bound=lambda V: _projection_bound(V + [xs], range(d)),
        cost=lambda V: _surface(V, d),
        goal=lambda V: xs in V,
        max_vertices=max_vertices, node_budget=node_budget)
    search.best = (_surface(path, d), len(path))
    c, n = search.run(tuple([0] * d))
    return int(c), int(n) - 1


def phi_psi_oracle(x, spec=None, radius_cap: int = 1, max_vertices: int = 12,
                   node_budget: int = 2_000_000) -> tuple[int, int]:
    """(phi(x), psi(x)) by exhaustive search.

    phi is the minimal external-boundary size of a finite connected set
    containing 0 and x; psi is the minimal open-edge count (|V| - 1) among
    the phi-minimizers.  The search is confined to the bounding box of
    {0, x} grown by ``radius_cap``.
    """
    x = tuple(int(c) for c in x)
    return _phi_psi(x, int(radius_cap), int(max_vertices), int(node_budget))


def phi(x, **kw) -> int:
    return phi_psi_oracle(x, **kw)[0]


def _level(t):
    t = np.asarray(t, float)
    n = np.linalg.norm(t)
    if n == 0:
        raise ValueError("t must be nonzero")
    return t / n


@lru_cache(maxsize=4096)
def _phi_t(x, t, radius_cap, max_vertices, node_budget):
    d = len(x)
    th = _level(t)
    b = float(th @ np.asarray(x, float))
    if b < -1e-12:
        raise ValueError("need <t, x> >= 0")
    if b <= 1e-12:
        return 0
    tol = 1e-9
    ortho = [k for k in range(d) if abs(th[k]) < 1e-12]
    if len(ortho) != d - 1:
        raise ValueError("phi_t oracle needs t along a lattice axis; "
                         "pass a reference crossing size for other directions")
    n_levels = int(np.floor(b + tol)) + 1
    inside = _box_allowed(x, radius_cap)

    def allowed(w):
        lv = float(th @ np.asarray(w, float))
        return -tol <= lv <= b + tol and inside(w)

    def cost(V):
        Vf = filled_vertices(V) if _may_have_holes(len(V), d) else V
        n = 0
        for e in boundary_edges(Vf):
            mid = np.asarray(e.lo, float)
            mid[e.axis] += 0.5
            lv = float(th @ mid)
            n += -tol <= lv <= b + tol
        return n

    search = _Search(
        allowed=allowed,
        bound=lambda V: _projection_bound(V, ortho, n_levels),
        cost=cost,
        goal=lambda V: any(float(th @ np.asarray(v, float)) >= b - tol for v in V),
        max_vertices=max_vertices, node_budget=node_budget)
    path = _straight_path(x)
    if all(allowed(w) for w in path):
        search.best = (cost(path), len(path))
    c, _ = search.run(tuple([0] * d))
    if not np.isfinite(c):
        raise SearchBudgetError("no crossing found inside the search region")
    return int(c)


def phi_t_oracle(x, t=None, spec=None, radius_cap: int = 1, max_vertices: int = 12,
                 node_budget: int = 2_000_000) -> int:
    """Minimal number of surface plaquettes, centred in the closed strip
    between the hyperplanes orthogonal to t through 0 and x, over finite
    clusters crossing that strip.

    Only axis-aligned t are supported.  The count then depends only on the
    part of the cluster inside the strip, a crossing always has a vertex at
    level 0 (translated to the origin), and the search is exact.
    """
    x = tuple(int(c) for c in x)
    t = x if t is None else tuple(float(c) for c in t)
    if not any(x):
        return 0
    return _phi_t(x, t, int(radius_cap), int(max_vertices), int(node_budget))
