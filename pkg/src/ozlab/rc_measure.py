"""Exact finite-volume random-cluster measures by enumeration.

The density of a configuration w on the box edges is

    p^{o(w)} (1-p)^{c(w)} q^{kappa(w)}

where kappa counts open components meeting the box once the boundary
condition is applied.  Boundary conditions are realized on an auxiliary
graph: box vertices ``0..n-1`` plus one extra node ``n``.

* free   -- the extra node is isolated.
* wired  -- every inner-boundary vertex is tied to the extra node.
* pinned -- one bit per outer-shell edge (``lattice.outer_shell`` order);
  an open shell edge ties its inner vertex to the extra node, i.e. the
  exterior is treated as a single connected blob.  All-closed reproduces
  free and all-open reproduces wired.

kappa counts components that contain a box vertex, so the exterior blob
is counted only when it is attached to the box.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .lattice import LatticeSpec, boundary_vertices, edge_arrays, outer_shell

MAX_ENUM_EDGES = 24


class EnumerationBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class RCParams:
    q: float
    p: float

    def __post_init__(self):
        if not self.q >= 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0,1), got {self.p}")

    @property
    def p_lower(self) -> float:
        """p(q) = p / (p + q(1-p)), the Bernoulli lower bound."""
        return self.p / (self.p + self.q * (1 - self.p))


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "free"
    pi: tuple | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("free", "wired", "pinned"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "pinned":
            if self.pi is None:
                raise ValueError("pinned boundary condition needs pi")
            object.__setattr__(self, "pi", tuple(bool(b) for b in self.pi))
        elif self.pi is not None:
            raise ValueError(f"{self.kind} boundary condition takes no pi")

    @classmethod
    def pinned(cls, pi) -> "BoundaryCondition":
        return cls("pinned", tuple(pi))

    def __str__(self):
        if self.kind != "pinned":
            return self.kind
        return "pinned:" + "".join("1" if b else "0" for b in self.pi)


FREE = BoundaryCondition("free")
WIRED = BoundaryCondition("wired")


@dataclass(frozen=True)
class AuxGraph:
    n: int           # node count including the extra node
    eu: np.ndarray
    ev: np.ndarray
    fu: np.ndarray   # always-open edges realizing the bc
    fv: np.ndarray
    n_count: int     # nodes < n_count are box vertices
    super_: int


@lru_cache(maxsize=128)
def aux_graph(spec: LatticeSpec, bc: BoundaryCondition) -> AuxGraph:
    nv = spec.n_vertices
    eu, ev, _ = edge_arrays(spec)
    if bc.kind == "free":
        fu = np.zeros(0, np.int64)
    elif bc.kind == "wired":
        fu = np.asarray(boundary_vertices(spec), np.int64)
    else:
        shell = outer_shell(spec)
        if len(bc.pi) != len(shell):
            raise ValueError(f"pinned pi has {len(bc.pi)} bits, outer shell has {len(shell)} edges")
        fu = np.asarray([i for (i, _, _), b in zip(shell, bc.pi) if b], np.int64)
    fv = np.full(fu.size, nv, np.int64)
    return AuxGraph(nv + 1, eu, ev, fu, fv, nv, nv)


def as_config(config, spec: LatticeSpec) -> np.ndarray:
    """Bool array of length |E|; ints are read bitwise (bit i = edge i)."""
    m = spec.n_edges
    if isinstance(config, (int, np.integer)):
        return ((int(config) >> np.arange(m)) & 1).astype(bool)
    a = np.asarray(config).astype(bool)
    if a.shape != (m,):
        raise ValueError(f"config has shape {a.shape}, box has {m} edges")
    return a


def config_to_int(config) -> int:
    return int(sum(1 << i for i, b in enumerate(np.asarray(config, bool)) if b))


def kappa(config, spec: LatticeSpec, bc: BoundaryCondition = FREE) -> int:
    g = aux_graph(spec, bc)
    lab = kernels.label(g.n, g.eu, g.ev, as_config(config, spec), g.fu, g.fv)
    return int(np.count_nonzero(lab[: g.n_count] == np.arange(g.n_count)))


def weight(config, spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE) -> float:
    w = as_config(config, spec)
    o = int(w.sum())
    return params.p ** o * (1 - params.p) ** (w.size - o) * params.q ** kappa(w, spec, bc)


# --- enumeration -----------------------------------------------------------

def _check_budget(spec: LatticeSpec):
    m = spec.n_edges
    if m > MAX_ENUM_EDGES:
        raise EnumerationBudgetError(
            f"box has {m} edges; exact enumeration is capped at {MAX_ENUM_EDGES}")
    return m


@lru_cache(maxsize=64)
def kappa_all(spec: LatticeSpec, bc: BoundaryCondition) -> np.ndarray:
    _check_budget(spec)
    g = aux_graph(spec, bc)
    out = kernels.kappa_table(g.n, g.eu, g.ev, g.fu, g.fv, g.n_count)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def _popcount(m: int) -> np.ndarray:
    c = np.arange(1 << m, dtype=np.int64)
    out = np.zeros(c.size, np.int16)
    for j in range(m):
        out += ((c >> j) & 1).astype(np.int16)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def probabilities(spec: LatticeSpec, params: RCParams, bc: BoundaryCondition = FREE) -> np.ndarray:
    """P(w) for every config integer w < 2^|E|."""
    m = _check_budget(spec)
    o = _popcount(m)
    logw = o * np.log(params.p) + (m - o) * np.log1p(-params.p)
    if params.q != 1:
        logw = logw + kappa_all(spec, bc) * np.log(params.q)
    pr = np.exp(logw - logsumexp(logw))
    pr.setflags(write=False)
    return pr


def all_configs(m: int) -> np.ndarray:
    return ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(bool)


class Event:
    """An event on the enumerated cube, stored as a boolean mask."""

    def __init__(self, mask, name: str = ""):
        self.mask = np.asarray(mask, bool)
        self.name = name
        m = int(self.mask.size).bit_length() - 1
        if self.mask.ndim != 1 or (1 << m) != self.mask.size:
            raise ValueError("event mask length must be a power of two")
        self.m = m

    @classmethod
    def from_predicate(cls, f: Callable, m: int, vectorized: bool = False, name=""):
        """``f(config)`` on bool arrays; with ``vectorized`` f gets all rows at once."""
        if vectorized:
            return cls(np.asarray(f(all_configs(m)), bool), name)
        cf = all_configs(m)
        return cls(np.fromiter((bool(f(w)) for w in cf), bool, cf.shape[0]), name)

    def __and__(self, other: "Event") -> "Event":
        return Event(self.mask & other.mask, f"({self.name})&({other.name})")

    def __or__(self, other: "Event") -> "Event":
        return Event(self.mask | other.mask, f"({self.name})|({other.name})")

    def __invert__(self) -> "Event":
        return Event(~self.mask, f"~({self.name})")

    def __repr__(self):
        return f"Event({self.name or '?'}, m={self.m}, |A|={int(self.mask.sum())})"


def edges_open(edges, m: int) -> Event:
    """All listed edge indices open."""
    bit = 0
    for j in edges:
        bit |= 1 << int(j)
    c = np.arange(1 << m)
    return Event((c & bit) == bit, f"open{tuple(edges)}")


def edges_closed(edges, m: int) -> Event:
    bit = 0
    for j in edges:
        bit |= 1 << int(j)
    c = np.arange(1 << m)
    return Event((c & bit) == 0, f"closed{tuple(edges)}")


def _as_event(event, m: int) -> Event:
    if isinstance(event, Event):
        if event.m != m:
            raise ValueError(f"event is over {event.m} edges, box has {m}")
        return event
    if callable(event):
        return Event.from_predicate(event, m)
    return Event(event)


def exact_probability(event, spec: LatticeSpec, params: RCParams,
                      bc: BoundaryCondition = FREE) -> float:
    """P^bc(event) by summing the enumerated density."""
    m = _check_budget(spec)
    ev = _as_event(event, m)
    return float(probabilities(spec, params, bc)[ev.mask].sum())


# --- monotone events, FKG and domination -------------------------------------

def increasing_witness(event) -> tuple | None:
    """None if the event is increasing, else (w, w') with w <= w', w in A, w' not in A."""
    ev = event if isinstance(event, Event) else Event(event)
    c = np.arange(ev.mask.size)
    for j in range(ev.m):
        lo = c[((c >> j) & 1) == 0]
        bad = ev.mask[lo] & ~ev.mask[lo | (1 << j)]
        if bad.any():
            w = int(lo[np.argmax(bad)])
            return w, w | (1 << j)
    return None


def is_increasing(event) -> bool:
    return increasing_witness(event) is None


def up_closure(mask: np.ndarray) -> np.ndarray:
    """Smallest increasing event containing ``mask``."""
    out = np.asarray(mask, bool).copy()
    m = out.size.bit_length() - 1
    c = np.arange(out.size)
    for j in range(m):
        lo = c[((c >> j) & 1) == 0]
        out[lo | (1 << j)] |= out[lo]
    return out


def random_increasing_event(m: int, rng: np.random.Generator, n_gen: int | None = None) -> Event:
    """Up-closure of a few random generator configurations."""
    if n_gen is None:
        n_gen = int(rng.integers(1, 4))
    mask = np.zeros(1 << m, bool)
    mask[rng.integers(0, 1 << m, size=n_gen)] = True
    return Event(up_closure(mask), f"up{n_gen}")


class NotIncreasingError(ValueError):
    def __init__(self, witness):
        super().__init__(f"event is not increasing: config {witness[0]} is in it, "
                         f"larger config {witness[1]} is not")
        self.witness = witness


@dataclass
class OrderReport:
    lower: float            # Bernoulli(p(q))
    free: float
    wired: float
    upper: float            # Bernoulli(p)
    pinned: dict = field(default_factory=dict)   # str(bc) -> probability
    fkg: list = field(default_factory=list)      # (bc, P(fg), P(f), P(g), ok)
    tol: float = 1e-12

    @property
    def chain(self) -> list:
        return [self.lower, self.free, self.wired, self.upper]

    @property
    def chain_ok(self) -> bool:
        c = self.chain
        ok = all(a <= b + self.tol for a, b in zip(c, c[1:]))
        return ok and all(self.free - self.tol <= v <= self.wired + self.tol
                          for v in self.pinned.values())

    @property
    def fkg_ok(self) -> bool:
        return all(r[-1] for r in self.fkg)

    @property
    def ok(self) -> bool:
        return self.chain_ok and self.fkg_ok


def check_order_inequalities(spec: LatticeSpec, params: RCParams, bc_list=(), event=None,
                             pairs=(), tol=1e-12) -> OrderReport:
    """Domination chain P_{p(q)} <= P^f <= P^pi <= P^w <= P_p and FKG on pairs.

    ``bc_list`` adds pinned (or any) conditions to sandwich between free and
    wired; FKG pairs are checked under free, wired and each listed bc.
    """
    m = _check_budget(spec)
    ev = _as_event(event, m)
    w = increasing_witness(ev)
    if w is not None:
        raise NotIncreasingError(w)
    bern_lo = RCParams(1.0, params.p_lower)
    bern_hi = RCParams(1.0, params.p)
    rep = OrderReport(
        lower=exact_probability(ev, spec, bern_lo),
        free=exact_probability(ev, spec, params, FREE),
        wired=exact_probability(ev, spec, params, WIRED),
        upper=exact_probability(ev, spec, bern_hi),
        tol=tol,
    )
    for bc in bc_list:
        if bc.kind == "pinned":
            rep.pinned[str(bc)] = exact_probability(ev, spec, params, bc)
    fkg_bcs = [FREE, WIRED] + [bc for bc in bc_list if bc.kind == "pinned"]
    for f, g in pairs:
        f, g = _as_event(f, m), _as_event(g, m)
        for e in (f, g):
            wit = increasing_witness(e)
            if wit is not None:
                raise NotIncreasingError(wit)
        for bc in fkg_bcs:
            pr = probabilities(spec, params, bc)
            pfg, pf, pg = (float(pr[x].sum()) for x in (f.mask & g.mask, f.mask, g.mask))
            rep.fkg.append((str(bc), pfg, pf, pg, pfg >= pf * pg - tol))
    return rep
