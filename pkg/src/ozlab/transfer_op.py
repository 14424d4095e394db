"""Truncated Ruelle operator over an alphabet of irreducible pieces, tilting,
renewal masses and the Ornstein-Zernike prefactor fit.

Symbols s = 0..K-1 carry displacements X(s) with <t, X(s)> >= 1, t a lattice
axis.  A memory-m potential is a table ``xi`` of shape (K,)*m indexed
(s, c_1, .., c_{m-1}) = (new symbol, most recent context, ...).  Functions
live on length-(m-1) context blocks and

    (L f)(c_1..c_{m-1}) = sum_s exp(xi[s, c_1..c_{m-1}]) f(s, c_1..c_{m-2}).

For m = 1, f is a scalar and L f = sum_s exp(xi[s]) f; for m = 2 L is the
K x K matrix M[c, s] = exp(xi[s, c]).

Renewal masses sum, over all finite symbol strings, the weight of the
string at the lattice point reached by its displacements.  The empty string
contributes 1 at the origin.  A string s_1..s_n has weight
exp(init[s_1] + sum_{i>=2} xi[s_i, s_{i-1}]) (m = 2) or prod exp(xi[s_i])
(m = 1).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .lattice import in_cone_many


class ConvergenceError(RuntimeError):
    pass


class NonUniqueError(RuntimeError):
    """Leading eigenvalue looks degenerate (restarts disagree)."""


@dataclass
class IrreducibleAlphabet:
    X: np.ndarray                  # (K, d) integer displacements
    t: tuple                       # lattice axis direction
    eps: float | None = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, np.int64))
        t = np.asarray(self.t, float)
        if np.count_nonzero(t) != 1 or t.max() <= 0:
            raise ValueError("alphabet direction must be a positive lattice axis")
        self.t = tuple(float(c) for c in t / np.linalg.norm(t))
        if self.X.shape[0] == 0:
            raise ValueError("empty alphabet")
        if np.any(self.levels < 1):
            raise ValueError("every displacement needs <t, X> >= 1")
        if self.eps is not None and not np.all(in_cone_many(self.X, self.t, self.eps)):
            raise ValueError("displacements leave the cone C_eps(t)")
        if not self.names:
            self.names = [str(i) for i in range(self.K)]

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def axis(self) -> int:
        return int(np.argmax(self.t))

    @property
    def levels(self) -> np.ndarray:
        return self.X[:, int(np.argmax(np.asarray(self.t)))]

    def transverse(self) -> np.ndarray:
        return np.delete(self.X, self.axis, axis=1)


@dataclass
class PotentialSpec:
    xi: np.ndarray                 # shape (K,)*m
    init: np.ndarray | None = None  # first-symbol log-weights (m >= 2)
    theta: float | None = None     # declared Hoelder exponent

    def __post_init__(self):
        self.xi = np.asarray(self.xi, float)
        if self.xi.ndim < 1 or len(set(self.xi.shape)) != 1:
            raise ValueError("potential table must have shape (K,)*m")
        if self.init is None:
            self.init = np.zeros(self.K) if self.m > 1 else self.xi.copy()
        self.init = np.asarray(self.init, float)

    @property
    def m(self) -> int:
        return self.xi.ndim

    @property
    def K(self) -> int:
        return self.xi.shape[0]

    def variations(self) -> np.ndarray:
        """var_k, k = 1..m: largest |xi(a) - xi(b)| over blocks agreeing in
        their first k entries (var_k = 0 for k >= m)."""
        out = np.zeros(self.m)
        for k in range(1, self.m + 1):
            flat = self.xi.reshape(self.K ** k, -1)
            out[k - 1] = float(np.max(flat.max(axis=1) - flat.min(axis=1)))
        return out

    def holder_ok(self, c: float, theta: float | None = None) -> bool:
        th = self.theta if theta is None else theta
        if th is None:
            raise ValueError("no Hoelder exponent declared")
        k = np.arange(1, self.m + 1)
        return bool(np.all(self.variations() <= c * th ** (k - 1) + 1e-12))


def memoryless(log_weights) -> PotentialSpec:
    return PotentialSpec(np.asarray(log_weights, float))


def potential_from_function(fn, K: int, m: int, theta: float | None = None) -> PotentialSpec:
    """Tabulate ``fn(s, context_tuple)`` on all blocks of length m."""
    xi = np.empty((K,) * m)
    for idx in np.ndindex(*xi.shape):
        xi[idx] = fn(idx[0], idx[1:])
    init = np.array([fn(s, ()) for s in range(K)]) if m > 1 else None
    return PotentialSpec(xi, init, theta)


def _check(alph: IrreducibleAlphabet, pot: PotentialSpec):
    if alph.K != pot.K:
        raise ValueError(f"alphabet has {alph.K} symbols, potential {pot.K}")


# --- operator -----------------------------------------------------------------------

def operator_matrix(pot: PotentialSpec) -> np.ndarray:
    """Dense matrix of L on flattened context blocks (size K^(m-1))."""
    K, m = pot.K, pot.m
    with np.errstate(over="raise"):
        try:
            W = np.exp(pot.xi)
        except FloatingPointError:
            raise OverflowError("weight overflow in exp(xi)") from None
    if not np.all(np.isfinite(W)):
        raise OverflowError("weight overflow in exp(xi)")
    if m == 1:
        return np.array([[W.sum()]])
    n = K ** (m - 1)
    M = np.zeros((n, n))
    for idx in np.ndindex(*W.shape):
        s, ctx = idx[0], idx[1:]
        row = np.ravel_multi_index(ctx, (K,) * (m - 1))
        col = np.ravel_multi_index((s,) + ctx[:-1], (K,) * (m - 1))
        M[row, col] += W[idx]
    return M


def ruelle_apply(f, alph: IrreducibleAlphabet | None, pot: PotentialSpec) -> np.ndarray:
    """(L f) on context blocks; ``f`` has shape (K,)*(m-1) (a scalar for m = 1)."""
    if alph is not None:
        _check(alph, pot)
    f = np.asarray(f, float)
    shape = (pot.K,) * (pot.m - 1)
    out = operator_matrix(pot) @ f.reshape(-1)
    if not np.all(np.isfinite(out)):
        raise OverflowError("weight sum overflow")
    return out.reshape(shape) if shape else out.reshape(())


@dataclass
class Eigen:
    lam: float
    h: np.ndarray          # right eigenfunction, max 1
    mu: np.ndarray         # left eigenvector (eigenmeasure), total 1
    residual: float
    iterations: int


def _power(A, v, tol, max_iter):
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = A @ v
        lam_new = float(np.max(w))
        if lam_new <= 0:
            raise ValueError("operator annihilated a positive vector (zero alphabet?)")
        w = w / lam_new
        if np.max(np.abs(w - v)) <= tol and abs(lam_new - lam) <= tol * lam_new:
            return lam_new, w, it
        v, lam = w, lam_new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def leading_eig(alph: IrreducibleAlphabet | None, pot: PotentialSpec, tol: float = 1e-12,
                max_iter: int = 100_000, restarts: int = 3, seed: int = 0) -> Eigen:
    """Perron eigen-triple by shifted power iteration with random restarts.

    The shift (L + sigma I) removes periodicity without moving eigenvectors.
    Restarts from random positive vectors must agree, otherwise the leading
    eigenvalue is degenerate and ``NonUniqueError`` is raised.
    """
    if alph is not None:
        _check(alph, pot)
    L = operator_matrix(pot)
    n = L.shape[0]
    if not np.any(L > 0):
        raise ValueError("zero alphabet: all weights vanish")
    sigma = float(L.sum(axis=1).mean())
    rng = np.random.default_rng(seed)
    A = L + sigma * np.eye(n)
    starts = [np.ones(n)] + [rng.uniform(0.1, 1.0, n) for _ in range(restarts)]
    hs = []
    for v in starts:
        _, h, it = _power(A, v / v.max(), tol * 1e-2, max_iter)
        hs.append(h)
    for h in hs[1:]:
        if np.max(np.abs(h - hs[0])) > 1e-6:
            raise NonUniqueError("restarts converge to different eigenfunctions")
    h = hs[0]
    Lh = L @ h
    lam = float((Lh @ h) / (h @ h))
    _, mu, _ = _power(A.T, np.ones(n), tol * 1e-2, max_iter)
    mu = mu / mu.sum()
    res = float(np.max(np.abs(Lh - lam * h)))
    if res > tol * lam * 10:
        raise ConvergenceError(f"eigen-residual {res:.3g} above tolerance")
    return Eigen(lam, h.reshape((pot.K,) * (pot.m - 1)) if pot.m > 1 else h, mu, res, it)


def tilt(alph: IrreducibleAlphabet, pot: PotentialSpec, v) -> PotentialSpec:
    """xi_v(s, .) = <v, X(s)> + xi(s, .)."""
    _check(alph, pot)
    v = np.asarray(v, float)
    if v.shape != (alph.d,) or not np.all(np.isfinite(v)):
        raise ValueError("tilt vector must be finite with one entry per dimension")
    a = alph.X @ v
    if np.any(a + pot.xi.reshape(pot.K, -1).max(axis=1) > 700):
        raise OverflowError("inadmissible tilt: weights overflow")
    xi = pot.xi + a.reshape((-1,) + (1,) * (pot.m - 1))
    return PotentialSpec(xi, pot.init + a, pot.theta)


def log_lambda(alph, pot, v=None) -> float:
    p = pot if v is None else tilt(alph, pot, v)
    return float(np.log(leading_eig(alph, p).lam))


def mean_displacement(alph: IrreducibleAlphabet, pot: PotentialSpec, v=None) -> np.ndarray:
    """E_v[X] under the tilted Gibbs measure = grad log lambda(v)."""
    p = pot if v is None else tilt(alph, pot, v)
    if p.m == 1:
        w = np.exp(p.xi - p.xi.max())
        return (w[:, None] * alph.X).sum(0) / w.sum()
    L = operator_matrix(p)
    eg = leading_eig(alph, p)
    h, mu = eg.h.reshape(-1), eg.mu
    K, m = p.K, p.m
    out = np.zeros(alph.d)
    for idx in np.ndindex(*p.xi.shape):
        s, ctx = idx[0], idx[1:]
        row = np.ravel_multi_index(ctx, (K,) * (m - 1))
        col = np.ravel_multi_index((s,) + ctx[:-1], (K,) * (m - 1))
        out += mu[row] * np.exp(p.xi[idx]) * h[col] * alph.X[s]
    return out / (eg.lam * float(mu @ h))


def pressure_surface(alph: IrreducibleAlphabet, pot: PotentialSpec, vgrid):
    """log lambda(v) for each row of ``vgrid``; NaN (and flag) where inadmissible."""
    vgrid = np.atleast_2d(np.asarray(vgrid, float))
    out = np.full(len(vgrid), np.nan)
    bad = np.zeros(len(vgrid), bool)
    for i, v in enumerate(vgrid):
        try:
            out[i] = log_lambda(alph, pot, v)
        except (OverflowError, ConvergenceError, FloatingPointError):
            bad[i] = True
    return out, bad


def solve_tilt(alph: IrreducibleAlphabet, pot: PotentialSpec, target: float = 0.0,
               direction=None, lo: float = -50.0, hi: float = 50.0) -> np.ndarray:
    """v = s * direction (default t) with log lambda(v) = target, by bisection."""
    u = np.asarray(alph.t if direction is None else direction, float)
    u = u / np.linalg.norm(u)
    f = lambda s: log_lambda(alph, pot, s * u) - target   # noqa: E731
    a, b = lo, hi
    fa, fb = f(a), f(b)
    if fa * fb > 0:
        raise ValueError("target pressure not bracketed along the direction")
    for _ in range(200):
        c = 0.5 * (a + b)
        fc = f(c)
        if fa * fc <= 0:
            b, fb = c, fc
        else:
            a, fa = c, fc
        if b - a < 1e-14:
            break
    return 0.5 * (a + b) * u


# --- renewal masses -------------------------------------------------------------------

@dataclass
class RenewalMassTable:
    d: int
    axis: int
    R: int
    log_mass: dict                 # point tuple -> log mass (only stored points)
    lam: float                     # leading eigenvalue of the (tilted) operator
    window: int
    exact_region: str
    include_empty: bool = True

    @property
    def divergent(self) -> bool:
        """Total mass over Z^d is infinite when lambda >= 1."""
        return self.lam >= 1.0

    def mass(self, x) -> float:
        return float(np.exp(self.log_mass.get(tuple(int(c) for c in x), -np.inf)))

    def points(self) -> list:
        return sorted(self.log_mass)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# ozlab {__version__} transfer_op renewal masses (dimensionless), x in lattice "
                  f"units; empty string counted at 0: {self.include_empty}; "
                  f"R={self.R}; lambda={self.lam!r}; exact on {self.exact_region}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.d)] + ["mass", "log_mass"])
        for x in self.points():
            lm = self.log_mass[x]
            w.writerow(list(x) + [repr(float(np.exp(lm))), repr(float(lm))])
        return buf.getvalue()


def _shift_add(dst, src, off, scale):
    """dst += scale * src shifted by ``off`` (zero fill, clipped to the window)."""
    if scale == 0:
        return
    sl_d, sl_s = [], []
    for o, n in zip(off, src.shape):
        if abs(o) >= n:
            return
        if o >= 0:
            sl_d.append(slice(o, n))
            sl_s.append(slice(0, n - o))
        else:
            sl_d.append(slice(0, n + o))
            sl_s.append(slice(-o, n))
    dst[tuple(sl_d)] += scale * src[tuple(sl_s)]


def renewal_mass(alph: IrreducibleAlphabet, pot: PotentialSpec, v=None, R: int = 50,
                 keep="all", window: int | None = None, include_empty: bool = True,
                 max_cells: int = 50_000_000) -> RenewalMassTable:
    """Exact DP for sum_n nu_n(sum X(s_i) = x) over levels <t, x> <= R.

    ``keep="all"`` stores every point; ``keep="axis"`` only points on the t
    axis, which allows the transverse window to shrink to what can still
    return to the axis by level R (exact there).  Memory m <= 2.
    """
    _check(alph, pot)
    if pot.m > 2:
        raise ValueError("renewal DP supports memory m <= 2")
    p = pot if v is None else tilt(alph, pot, v)
    lam = leading_eig(alph, p).lam
    lv = alph.levels
    T = alph.transverse()
    dt = alph.d - 1
    spread = float(np.max(np.abs(T).sum(axis=1) / lv)) if dt else 0.0
    if keep == "axis":
        W = int(np.ceil(spread * R / 2)) if window is None else int(window)
        region = "axis"
    elif keep == "all":
        W = int(np.ceil(spread * R)) if window is None else int(window)
        region = "all" if window is None else f"window {W}"
    else:
        raise ValueError("keep must be 'all' or 'axis'")
    side = 2 * W + 1
    S = 1 if pot.m == 1 else alph.K
    cells = side ** dt * S * (int(lv.max()) + 1)
    if cells > max_cells:
        raise MemoryError(f"radius {R} needs {cells} cells (cap {max_cells})")
    wshape = (side,) * dt
    depth = int(lv.max())
    # ring buffer of (S, *wshape) arrays plus their log scales
    buf = [np.zeros((S,) + wshape) for _ in range(depth + 1)]
    scl = [-np.inf] * (depth + 1)
    centre = (W,) * dt
    w_init = np.exp(p.init)
    W_tab = np.exp(p.xi)
    out = {}
    ax = alph.axis

    def record(level, arr, logs):
        tot = arr.sum(axis=0)
        if keep == "axis":
            val = tot[centre] if dt else tot
            pts = {(0,) * dt: val}
        else:
            pts = {}
            for idx in zip(*np.nonzero(tot)) if dt else [()]:
                pts[tuple(int(i) - W for i in idx)] = tot[idx] if dt else tot
        for z, val in pts.items():
            val = float(val)
            if val > 0:
                x = list(z) if dt else []
                x.insert(ax, level)
                out[tuple(x)] = np.log(val) + logs

    if include_empty:
        out[tuple([0] * alph.d)] = 0.0
    for level in range(1, R + 1):
        cur = np.zeros((S,) + wshape)
        cands = [scl[(level - k) % (depth + 1)] for k in range(1, depth + 1) if level - k >= 1]
        if np.any(lv == level):
            cands.append(0.0)
        ref = max([c for c in cands if np.isfinite(c)], default=0.0)
        for s in range(alph.K):
            k = int(lv[s])
            off = tuple(int(c) for c in T[s]) if dt else ()
            if k == level:
                # a string that starts with s
                src = np.zeros(wshape)
                if dt:
                    src[centre] = 1.0
                else:
                    src = np.ones(())
                tgt = cur[0] if S == 1 else cur[s]
                if dt:
                    _shift_add(tgt, src, off, w_init[s] * np.exp(-ref))
                else:
                    tgt += w_init[s] * np.exp(-ref)
            if k < level:
                j = (level - k) % (depth + 1)
                if not np.isfinite(scl[j]):
                    continue
                fac = np.exp(scl[j] - ref)
                prev = buf[j]
                if S == 1:
                    src, wt = prev[0], W_tab[s]
                    if dt:
                        _shift_add(cur[0], src, off, wt * fac)
                    else:
                        cur[0] += wt * fac * src
                else:
                    src = np.tensordot(W_tab[s], prev, axes=(0, 0))
                    if dt:
                        _shift_add(cur[s], src, off, fac)
                    else:
                        cur[s] += fac * src
        mx = float(cur.max())
        j = level % (depth + 1)
        if mx > 0:
            buf[j] = cur / mx
            scl[j] = ref + np.log(mx)
            record(level, buf[j], scl[j])
        else:
            buf[j] = cur
            scl[j] = -np.inf
    return RenewalMassTable(alph.d, ax, int(R), out, float(lam), W, region, include_empty)


# --- prefactor fit -------------------------------------------------------------------

@dataclass
class PrefactorFit:
    tau: float
    alpha: float
    log_amplitude: float
    alpha_se: float
    tau_se: float
    radii: np.ndarray
    residuals: np.ndarray

    @property
    def amplitude(self) -> float:
        return float(np.exp(self.log_amplitude))


def fit_prefactor(r, log_m, alpha: float | None = None) -> PrefactorFit:
    """Least squares of log m = log A - tau r - alpha log r (alpha free unless given)."""
    r = np.asarray(r, float)
    y = np.asarray(log_m, float)
    if r.size < 10:
        raise ValueError(f"need >= 10 radii, got {r.size}")
    if not np.all(np.isfinite(y)):
        raise ValueError("nonpositive masses in the fit range")
    if alpha is None:
        X = np.column_stack([np.ones_like(r), -r, -np.log(r)])
    else:
        X = np.column_stack([np.ones_like(r), -r])
        y = y + alpha * np.log(r)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    dof = max(r.size - X.shape[1], 1)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.maximum(np.diag(cov), 0))
    a = float(coef[2]) if alpha is None else float(alpha)
    a_se = float(se[2]) if alpha is None else 0.0
    return PrefactorFit(float(coef[1]), a, float(coef[0]), a_se, float(se[1]), r, res)


def prefactor_fit(table: RenewalMassTable, direction=None, r_range=(50, 200)) -> PrefactorFit:
    """Fit along r * u for a primitive lattice vector u (default: the table's axis)."""
    if direction is None:
        u = np.zeros(table.d, np.int64)
        u[table.axis] = 1
    else:
        u = np.asarray(direction)
        if not np.allclose(u, np.round(u)):
            raise ValueError("direction must be a lattice vector")
        u = np.round(u).astype(np.int64)
    nu = float(np.linalg.norm(u))
    ks = [k for k in range(1, table.R + 1) if r_range[0] <= k * nu <= r_range[1]]
    pts = [tuple(int(c) for c in k * u) for k in ks]
    lm = np.array([table.log_mass.get(x, -np.inf) for x in pts])
    return fit_prefactor(np.array(ks) * nu, lm)


# --- alphabets from files / data --------------------------------------------------------

def load_alphabet(name_or_path: str):
    """(alphabet, potential) from a JSON file or a bundled name such as 'd3_7'."""
    if name_or_path.endswith(".json"):
        with open(name_or_path) as fh:
            r = json.load(fh)
    else:
        r = json.loads(resources.files("ozlab").joinpath(f"data/alphabet_{name_or_path}.json")
                       .read_text())
    alph = IrreducibleAlphabet(r["displacements"], tuple(r["t"]), r.get("eps"),
                               r.get("names", []))
    pot = PotentialSpec(np.asarray(r["log_weights"], float),
                        None if r.get("init") is None else np.asarray(r["init"], float),
                        r.get("theta"))
    return alph, pot


def alphabet_to_json(alph: IrreducibleAlphabet, pot: PotentialSpec) -> str:
    return json.dumps({
        "t": list(alph.t), "eps": alph.eps, "names": alph.names,
        "displacements": alph.X.tolist(), "log_weights": pot.xi.tolist(),
        "init": None if pot.m == 1 else pot.init.tolist(), "theta": pot.theta,
    }, indent=1)


def alphabet_from_displacements(displacements, t, eps=None, min_count: int = 1):
    """Memoryless alphabet with log-frequency weights from observed X(s_i)."""
    from collections import Counter
    c = Counter(tuple(int(v) for v in x) for x in displacements)
    items = sorted((x, n) for x, n in c.items() if n >= min_count)
    if not items:
        raise ValueError("no displacements")
    tot = sum(n for _, n in items)
    X = [x for x, _ in items]
    return (IrreducibleAlphabet(X, t, eps, [str(x) for x in X]),
            memoryless([np.log(n / tot) for _, n in items]))
