"""numba kernels.  Signatures mirror ``_np``; see ``ozlab.kernels``."""
import numpy as np

from .._backend import njit

SW, CM, BERNOULLI = 0, 1, 2


@njit
def _find(parent, i):
    r = i
    while parent[r] != r:
        r = parent[r]
    while parent[i] != r:
        nxt = parent[i]
        parent[i] = r
        i = nxt
    return r


@njit
def _union(parent, a, b):
    # root is always the smaller index, so roots are component minima
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


@njit
def _labels_into(parent, n, eu, ev, open_, fu, fv):
    for i in range(n):
        parent[i] = i
    for j in range(fu.size):
        _union(parent, fu[j], fv[j])
    for j in range(eu.size):
        if open_[j]:
            _union(parent, eu[j], ev[j])
    for i in range(n):
        parent[i] = _find(parent, i)


@njit
def label(n, eu, ev, open_, fu, fv):
    parent = np.empty(n, np.int64)
    _labels_into(parent, n, eu, ev, open_, fu, fv)
    return parent


@njit
def kappa_table(n, eu, ev, fu, fv, n_count):
    m = eu.size
    out = np.empty(1 << m, np.int16)
    parent = np.empty(n, np.int64)
    open_ = np.zeros(m, np.bool_)
    for c in range(1 << m):
        for j in range(m):
            open_[j] = (c >> j) & 1
        _labels_into(parent, n, eu, ev, open_, fu, fv)
        k = 0
        for i in range(n_count):
            if parent[i] == i:
                k += 1
        out[c] = k
    return out


@njit
def uniform(raw, i):
    """i-th 32-bit uniform in [0,1) from a stream of 64-bit words (low half first)."""
    w = raw[i >> 1]
    if i & 1:
        w = w >> np.uint64(32)
    return float(w & np.uint64(0xFFFFFFFF)) * 2.3283064365386963e-10


@njit
def sweeps(n, eu, ev, fu, fv, super_, config, labels, alg, q, p, raw, K, hist):
    """Run ``K`` sweeps in place on ``config``; ``labels`` must match ``config``
    on entry and is kept in sync.

    Sweep ``k`` reads ``n+m`` uniforms starting at word ``k*ceil((n+m)/2)``: one per
    node (used at component minima), then one per edge.  Component decisions
    are keyed by the component's minimal node index, which makes the result
    independent of union-find internals.
    """
    m = eu.size
    width = (n + m + 1) // 2 * 2   # sweeps start on a word boundary
    flag = np.zeros(n, np.int64)
    inv_q = 1.0 / q
    for k in range(K):
        base = k * width
        if alg == BERNOULLI:
            for j in range(m):
                config[j] = uniform(raw, base + n + j) < p
        else:
            rs = labels[super_] if super_ >= 0 else -1
            for i in range(n):
                if labels[i] == i:
                    if i == rs:
                        flag[i] = 0 if alg == SW else 1
                    elif alg == SW:
                        flag[i] = int(np.floor(uniform(raw, base + i) * q))
                    else:
                        flag[i] = 1 if uniform(raw, base + i) < inv_q else 0
            for j in range(m):
                a = flag[labels[eu[j]]]
                b = flag[labels[ev[j]]]
                if alg == SW:
                    config[j] = (a == b) and (uniform(raw, base + n + j) < p)
                elif a == 1 and b == 1:
                    config[j] = uniform(raw, base + n + j) < p
            _labels_into(labels, n, eu, ev, config, fu, fv)
        if hist.shape[0] > 0:
            for j in range(m):
                hist[k, j] = config[j]
    if alg == BERNOULLI:
        _labels_into(labels, n, eu, ev, config, fu, fv)
    return config


@njit
def finite_roots(labels, n_box, boundary):
    """Component labels (minimal members) of box components avoiding ``boundary``."""
    touch = np.zeros(labels.size, np.bool_)
    for i in boundary:
        touch[labels[i]] = True
    cnt = 0
    out = np.empty(n_box, np.int64)
    for i in range(n_box):
        if labels[i] == i and not touch[i]:
            out[cnt] = i
            cnt += 1
    return out[:cnt]


@njit
def count_connected_sets(indptr, indices, root, kmax):
    """Redelmeier count of connected vertex sets through ``root`` by size."""
    counts = np.zeros(kmax + 1, np.int64)
    n = indptr.size - 1
    seen = np.zeros(n, np.bool_)
    width = 1
    for i in range(n):
        width = max(width, indptr[i + 1] - indptr[i])
    width = width * kmax + 2
    stack = np.empty((kmax + 1, width), np.int64)
    slen = np.zeros(kmax + 1, np.int64)
    added = np.empty((kmax + 1, width), np.int64)
    alen = np.zeros(kmax + 1, np.int64)
    stack[0, 0] = root
    slen[0] = 1
    seen[root] = True
    lvl = 0
    while True:
        if slen[lvl] == 0:
            for a in range(alen[lvl]):
                seen[added[lvl, a]] = False
            if lvl == 0:
                break
            lvl -= 1
            continue
        slen[lvl] -= 1
        v = stack[lvl, slen[lvl]]
        size = lvl + 1
        counts[size] += 1
        if size < kmax:
            nl = lvl + 1
            for a in range(slen[lvl]):
                stack[nl, a] = stack[lvl, a]
            ln = slen[lvl]
            na = 0
            for a in range(indptr[v], indptr[v + 1]):
                w = indices[a]
                if not seen[w]:
                    seen[w] = True
                    added[nl, na] = w
                    na += 1
                    stack[nl, ln] = w
                    ln += 1
            slen[nl] = ln
            alen[nl] = na
            lvl = nl
    seen[root] = False
    return counts
