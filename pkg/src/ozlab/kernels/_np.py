"""Pure numpy/scipy fallbacks.  Outputs match ``_nb`` exactly."""
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

SW, CM, BERNOULLI = 0, 1, 2


def label(n, eu, ev, open_, fu, fv):
    open_ = np.asarray(open_, bool)
    r = np.concatenate([fu, eu[open_]])
    c = np.concatenate([fv, ev[open_]])
    g = coo_matrix((np.ones(r.size, np.int8), (r, c)), shape=(n, n))
    _, lab = connected_components(g, directed=False)
    # canonical label = smallest member
    mins = np.full(lab.max() + 1, n, np.int64)
    np.minimum.at(mins, lab, np.arange(n))
    return mins[lab]


def kappa_table(n, eu, ev, fu, fv, n_count, chunk=1 << 14):
    m = eu.size
    total = 1 << m
    out = np.empty(total, np.int16)
    bits = np.arange(m)
    for start in range(0, total, chunk):
        cfg = np.arange(start, min(start + chunk, total))
        op = ((cfg[:, None] >> bits) & 1).astype(bool)
        lab = np.broadcast_to(np.arange(n), (cfg.size, n)).copy()
        # fixed edges first, then min-label propagation to a fixed point
        for a, b in zip(fu, fv):
            lo = np.minimum(lab[:, a], lab[:, b])
            lab[:, a] = lo
            lab[:, b] = lo
        while True:
            old = lab.copy()
            for a, b in zip(fu, fv):
                lo = np.minimum(lab[:, a], lab[:, b])
                lab[:, a] = lo
                lab[:, b] = lo
            for j in range(m):
                a, b = eu[j], ev[j]
                lo = np.where(op[:, j], np.minimum(lab[:, a], lab[:, b]), 0)
                lab[:, a] = np.where(op[:, j], lo, lab[:, a])
                lab[:, b] = np.where(op[:, j], lo, lab[:, b])
            # pointer jumping speeds up long paths
            lab = np.take_along_axis(lab, lab, axis=1)
            if np.array_equal(lab, old):
                break
        out[cfg] = (lab[:, :n_count] == np.arange(n_count)).sum(axis=1)
    return out


def uniforms(raw, start, count):
    """32-bit uniforms ``start .. start+count-1`` from 64-bit words (low half first)."""
    idx = np.arange(start, start + count)
    w = raw[idx >> 1] >> ((idx & 1) * 32).astype(np.uint64)
    return (w & np.uint64(0xFFFFFFFF)).astype(np.float64) * 2.3283064365386963e-10


def sweeps(n, eu, ev, fu, fv, super_, config, labels, alg, q, p, raw, K, hist):
    m = eu.size
    width = (n + m + 1) // 2 * 2   # sweeps start on a word boundary
    for k in range(K):
        u = uniforms(raw, k * width, n + m)
        ucol, uedge = u[:n], u[n:]
        if alg == BERNOULLI:
            config[:] = uedge < p
        else:
            lab = labels
            if alg == SW:
                flag = np.floor(ucol * q).astype(np.int64)
                if super_ >= 0:
                    flag[lab[super_]] = 0
                f = flag[lab]
                config[:] = (f[eu] == f[ev]) & (uedge < p)
            else:
                act = ucol < 1.0 / q
                if super_ >= 0:
                    act[lab[super_]] = True
                a = act[lab]
                both = a[eu] & a[ev]
                config[both] = uedge[both] < p
            labels[:] = label(n, eu, ev, config, fu, fv)
        if hist.shape[0] > 0:
            hist[k] = config
    if alg == BERNOULLI:
        labels[:] = label(n, eu, ev, config, fu, fv)
    return config


def finite_roots(labels, n_box, boundary):
    touch = np.zeros(labels.size, bool)
    touch[labels[boundary]] = True
    r = np.arange(n_box)
    return r[(labels[:n_box] == r) & ~touch[:n_box]]


def count_connected_sets(indptr, indices, root, kmax):
    counts = np.zeros(kmax + 1, np.int64)
    seen = np.zeros(indptr.size - 1, bool)
    seen[root] = True

    def rec(untried, size):
        untried = list(untried)
        while untried:
            v = untried.pop()
            counts[size + 1] += 1
            if size + 1 < kmax:
                new = [w for w in indices[indptr[v]:indptr[v + 1]] if not seen[w]]
                seen[new] = True
                rec(untried + new, size + 1)
                seen[new] = False

    rec([root], 0)
    return counts
