"""Hot kernels with a numba path and a numpy fallback.

The active implementation is chosen once at import from ``OZLAB_BACKEND``
(see ``ozlab._backend``).  Both modules are importable directly, which the
benchmark and the backend-agreement tests use.

label(n, eu, ev, open_, fu, fv)
    component labels (= minimal member index) of the graph on ``n`` nodes
    with edges ``eu[open_]--ev[open_]`` plus fixed edges ``fu--fv``.
kappa_table(n, eu, ev, fu, fv, n_count)
    for every config integer ``c < 2**m`` the number of components whose
    minimal member is ``< n_count``.
sweeps(n, eu, ev, fu, fv, super_, config, labels, alg, q, p, raw, K, hist)
    ``K`` in-place SW / CM / Bernoulli sweeps driven by pre-drawn 64-bit words
    (two 32-bit uniforms each); ``labels`` is kept in sync with ``config``.
finite_roots(labels, n_box, boundary)
    labels of box components that avoid the ``boundary`` vertices.
count_connected_sets(indptr, indices, root, kmax)
    number of connected vertex sets through ``root`` of each size <= kmax.
"""
from .._backend import BACKEND
from . import _np

if BACKEND == "numba":
    from . import _nb as _impl
else:
    _impl = _np

SW, CM, BERNOULLI = _np.SW, _np.CM, _np.BERNOULLI

label = _impl.label
kappa_table = _impl.kappa_table
sweeps = _impl.sweeps
finite_roots = _impl.finite_roots
count_connected_sets = _impl.count_connected_sets

__all__ = ["BACKEND", "SW", "CM", "BERNOULLI", "label", "kappa_table", "sweeps", "finite_roots",
           "count_connected_sets"]
