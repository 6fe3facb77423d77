"""Backend selection for the O(N^2) pairwise kernels.

Prefers the compiled Cython extension when the build produced one and falls
back to the pure numpy implementation otherwise. Both expose the same
``pair_aggregate`` contract and are bit-identical for d <= 7; tests and the
benchmark rely on that. Set MVSDE_FORCE_FALLBACK=1 to skip the compiled
extension without reinstalling.
"""

import os

from . import pairwise_py

pair_aggregate_py = pairwise_py.pair_aggregate
pair_aggregate_naive = pairwise_py.pair_aggregate_naive

if os.environ.get("MVSDE_FORCE_FALLBACK", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _pairwise as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    pair_aggregate = _compiled.pair_aggregate
    _BACKEND = "cython"
else:
    pair_aggregate = pairwise_py.pair_aggregate
    _BACKEND = "numpy"


def backend_name():
    """Identifier of the active pairwise backend: 'cython' or 'numpy'."""
    return _BACKEND
