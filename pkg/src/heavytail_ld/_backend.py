"""Kernel backend selection.

The compiled extension is used when it imports; set ``HEAVYTAIL_LD_PURE=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

_FUNCTIONS = (
    "sici",
    "psi_nodes",
    "theta_nodes",
    "geometric_sums",
    "charfn_nodes",
    "canonical_quantile",
    "canonical_upper_tail",
    "mc_naive_chunk",
    "mc_bigjump_chunk",
)


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("HEAVYTAIL_LD_PURE") else _load_compiled()

kernels = _compiled if _compiled is not None else _kernels_py
BACKEND = "compiled" if _compiled is not None else "python"


def available_backends():
    out = {"python": _kernels_py}
    compiled = _compiled if _compiled is not None else _load_compiled()
    if compiled is not None:
        out["compiled"] = compiled
    return out


def use(name):
    """Switch the active backend ("compiled" or "python"); returns the previous name."""
    global kernels, BACKEND
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} is not available")
    previous = BACKEND
    kernels = backends[name]
    BACKEND = name
    return previous
