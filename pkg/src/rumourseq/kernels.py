"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
reference in ``_pure`` takes over. Setting RUMOURSEQ_BACKEND=python forces
the fallback at import; ``use_backend`` switches at runtime.
"""

import os
from types import ModuleType

from . import _pure


try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _pure
if os.environ.get("RUMOURSEQ_BACKEND", "").lower() == "python":
    _active = _pure


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def backend_name() -> str:
    return "compiled" if _active is _compiled else "python"


def use_backend(name: str) -> None:
    global _active
    if name == "python":
        _active = _pure
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def forward(unary, trans):
    return _active.forward(unary, trans)


def backward(unary, trans):
    return _active.backward(unary, trans)


def viterbi_forward(unary, trans):
    return _active.viterbi_forward(unary, trans)


def sgns_update(w_in, w_out, centers, contexts, negatives, rates):
    _active.sgns_update(w_in, w_out, centers, contexts, negatives, rates)
