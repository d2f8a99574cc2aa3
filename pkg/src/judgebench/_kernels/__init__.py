"""Fixpoint kernels: compiled extension when available, pure Python otherwise.

Index arrays are ``int64`` CSR (``indptr``/``indices``); masks are ``uint8``.
Set ``JUDGEBENCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _fixpoint as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNEL_NAMES = ("ex_image", "eu_fixpoint", "eg_fixpoint", "class_forall", "reachable")

if _compiled is not None and os.environ.get("JUDGEBENCH_PURE_PYTHON") != "1":
    _active = _compiled
    BACKEND = "cython"
else:
    _active = _fallback
    BACKEND = "python"

ex_image = _active.ex_image
eu_fixpoint = _active.eu_fixpoint
eg_fixpoint = _active.eg_fixpoint
class_forall = _active.class_forall
reachable = _active.reachable


def available_backends() -> dict:
    """Name -> module for every backend importable in this process."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
