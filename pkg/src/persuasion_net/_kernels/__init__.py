"""Graph kernel backend selection.

The compiled Cython core is preferred; the NumPy/SciPy fallback is used
when the extension is absent.  Set PERSUASION_NET_KERNELS=python (or
cython) to force a backend; forcing cython raises if it is not built.
"""

import os

_forced = os.environ.get("PERSUASION_NET_KERNELS", "auto").lower()
if _forced not in ("auto", "cython", "python", ""):
    raise RuntimeError(f"PERSUASION_NET_KERNELS must be auto|cython|python, got {_forced!r}")

if _forced in ("auto", "", "cython"):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        from . import _fallback as _impl

        BACKEND = "python"
else:
    from . import _fallback as _impl

    BACKEND = "python"

components_labels = _impl.components_labels
spread_observed = _impl.spread_observed

__all__ = ["BACKEND", "components_labels", "spread_observed"]
