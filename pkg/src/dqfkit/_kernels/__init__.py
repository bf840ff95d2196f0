"""Backend selection for the depth-count kernel.

Prefers the compiled extension when it imported cleanly; falls back to
the pure-numpy implementation otherwise.  Set ``DQFKIT_PURE_PYTHON=1``
to force the fallback (useful for the agreement benchmark and when
debugging).  ``BACKEND`` names the implementation in use.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("DQFKIT_PURE_PYTHON", "").strip() not in ("", "0"):
    depth_counts = _fallback.depth_counts
    BACKEND = "python"
else:
    try:
        from . import _core

        depth_counts = _core.depth_counts
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build environment
        depth_counts = _fallback.depth_counts
        BACKEND = "python"

__all__ = ["depth_counts", "BACKEND"]
