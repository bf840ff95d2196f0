"""Pure-numpy depth-count kernel, the reference implementation.

The compiled extension in ``_core.pyx`` mirrors this exactly.  Both
evaluate the containment test in the same IEEE expression order
(``d*(t-c) >= cos_alpha * sqrt((t-c)^2 + perp^2)``, every operation
correctly rounded) and count with integers, so the two backends are
bit-identical, not merely close.
"""
from __future__ import annotations

import numpy as np


def depth_counts(
    t: np.ndarray,
    perp2: np.ndarray,
    tips: np.ndarray,
    cos_alphas: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Count points captured on each side of the anchor, per angle and tip.

    Parameters
    ----------
    t : (n,) float64
        Signed axial coordinates of the points relative to the anchor.
    perp2 : (n,) float64
        Squared distances from the points to the axis.
    tips : (m,) float64
        Signed axial coordinates of the cone tips relative to the anchor.
    cos_alphas : (k,) float64
        Cosines of the opening angles, in (0, 1).

    Returns
    -------
    (counts_a, counts_b) : two (k, m) int64 arrays
        Points inside the cone with tip ``tips[j]`` opening toward the
        anchor at angle ``alphas[i]``, split at the anchor hyperplane:
        side A is the anchor side (boundary included), side B the far
        side.  Containment includes the cone boundary.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    perp2 = np.ascontiguousarray(perp2, dtype=np.float64)
    tips = np.ascontiguousarray(tips, dtype=np.float64)
    cos_alphas = np.ascontiguousarray(cos_alphas, dtype=np.float64)

    k, m = cos_alphas.size, tips.size
    counts_a = np.zeros((k, m), dtype=np.int64)
    counts_b = np.zeros((k, m), dtype=np.int64)

    # d = -sign(tip): +1 when the tip sits at or below the anchor (cone
    # opens up-axis), -1 when above.
    for jm in range(m):
        c = tips[jm]
        d = 1.0 if c <= 0.0 else -1.0
        axial = d * (t - c)                    # offset from tip toward anchor
        dist = np.sqrt(axial * axial + perp2)  # |point - tip|
        on_a = d * t <= 0.0                    # anchor side; boundary -> A
        for ka in range(k):
            inside = axial >= cos_alphas[ka] * dist
            counts_a[ka, jm] = np.count_nonzero(inside & on_a)
            counts_b[ka, jm] = np.count_nonzero(inside & ~on_a)
    return counts_a, counts_b
