"""Pairwise geometry through inner products only.

Every geometric quantity the engine needs — axis coordinates, squared
distances to the axis, cone membership — reduces to inner products of
observations, so coordinate data and Gram-matrix (kernel) data share one
code path.  For coordinate data the Gram matrix is precomputed once; the
two modes then run on literally the same numbers, which is what makes the
kernel path reproduce the Euclidean path bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Dataset, DegeneratePairError, GramMatrix, ValidationError

COINCIDENT_TOL = 1e-12


class InnerProductView:
    """Uniform access to pairwise inner products of the observations."""

    def __init__(self, gram: np.ndarray, ids: tuple[str, ...]):
        self.gram = gram
        self.ids = ids

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "InnerProductView":
        if ds.coords is None:
            raise ValidationError("dataset has no coordinates; use from_gram")
        return cls(gram=ds.coords @ ds.coords.T, ids=ds.ids)

    @classmethod
    def from_gram(cls, gm: GramMatrix, ids: tuple[str, ...] | None = None) -> "InnerProductView":
        if ids is None:
            ids = tuple(str(k) for k in range(gm.n))
        if len(ids) != gm.n:
            raise ValidationError("ids length does not match Gram size")
        return cls(gram=gm.entries, ids=ids)

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def ip(self, a: int, b: int) -> float:
        return float(self.gram[a, b])

    def span2(self, i: int, j: int) -> float:
        """Squared distance between observations i and j."""
        return self.gram[i, i] + self.gram[j, j] - 2.0 * self.gram[i, j]


@dataclass(frozen=True)
class PairFrame:
    """Axis coordinates for one ordered pair (i, j).

    The axis is the line through x_i and x_j, with unit direction from i
    to j; the anchor sits at axis coordinate 0 (pair midpoint, or x_i for
    the self anchor).  ``t[w]`` is the signed axis coordinate of
    observation w, ``perp2[w]`` its squared distance to the axis, and
    ``r`` the pair half-span.
    """

    i: int
    j: int
    r: float
    anchor_kind: str
    t: np.ndarray
    perp2: np.ndarray


def pair_frame(view: InnerProductView, i: int, j: int, anchor_kind: str = "midpoint") -> PairFrame:
    """Project all observations onto the pair axis, inner products only.

    Raises DegeneratePairError when x_i and x_j coincide (no axis exists);
    callers replace the pair from the plan's reserve stream.
    """
    if i == j:
        raise ValidationError("pair indices must differ")
    if anchor_kind not in ("midpoint", "self"):
        raise ValidationError(f"unknown anchor kind {anchor_kind!r}")
    K = view.gram
    span2 = K[i, i] + K[j, j] - 2.0 * K[i, j]
    span = math.sqrt(span2) if span2 > 0.0 else 0.0
    if span <= COINCIDENT_TOL:
        raise DegeneratePairError(f"observations {i} and {j} coincide")

    col_i = K[:, i]
    col_j = K[:, j]
    diag = K.diagonal()
    if anchor_kind == "midpoint":
        t = (col_j - col_i - (K[j, j] - K[i, i]) / 2.0) / span
        dist2 = diag - col_i - col_j + (K[i, i] + 2.0 * K[i, j] + K[j, j]) / 4.0
    else:  # anchor at x_i
        t = (col_j - col_i - K[i, j] + K[i, i]) / span
        dist2 = diag - 2.0 * col_i + K[i, i]
    perp2 = np.maximum(dist2 - t * t, 0.0)
    return PairFrame(i=i, j=j, r=span / 2.0, anchor_kind=anchor_kind, t=t, perp2=perp2)


def cone_contains(frame: PairFrame, c: float, w: int, alpha: float) -> bool:
    """Whether observation w lies in the cone with tip at axis coordinate c.

    The cone opens from the tip toward the anchor with half-angle alpha;
    the boundary counts as inside.  Uses the identical expression to the
    counting kernel, so scalar checks and bulk counts can never disagree.
    """
    t = float(frame.t[w])
    d = 1.0 if c <= 0.0 else -1.0
    axial = d * (t - c)
    return axial >= math.cos(alpha) * math.sqrt(axial * axial + float(frame.perp2[w]))


def side_of(frame: PairFrame, c: float, w: int, alpha: float) -> str:
    """Side of the anchor hyperplane for a contained point: 'A' between tip
    and anchor (anchor plane included), 'B' strictly beyond, else 'outside'.
    """
    if not cone_contains(frame, c, w, alpha):
        return "outside"
    d = 1.0 if c <= 0.0 else -1.0
    return "A" if d * float(frame.t[w]) <= 0.0 else "B"


@dataclass(frozen=True)
class ProjectionStats:
    """Location/spread summaries of the projected (axis) coordinates."""

    t_min: float
    t_max: float
    winsorized_sd: float

    @property
    def degenerate(self) -> bool:
        return self.winsorized_sd == 0.0


def winsorized_std(values: np.ndarray, per_side: int) -> float:
    """Sample sd (divisor n-1) after clamping the k most extreme values on
    each side to the nearest retained order statistic."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    if n < 2:
        return 0.0
    k = min(per_side, (n - 1) // 2)
    if k > 0:
        v = np.clip(v, v[k], v[n - 1 - k])
    return float(np.std(v, ddof=1))


def projection_stats(frame: PairFrame, winsorize_per_side: int = 3) -> ProjectionStats:
    """Range and Winsorized sd of the axis coordinates of all observations.

    A zero winsorized spread is the degenerate-spread signal; callers fall
    back to a two-point tip grid hugging the anchor.
    """
    t = frame.t
    return ProjectionStats(
        t_min=float(t.min()),
        t_max=float(t.max()),
        winsorized_sd=winsorized_std(t, winsorize_per_side),
    )
