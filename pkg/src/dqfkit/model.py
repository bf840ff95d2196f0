"""Data model, configuration, deterministic randomness and pair sampling.

Everything downstream (depth profiles, bundles, reports) is a pure function
of the input data plus a :class:`Config`, so all types here are immutable
after construction and all randomness flows through :func:`substream`.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

DEFAULT_ANGLES = (math.pi / 6, math.pi / 4, math.pi / 3)

#: sub-stream tags so that independent consumers of one seed never collide
STREAM_PAIRS = 1
STREAM_PAIR_RESERVE = 2
STREAM_SCENARIO = 3


class DQFError(Exception):
    """Base class for all toolkit errors."""


class ParseError(DQFError):
    """Raised when an input file cannot be parsed; names the offending cell."""


class ValidationError(DQFError):
    """Raised when data violates a structural invariant."""


class UnsupportedOperationError(DQFError):
    """Raised when an operation does not apply to the data mode."""


class DegeneratePairError(DQFError):
    """Raised for coincident pair points; callers skip and replace the pair."""


def substream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic RNG sub-stream keyed by (seed, path).

    Sub-streams for distinct paths are statistically independent, and the
    stream for a given path never depends on evaluation order, which keeps
    parallel runs reproducible.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Dataset:
    """n observations with ids, optional coordinates and optional 0/1 labels.

    ``coords`` is None in Gram-only mode, where geometry comes from a
    :class:`GramMatrix` instead.  ``scaled`` records whether the coordinates
    have been standardized (see :func:`z_scale`); labels use 1 = anomaly.
    """

    ids: tuple[str, ...]
    coords: np.ndarray | None
    labels: np.ndarray | None = None
    scaled: bool = False

    def __post_init__(self) -> None:
        n = len(self.ids)
        if n < 3:
            raise ValidationError(f"need at least 3 observations, got {n}")
        if len(set(self.ids)) != n:
            raise ValidationError("observation ids must be unique")
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[0] != n:
                raise ValidationError(
                    f"coords must be an {n}xd matrix, got shape {coords.shape}"
                )
            if not np.all(np.isfinite(coords)):
                bad = np.argwhere(~np.isfinite(coords))[0]
                raise ValidationError(
                    f"non-finite coordinate at row {bad[0]}, column {bad[1]}"
                )
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
            if self.scaled:
                _check_standardized(coords)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValidationError("labels must be one value per observation")
            if not np.isin(labels, (0, 1)).all():
                raise ValidationError("labels must be 0 (normal) or 1 (anomaly)")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def d(self) -> int:
        if self.coords is None:
            raise UnsupportedOperationError("Gram-only dataset has no coordinates")
        return self.coords.shape[1]


def _check_standardized(coords: np.ndarray, tol: float = 1e-9) -> None:
    means = coords.mean(axis=0)
    sds = coords.std(axis=0, ddof=1)
    for k, (mu, sd) in enumerate(zip(means, sds)):
        if abs(mu) > tol:
            raise ValidationError(f"scaled column {k} has mean {mu!r}")
        # constant columns are mapped to all-zero, which passes the mean
        # check and is exempt from the unit-sd check
        if sd > tol and abs(sd - 1.0) > tol:
            raise ValidationError(f"scaled column {k} has sd {sd!r}")


@dataclass(frozen=True)
class GramMatrix:
    """n x n matrix of pairwise inner products for kernel-mode geometry."""

    entries: np.ndarray
    tolerance: float = 1e-8

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError(f"Gram matrix must be square, got {entries.shape}")
        if self.tolerance < 0:
            raise ValidationError("tolerance must be nonnegative")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("Gram matrix contains non-finite entries")
        scale = max(np.abs(entries).max(), 1.0)
        if np.abs(entries - entries.T).max() > self.tolerance * scale:
            raise ValidationError("Gram matrix is not symmetric within tolerance")
        if entries.diagonal().min() < -self.tolerance * scale:
            raise ValidationError("Gram matrix has a negative diagonal entry")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def check_psd(self) -> None:
        """Eigenvalue PSD check; O(n^3), so opt-in for large matrices."""
        eig = np.linalg.eigvalsh((self.entries + self.entries.T) / 2.0)
        if eig[0] < -self.tolerance * max(abs(eig[-1]), 1.0):
            raise ValidationError(
                f"Gram matrix is not positive semidefinite (lambda_min={eig[0]:g})"
            )


@dataclass(frozen=True)
class TipDistributionSpec:
    """Law of the cone tip along the pair axis.

    variant:
      * ``uniform_range``    -- uniform over the range of the projections.
      * ``uniform_robust``   -- uniform centred at the anchor, half-width
        ``c`` times the Winsorized sd of the projections.
      * ``uniform_fixed``    -- one uniform on [a, b] shared by all pairs;
        with a = b = None the engine substitutes the global projection
        range envelope (the non-adaptive variant).
      * ``normal_adaptive``  -- normal centred at the anchor with sd ``c``
        times the Winsorized sd of the projections (the adaptive default).
    """

    variant: str = "normal_adaptive"
    c: float | None = None
    a: float | None = None
    b: float | None = None

    VARIANTS = ("uniform_range", "uniform_robust", "uniform_fixed", "normal_adaptive")

    def __post_init__(self) -> None:
        if self.variant not in self.VARIANTS:
            raise ValidationError(f"unknown tip distribution {self.variant!r}")
        if self.c is not None and self.c <= 0:
            raise ValidationError("tip distribution scale c must be positive")
        if self.variant == "uniform_fixed":
            if (self.a is None) != (self.b is None):
                raise ValidationError("uniform_fixed needs both a and b, or neither")
            if self.a is not None and not self.a < self.b:
                raise ValidationError("uniform_fixed requires a < b")
        elif self.a is not None or self.b is not None:
            raise ValidationError("a/b only apply to uniform_fixed")

    def to_dict(self) -> dict:
        return {"variant": self.variant, "c": self.c, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "TipDistributionSpec":
        return cls(
            variant=d.get("variant", "normal_adaptive"),
            c=d.get("c"),
            a=d.get("a"),
            b=d.get("b"),
        )


@dataclass(frozen=True)
class Config:
    """Run configuration; the JSON config file mirrors these fields."""

    angles: tuple[float, ...] = DEFAULT_ANGLES
    n_pairs: int = 40
    m_tips: int = 100
    anchor: str = "midpoint"
    tip_distribution: TipDistributionSpec = field(default_factory=TipDistributionSpec)
    seed: int = 0
    delta_grid_size: int | None = None
    smoothing_window_fraction: float = 0.05
    winsorize_per_side: int = 3
    normal_variance_scale: float = 1.0

    def __post_init__(self) -> None:
        angles = tuple(float(a) for a in self.angles)
        if not angles or len(angles) > 64:
            raise ValidationError("need between 1 and 64 opening angles")
        if any(not 0.0 < a < math.pi / 2 for a in angles):
            raise ValidationError("opening angles must lie in (0, pi/2)")
        object.__setattr__(self, "angles", angles)
        if self.n_pairs < 1:
            raise ValidationError("n_pairs must be at least 1")
        if self.m_tips < 5:
            raise ValidationError("m_tips must be at least 5")
        if self.anchor not in ("midpoint", "self"):
            raise ValidationError(f"unknown anchor kind {self.anchor!r}")
        if not 0.0 <= self.smoothing_window_fraction <= 0.5:
            raise ValidationError("smoothing_window_fraction must be in [0, 0.5]")
        if self.winsorize_per_side < 0:
            raise ValidationError("winsorize_per_side must be nonnegative")
        if self.normal_variance_scale <= 0:
            raise ValidationError("normal_variance_scale must be positive")
        if self.delta_grid_size is not None and self.delta_grid_size < 2:
            raise ValidationError("delta_grid_size must be at least 2")

    @property
    def grid_size(self) -> int:
        return self.delta_grid_size or self.m_tips

    @property
    def tip_scale(self) -> float:
        """Resolved scale constant c for adaptive tip distributions."""
        if self.tip_distribution.c is not None:
            return self.tip_distribution.c
        return self.normal_variance_scale

    def to_dict(self) -> dict:
        return {
            "angles": list(self.angles),
            "n_pairs": self.n_pairs,
            "m_tips": self.m_tips,
            "anchor": self.anchor,
            "tip_distribution": self.tip_distribution.to_dict(),
            "seed": self.seed,
            "delta_grid_size": self.delta_grid_size,
            "smoothing_window_fraction": self.smoothing_window_fraction,
            "winsorize_per_side": self.winsorize_per_side,
            "normal_variance_scale": self.normal_variance_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        d = dict(d)
        tip = d.pop("tip_distribution", None)
        kwargs = {k: v for k, v in d.items() if v is not None or k == "delta_grid_size"}
        if tip is not None:
            kwargs["tip_distribution"] = TipDistributionSpec.from_dict(tip)
        if "angles" in kwargs:
            kwargs["angles"] = tuple(kwargs["angles"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "Config":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, **kwargs) -> "Config":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class PairPlan:
    """Per-observation partner lists, fully determined by (seed, n, n_pairs)."""

    seed: int
    n: int
    n_pairs: int
    partners: tuple[tuple[int, ...], ...]

    def reserve(self, i: int) -> tuple[int, ...]:
        """Replacement partners for observation i, used when a planned pair
        is degenerate; a deterministic shuffle of the unused candidates."""
        used = set(self.partners[i])
        rest = np.array([j for j in range(self.n) if j != i and j not in used])
        if rest.size == 0:
            return ()
        rng = substream(self.seed, STREAM_PAIR_RESERVE, i)
        return tuple(int(j) for j in rng.permutation(rest))


def sample_pairs(n: int, cfg: Config) -> PairPlan:
    """Draw min(n_pairs, n-1) distinct partners per observation.

    The stream for observation i depends only on (seed, i), so the plan is
    independent of evaluation order and of how many observations exist
    above i.
    """
    if n < 2:
        raise ValidationError("pair sampling needs at least 2 observations")
    k = min(cfg.n_pairs, n - 1)
    partners = []
    for i in range(n):
        candidates = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        rng = substream(cfg.seed, STREAM_PAIRS, i)
        chosen = rng.choice(candidates, size=k, replace=False)
        partners.append(tuple(int(j) for j in chosen))
    return PairPlan(seed=cfg.seed, n=n, n_pairs=cfg.n_pairs, partners=tuple(partners))


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric cell at row {row}, column {col}: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite cell at row {row}, column {col}: {text!r}")
    return value


def load_dataset(
    path: str | Path,
    has_header: bool = False,
    id_column: str | int | None = None,
    label_column: str | int | None = None,
) -> Dataset:
    """Read a CSV of reals into a Dataset.

    ``id_column`` / ``label_column`` select columns by header name (when
    ``has_header``) or 0-based position.  Remaining columns become the
    coordinates; without an id column, ids are the row indices as strings.
    """
    path = Path(path)
    if not path.exists():
        raise DQFError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParseError(f"empty CSV: {path}")

    header: list[str] | None = None
    if has_header:
        header, rows = rows[0], rows[1:]

    def resolve(col: str | int | None) -> int | None:
        if col is None:
            return None
        if isinstance(col, int):
            return col
        if header is None:
            raise DQFError(f"column {col!r} referenced by name but file has no header")
        try:
            return header.index(col)
        except ValueError:
            raise DQFError(f"no column named {col!r} in {path}") from None

    id_idx = resolve(id_column)
    label_idx = resolve(label_column)
    width = len(rows[0])
    coord_cols = [k for k in range(width) if k not in (id_idx, label_idx)]

    ids, labels, data = [], [], []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {r} has {len(row)} cells, expected {width}")
        ids.append(row[id_idx].strip() if id_idx is not None else str(r))
        if label_idx is not None:
            labels.append(int(_parse_cell(row[label_idx], r, label_idx)))
        data.append([_parse_cell(row[k], r, k) for k in coord_cols])

    return Dataset(
        ids=tuple(ids),
        coords=np.array(data, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
    )


def load_gram(path: str | Path, tolerance: float = 1e-8, check_psd: bool = True) -> GramMatrix:
    """Read a square CSV of inner products; PSD check is skippable for large n."""
    path = Path(path)
    if not path.exists():
        raise DQFError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    data = [[_parse_cell(cell, r, c) for c, cell in enumerate(row)] for r, row in enumerate(rows)]
    gm = GramMatrix(entries=np.array(data, dtype=np.float64), tolerance=tolerance)
    if check_psd:
        gm.check_psd()
    return gm


def load_labels(path: str | Path) -> np.ndarray:
    """Read a single-column CSV of 0/1 labels."""
    path = Path(path)
    if not path.exists():
        raise DQFError(f"labels file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    values = [int(_parse_cell(row[0], r, 0)) for r, row in enumerate(rows)]
    labels = np.array(values, dtype=np.int64)
    if not np.isin(labels, (0, 1)).all():
        raise ValidationError("labels must be 0 or 1")
    return labels


def z_scale(ds: Dataset) -> Dataset:
    """Standardize each coordinate column to mean 0, sd 1 (divisor n-1).

    Constant columns cannot be standardized; they are mapped to all zeros
    and reported through a warning.
    """
    if ds.coords is None:
        raise UnsupportedOperationError("z-scaling does not apply in Gram-only mode")
    coords = ds.coords
    means = coords.mean(axis=0)
    sds = coords.std(axis=0, ddof=1)
    constant = np.flatnonzero(sds == 0.0)
    if constant.size:
        warnings.warn(
            f"constant columns {constant.tolist()} mapped to 0 during z-scaling",
            stacklevel=2,
        )
    safe = np.where(sds == 0.0, 1.0, sds)
    scaled = (coords - means) / safe
    scaled[:, constant] = 0.0
    return Dataset(ids=ds.ids, coords=scaled, labels=ds.labels, scaled=True)
