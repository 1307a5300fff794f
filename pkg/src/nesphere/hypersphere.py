"""The open NE model: a centre and a radius per entity type.

A token is an NE of a type when its vector lies within the radius of that
type's centre (boundary inclusive). Fitting picks the centre as the mean of
the dictionary vectors and scans radii for the best F1, optionally discarding
far dictionary entries and re-centring.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from pydantic import BaseModel, Field, field_validator

from .dictionary import NeType, resolve_phrases
from .embeddings import EmbeddingSpace, Phrase, distances, euclidean_distance
from .errors import DataError, DimensionMismatchError, FitError

logger = logging.getLogger(__name__)

EVAL_HEADER = "type\ttp\tfp\tfn\tprecision\trecall\tf1"


class RadiusCandidates(str, Enum):
    TRAIN_DISTANCES = "train-distances"
    UNIFORM_GRID = "uniform-grid"


class FitConfig(BaseModel):
    """Search space of the centre/radius fit.

    Outlier thresholds come from ``q_grid`` (absolute distances) when given,
    otherwise from quantiles of the current train distances.
    """

    q_quantiles: list[float] = [0.90, 0.95, 0.99, 1.0]
    q_grid: list[float] | None = None
    max_iterations: int = Field(20, ge=1)
    f1_tolerance: float = Field(1e-4, gt=0)
    radius_candidates: RadiusCandidates = RadiusCandidates.TRAIN_DISTANCES
    grid_size: int = Field(100, ge=2)

    @field_validator("q_quantiles")
    @classmethod
    def _check_quantiles(cls, value: list[float]) -> list[float]:
        if not value or any(not 0 < q <= 1 for q in value):
            raise ValueError("q_quantiles must be a nonempty list of values in (0, 1]")
        return value

    @field_validator("q_grid")
    @classmethod
    def _check_grid(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and (not value or any(q <= 0 for q in value)):
            raise ValueError("q_grid must be a nonempty list of positive distances")
        return value

    def thresholds(self, train_distances: np.ndarray) -> list[float]:
        if self.q_grid is not None:
            return sorted(set(self.q_grid))
        return sorted({float(np.quantile(train_distances, q)) for q in self.q_quantiles})

    def radii(self, train_distances: np.ndarray) -> np.ndarray:
        if self.radius_candidates is RadiusCandidates.UNIFORM_GRID:
            return np.linspace(train_distances.min(), train_distances.max(), self.grid_size)
        return np.unique(train_distances)


@dataclass(frozen=True, eq=False)
class Hypersphere:
    center: np.ndarray
    radius: float
    ne_type: NeType

    def __post_init__(self):
        center = np.array(self.center, dtype=np.float64)
        if center.ndim != 1 or center.size == 0 or not np.isfinite(center).all():
            raise DataError("Sphere centre must be a nonempty finite vector")
        if not math.isfinite(self.radius) or self.radius < 0:
            raise DataError(f"Sphere radius must be finite and nonnegative, got {self.radius}")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "ne_type", NeType(self.ne_type))

    @property
    def dim(self) -> int:
        return self.center.size

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"Vector length {x.shape} does not match sphere dimension {self.dim}")
        return x


@dataclass(frozen=True)
class EvalReport:
    true_positive: int
    false_positive: int
    false_negative: int
    unresolved: int = 0

    @property
    def precision(self) -> float:
        predicted = self.true_positive + self.false_positive
        return self.true_positive / predicted if predicted else 0.0

    @property
    def recall(self) -> float:
        actual = self.true_positive + self.false_negative
        return self.true_positive / actual if actual else 0.0

    @property
    def f1(self) -> float:
        return _f1(self.true_positive, self.false_positive, self.false_negative)

    def to_row(self, label: str) -> str:
        return (
            f"{label}\t{self.true_positive}\t{self.false_positive}\t{self.false_negative}"
            f"\t{self.precision:.6f}\t{self.recall:.6f}\t{self.f1:.6f}"
        )


def _f1(tp, fp, fn):
    # Harmonic mean of precision and recall written on counts; exact for
    # scalars and arrays alike.
    denominator = 2 * tp + fp + fn
    if np.isscalar(denominator):
        return 2 * tp / denominator if denominator else 0.0
    return np.divide(2 * tp, denominator, out=np.zeros(len(denominator)), where=denominator > 0)


def contains(sphere: Hypersphere, x: np.ndarray) -> bool:
    return euclidean_distance(sphere._check(x), sphere.center) <= sphere.radius


def ne_likelihood(sphere: Hypersphere, x: np.ndarray) -> float:
    """Distance to the centre; smaller means more NE-like."""
    return euclidean_distance(sphere._check(x), sphere.center)


def classify(spheres: Mapping[NeType, Hypersphere], x: np.ndarray) -> list[NeType]:
    """Types whose sphere contains ``x``, nearest centre first."""
    hits = []
    for ne_type, sphere in spheres.items():
        d = ne_likelihood(sphere, x)
        if d <= sphere.radius:
            hits.append((d, ne_type.value, ne_type))
    return [t for _, _, t in sorted(hits)]


def _surface_forms(phrases: Iterable[Phrase]) -> set[str]:
    forms = set()
    for phrase in phrases:
        forms.add(" ".join(phrase))
        forms.add("_".join(phrase))
    return forms


class _Scorer:
    """Distance tables for scoring many radii around one centre at a time."""

    def __init__(self, space: EmbeddingSpace, entries: Iterable[Phrase], ignore: Iterable[Phrase] = ()):
        entries = frozenset(entries)
        ignore = frozenset(ignore) - entries
        resolved, self.entry_vectors = resolve_phrases(space, entries)
        self.unresolved = len(entries) - len(resolved)
        if self.unresolved:
            logger.info("%d dictionary entries have no vector and are not scored", self.unresolved)
        known = _surface_forms(entries | ignore)
        mask = np.fromiter((t not in known for t in space.tokens), dtype=bool, count=len(space))
        self.negatives = space.matrix[mask]
        self.dim = space.dim

    def counts(self, center: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        entry_d = np.sort(distances(self.entry_vectors, center))
        negative_d = np.sort(distances(self.negatives, center))
        tp = np.searchsorted(entry_d, radii, side="right")
        fp = np.searchsorted(negative_d, radii, side="right")
        fn = len(entry_d) - tp
        return tp, fp, fn

    def report(self, sphere: Hypersphere) -> EvalReport:
        tp, fp, fn = self.counts(sphere.center, np.array([sphere.radius]))
        return EvalReport(int(tp[0]), int(fp[0]), int(fn[0]), unresolved=self.unresolved)


def evaluate_hypersphere(
    sphere: Hypersphere,
    space: EmbeddingSpace,
    dict_entries: Iterable[Phrase],
    ignore: Iterable[Phrase] = (),
) -> EvalReport:
    """Score a sphere against dictionary entries over the whole vocabulary.

    Dictionary entries inside are true positives, outside are false negatives.
    Vocabulary tokens inside whose surface form is not an entry (nor in
    ``ignore``) are false positives.
    """
    if sphere.dim != space.dim:
        raise DimensionMismatchError(f"Sphere dimension {sphere.dim} vs space dimension {space.dim}")
    return _Scorer(space, dict_entries, ignore).report(sphere)


@dataclass(frozen=True, eq=False)
class _Candidate:
    center: np.ndarray
    radius: float
    f1: float
    q: float

    def better_than(self, other: "_Candidate | None") -> bool:
        if other is None:
            return True
        return (-self.f1, self.radius, self.q) < (-other.f1, other.radius, other.q)


def _best_radius(scorer: _Scorer, config: FitConfig, points: np.ndarray, q: float) -> _Candidate:
    center = points.mean(axis=0)
    radii = config.radii(distances(points, center))
    tp, fp, fn = scorer.counts(center, radii)
    f1 = _f1(tp, fp, fn)
    # argmax takes the first maximum, i.e. the smallest radius among ties.
    best = int(np.argmax(f1))
    return _Candidate(center=center, radius=float(radii[best]), f1=float(f1[best]), q=q)


def fit_hypersphere(
    space: EmbeddingSpace,
    train: Iterable[Phrase],
    eval_dict: Iterable[Phrase],
    config: FitConfig | None = None,
    ne_type: NeType = NeType.PER,
    ignore: Iterable[Phrase] = (),
) -> tuple[Hypersphere, EvalReport]:
    config = config or FitConfig()
    _, points = resolve_phrases(space, train)
    if len(points) < 2:
        raise FitError(f"{ne_type.value}: need at least 2 train phrases with vectors, got {len(points)}")

    scorer = _Scorer(space, eval_dict, ignore)
    best = _best_radius(scorer, config, points, q=math.inf)
    logger.info("%s iteration 0: radius=%.6g f1=%.6f", ne_type.value, best.radius, best.f1)

    for iteration in range(1, config.max_iterations + 1):
        train_d = distances(points, best.center)
        round_best = None
        for q in config.thresholds(train_d):
            kept = points[train_d <= q]
            if len(kept) == 0:
                continue
            candidate = _best_radius(scorer, config, kept, q=q)
            if candidate.better_than(round_best):
                round_best = candidate
        if round_best is None:
            break
        improvement = round_best.f1 - best.f1
        if round_best.better_than(best):
            best = round_best
        logger.info(
            "%s iteration %d: q=%.6g radius=%.6g f1=%.6f",
            ne_type.value, iteration, best.q, best.radius, best.f1,
        )
        if improvement < config.f1_tolerance:
            break

    sphere = Hypersphere(center=best.center, radius=best.radius, ne_type=ne_type)
    return sphere, scorer.report(sphere)


def save_sphere(sphere: Hypersphere, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{sphere.ne_type.value} {sphere.dim} {sphere.radius!r}\n")
        f.write(" ".join(repr(float(v)) for v in sphere.center) + "\n")


def load_sphere(path: str | Path) -> Hypersphere:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 2:
        raise DataError(f"{path}: sphere file needs a header and a centre line")
    header = lines[0].split()
    if len(header) != 3:
        raise DataError(f"{path}: malformed sphere header {lines[0]!r}")
    try:
        dim, radius = int(header[1]), float(header[2])
        center = np.array(lines[1].split(), dtype=np.float64)
    except ValueError:
        raise DataError(f"{path}: non-numeric sphere values") from None
    if center.size != dim:
        raise DimensionMismatchError(f"{path}: header dimension {dim}, centre has {center.size}")
    return Hypersphere(center=center, radius=radius, ne_type=NeType.parse(header[0]))
