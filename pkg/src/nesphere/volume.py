"""Geometric evaluation of a mapped sphere against the true target sphere.

Precision is the share of the mapped ball's volume inside the target ball,
recall the share of the target ball inside the mapped one. Both are estimated
by Monte Carlo and can be checked against a closed form built from
hyperspherical caps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import betainc, gammaln

from .embeddings import distances
from .errors import DataError, DimensionMismatchError
from .hypersphere import Hypersphere

logger = logging.getLogger(__name__)

OVERLAP_HEADER = "v_target\tv_mapped\tv_intersection\tprecision\trecall\tf1\tstderr_f1"

# Below this share of the union box inside the smaller ball, box hits are too sparse to estimate.
BOX_MIN_FILL = 0.05


class Sampler(str, Enum):
    AUTO = "auto"
    BOUNDING_BOX = "bounding-box"
    BALL = "ball"


class McConfig(BaseModel):
    samples: int = Field(1_000_000, ge=1)
    seed: int = 42
    sampler: Sampler = Sampler.AUTO
    chunk_size: int = Field(100_000, ge=1)


@dataclass(frozen=True)
class OverlapReport:
    v_target: float
    v_mapped: float
    v_intersection: float
    precision: float
    recall: float
    f1: float
    std_error: dict[str, float] = field(default_factory=dict)
    hits: dict[str, int] = field(default_factory=dict)
    degenerate: bool = False

    def to_row(self) -> str:
        values = (
            self.v_target, self.v_mapped, self.v_intersection,
            self.precision, self.recall, self.f1, self.std_error.get("f1", 0.0),
        )
        return "\t".join(f"{v:.6g}" for v in values)


@dataclass(frozen=True)
class VolumeEstimate:
    volume: float
    std_error: float
    hits: int
    samples: int


def _validate(s1: Hypersphere, s2: Hypersphere, positive: bool = True) -> None:
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"Sphere dimensions differ: {s1.dim} vs {s2.dim}")
    if positive and (s1.radius <= 0 or s2.radius <= 0):
        raise DataError("Overlap needs strictly positive radii")


def _log_ball_volume(radius: float, dim: int) -> float:
    return dim / 2 * math.log(math.pi) - gammaln(dim / 2 + 1) + dim * math.log(radius)


def ball_volume(radius: float, dim: int) -> float:
    if radius <= 0:
        return 0.0
    return math.exp(_log_ball_volume(radius, dim))


def _cap_volume(radius: float, dim: int, offset: float) -> float:
    """Volume of the part of a ball beyond a hyperplane at ``offset`` from its centre."""
    if offset >= radius:
        return 0.0
    if offset <= -radius:
        return ball_volume(radius, dim)
    half = 0.5 * ball_volume(radius, dim) * betainc((dim + 1) / 2, 0.5, 1 - (offset / radius) ** 2)
    return half if offset >= 0 else ball_volume(radius, dim) - half


def analytic_two_ball_intersection(s1: Hypersphere, s2: Hypersphere) -> float:
    _validate(s1, s2, positive=False)
    r1, r2 = s1.radius, s2.radius
    gap = float(distances(s1.center, s2.center)[0])
    if gap >= r1 + r2:
        return 0.0
    if gap <= abs(r1 - r2):
        return ball_volume(min(r1, r2), s1.dim)
    # Radical hyperplane, measured from each centre towards the other.
    c1 = (gap**2 + r1**2 - r2**2) / (2 * gap)
    return _cap_volume(r1, s1.dim, c1) + _cap_volume(r2, s1.dim, gap - c1)


def analytic_overlap(target: Hypersphere, mapped: Hypersphere) -> OverlapReport:
    _validate(target, mapped)
    v_t, v_m = ball_volume(target.radius, target.dim), ball_volume(mapped.radius, mapped.dim)
    v_i = min(analytic_two_ball_intersection(target, mapped), v_t, v_m)
    precision, recall = v_i / v_m, v_i / v_t
    f1 = 2 * v_i / (v_t + v_m)
    return OverlapReport(v_t, v_m, v_i, precision, recall, f1)


def _chunks(total: int, size: int) -> list[int]:
    full, rest = divmod(total, size)
    return [size] * full + ([rest] if rest else [])


def _uniform_box(rng: np.random.Generator, low: np.ndarray, high: np.ndarray, n: int) -> np.ndarray:
    return rng.uniform(low, high, size=(n, len(low)))


def _uniform_ball(rng: np.random.Generator, sphere: Hypersphere, n: int) -> np.ndarray:
    direction = rng.standard_normal((n, sphere.dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = sphere.radius * rng.random(n) ** (1.0 / sphere.dim)
    return sphere.center + direction * radius[:, None]


def _rate(numerator: int, denominator: int) -> tuple[float, float]:
    if denominator == 0:
        return 0.0, 0.0
    p = numerator / denominator
    return p, math.sqrt(p * (1 - p) / denominator)


def _union_box(target: Hypersphere, mapped: Hypersphere) -> tuple[np.ndarray, np.ndarray]:
    low = np.minimum(target.center - target.radius, mapped.center - mapped.radius)
    high = np.maximum(target.center + target.radius, mapped.center + mapped.radius)
    return low, high


def box_fill(target: Hypersphere, mapped: Hypersphere) -> float:
    """Share of the union bounding box taken up by the smaller ball."""
    low, high = _union_box(target, mapped)
    small = min(target.radius, mapped.radius)
    return math.exp(_log_ball_volume(small, target.dim) - float(np.log(high - low).sum()))


def resolve_sampler(target: Hypersphere, mapped: Hypersphere, sampler: Sampler) -> Sampler:
    fill = box_fill(target, mapped)
    if sampler is Sampler.AUTO:
        resolved = Sampler.BOUNDING_BOX if fill >= BOX_MIN_FILL else Sampler.BALL
        logger.debug("Box fill %.3g in %d dimensions; sampling with %s", fill, target.dim, resolved.value)
        return resolved
    if sampler is Sampler.BOUNDING_BOX and fill < BOX_MIN_FILL:
        logger.warning("Only %.3g of the bounding box lies in the smaller ball; box estimates will be noisy", fill)
    return sampler


def mc_overlap(target: Hypersphere, mapped: Hypersphere, config: McConfig | None = None) -> OverlapReport:
    config = config or McConfig()
    _validate(target, mapped)
    if resolve_sampler(target, mapped, config.sampler) is Sampler.BALL:
        return _overlap_in_balls(target, mapped, config)
    return _overlap_in_box(target, mapped, config)


def _overlap_in_box(target: Hypersphere, mapped: Hypersphere, config: McConfig) -> OverlapReport:
    low, high = _union_box(target, mapped)
    box = float(np.prod(high - low))

    sizes = _chunks(config.samples, config.chunk_size)
    in_target = in_mapped = in_both = 0
    for n, child in zip(sizes, np.random.SeedSequence(config.seed).spawn(len(sizes))):
        points = _uniform_box(np.random.default_rng(child), low, high, n)
        t = distances(points, target.center) <= target.radius
        m = distances(points, mapped.center) <= mapped.radius
        in_target += int(t.sum())
        in_mapped += int(m.sum())
        in_both += int((t & m).sum())
    logger.info("Box sampling: %d points, hits target=%d mapped=%d both=%d", config.samples, in_target, in_mapped, in_both)

    degenerate = in_target == 0 or in_mapped == 0
    if degenerate:
        logger.warning("A sphere received no samples; its rates are reported as 0")
    precision, se_p = _rate(in_both, in_mapped)
    recall, se_r = _rate(in_both, in_target)
    f1 = 2 * in_both / (in_target + in_mapped) if in_target + in_mapped else 0.0

    # F1 = 2h / (h + u) with h ~ Binomial(u, h/u) given the union count u.
    union = in_target + in_mapped - in_both
    _, se_share = _rate(in_both, union)
    se_f1 = 2 * union / (in_both + union) ** 2 * union * se_share if union else 0.0

    n = config.samples
    vol = {name: box * hits / n for name, hits in (("target", in_target), ("mapped", in_mapped), ("both", in_both))}
    se_vol = {
        name: box * math.sqrt((hits / n) * (1 - hits / n) / n)
        for name, hits in (("target", in_target), ("mapped", in_mapped), ("both", in_both))
    }
    return OverlapReport(
        v_target=vol["target"],
        v_mapped=vol["mapped"],
        v_intersection=vol["both"],
        precision=precision,
        recall=recall,
        f1=f1,
        std_error={
            "v_target": se_vol["target"],
            "v_mapped": se_vol["mapped"],
            "v_intersection": se_vol["both"],
            "precision": se_p,
            "recall": se_r,
            "f1": se_f1,
        },
        hits={"target": in_target, "mapped": in_mapped, "both": in_both, "samples": n},
        degenerate=degenerate,
    )


def _share_inside(source: Hypersphere, other: Hypersphere, total: int, chunk_size: int, seq) -> int:
    sizes = _chunks(total, chunk_size)
    hits = 0
    for n, child in zip(sizes, seq.spawn(len(sizes))):
        points = _uniform_ball(np.random.default_rng(child), source, n)
        hits += int((distances(points, other.center) <= other.radius).sum())
    return hits


def _overlap_in_balls(target: Hypersphere, mapped: Hypersphere, config: McConfig) -> OverlapReport:
    n_target = config.samples // 2
    n_mapped = config.samples - n_target
    seq_target, seq_mapped = np.random.SeedSequence(config.seed).spawn(2)
    mapped_in_target = _share_inside(mapped, target, n_mapped, config.chunk_size, seq_mapped)
    target_in_mapped = _share_inside(target, mapped, n_target, config.chunk_size, seq_target)
    logger.info(
        "Ball sampling: %d/%d mapped samples in target, %d/%d target samples in mapped",
        mapped_in_target, n_mapped, target_in_mapped, n_target,
    )

    precision, se_p = _rate(mapped_in_target, n_mapped)
    recall, se_r = _rate(target_in_mapped, n_target)
    degenerate = n_target == 0 or n_mapped == 0
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
        grad_p = 2 * recall**2 / (precision + recall) ** 2
        grad_r = 2 * precision**2 / (precision + recall) ** 2
        se_f1 = math.hypot(grad_p * se_p, grad_r * se_r)
    else:
        f1 = se_f1 = 0.0

    v_t, v_m = ball_volume(target.radius, target.dim), ball_volume(mapped.radius, mapped.dim)
    v_i = 0.5 * (precision * v_m + recall * v_t)
    return OverlapReport(
        v_target=v_t,
        v_mapped=v_m,
        v_intersection=min(v_i, v_t, v_m),
        precision=precision,
        recall=recall,
        f1=f1,
        std_error={
            "v_target": 0.0,
            "v_mapped": 0.0,
            "v_intersection": 0.5 * math.hypot(se_p * v_m, se_r * v_t),
            "precision": se_p,
            "recall": se_r,
            "f1": se_f1,
        },
        hits={"mapped_in_target": mapped_in_target, "target_in_mapped": target_in_mapped, "samples": config.samples},
        degenerate=degenerate,
    )


def mc_ball_volume(sphere: Hypersphere, config: McConfig | None = None) -> VolumeEstimate:
    """Hit-or-miss volume of one ball inside its own bounding box."""
    config = config or McConfig()
    if sphere.radius <= 0:
        raise DataError("Volume estimate needs a positive radius")
    low, high = sphere.center - sphere.radius, sphere.center + sphere.radius
    box = (2 * sphere.radius) ** sphere.dim

    sizes = _chunks(config.samples, config.chunk_size)
    hits = 0
    for n, child in zip(sizes, np.random.SeedSequence(config.seed).spawn(len(sizes))):
        points = _uniform_box(np.random.default_rng(child), low, high, n)
        hits += int((distances(points, sphere.center) <= sphere.radius).sum())
    # Agresti-Coull error, nonzero even when the ball gets no hits.
    n = config.samples
    smoothed = (hits + 2) / (n + 4)
    return VolumeEstimate(
        volume=box * hits / n,
        std_error=box * math.sqrt(smoothed * (1 - smoothed) / (n + 4)),
        hits=hits,
        samples=config.samples,
    )

