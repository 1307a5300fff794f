"""Cross-lingual projection of hyperspheres.

Maps use the row-vector convention throughout: a source vector ``x`` maps to
``x @ W``, so ``W`` is ``d_source x d_target`` and solves ``XW = Z``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.linalg
from scipy.optimize import least_squares

from .embeddings import EmbeddingSpace, distances, nearest_neighbors
from .errors import ConvergenceError, DataError, DimensionMismatchError, SeedPairError, SingularSystemError
from .hypersphere import Hypersphere

logger = logging.getLogger(__name__)

CANDIDATE_HEADER = "rank\ttoken\tdistance\tinside"
FALLBACK_MAX_ITERATIONS = 100


@dataclass(frozen=True)
class SeedPairs:
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.pairs:
            raise SeedPairError("Seed pair list is empty")
        object.__setattr__(self, "pairs", tuple((s, t) for s, t in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def sample(self, count: int, seed: int) -> "SeedPairs":
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(self.pairs), size=min(count, len(self.pairs)), replace=False)
        return SeedPairs(tuple(self.pairs[i] for i in sorted(chosen)))

    def resolve(self, source: EmbeddingSpace, target: EmbeddingSpace) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (X, Z) for the pairs whose two tokens both have vectors."""
        xs, zs = [], []
        for s, t in self.pairs:
            if s in source and t in target:
                xs.append(source.vector(s))
                zs.append(target.vector(t))
        missing = len(self.pairs) - len(xs)
        if missing:
            logger.warning("%d of %d seed pairs not resolvable, skipped", missing, len(self.pairs))
        if not xs:
            raise SeedPairError("No seed pair resolves in both spaces")
        return np.vstack(xs), np.vstack(zs)


def load_seed_pairs(path: str | Path) -> SeedPairs:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise SeedPairError(f"{path}:{lineno}: expected 'source<TAB>target'")
        pairs.append((fields[0].strip(), fields[1].strip()))
    return SeedPairs(tuple(pairs))


def write_seed_pairs(seeds: SeedPairs, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s, t in seeds.pairs:
            f.write(f"{s}\t{t}\n")


@dataclass(frozen=True, eq=False)
class LinearMap:
    matrix: np.ndarray
    resolved_pairs: int = 0

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or not np.isfinite(matrix).all():
            raise DataError("Linear map must be a finite 2-D matrix")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, dim: int) -> "LinearMap":
        return cls(np.eye(dim))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.shape[-1] != self.shape[0]:
            raise DimensionMismatchError(f"Input dimension {points.shape[-1]} vs map rows {self.shape[0]}")
        return points @ self.matrix


def save_linear_map(w: LinearMap, path: str | Path) -> None:
    rows, cols = w.shape
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{rows} {cols}\n")
        for row in w.matrix:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_linear_map(path: str | Path) -> LinearMap:
    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    try:
        rows, cols = (int(v) for v in lines[0].split())
        matrix = np.array([l.split() for l in lines[1:]], dtype=np.float64)
    except (ValueError, IndexError):
        raise DataError(f"{path}: malformed linear map file") from None
    if matrix.shape != (rows, cols):
        raise DimensionMismatchError(f"{path}: header {rows}x{cols}, body {matrix.shape}")
    return LinearMap(matrix)


def _residual(x: np.ndarray, z: np.ndarray, matrix: np.ndarray) -> float:
    diff = x @ matrix - z
    return float((diff * diff).sum())


def learn_linear_map(
    source: EmbeddingSpace, target: EmbeddingSpace, seeds: SeedPairs, ridge: float = 1e-3
) -> LinearMap:
    """Ridge least squares ``(XᵀX + ridge·I) W = XᵀZ`` over the seed pairs."""
    if ridge < 0:
        raise DataError(f"Ridge must be nonnegative, got {ridge}")
    x, z = seeds.resolve(source, target)
    if ridge == 0 and np.linalg.matrix_rank(x) < source.dim:
        raise SingularSystemError(
            f"{len(x)} resolvable seed pairs do not span {source.dim} dimensions; raise the ridge"
        )
    gram = x.T @ x + ridge * np.eye(source.dim)
    try:
        w = scipy.linalg.solve(gram, x.T @ z, assume_a="sym")
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"Normal equations are singular: {e}") from e
    logger.info("Linear map from %d seed pairs, residual %.6g", len(x), _residual(x, z, w))
    return LinearMap(w, resolved_pairs=len(x))


def procrustes(x: np.ndarray, z: np.ndarray) -> LinearMap:
    """Orthogonal ``W`` minimising ``‖XW − Z‖`` (square spaces only)."""
    if x.shape[1] != z.shape[1]:
        raise DimensionMismatchError("Procrustes needs equal dimensions")
    rotation, _ = scipy.linalg.orthogonal_procrustes(x, z)
    return LinearMap(rotation, resolved_pairs=len(x))


def map_center(w: LinearMap, o1: np.ndarray) -> np.ndarray:
    o1 = np.asarray(o1, dtype=np.float64)
    if o1.shape != (w.shape[0],):
        raise DimensionMismatchError(f"Centre length {o1.shape} vs map rows {w.shape[0]}")
    return o1 @ w.matrix


@dataclass(frozen=True, eq=False)
class AffineRefinement:
    mapped_center: np.ndarray
    ratio: float
    mapped_radius: float
    residual: float
    fallback: bool = False


def refine_affine(
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    seeds: SeedPairs,
    source_sphere: Hypersphere,
    init_center: np.ndarray,
) -> AffineRefinement:
    """Find ``O2`` and ``K`` with ``E(O2, Zi) = K·E(O1, Xi)`` for all seeds.

    Squaring and subtracting a pivot equation linearises the system in
    ``(O2, K²)``; a nonlinear least-squares solve on the original residuals
    takes over when that system is rank deficient or yields ``K² <= 0``.
    """
    x, z = seeds.resolve(source, target)
    d_source = distances(x, source_sphere.center)
    keep = d_source > 0
    if not keep.all():
        logger.warning("%d seeds coincide with the source centre, dropped", int((~keep).sum()))
    x, z, d_source = x[keep], z[keep], d_source[keep]
    needed = target.dim + 2
    if len(x) < needed:
        raise SeedPairError(f"Need at least {needed} usable seed pairs, got {len(x)}")

    order = np.argsort(d_source, kind="stable")
    j = order[len(order) // 2]
    others = np.arange(len(x)) != j
    zj, dj = z[j], d_source[j]
    a = np.hstack([2 * (zj - z[others]), (dj**2 - d_source[others] ** 2)[:, None]])
    b = (zj @ zj) - np.einsum("ij,ij->i", z[others], z[others])
    solution, _, rank, _ = scipy.linalg.lstsq(a, b)

    fallback = rank < a.shape[1] or solution[-1] <= 0
    if fallback:
        logger.warning("Linearised affine system unusable (rank %d, K²=%.3g); refining iteratively", rank, solution[-1])
        center, ratio = _refine_nonlinear(z, d_source, np.asarray(init_center, dtype=np.float64))
    else:
        center, ratio = solution[:-1], math.sqrt(solution[-1])

    residuals = distances(z, center) - ratio * d_source
    residual = float(np.sqrt(np.mean(residuals**2)))
    logger.info("Affine refinement: K=%.6g residual=%.6g over %d seeds", ratio, residual, len(x))
    return AffineRefinement(
        mapped_center=center,
        ratio=ratio,
        mapped_radius=ratio * source_sphere.radius,
        residual=residual,
        fallback=fallback,
    )


def _refine_nonlinear(z: np.ndarray, d_source: np.ndarray, init_center: np.ndarray) -> tuple[np.ndarray, float]:
    k0 = float(np.median(distances(z, init_center) / d_source))

    def residuals(params):
        return distances(z, params[:-1]) - params[-1] * d_source

    def jacobian(params):
        offsets = params[:-1] - z
        norms = np.maximum(np.linalg.norm(offsets, axis=1), np.finfo(float).tiny)
        return np.hstack([offsets / norms[:, None], -d_source[:, None]])

    # Analytic Jacobian, so max_nfev counts solver iterations.
    result = least_squares(
        residuals, np.append(init_center, k0), jac=jacobian, method="lm", max_nfev=FALLBACK_MAX_ITERATIONS
    )
    if not result.success or result.x[-1] <= 0:
        raise ConvergenceError(f"Affine refinement did not converge: {result.message}")
    return result.x[:-1], float(result.x[-1])


def map_hypersphere(
    source_sphere: Hypersphere,
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    seeds: SeedPairs,
    ridge: float = 1e-3,
) -> Hypersphere:
    w = learn_linear_map(source, target, seeds, ridge)
    init_center = map_center(w, source_sphere.center)
    refined = refine_affine(source, target, seeds, source_sphere, init_center)
    return Hypersphere(refined.mapped_center, refined.mapped_radius, source_sphere.ne_type)


def map_hypersphere_linear(source_sphere: Hypersphere, w: LinearMap) -> Hypersphere:
    """Project a sphere through a map alone; the radius scales by the
    geometric mean of the singular values of ``W``."""
    singular = np.linalg.svd(w.matrix, compute_uv=False)
    if singular.min() <= 0:
        raise SingularSystemError("Linear map is rank deficient; cannot scale the radius")
    scale = float(np.exp(np.mean(np.log(singular))))
    return Hypersphere(map_center(w, source_sphere.center), scale * source_sphere.radius, source_sphere.ne_type)


def candidate_entities(target: EmbeddingSpace, mapped_sphere: Hypersphere, n: int) -> list[tuple[str, float, bool]]:
    """The ``n`` vocabulary tokens nearest the mapped centre."""
    if mapped_sphere.dim != target.dim:
        raise DimensionMismatchError(f"Sphere dimension {mapped_sphere.dim} vs space dimension {target.dim}")
    neighbors = nearest_neighbors(target, mapped_sphere.center, n)
    return [(token, d, d <= mapped_sphere.radius) for token, d in neighbors]


def candidate_precision(
    candidates: list[tuple[str, float, bool]],
    entries: Iterable[tuple[str, ...]],
    cutoffs: Iterable[int] = (25, 50, 75, 100),
) -> dict[int, float]:
    """Share of the top-k candidates that are dictionary entries."""
    known = {" ".join(p) for p in entries} | {"_".join(p) for p in entries}
    hits = np.cumsum([token in known for token, _, _ in candidates])
    precision = {}
    for k in cutoffs:
        if 0 < k <= len(candidates):
            precision[k] = float(hits[k - 1] / k)
    return precision


def candidate_rows(candidates: list[tuple[str, float, bool]]) -> list[str]:
    return [f"{rank}\t{token}\t{d!r}\t{int(inside)}" for rank, (token, d, inside) in enumerate(candidates, start=1)]
