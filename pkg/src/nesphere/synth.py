"""Synthetic spaces with planted entity clusters and known cross-space maps."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, Field, model_validator

from .dictionary import NeDictionary, NeType, write_dictionary
from .embeddings import EmbeddingSpace, distances, save_embeddings
from .hypersphere import Hypersphere, save_sphere
from .mapping import SeedPairs, write_seed_pairs

logger = logging.getLogger(__name__)

GROUND_TRUTH_QUANTILE = 0.95


class ClusterSpec(BaseModel):
    members: int = Field(100, ge=1)
    spread: float = Field(1.0, gt=0)


class TransformSpec(BaseModel):
    scale: float = Field(1.0, gt=0)
    rotate: bool = True
    permute: bool = False


class SynthSpec(BaseModel):
    dim: int = Field(16, ge=1)
    vocab_size: int | None = Field(None, ge=1)
    clusters: dict[NeType, ClusterSpec] = {t: ClusterSpec() for t in NeType}
    background: int = Field(1000, ge=0)
    center_scale: float = Field(5.0, gt=0)
    background_extent: float = Field(10.0, gt=0)
    transform: TransformSpec | None = None
    noise_sigma: float = Field(0.0, ge=0)
    seed: int = 42

    @model_validator(mode="after")
    def _check_counts(self) -> "SynthSpec":
        total = sum(c.members for c in self.clusters.values()) + self.background
        if self.vocab_size is not None and total > self.vocab_size:
            raise ValueError(f"{total} members and background words exceed vocab_size {self.vocab_size}")
        if total == 0:
            raise ValueError("Spec generates no words")
        return self


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from a QR decomposition."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1
    return q * signs


def generate_space(spec: SynthSpec) -> tuple[EmbeddingSpace, NeDictionary, dict[NeType, Hypersphere]]:
    rng = np.random.default_rng(spec.seed)
    tokens: list[str] = []
    blocks: list[np.ndarray] = []
    entries: dict[NeType, frozenset] = {}
    truth: dict[NeType, Hypersphere] = {}

    for ne_type in NeType:
        cluster = spec.clusters.get(ne_type)
        if cluster is None:
            continue
        center = rng.normal(0.0, spec.center_scale, spec.dim)
        members = center + rng.normal(0.0, cluster.spread, (cluster.members, spec.dim))
        names = [f"{ne_type.value}_{i}" for i in range(cluster.members)]
        radius = float(np.quantile(distances(members, center), GROUND_TRUTH_QUANTILE))
        truth[ne_type] = Hypersphere(center, radius, ne_type)
        entries[ne_type] = frozenset((name,) for name in names)
        tokens.extend(names)
        blocks.append(members)
        logger.info("Planted %s: %d members, ground-truth radius %.6g", ne_type.value, cluster.members, radius)

    extent = spec.background_extent
    blocks.append(rng.uniform(-extent, extent, (spec.background, spec.dim)))
    tokens.extend(f"bg_{i}" for i in range(spec.background))

    space = EmbeddingSpace(tokens=tuple(tokens), matrix=np.vstack(blocks), language_tag="src")
    return space, NeDictionary(entries, language_tag="src"), truth


def transform_matrix(transform: TransformSpec, dim: int, seed: int) -> np.ndarray:
    """The row-convention map ``W`` with ``z = x @ W`` planted by ``derive_target_space``."""
    rng = np.random.default_rng([seed, 1])
    rotation = random_rotation(dim, rng) if transform.rotate else np.eye(dim)
    return transform.scale * rotation.T


def derive_target_space(
    space: EmbeddingSpace,
    transform: TransformSpec,
    seed: int,
    noise_sigma: float = 0.0,
) -> tuple[EmbeddingSpace, SeedPairs]:
    """``z = s·R·x + noise``; target tokens carry a ``_t`` suffix."""
    w = transform_matrix(transform, space.dim, seed)
    rng = np.random.default_rng([seed, 2])
    matrix = space.matrix @ w
    if noise_sigma > 0:
        matrix = matrix + rng.normal(0.0, noise_sigma, matrix.shape)
    tokens = [f"{t}_t" for t in space.tokens]
    if transform.permute:
        order = rng.permutation(len(tokens))
        matrix = matrix[order]
        tokens = [tokens[i] for i in order]
    seeds = SeedPairs(tuple((t, f"{t}_t") for t in space.tokens))
    target = EmbeddingSpace(tokens=tuple(tokens), matrix=matrix, language_tag="tgt")
    return target, seeds


def map_truth(sphere: Hypersphere, transform: TransformSpec, seed: int) -> Hypersphere:
    """A source-space sphere carried through the planted similarity."""
    w = transform_matrix(transform, sphere.dim, seed)
    return Hypersphere(sphere.center @ w, transform.scale * sphere.radius, sphere.ne_type)


def write_synth_bundle(spec: SynthSpec, out_dir: str | Path, seed_count: int | None = 24) -> dict[str, Path]:
    """Write every file the CLI consumes for one synthetic benchmark."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    space, dictionary, truth = generate_space(spec)
    paths: dict[str, Path] = {"source": out / "source.txt"}
    save_embeddings(space, paths["source"])

    for ne_type, sphere in truth.items():
        paths[f"dict_{ne_type.value}"] = out / f"dict_{ne_type.value}.txt"
        write_dictionary(dictionary, ne_type, paths[f"dict_{ne_type.value}"])
        paths[f"source_{ne_type.value}"] = out / f"source_{ne_type.value}.sphere"
        save_sphere(sphere, paths[f"source_{ne_type.value}"])

    if spec.transform is not None:
        target, seeds = derive_target_space(space, spec.transform, spec.seed, spec.noise_sigma)
        paths["target"] = out / "target.txt"
        save_embeddings(target, paths["target"])
        if seed_count is not None:
            seeds = seeds.sample(seed_count, spec.seed)
        paths["seeds"] = out / "seeds.tsv"
        write_seed_pairs(seeds, paths["seeds"])
        for ne_type, sphere in truth.items():
            paths[f"target_{ne_type.value}"] = out / f"target_{ne_type.value}.sphere"
            save_sphere(map_truth(sphere, spec.transform, spec.seed), paths[f"target_{ne_type.value}"])

    paths["spec"] = out / "spec.yaml"
    with open(paths["spec"], "w", encoding="utf-8") as f:
        yaml.safe_dump(spec.model_dump(mode="json"), f, sort_keys=False)
    logger.info("Wrote synthetic bundle with %d files to %s", len(paths), out)
    return paths
