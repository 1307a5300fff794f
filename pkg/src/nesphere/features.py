"""Per-token distance features for downstream taggers.

Each vocabulary token gets one z-scored distance per entity type, taken to
that type's sphere centre and normalised over the whole vocabulary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .dictionary import NeType
from .embeddings import EmbeddingSpace, distances
from .errors import DataError, DimensionMismatchError
from .hypersphere import Hypersphere

logger = logging.getLogger(__name__)

FEATURE_HEADER = "token\tz_per\tz_loc\tz_org"
# Spreads this small relative to the mean distance are rounding noise.
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class FeatureRow:
    token: str
    z_per: float
    z_loc: float
    z_org: float


@dataclass(frozen=True)
class FeatureTable:
    rows: list[FeatureRow]
    degenerate: frozenset[NeType] = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.rows)


def compute_features(space: EmbeddingSpace, spheres: Mapping[NeType, Hypersphere]) -> FeatureTable:
    missing = [t.value for t in NeType if t not in spheres]
    if missing:
        raise DataError(f"Missing spheres for: {', '.join(missing)}")
    for ne_type, sphere in spheres.items():
        if sphere.dim != space.dim:
            raise DimensionMismatchError(f"{ne_type.value} sphere dimension {sphere.dim} vs space {space.dim}")

    columns: dict[NeType, np.ndarray] = {}
    degenerate = set()
    for ne_type in NeType:
        d = distances(space.matrix, spheres[ne_type].center)
        sigma = d.std() if len(d) else 0.0
        scale = max(1.0, float(d.mean())) if len(d) else 1.0
        if sigma <= DEGENERATE_RTOL * scale:
            logger.warning("%s distances are constant over the vocabulary; column set to 0", ne_type.value)
            degenerate.add(ne_type)
            columns[ne_type] = np.zeros(len(d))
        else:
            columns[ne_type] = (d - d.mean()) / sigma

    order = sorted(range(len(space)), key=space.tokens.__getitem__)
    rows = [
        FeatureRow(
            token=space.tokens[i],
            z_per=float(columns[NeType.PER][i]),
            z_loc=float(columns[NeType.LOC][i]),
            z_org=float(columns[NeType.ORG][i]),
        )
        for i in order
    ]
    return FeatureTable(rows=rows, degenerate=frozenset(degenerate))


def export_features(rows, path: str | Path, header: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header:
            f.write(header + "\n")
        f.write(FEATURE_HEADER + "\n")
        for row in rows:
            f.write(f"{row.token}\t{row.z_per:.6f}\t{row.z_loc:.6f}\t{row.z_org:.6f}\n")


def read_features(path: str | Path) -> list[FeatureRow]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#") or line == FEATURE_HEADER:
            continue
        token, *values = line.split("\t")
        if len(values) != 3:
            raise DataError(f"{path}: malformed feature row {line!r}")
        rows.append(FeatureRow(token, *(float(v) for v in values)))
    return rows
