"""Word-embedding tables: loading, persistence and Euclidean queries."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, DimensionMismatchError, EmbeddingFormatError

logger = logging.getLogger(__name__)

Phrase = tuple[str, ...]


def parse_phrase(text: str) -> Phrase:
    """Split a surface form on whitespace into a phrase."""
    tokens = tuple(text.split())
    if not tokens:
        raise DataError("Empty phrase")
    return tokens


def distances(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Euclidean distance of every row of ``points`` to ``center``.

    All distance computations in the package go through here so that boundary
    checks agree bit for bit.
    """
    diff = np.atleast_2d(points) - center
    return np.sqrt((diff * diff).sum(axis=-1))


def euclidean_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Vector lengths differ: {a.shape[-1]} vs {b.shape[-1]}")
    return float(distances(a[None, :], b)[0])


@dataclass(frozen=True)
class LoadReport:
    declared_count: int
    loaded: int
    duplicates: int

    @property
    def count_mismatch(self) -> bool:
        return self.declared_count != self.loaded + self.duplicates


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Immutable token -> vector table of a fixed dimension."""

    tokens: tuple[str, ...]
    matrix: np.ndarray
    language_tag: str = ""
    report: LoadReport | None = None
    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _lex_rank: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] < 1:
            raise EmbeddingFormatError("Embedding matrix must be 2-D with a positive dimension")
        if matrix.shape[0] != len(self.tokens):
            raise EmbeddingFormatError(
                f"{len(self.tokens)} tokens for {matrix.shape[0]} vectors"
            )
        if not np.isfinite(matrix).all():
            raise EmbeddingFormatError("Embedding vectors must be finite")
        index: dict[str, int] = {}
        for i, token in enumerate(self.tokens):
            if not token:
                raise EmbeddingFormatError("Empty token")
            if token in index:
                raise EmbeddingFormatError(f"Duplicate token: {token}")
            index[token] = i
        matrix.setflags(write=False)
        lex_rank = np.empty(len(self.tokens), dtype=np.int64)
        if self.tokens:
            lex_rank[np.argsort(np.array(self.tokens), kind="stable")] = np.arange(len(self.tokens))
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_lex_rank", lex_rank)

    @classmethod
    def from_vectors(
        cls, vectors: Mapping[str, Iterable[float]], language_tag: str = ""
    ) -> "EmbeddingSpace":
        tokens = tuple(vectors)
        matrix = np.array([list(vectors[t]) for t in tokens], dtype=np.float64)
        return cls(tokens=tokens, matrix=matrix, language_tag=language_tag)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self._index[token]]

    def get(self, token: str) -> np.ndarray | None:
        i = self._index.get(token)
        return None if i is None else self.matrix[i]

    def subset(self, limit: int) -> "EmbeddingSpace":
        """The first ``limit`` tokens in file order (frequency truncation)."""
        return EmbeddingSpace(
            tokens=self.tokens[:limit],
            matrix=self.matrix[:limit],
            language_tag=self.language_tag,
        )

    def check_dim(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise DimensionMismatchError(
                f"Vector of length {vector.shape[-1] if vector.ndim else 0} "
                f"does not match space dimension {self.dim}"
            )
        return vector


def load_embeddings(
    path: str | Path, expected_dim: int | None = None, language_tag: str = ""
) -> EmbeddingSpace:
    """Read a word2vec-style text file: ``<count> <dim>`` then one row per token."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: malformed header, expected '<count> <dim>'")
        try:
            declared, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(f"{path}: malformed header {' '.join(header)!r}") from None
        if declared < 0 or dim < 1:
            raise EmbeddingFormatError(f"{path}: invalid header values {declared} {dim}")
        if expected_dim is not None and dim != expected_dim:
            raise DimensionMismatchError(f"{path}: dimension {dim}, expected {expected_dim}")

        tokens: list[str] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        duplicates = 0
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected token and {dim} components, got {len(parts) - 1}"
                )
            try:
                row = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric component") from None
            if not np.isfinite(row).all():
                raise EmbeddingFormatError(f"{path}:{lineno}: invalid component (nan/inf)")
            token = parts[0]
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            tokens.append(token)
            rows.append(row)

    report = LoadReport(declared_count=declared, loaded=len(tokens), duplicates=duplicates)
    if duplicates:
        logger.warning("%s: %d duplicate tokens ignored (first occurrence kept)", path, duplicates)
    if report.count_mismatch:
        logger.warning("%s: header declares %d rows, found %d", path, declared, len(tokens) + duplicates)
    logger.info("Loaded %d vectors of dimension %d from %s", len(tokens), dim, path)

    matrix = np.vstack(rows) if rows else np.empty((0, dim))
    return EmbeddingSpace(
        tokens=tuple(tokens), matrix=matrix, language_tag=language_tag, report=report
    )


def save_embeddings(space: EmbeddingSpace, path: str | Path) -> None:
    """Write a space in the text format; components use shortest round-trip repr."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(space)} {space.dim}\n")
        for token, row in zip(space.tokens, space.matrix):
            f.write(token + " " + " ".join(repr(float(v)) for v in row) + "\n")


def phrase_vector(space: EmbeddingSpace, phrase: Iterable[str]) -> np.ndarray | None:
    """Mean vector of the phrase tokens present in the space, None if none is."""
    present = [space.vector(t) for t in phrase if t in space]
    if not present:
        return None
    return np.mean(present, axis=0)


def nearest_neighbors(
    space: EmbeddingSpace,
    query: np.ndarray,
    k: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """The ``k`` closest tokens to ``query``, ties broken by token order."""
    if k < 1:
        raise DataError("k must be at least 1")
    query = space.check_dim(query)
    dist = distances(space.matrix, query)

    mask = np.ones(len(space), dtype=bool)
    for token in exclude:
        i = space._index.get(token)
        if i is not None:
            mask[i] = False
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    if k < idx.size:
        # Keep everything tied with the k-th distance, then sort exactly.
        kth = np.partition(dist[idx], k - 1)[k - 1]
        idx = idx[dist[idx] <= kth]
    order = idx[np.lexsort((space._lex_rank[idx], dist[idx]))][:k]
    return [(space.tokens[i], float(dist[i])) for i in order]


def _sign_fixed(components: np.ndarray) -> np.ndarray:
    fixed = components.copy()
    for row in fixed:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1
    return fixed


def project_2d(space: EmbeddingSpace, tokens: Iterable[str]) -> list[tuple[str, float, float]]:
    """PCA of the selected vectors onto their top two principal components."""
    resolved: list[str] = []
    seen: set[str] = set()
    for token in tokens:
        if token in seen:
            continue
        seen.add(token)
        if token in space:
            resolved.append(token)
        else:
            logger.debug("Token not in space, skipped: %s", token)
    if len(resolved) < 2:
        raise DataError(f"Need at least 2 tokens present in the space, found {len(resolved)}")

    points = np.array([space.vector(t) for t in resolved])
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = np.zeros((2, space.dim))
    rows = min(2, vt.shape[0])
    components[:rows] = _sign_fixed(vt[:rows])
    coords = centered @ components.T
    return [(t, float(x), float(y)) for t, (x, y) in zip(resolved, coords)]


def embedding_dim(path: str | Path) -> int:
    """Dimension declared in an embedding file header."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
    try:
        return int(header[1])
    except (IndexError, ValueError):
        raise EmbeddingFormatError(f"{path}: malformed header, expected '<count> <dim>'") from None
