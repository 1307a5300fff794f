"""Named-entity dictionaries: ingestion, train/test splits and coverage."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .embeddings import EmbeddingSpace, Phrase, phrase_vector
from .errors import DataError, DictionaryError

logger = logging.getLogger(__name__)


class NeType(str, Enum):
    PER = "PER"
    LOC = "LOC"
    ORG = "ORG"

    @classmethod
    def parse(cls, value: str) -> "NeType":
        try:
            return cls(value.strip().upper())
        except ValueError:
            raise DataError(f"Unknown entity type: {value!r} (expected PER, LOC or ORG)") from None


@dataclass(frozen=True)
class NeDictionary:
    """Per-type sets of NE phrases for one language."""

    entries: Mapping[NeType, frozenset[Phrase]] = field(default_factory=dict)
    language_tag: str = ""

    def __post_init__(self):
        cleaned = {}
        for ne_type, phrases in self.entries.items():
            phrases = frozenset(tuple(p) for p in phrases)
            if any(not p or not all(p) for p in phrases):
                raise DictionaryError(f"{ne_type.value}: empty phrase or token")
            cleaned[NeType(ne_type)] = phrases
        object.__setattr__(self, "entries", cleaned)

    def __getitem__(self, ne_type: NeType) -> frozenset[Phrase]:
        return self.entries.get(ne_type, frozenset())

    @property
    def types(self) -> list[NeType]:
        return [t for t in NeType if t in self.entries]

    def size(self, ne_type: NeType | None = None) -> int:
        if ne_type is not None:
            return len(self[ne_type])
        return sum(len(p) for p in self.entries.values())


@dataclass(frozen=True)
class DatasetSplit:
    train: NeDictionary
    test: NeDictionary
    seed: int
    ratio: float


@dataclass(frozen=True)
class Coverage:
    covered: int
    total: int

    @property
    def fraction(self) -> float:
        return self.covered / self.total if self.total else 0.0


def load_dictionary(path: str | Path, ne_type: NeType, language_tag: str = "") -> NeDictionary:
    """One NE per line, tokens space-separated; blank and ``#`` lines skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DictionaryError(f"Cannot read dictionary {path}: {e}") from e

    phrases: set[Phrase] = set()
    lines = 0
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        lines += 1
        phrases.add(tuple(line.split()))
    if not phrases:
        raise DictionaryError(f"{path}: no entries after filtering")
    if lines != len(phrases):
        logger.info("%s: %d duplicate lines collapsed", path, lines - len(phrases))
    logger.info("Loaded %d %s entries from %s", len(phrases), ne_type.value, path)
    return NeDictionary({ne_type: frozenset(phrases)}, language_tag=language_tag)


def combine_dictionaries(*parts: NeDictionary) -> NeDictionary:
    merged: dict[NeType, set[Phrase]] = {}
    tag = ""
    for part in parts:
        tag = tag or part.language_tag
        for ne_type, phrases in part.entries.items():
            merged.setdefault(ne_type, set()).update(phrases)
    return NeDictionary({t: frozenset(p) for t, p in merged.items()}, language_tag=tag)


def write_dictionary(dictionary: NeDictionary, ne_type: NeType, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for phrase in sorted(dictionary[ne_type]):
            f.write(" ".join(phrase) + "\n")


def split_dictionary(dictionary: NeDictionary, ratio: float, seed: int) -> DatasetSplit:
    """Per-type seeded shuffle; ``floor(ratio * n)`` entries go to train."""
    if not 0 < ratio < 1:
        raise DataError(f"Split ratio must lie in (0, 1), got {ratio}")

    train: dict[NeType, frozenset[Phrase]] = {}
    test: dict[NeType, frozenset[Phrase]] = {}
    for position, ne_type in enumerate(NeType):
        if ne_type not in dictionary.entries:
            continue
        phrases = sorted(dictionary[ne_type])
        n = len(phrases)
        if n < 2:
            raise DictionaryError(f"{ne_type.value}: need at least 2 entries to split, got {n}")
        rng = np.random.default_rng([seed, position])
        order = rng.permutation(n)
        n_train = min(math.floor(ratio * n + 1e-9), n - 1)
        train[ne_type] = frozenset(phrases[i] for i in order[:n_train])
        test[ne_type] = frozenset(phrases[i] for i in order[n_train:])
        logger.info("%s split: %d train / %d test", ne_type.value, n_train, n - n_train)

    tag = dictionary.language_tag
    return DatasetSplit(
        train=NeDictionary(train, language_tag=tag),
        test=NeDictionary(test, language_tag=tag),
        seed=seed,
        ratio=ratio,
    )


def coverage_report(dictionary: NeDictionary, space: EmbeddingSpace) -> dict[NeType, Coverage]:
    """An entry is covered when at least one of its tokens has a vector."""
    report = {}
    for ne_type in dictionary.types:
        phrases = dictionary[ne_type]
        covered = sum(1 for p in phrases if phrase_vector(space, p) is not None)
        report[ne_type] = Coverage(covered=covered, total=len(phrases))
        logger.info("%s coverage: %d/%d", ne_type.value, covered, len(phrases))
    return report


def resolve_phrases(space: EmbeddingSpace, phrases: Iterable[Phrase]) -> tuple[list[Phrase], np.ndarray]:
    """Phrases with a vector, in sorted order, and their stacked vectors."""
    resolved: list[Phrase] = []
    vectors: list[np.ndarray] = []
    for phrase in sorted(phrases):
        vector = phrase_vector(space, phrase)
        if vector is not None:
            resolved.append(phrase)
            vectors.append(vector)
    matrix = np.vstack(vectors) if vectors else np.empty((0, space.dim))
    return resolved, matrix
