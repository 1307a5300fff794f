from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .dictionary import NeDictionary, NeType, split_dictionary
from .embeddings import EmbeddingSpace, load_embeddings
from .errors import DataError
from .hypersphere import EvalReport, FitConfig, Hypersphere, evaluate_hypersphere, fit_hypersphere

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOutcome:
    sphere: Hypersphere
    train: EvalReport
    test: EvalReport


def fit_and_evaluate(
    space: EmbeddingSpace,
    dictionary: NeDictionary,
    ne_type: NeType,
    config: FitConfig,
    split_ratio: float,
    seed: int,
) -> FitOutcome:
    """Fit on the train split, then score the held-out split.

    Train phrases are ignored when scoring the test split so they count
    neither as hits nor as false positives.
    """
    split = split_dictionary(NeDictionary({ne_type: dictionary[ne_type]}), split_ratio, seed)
    train, test = split.train[ne_type], split.test[ne_type]
    sphere, train_report = fit_hypersphere(space, train, train, config, ne_type=ne_type)
    test_report = evaluate_hypersphere(sphere, space, test, ignore=train)
    logger.info("%s dim %d: train F1 %.4f, test F1 %.4f", ne_type.value, space.dim, train_report.f1, test_report.f1)
    return FitOutcome(sphere, train_report, test_report)


class DimensionScanner:
    """Repeat the fit over embedding files of different dimensions."""

    def __init__(self, config: FitConfig, split_ratio: float = 0.9, seed: int = 42):
        self.config = config
        self.split_ratio = split_ratio
        self.seed = seed
        self.results: dict[tuple[int, NeType], FitOutcome] = {}

    def run(self, files: Mapping[int, Path], dictionary: NeDictionary) -> dict[NeType, tuple[int, float]]:
        for dim in sorted(files):
            space = load_embeddings(files[dim], expected_dim=dim)
            for ne_type in dictionary.types:
                outcome = fit_and_evaluate(space, dictionary, ne_type, self.config, self.split_ratio, self.seed)
                self.results[(dim, ne_type)] = outcome
        return self.best()

    def best(self) -> dict[NeType, tuple[int, float]]:
        best: dict[NeType, tuple[int, float]] = {}
        # Dimensions ascend, so a strict comparison keeps the smaller one on ties.
        for (dim, ne_type), outcome in sorted(self.results.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
            f1 = outcome.test.f1
            if ne_type not in best or f1 > best[ne_type][1]:
                best[ne_type] = (dim, f1)
        return {t: best[t] for t in NeType if t in best}


def scan_dimensions(
    files: Mapping[int, Path],
    dictionary: NeDictionary,
    config: FitConfig | None = None,
    split_ratio: float = 0.9,
    seed: int = 42,
) -> dict[NeType, tuple[int, float]]:
    """Best embedding dimension per entity type, by held-out F1."""
    if not files:
        raise DataError("scan_dimensions needs at least one embedding file")
    return DimensionScanner(config or FitConfig(), split_ratio, seed).run(files, dictionary)
