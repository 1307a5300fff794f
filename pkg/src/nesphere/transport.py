"""Discrete optimal transport between embedding point clouds.

Exact plans come from POT's network simplex. Entropic plans come from POT's
log-domain Sinkhorn, run over a schedule that halves epsilon from the cost
scale down to the requested value and warm-starts each stage from the last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import ot
import scipy.linalg
from pydantic import BaseModel, Field
from scipy.spatial.distance import cdist

from .embeddings import EmbeddingSpace
from .errors import ConvergenceError, DataError, DimensionMismatchError, SingularSystemError
from .mapping import LinearMap, procrustes

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9


class TransportMode(str, Enum):
    EXACT = "exact"
    ENTROPIC = "entropic"


class EmdInit(str, Enum):
    IDENTITY = "identity"
    PROCRUSTES = "procrustes"


class TransportConfig(BaseModel):
    mode: TransportMode = TransportMode.EXACT
    epsilon: float = Field(0.01, gt=0)
    max_iter: int = Field(10_000, ge=1)
    tol: float = Field(1e-6, gt=0)


class EmdConfig(BaseModel):
    outer_iter: int = Field(20, ge=1)
    tol: float = Field(1e-9, ge=0)
    ridge: float = Field(1e-3, ge=0)
    init: EmdInit = EmdInit.IDENTITY
    transport: TransportConfig = TransportConfig()


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Weighted point cloud; weights are frequencies summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if points.ndim != 2 or len(points) == 0:
            raise DataError("Distribution needs a nonempty 2-D point array")
        if weights.shape != (len(points),):
            raise DataError(f"{len(points)} points but {weights.size} weights")
        if (weights < 0).any() or abs(weights.sum() - 1) > WEIGHT_TOLERANCE:
            raise DataError("Weights must be nonnegative and sum to 1")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points: np.ndarray) -> "DiscreteDistribution":
        n = len(points)
        return cls(points, np.full(n, 1.0 / n) if n else np.empty(0))

    @classmethod
    def from_space(cls, space: EmbeddingSpace, max_words: int | None = None) -> "DiscreteDistribution":
        """Uniform weights over the first ``max_words`` tokens of a space;
        embedding files carry no corpus counts."""
        if max_words is not None:
            space = space.subset(max_words)
        return cls.uniform(space.matrix)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    plan: np.ndarray
    source_marginal: np.ndarray
    target_marginal: np.ndarray

    def __post_init__(self):
        plan = np.array(self.plan, dtype=np.float64)
        if plan.shape != (len(self.source_marginal), len(self.target_marginal)):
            raise DimensionMismatchError(
                f"Plan shape {plan.shape} vs marginals {len(self.source_marginal)}x{len(self.target_marginal)}"
            )
        if (plan < 0).any():
            raise DataError("Transport plan has negative entries")
        plan.setflags(write=False)
        object.__setattr__(self, "plan", plan)

    def marginal_violation(self) -> float:
        rows = np.abs(self.plan.sum(axis=1) - self.source_marginal).max()
        cols = np.abs(self.plan.sum(axis=0) - self.target_marginal).max()
        return float(max(rows, cols))


def squared_cost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Ground cost matrix: squared Euclidean distance between rows."""
    return cdist(a, b, metric="sqeuclidean")


def transport_cost(g: LinearMap, src: DiscreteDistribution, tgt: DiscreteDistribution, plan: TransportPlan) -> float:
    if plan.plan.shape != (len(src), len(tgt)):
        raise DimensionMismatchError(f"Plan shape {plan.plan.shape} vs distributions {len(src)}x{len(tgt)}")
    cost = squared_cost(g.apply(src.points), tgt.points)
    return float((plan.plan * cost).sum())


def _check_weights(weights: np.ndarray, n: int, side: str) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (n,):
        raise DimensionMismatchError(f"{side} weights length {weights.size} vs cost dimension {n}")
    if (weights < 0).any() or abs(weights.sum() - 1) > WEIGHT_TOLERANCE:
        raise DataError(f"Infeasible {side} weights: must be nonnegative and sum to 1")
    return weights


def solve_transport(
    cost: np.ndarray,
    src_weights: np.ndarray,
    tgt_weights: np.ndarray,
    config: TransportConfig | None = None,
) -> TransportPlan:
    config = config or TransportConfig()
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise DataError("Cost must be a nonempty matrix")
    if not np.isfinite(cost).all():
        raise DataError("Cost matrix has non-finite entries")
    a = _check_weights(src_weights, cost.shape[0], "source")
    b = _check_weights(tgt_weights, cost.shape[1], "target")

    if config.mode is TransportMode.EXACT:
        plan, log = ot.emd(a, b, cost, log=True)
        if log.get("warning"):
            raise ConvergenceError(f"Network simplex: {log['warning']}")
        plan = np.maximum(plan, 0.0)
    else:
        plan = _sinkhorn(cost, a, b, config)
    return TransportPlan(plan, a, b)


def _sinkhorn(cost: np.ndarray, a: np.ndarray, b: np.ndarray, config: TransportConfig) -> np.ndarray:
    # Zero-weight points carry no mass; solve on the support only.
    rows, cols = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    c = cost[np.ix_(rows, cols)]
    a_s, b_s = a[rows], b[cols]
    f = np.zeros(len(rows))
    g = np.zeros(len(cols))

    schedule = []
    eps = max(float(c.max()), config.epsilon)
    while eps > config.epsilon:
        schedule.append(eps)
        eps /= 2
    schedule.append(config.epsilon)

    for stage, eps in enumerate(schedule):
        final = stage == len(schedule) - 1
        budget = config.max_iter if final else min(config.max_iter, 100)
        # POT works on potentials scaled by 1/eps.
        plan, log = ot.sinkhorn(
            a_s, b_s, c, eps,
            method="sinkhorn_log",
            numItermax=budget,
            stopThr=config.tol,
            log=True,
            warn=False,
            warmstart=(f / eps, g / eps),
        )
        f, g = eps * log["log_u"], eps * log["log_v"]
        logger.debug("Sinkhorn epsilon=%g: %d iterations", eps, log["niter"] + 1)

    violation = max(np.abs(plan.sum(axis=1) - a_s).max(), np.abs(plan.sum(axis=0) - b_s).max())
    if violation >= config.tol:
        raise ConvergenceError(
            f"Sinkhorn did not reach tol {config.tol:g} in {config.max_iter} iterations "
            f"(violation {violation:.3g}, epsilon {config.epsilon:g})"
        )
    full = np.zeros(cost.shape)
    full[np.ix_(rows, cols)] = plan
    return full


def _objective(cost: float, g: np.ndarray, ridge: float) -> float:
    drift = g - np.eye(len(g))
    return cost + ridge * float((drift * drift).sum())


def _update_map(x: np.ndarray, z: np.ndarray, plan: np.ndarray, ridge: float) -> np.ndarray:
    """Closed-form ``argmin_G Σ Tij‖xi G − zj‖² + ridge‖G − I‖²``."""
    d = x.shape[1]
    lhs = x.T @ (plan.sum(axis=1)[:, None] * x) + ridge * np.eye(d)
    rhs = x.T @ (plan @ z) + ridge * np.eye(d)
    try:
        return scipy.linalg.solve(lhs, rhs, assume_a="sym")
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"Weighted normal equations are singular: {e}") from e


def alternating_emd_fit(
    src: DiscreteDistribution,
    tgt: DiscreteDistribution,
    config: EmdConfig | None = None,
    seed_vectors: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[LinearMap, list[float]]:
    """Alternate optimal plans and weighted least-squares maps.

    Returns the final map and the objective after every plan step,
    ``Σ T·c + ridge‖G − I‖²``, which never increases under exact transport.
    """
    config = config or EmdConfig()
    if src.dim != tgt.dim:
        raise DimensionMismatchError(f"EMD fit needs equal dimensions, got {src.dim} and {tgt.dim}")

    if config.init is EmdInit.PROCRUSTES:
        if seed_vectors is None:
            raise DataError("Procrustes initialisation needs seed pairs")
        g = procrustes(*seed_vectors).matrix
    else:
        g = np.eye(src.dim)

    x, z = src.points, tgt.points
    trace: list[float] = []
    for iteration in range(config.outer_iter):
        cost = squared_cost(x @ g, z)
        plan = solve_transport(cost, src.weights, tgt.weights, config.transport).plan
        objective = _objective(float((plan * cost).sum()), g, config.ridge)
        logger.info("EMD iteration %d: objective %.9g", iteration, objective)
        converged = bool(trace) and trace[-1] - objective < config.tol
        trace.append(objective)
        if converged:
            break
        g = _update_map(x, z, plan, config.ridge)
    return LinearMap(g), trace

