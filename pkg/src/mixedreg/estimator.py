"""Alternating minimization (hard-assignment EM) for two-component mixed regression.

Every function here sees only :class:`~mixedreg.model.Observations`; the
hidden labels of a :class:`~mixedreg.model.SampleSet` never reach it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .linalg import least_squares
from .model import MixtureModel, Observations, SampleSet, equal_sizes, split

# Per-sample squared-loss level treated as exact zero in the noiseless case.
EXACT_LOSS_PER_SAMPLE = 1e-20


def _obs(samples) -> Observations:
    if isinstance(samples, SampleSet):
        raise TypeError("estimators take Observations; call SampleSet.observed() first")
    if not isinstance(samples, Observations):
        raise TypeError(f"expected Observations, got {type(samples).__name__}")
    return samples


@dataclass(frozen=True)
class EstimatePair:
    beta1: np.ndarray
    beta2: np.ndarray

    def __post_init__(self):
        b1 = np.array(self.beta1, dtype=float)
        b2 = np.array(self.beta2, dtype=float)
        if b1.ndim != 1 or b1.shape != b2.shape:
            raise InvalidInputError("estimate vectors must be 1-d with equal length")
        b1.setflags(write=False)
        b2.setflags(write=False)
        object.__setattr__(self, "beta1", b1)
        object.__setattr__(self, "beta2", b2)

    @property
    def k(self) -> int:
        return self.beta1.shape[0]

    def swapped(self) -> "EstimatePair":
        return EstimatePair(self.beta2, self.beta1)

    @classmethod
    def from_model(cls, model: MixtureModel) -> "EstimatePair":
        return cls(model.beta1, model.beta2)


@dataclass(frozen=True)
class LabelAssignment:
    """Index sets ``j1`` (closer to ``beta1``) and ``j2`` (everything else)."""

    j1: np.ndarray
    j2: np.ndarray

    @classmethod
    def from_mask(cls, in_first: np.ndarray) -> "LabelAssignment":
        return cls(np.flatnonzero(in_first), np.flatnonzero(~in_first))

    @property
    def sizes(self) -> tuple[int, int]:
        return int(self.j1.size), int(self.j2.size)


@dataclass(frozen=True)
class EmRecord:
    iteration: int
    err: Optional[float]
    loss: float
    j1_size: int
    j2_size: int
    degenerate: bool


@dataclass
class EmTrace:
    records: list = field(default_factory=list)
    final: Optional[EstimatePair] = None
    exact: bool = False

    @property
    def iterations_used(self) -> int:
        return self.records[-1].iteration if self.records else 0

    @property
    def errs(self) -> list:
        return [r.err for r in self.records]

    @property
    def losses(self) -> list:
        return [r.loss for r in self.records]


def _sq_residuals(est: EstimatePair, obs: Observations):
    r1 = obs.ys - obs.xs @ est.beta1
    r2 = obs.ys - obs.xs @ est.beta2
    return r1, r2


def loss(est: EstimatePair, samples) -> float:
    """``sum_i min((y_i - <x_i, b1>)^2, (y_i - <x_i, b2>)^2)``."""
    obs = _obs(samples)
    if len(obs) == 0:
        raise InvalidInputError("loss needs at least one sample")
    r1, r2 = _sq_residuals(est, obs)
    return float(np.minimum(r1 * r1, r2 * r2).sum())


def assign_labels(est: EstimatePair, samples) -> LabelAssignment:
    """Sample ``i`` joins ``j1`` iff ``|y_i - <x_i, b1>| < |y_i - <x_i, b2>|``; ties go to ``j2``."""
    obs = _obs(samples)
    r1, r2 = _sq_residuals(est, obs)
    return LabelAssignment.from_mask(np.abs(r1) < np.abs(r2))


def em_step(est: EstimatePair, samples):
    """One label/refit round. Returns ``(new_estimate, labels, degenerate)``.

    A block smaller than ``k`` is solved in the minimum-norm sense and
    flagged; an empty block keeps its previous vector and is flagged too.
    """
    obs = _obs(samples)
    labels = assign_labels(est, obs)
    k = est.k
    degenerate = False
    new = []
    for idx, old in ((labels.j1, est.beta1), (labels.j2, est.beta2)):
        if idx.size == 0:
            new.append(old)
            degenerate = True
            continue
        if idx.size < k:
            degenerate = True
        new.append(least_squares(obs.xs[idx], obs.ys[idx]))
    return EstimatePair(*new), labels, degenerate


def error_metric(est: EstimatePair, truth) -> float:
    """``max(||b_a - beta1*||, ||b_b - beta2*||)`` minimized over both pairings."""
    t1, t2 = (truth.beta1, truth.beta2)
    if est.beta1.shape != t1.shape:
        raise InvalidInputError("estimate and truth dimensions differ")
    straight = max(np.linalg.norm(est.beta1 - t1), np.linalg.norm(est.beta2 - t2))
    crossed = max(np.linalg.norm(est.beta2 - t1), np.linalg.norm(est.beta1 - t2))
    return float(min(straight, crossed))


def exact_recovery(est: EstimatePair, samples) -> bool:
    """Zero loss at machine precision: ``loss <= N * 1e-20``. Noiseless data only."""
    obs = _obs(samples)
    if obs.noise_sigma != 0:
        raise InvalidInputError("exact recovery is only defined for noiseless samples")
    return loss(est, obs) <= len(obs) * EXACT_LOSS_PER_SAMPLE


def run_em(init: EstimatePair, samples, t0: int, resample: bool = False,
           truth: Optional[MixtureModel] = None, stop_on_exact: bool = True) -> EmTrace:
    """Run ``t0`` EM rounds from ``init``.

    Without resampling every round uses all samples. With resampling the
    samples are cut into ``t0`` contiguous equal blocks (remainder in the
    last one) and round ``t`` uses only block ``t``; each block must hold
    at least ``k`` samples.

    Records hold the loss on all samples and, when ``truth`` is given, the
    permutation-minimized error. On noiseless data the run stops as soon as
    :func:`exact_recovery` holds.
    """
    obs = _obs(samples)
    if t0 < 0:
        raise InvalidInputError("t0 must be nonnegative")
    if init.k != obs.k:
        raise InvalidInputError("initial estimate dimension does not match the samples")
    blocks = None
    if resample and t0 > 0:
        if len(obs) < t0 * obs.k:
            raise InvalidInputError(
                f"resampling {t0} rounds of at least k={obs.k} samples needs "
                f"{t0 * obs.k} samples, got {len(obs)}")
        blocks = split(len(obs), equal_sizes(len(obs), t0)).blocks

    can_stop = stop_on_exact and obs.noise_sigma == 0

    def record(t, est, labels, degenerate):
        err = error_metric(est, truth) if truth is not None else None
        j1, j2 = labels.sizes
        return EmRecord(t, err, loss(est, obs), j1, j2, degenerate)

    est = init
    trace = EmTrace()
    trace.records.append(record(0, est, assign_labels(est, obs), False))
    exact = can_stop and exact_recovery(est, obs)
    t = 0
    while t < t0 and not exact:
        block = obs if blocks is None else obs.take(blocks[t])
        est, labels, degenerate = em_step(est, block)
        t += 1
        trace.records.append(record(t, est, labels, degenerate))
        exact = can_stop and exact_recovery(est, obs)
    trace.final = est
    trace.exact = obs.noise_sigma == 0 and exact_recovery(est, obs)
    return trace


def resampled_init(samples, grid, star_size: int, plus_size: int):
    """Grid initialization with the spectrum from one block and the loss from
    the next disjoint block. Returns ``(InitResult, partition)``."""
    from .initializer import grid_init, moment_matrix

    obs = _obs(samples)
    part = split(len(obs), [star_size, plus_size])
    spectrum = moment_matrix(obs.take(part[0]))
    return grid_init(spectrum, grid, obs.take(part[1])), part
