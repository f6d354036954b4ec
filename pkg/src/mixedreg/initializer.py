"""Spectral initialization from the second-moment matrix ``M = mean(y^2 x x^T)``.

Under the Gaussian design ``E[M] = c I + 2 p1 b1 b1^T + 2 p2 b2 b2^T``, so the
top-2 eigenspace of ``M`` estimates ``span(b1, b2)``. Two ways to turn that
plane into a starting pair:

* :func:`grid_init` scans unit vectors on a circle in the plane and keeps the
  pair with the smallest mixed loss;
* :func:`proportion_init` reconstructs both vectors in closed form from the
  eigenpairs of ``(M - I) / 2`` when the proportions are known (unit-norm
  vectors assumed), falling back to the grid when the two eigenvalues merge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError, NumericInconsistencyError
from .estimator import EstimatePair, _obs, loss
from .linalg import EigenPair, TopTwo, symmetric, top2_eig

# |Delta| may exceed 1 by this much from rounding before it is an error.
DELTA_CLAMP_TOL = 1e-6
GAP_TOL_FACTOR = 1e-3


@dataclass(frozen=True)
class MomentSpectrum:
    """``M``, its top-2 eigenpairs, and those of ``(M - I) / 2``.

    The shifted pairs reuse the same eigenvectors with values ``(l - 1) / 2``.
    """

    m: np.ndarray
    top: TopTwo
    n_samples: int = 0

    @property
    def pairs(self) -> tuple[EigenPair, EigenPair]:
        return self.top.first, self.top.second

    @property
    def shifted_pairs(self) -> tuple[EigenPair, EigenPair]:
        return tuple(EigenPair((p.value - 1.0) / 2.0, p.vector) for p in self.pairs)

    @property
    def basis(self) -> np.ndarray:
        """The two eigenvectors as rows."""
        return np.vstack([self.top.first.vector, self.top.second.vector])


@dataclass(frozen=True)
class GridConfig:
    delta: float = 0.3

    def __post_init__(self):
        if not (0.0 < self.delta < 2.0 * math.pi):
            raise InvalidInputError(f"grid resolution must lie in (0, 2*pi), got {self.delta}")

    @property
    def size(self) -> int:
        return math.ceil(2.0 * math.pi / self.delta) + 1


@dataclass(frozen=True)
class InitResult:
    beta1_0: np.ndarray
    beta2_0: np.ndarray
    method: str
    degenerate_fallback: bool = False

    @property
    def pair(self) -> EstimatePair:
        return EstimatePair(self.beta1_0, self.beta2_0)


def moment_matrix(samples) -> MomentSpectrum:
    """Empirical ``M`` over the given observations and its eigenpairs."""
    obs = _obs(samples)
    n = len(obs)
    if n < 2:
        raise InvalidInputError("moment matrix needs at least two samples")
    weighted = obs.xs * (obs.ys ** 2)[:, None]
    m = symmetric(weighted.T @ obs.xs / n)
    return MomentSpectrum(m, top2_eig(m), n)


def spectrum_from_matrix(m) -> MomentSpectrum:
    """Spectrum of an arbitrary symmetric matrix, e.g. a population ``E[M]``."""
    m = symmetric(m)
    return MomentSpectrum(m, top2_eig(m), 0)


def grid_points(spectrum: MomentSpectrum, grid: GridConfig) -> np.ndarray:
    """``v1 cos(delta t) + v2 sin(delta t)`` for ``t = 0 .. ceil(2 pi / delta)``, as rows."""
    angles = grid.delta * np.arange(grid.size)
    v1, v2 = spectrum.top.first.vector, spectrum.top.second.vector
    return np.outer(np.cos(angles), v1) + np.outer(np.sin(angles), v2)


def grid_init(spectrum: MomentSpectrum, grid: GridConfig, loss_samples) -> InitResult:
    """Best ordered pair of grid points under the mixed loss on ``loss_samples``.

    Ties go to the lexicographically smallest ``(t1, t2)``.
    """
    obs = _obs(loss_samples)
    if len(obs) == 0:
        raise InvalidInputError("grid search needs loss samples")
    points = grid_points(spectrum, grid)
    resid = obs.ys[:, None] - obs.xs @ points.T
    i, j, _ = kernels.grid_pair_search(resid * resid)
    return InitResult(points[i], points[j], "grid")


def default_delta(norm_gap: float, pmin: float, c: float) -> float:
    """Grid resolution ``c * ||b1 - b2|| * pmin^(3/2)``."""
    if norm_gap <= 0 or c <= 0:
        raise InvalidInputError("norm_gap and c must be positive")
    if not 0 < pmin <= 0.5:
        raise InvalidInputError("pmin must lie in (0, 0.5]")
    return c * norm_gap * pmin ** 1.5


def _delta(lam_b, lam_o, p_b, p_o):
    d = ((lam_b - lam_o) ** 2 + p_b ** 2 - p_o ** 2) / (2.0 * (lam_o - lam_b) * p_b)
    if abs(d) > 1.0 + DELTA_CLAMP_TOL:
        raise NumericInconsistencyError(
            f"closed-form cosine {d:.6g} outside [-1, 1]; eigenvalues inconsistent with proportions")
    return min(1.0, max(-1.0, d))


def closed_form_candidates(shifted: tuple[EigenPair, EigenPair], p1: float, p2: float):
    """All pairs consistent with the shifted spectrum, in a fixed order.

    The spectrum fixes each vector only up to its own sign and the plane
    only up to reflection, so both eigenvector signs and the relative sign
    of the second vector are enumerated: eight candidates.
    """
    (lam1, v1), (lam2, v2) = [(p.value, p.vector) for p in shifted]
    d1 = _delta(lam1, lam2, p1, p2)
    d2 = _delta(lam2, lam1, p2, p1)
    out = []
    for s1, s2, flip in itertools.product((1.0, -1.0), repeat=3):
        u1, u2 = s1 * v1, s2 * v2
        b1 = math.sqrt((1 - d1) / 2) * u1 + math.sqrt((1 + d1) / 2) * u2
        b2 = math.sqrt((1 - d2) / 2) * u2 - math.sqrt((1 + d2) / 2) * u1
        out.append(EstimatePair(b1, flip * b2))
    return out


def proportion_init(spectrum: MomentSpectrum, p1: float, p2: float, loss_samples,
                    gap_tol: float | None = None,
                    fallback_grid: GridConfig = GridConfig()) -> InitResult:
    """Closed-form start from known proportions; lowest-loss sign choice wins.

    If the shifted eigenvalues are closer than ``gap_tol`` (default
    ``1e-3 * max(|l1|, |l2|, 1)``) the vectors are not identifiable from the
    spectrum and :func:`grid_init` is used instead.
    """
    if not (p1 > 0 and p2 > 0 and abs(p1 + p2 - 1) <= 1e-12):
        raise InvalidInputError("proportions must be positive and sum to 1")
    obs = _obs(loss_samples)
    shifted = spectrum.shifted_pairs
    lam1, lam2 = shifted[0].value, shifted[1].value
    if gap_tol is None:
        gap_tol = GAP_TOL_FACTOR * max(abs(lam1), abs(lam2), 1.0)
    if abs(lam1 - lam2) < gap_tol:
        res = grid_init(spectrum, fallback_grid, obs)
        return InitResult(res.beta1_0, res.beta2_0, "grid", degenerate_fallback=True)
    candidates = closed_form_candidates(shifted, p1, p2)
    losses = [loss(c, obs) for c in candidates]
    best = candidates[int(np.argmin(losses))]
    return InitResult(best.beta1, best.beta2, "proportion")


def random_init(k: int, seed: int = 0) -> InitResult:
    """Two independent standard-normal directions, each scaled to unit length."""
    if k < 1:
        raise InvalidInputError("k must be positive")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((2, k))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return InitResult(u[0], u[1], "random")
