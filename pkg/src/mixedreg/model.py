"""Ground-truth mixtures and synthetic data under a standard Gaussian design.

Randomness always flows through ``numpy.random.Generator`` backed by PCG64,
seeded explicitly, so equal seeds reproduce identical arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

RNG_NAME = "numpy.random.PCG64"

_P_TOL = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MixtureModel:
    """Two regression vectors and their mixing proportions.

    ``p1 = 1`` (or ``p2 = 1``) is accepted so degenerate single-component
    data can be generated; algorithms that need both components check
    :attr:`is_proper` themselves.
    """

    beta1: np.ndarray
    beta2: np.ndarray
    p1: float = 0.5
    p2: float = 0.5

    def __post_init__(self):
        b1 = _frozen(self.beta1)
        b2 = _frozen(self.beta2)
        if b1.ndim != 1 or b1.size == 0 or b1.shape != b2.shape:
            raise InvalidInputError("beta1 and beta2 must be nonempty vectors of equal length")
        if not (np.all(np.isfinite(b1)) and np.all(np.isfinite(b2))):
            raise InvalidInputError("beta vectors must be finite")
        if np.array_equal(b1, b2):
            raise InvalidInputError("beta1 and beta2 must differ")
        p1, p2 = float(self.p1), float(self.p2)
        if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0) or abs(p1 + p2 - 1.0) > _P_TOL:
            raise InvalidInputError(f"proportions must be in [0, 1] and sum to 1, got {p1}, {p2}")
        object.__setattr__(self, "beta1", b1)
        object.__setattr__(self, "beta2", b2)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @property
    def k(self) -> int:
        return self.beta1.shape[0]

    @property
    def pmin(self) -> float:
        return min(self.p1, self.p2)

    @property
    def is_proper(self) -> bool:
        """Both components have positive weight."""
        return self.p1 > 0.0 and self.p2 > 0.0

    @property
    def separation(self) -> float:
        """``||beta1 - beta2||_2``."""
        return float(np.linalg.norm(self.beta1 - self.beta2))


@dataclass(frozen=True)
class Observations:
    """What an estimator is allowed to see: designs and responses, no labels."""

    xs: np.ndarray
    ys: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 2 or ys.ndim != 1 or xs.shape[0] != ys.shape[0]:
            raise InvalidInputError("xs must be (N, k) and ys length N")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.ys.shape[0]

    @property
    def k(self) -> int:
        return self.xs.shape[1]

    def take(self, indices) -> "Observations":
        idx = np.asarray(indices, dtype=np.intp)
        return Observations(self.xs[idx], self.ys[idx], self.noise_sigma)


@dataclass(frozen=True)
class SampleSet:
    """Generated samples together with their hidden labels.

    ``zs[i] == 1`` means sample ``i`` came from ``beta1``. Estimators only
    ever receive :meth:`observed`, which strips the labels.
    """

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        xs = _frozen(self.xs)
        ys = _frozen(self.ys)
        zs = _frozen(self.zs, dtype=np.int8)
        if xs.ndim != 2 or ys.ndim != 1 or zs.ndim != 1:
            raise InvalidInputError("xs must be (N, k); ys and zs must be length-N vectors")
        if not (xs.shape[0] == ys.shape[0] == zs.shape[0]):
            raise InvalidInputError("xs, ys and zs must have the same length")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))

    def __len__(self):
        return self.ys.shape[0]

    @property
    def k(self) -> int:
        return self.xs.shape[1]

    def observed(self, indices=None) -> Observations:
        if indices is None:
            return Observations(self.xs, self.ys, self.noise_sigma)
        idx = np.asarray(indices, dtype=np.intp)
        return Observations(self.xs[idx], self.ys[idx], self.noise_sigma)

    def subset(self, indices) -> "SampleSet":
        idx = np.asarray(indices, dtype=np.intp)
        return SampleSet(self.xs[idx], self.ys[idx], self.zs[idx], self.noise_sigma)


@dataclass(frozen=True)
class SamplePartition:
    """Disjoint, ordered index blocks (0-based)."""

    blocks: tuple
    n: int

    def __post_init__(self):
        blocks = tuple(_frozen(b, dtype=np.intp) for b in self.blocks)
        seen = np.concatenate(blocks) if blocks else np.empty(0, dtype=np.intp)
        if seen.size != np.unique(seen).size:
            raise InvalidInputError("partition blocks overlap")
        if seen.size and (seen.min() < 0 or seen.max() >= self.n):
            raise InvalidInputError("partition index out of range")
        object.__setattr__(self, "blocks", blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    @property
    def unused(self) -> np.ndarray:
        used = np.zeros(self.n, dtype=bool)
        for b in self.blocks:
            used[b] = True
        return np.flatnonzero(~used)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent child seeds for the sub-streams of one trial."""
    state = np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def generate(model: MixtureModel, n: int, noise_sigma: float = 0.0, seed: int = 0) -> SampleSet:
    """Draw ``n`` samples ``y = <x, beta_z> + w`` with ``x ~ N(0, I_k)``.

    Labels are Bernoulli(``p1``); noise is ``noise_sigma * N(0, 1)``.
    """
    if not isinstance(model, MixtureModel):
        raise InvalidInputError("model must be a MixtureModel")
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n!r}")
    if noise_sigma < 0 or not np.isfinite(noise_sigma):
        raise InvalidInputError("noise_sigma must be a finite nonnegative number")
    n = int(n)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((n, model.k))
    zs = rng.random(n) < model.p1
    ys = np.where(zs, xs @ model.beta1, xs @ model.beta2)
    if noise_sigma > 0:
        ys = ys + noise_sigma * rng.standard_normal(n)
    return SampleSet(xs, ys, zs.astype(np.int8), noise_sigma)


def split(samples, sizes: Sequence[int]) -> SamplePartition:
    """Contiguous blocks of the requested sizes, in sample order."""
    n = samples if isinstance(samples, (int, np.integer)) else len(samples)
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise InvalidInputError("block sizes must be positive")
    if sum(sizes) > n:
        raise InvalidInputError(f"block sizes sum to {sum(sizes)} but only {n} samples exist")
    edges = np.cumsum([0] + sizes)
    blocks = [np.arange(a, b) for a, b in zip(edges[:-1], edges[1:])]
    return SamplePartition(tuple(blocks), int(n))


def equal_sizes(n: int, parts: int) -> list[int]:
    """``parts`` equal block sizes covering ``n``; the remainder goes last."""
    if parts < 1 or n < parts:
        raise InvalidInputError(f"cannot split {n} samples into {parts} nonempty blocks")
    base = n // parts
    sizes = [base] * parts
    sizes[-1] += n - base * parts
    return sizes


def make_model(k: int, radius: float = 1.5, inner_product: float = 1.73,
               p1: float = 0.5, seed: int = 0) -> MixtureModel:
    """Random pair with ``||beta1|| = ||beta2|| = radius`` and a fixed inner product.

    ``beta1`` is uniform on the sphere; ``beta2`` is rotated away from it in
    a uniformly random orthogonal direction.
    """
    if k < 2:
        raise InvalidInputError("need k >= 2 to place two distinct equal-norm vectors")
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    cos = inner_product / radius**2
    if not -1.0 <= cos < 1.0:
        raise InvalidInputError(
            f"inner product {inner_product} incompatible with radius {radius}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(k)
    u /= np.linalg.norm(u)
    w = rng.standard_normal(k)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    beta1 = radius * u
    beta2 = radius * (cos * u + np.sqrt(1.0 - cos * cos) * w)
    return MixtureModel(beta1, beta2, p1, 1.0 - p1)
