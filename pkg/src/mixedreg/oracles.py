"""Independent numerical checks and brute-force references.

* :func:`cone_spectrum_mc` - Monte-Carlo second moment of a Gaussian vector
  conditioned on ``(x.u)^2 > (x.v)^2``, against its closed form.
* :func:`perturbation_check` - eigenvector perturbation bounds for a
  symmetric matrix ``M`` close to ``Sigma``.
* :func:`loss_sandwich_check` - empirical loss bracketed by the estimate's error.
* :func:`hardness_gadget` / :func:`brute_force_mixed_solve` - the SubsetSum
  reduction and an exhaustive solver for small mixed linear systems.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateEventError, InvalidInputError
from .estimator import EstimatePair, error_metric, loss
from .linalg import least_squares, project_onto_span, symmetric
from .model import MixtureModel, Observations

MC_MIN_DRAWS = 10_000
MC_CHUNK = 1 << 16
# Minimum loss-sample count, in units of k / min(p1, p2).
SANDWICH_SAMPLE_FACTOR = 20.0
MAX_BRUTE_FORCE_ROWS = 24
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class ConeSpectrumReport:
    alpha: float
    sigma_max_mc: float
    sigma_min_mc: float
    prob_mc: float
    n_mc: int
    norm_u: float
    norm_v: float

    @property
    def prob_se(self) -> float:
        p = self.prob_mc
        return math.sqrt(max(p * (1 - p), 1e-300) / self.n_mc)

    @property
    def sigma_max_theory(self) -> float:
        return 1.0 + _sinc(self.alpha)

    @property
    def sigma_min_theory(self) -> float:
        return 1.0 - _sinc(self.alpha)

    @property
    def prob_theory(self) -> float:
        return self.alpha / math.pi

    def probability_bound_holds(self, z: float = 5.0) -> bool:
        """``P > 1/2`` when ``|u| > |v|``, ``P <= |u|/|v|`` when ``|u| < |v|``, at ``z`` standard errors."""
        slack = z * self.prob_se
        if self.norm_u > self.norm_v:
            return self.prob_mc > 0.5 - slack
        if self.norm_u < self.norm_v:
            return self.prob_mc <= self.norm_u / self.norm_v + slack
        return True


def _sinc(a):
    return 1.0 if a == 0 else math.sin(a) / a


def cone_angle(u, v) -> float:
    """``arccos((v - u).(v + u) / (|u + v| |u - v|))`` in ``[0, pi]``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    den = np.linalg.norm(u + v) * np.linalg.norm(u - v)
    if den == 0:
        raise InvalidInputError("cone angle undefined when u = +/- v")
    c = float((v - u) @ (v + u) / den)
    return math.acos(min(1.0, max(-1.0, c)))


def cone_spectrum_mc(u, v, n_mc: int = 1_000_000, seed: int = 0) -> ConeSpectrumReport:
    """Estimate ``E[x x^T | (x.u)^2 > (x.v)^2]`` and the event probability."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or u.shape != v.shape:
        raise InvalidInputError("u and v must be vectors of equal length")
    if not (np.any(u) and np.any(v)):
        raise InvalidInputError("u and v must be nonzero")
    if n_mc < MC_MIN_DRAWS:
        raise InvalidInputError(f"n_mc must be at least {MC_MIN_DRAWS}")
    alpha = cone_angle(u, v)
    k = u.shape[0]
    rng = np.random.default_rng(seed)
    second = np.zeros((k, k))
    hits = 0
    remaining = int(n_mc)
    while remaining:
        size = min(remaining, MC_CHUNK)
        x = rng.standard_normal((size, k))
        keep = x[(x @ u) ** 2 > (x @ v) ** 2]
        second += keep.T @ keep
        hits += keep.shape[0]
        remaining -= size
    if hits == 0:
        raise DegenerateEventError("conditioning event never occurred")
    eig = np.linalg.eigvalsh(second / hits)
    return ConeSpectrumReport(alpha, float(eig[-1]), float(eig[0]), hits / n_mc, int(n_mc),
                              float(np.linalg.norm(u)), float(np.linalg.norm(v)))


@dataclass(frozen=True)
class PerturbationReport:
    eps: float
    eigvals: tuple
    precondition_met: bool
    space_lhs: tuple = ()
    space_rhs: float = math.nan
    vector_bounds_checked: bool = False
    u1_lhs: float = math.nan
    u1_rhs: float = math.nan
    u2_lhs: float = math.nan
    u2_rhs: float = math.nan

    @property
    def holds(self) -> Optional[bool]:
        """``None`` when the gap precondition fails, else whether every checked bound holds."""
        if not self.precondition_met:
            return None
        ok = all(l <= self.space_rhs * (1 + _BOUND_SLACK) + _BOUND_SLACK for l in self.space_lhs)
        if self.vector_bounds_checked:
            ok = ok and self.u1_lhs <= self.u1_rhs * (1 + _BOUND_SLACK) + _BOUND_SLACK
            ok = ok and self.u2_lhs <= self.u2_rhs * (1 + _BOUND_SLACK) + _BOUND_SLACK
        return ok


def perturbation_check(sigma, m, equal_tol: float = 1e-12) -> PerturbationReport:
    """Top-2 eigenvector stability of ``M`` around ``Sigma``.

    With ``eps = ||M - Sigma||`` and eigenvalues ``l1 >= l2 > l3`` of
    ``Sigma``, requires ``eps < (l2 - l3) / 2`` and then evaluates

    * ``||w_i - P w_i||^2 <= 4 eps / (l2 - l3)`` for the top two
      eigenvectors ``w_i`` of ``M``, ``P`` projecting onto ``span(u1, u2)``;
    * if ``l1 != l2``: ``||u1 - w1||^2 <= 4 eps / (l1 - l2)`` and
      ``||u2 - w2||^2 <= 4 eps / (l1 - l2) + 8 eps / (l2 - l3)``, with each
      ``w_i`` signed to align with ``u_i``.

    Reference eigendecompositions come from LAPACK, not :func:`top2_eig`.
    """
    s = symmetric(sigma)
    mm = symmetric(m)
    if s.shape != mm.shape or s.shape[0] < 3:
        raise InvalidInputError("need two symmetric matrices of equal size >= 3")
    lam, u = np.linalg.eigh(s)
    lam, u = lam[::-1], u[:, ::-1]
    _, w = np.linalg.eigh(mm)
    w = w[:, ::-1]
    eps = float(np.linalg.norm(mm - s, 2))
    scale = max(1.0, abs(lam[0]))
    gap23 = lam[1] - lam[2]
    gap12 = lam[0] - lam[1]
    eigvals = tuple(float(x) for x in lam[:3])
    if gap23 <= equal_tol * scale or eps >= gap23 / 2:
        return PerturbationReport(eps, eigvals, False)

    basis = u[:, :2].T
    space = tuple(float(np.sum((w[:, i] - project_onto_span(w[:, i], basis)) ** 2))
                  for i in range(2))
    report = dict(eps=eps, eigvals=eigvals, precondition_met=True,
                  space_lhs=space, space_rhs=4 * eps / gap23)
    if gap12 > equal_tol * scale:
        w1 = w[:, 0] if w[:, 0] @ u[:, 0] >= 0 else -w[:, 0]
        w2 = w[:, 1] if w[:, 1] @ u[:, 1] >= 0 else -w[:, 1]
        report.update(
            vector_bounds_checked=True,
            u1_lhs=float(np.sum((u[:, 0] - w1) ** 2)), u1_rhs=4 * eps / gap12,
            u2_lhs=float(np.sum((u[:, 1] - w2) ** 2)), u2_rhs=4 * eps / gap12 + 8 * eps / gap23)
    return PerturbationReport(**report)


@dataclass(frozen=True)
class SandwichReport:
    value: float
    err: float
    upper: float
    lower: float
    lower_arm: str

    @property
    def holds_upper(self) -> bool:
        return self.value <= self.upper

    @property
    def holds_lower(self) -> bool:
        return self.value >= self.lower

    @property
    def holds(self) -> bool:
        return self.holds_upper and self.holds_lower


def loss_sandwich_check(est: EstimatePair, truth: MixtureModel, samples: Observations,
                        c: float = SANDWICH_SAMPLE_FACTOR) -> SandwichReport:
    """Compare ``sqrt(loss / n)`` with ``1.1 err`` above and
    ``0.2 sqrt(pmin) min(err, |b1* - b2*| / 2)`` below.

    ``err`` is the pairing-minimized error; the loss does not depend on the
    pairing, so both bounds apply to it.
    """
    if not truth.is_proper:
        raise InvalidInputError("both mixture proportions must be positive")
    n = len(samples)
    if n < c * truth.k / truth.pmin:
        raise InvalidInputError(
            f"need at least {c} * k / pmin = {c * truth.k / truth.pmin:.0f} samples, got {n}")
    value = math.sqrt(loss(est, samples) / n)
    err = error_metric(est, truth)
    half_sep = 0.5 * truth.separation
    arm = "err" if err <= half_sep else "separation"
    lower = 0.2 * math.sqrt(truth.pmin) * min(err, half_sep)
    return SandwichReport(value, err, 1.1 * err, lower, arm)


@dataclass(frozen=True)
class SubsetSumInstance:
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise InvalidInputError("SubsetSum instance must be nonempty")
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return len(self.values)


def hardness_gadget(instance) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``[I_k; I_k; 1^T]`` and responses ``(a; 0; sum(a) / 2)``.

    The mixed system is solvable iff ``a`` splits into two equal-sum halves.
    """
    if not isinstance(instance, SubsetSumInstance):
        instance = SubsetSumInstance(tuple(instance))
    a = np.asarray(instance.values, dtype=float)
    k = a.shape[0]
    x = np.vstack([np.eye(k), np.eye(k), np.ones((1, k))])
    y = np.concatenate([a, np.zeros(k), [a.sum() / 2.0]])
    return x, y


@dataclass(frozen=True)
class MixedSolution:
    estimate: EstimatePair
    labels: np.ndarray  # 0 -> first vector, 1 -> second
    residual: float
    index: int


def _fit_group(x, y, mask, k):
    if not mask.any():
        return np.zeros(k), 0.0
    beta = least_squares(x[mask], y[mask])
    r = y[mask] - x[mask] @ beta
    return beta, float(r @ r)


def brute_force_mixed_solve(rows, responses, tol: Optional[float] = None) -> Optional[MixedSolution]:
    """First label assignment, in index order, that both vectors fit exactly.

    Assignment ``a`` gives row ``i`` label ``(a >> (N - 1 - i)) & 1``. An
    assignment is accepted when the two least-squares fits have total
    residual ``sqrt(rss1 + rss2) <= tol`` (default ``1e-9 (1 + |y|)``).
    Prefixes whose partial fits already exceed ``tol`` are skipped, which
    cannot change the first accepted assignment.
    """
    x = np.atleast_2d(np.asarray(rows, dtype=float))
    y = np.asarray(responses, dtype=float)
    n, k = x.shape
    if y.shape != (n,):
        raise InvalidInputError("responses must match the number of rows")
    if n == 0:
        raise InvalidInputError("need at least one row")
    if n > MAX_BRUTE_FORCE_ROWS:
        raise InvalidInputError(f"brute force is limited to {MAX_BRUTE_FORCE_ROWS} rows, got {n}")
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.linalg.norm(y)))
    start = 0
    while True:
        idx = kernels.first_consistent_assignment(x, y, tol, start)
        if idx < 0:
            return None
        labels = np.array([(idx >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8)
        b1, r1 = _fit_group(x, y, labels == 0, k)
        b2, r2 = _fit_group(x, y, labels == 1, k)
        resid = math.sqrt(r1 + r2)
        if resid <= tol:
            return MixedSolution(EstimatePair(b1, b2), labels, resid, idx)
        start = idx + 1


def subset_sum_partition(values) -> Optional[tuple]:
    """Direct enumeration: indices ``S`` with ``sum_S a = sum_{S^c} a``, or ``None``.

    Exact rational arithmetic; the first subset in bitmask order wins.
    """
    fracs = [Fraction(v) for v in values]
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    vals = [int(f * den) for f in fracs]
    total = sum(vals)
    sums = [0]
    for v in vals:
        sums += [s + v for s in sums]  # sums[mask] for every mask, bit i <-> element i
    for mask, part in enumerate(sums):
        if 2 * part == total:
            return tuple(i for i in range(len(vals)) if mask >> i & 1)
    return None


def gadget_partition(instance, solution: MixedSolution) -> tuple[tuple, tuple]:
    """Read the equal-sum split off a gadget solution.

    Element ``i`` sides with the last (sum) row when its identity row
    ``i`` carries the same label.
    """
    values = instance.values if isinstance(instance, SubsetSumInstance) else tuple(instance)
    k = len(values)
    side = solution.labels[2 * k]
    s = tuple(i for i in range(k) if solution.labels[i] == side)
    rest = tuple(i for i in range(k) if solution.labels[i] != side)
    return s, rest


def format_partition(values, side_a, side_b) -> str:
    """``"{3}|{1,2}"``: smaller side first, values sorted within each side."""
    def fmt(v):
        return f"{v:g}" if isinstance(v, float) else str(v)

    sides = [sorted(values[i] for i in side_a), sorted(values[i] for i in side_b)]
    sides.sort(key=lambda s: (len(s), s))
    return "|".join("{" + ",".join(fmt(v) for v in s) + "}" for s in sides)


def enumerate_instances(max_k: int, max_value: int, min_value: int = 1):
    """Every multiset of ``1..max_k`` integers from ``[min_value, max_value]``, sorted."""
    for k in range(1, max_k + 1):
        yield from itertools.combinations_with_replacement(range(min_value, max_value + 1), k)
