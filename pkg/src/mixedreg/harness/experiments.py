"""Trial runner and the three experiment families.

Trial ``i`` of every cell uses seed ``seed_base + i``; the model, data and
random-init streams are derived from it, so results do not depend on how
trials are scheduled across workers.
"""

from __future__ import annotations

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from ..errors import MixedRegError
from ..estimator import EstimatePair, error_metric, loss, run_em
from ..initializer import (GridConfig, default_delta, grid_init, moment_matrix, proportion_init,
                           random_init)
from ..model import derive_seeds, generate, make_model, split
from .config import ExperimentConfig

LOW_CONFIDENCE_TRIALS = 30
# Zero loss alone is not recovery when N <= 2k: each group can then be fit
# exactly by a wrong vector. A trial also needs the error to the truth
# below this level, relative to max(1, radius).
EXACT_ERR_TOL = 1e-8
WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class TrialCell:
    k: int
    n: int
    seed: int
    t0: int = 50
    p1: float = 0.5
    delta: Optional[float] = 0.3
    delta_c: Optional[float] = None
    init_method: str = "grid"
    resample: bool = False
    radius: float = 1.5
    inner_product: float = 1.73
    noise_sigma: float = 0.0
    keep_trace: bool = False

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, k: int, n: int, trial: int, **over) -> "TrialCell":
        cell = cls(k=int(k), n=int(n), seed=cfg.seed_base + trial, t0=cfg.t0, p1=cfg.p1,
                   delta=cfg.delta, delta_c=cfg.delta_c, init_method=cfg.init_method,
                   resample=cfg.resample, radius=cfg.radius, inner_product=cfg.inner_product,
                   noise_sigma=cfg.noise_sigma)
        return replace(cell, **over)


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    k: int
    n: int
    p1: float
    delta: float
    init_method: str
    iterations_used: int
    init_err: float
    final_err: float
    exact: bool
    wall_time: float
    failure: str = ""
    errs: tuple = ()

    def row(self) -> dict:
        d = asdict(self)
        d.pop("errs")
        d.pop("wall_time")
        return d


RAW_COLUMNS = ("seed", "k", "n", "p1", "delta", "init_method", "iterations_used",
               "init_err", "final_err", "exact", "failure")


def _initialize(cell: TrialCell, obs, model, delta: float, init_seed: int):
    """Returns ``(init, em_obs)``; with resampling the init consumes the first half."""
    if cell.resample:
        half = cell.n // 2
        if half < 4:
            raise MixedRegError(f"N={cell.n} too small to split for resampled init")
        part = split(cell.n, [half // 2, half - half // 2, cell.n - half])
        star, plus, em_obs = (obs.take(b) for b in part)
    else:
        star = plus = em_obs = obs
    if cell.init_method == "random":
        res = random_init(cell.k, init_seed)
    else:
        spectrum = moment_matrix(star)
        if cell.init_method == "grid":
            res = grid_init(spectrum, GridConfig(delta), plus)
        else:
            res = proportion_init(spectrum, model.p1, model.p2, plus,
                                  fallback_grid=GridConfig(delta))
    return res.pair, em_obs


def trial_delta(cell: TrialCell, model) -> float:
    if cell.delta is not None:
        return float(cell.delta)
    return default_delta(model.separation, model.pmin, cell.delta_c)


def run_trial(cell: TrialCell) -> TrialRecord:
    """Draw a model and data, initialize, run EM, and score the result.

    Failures are caught and returned as a non-exact record with a reason.
    """
    start = time.perf_counter()
    model_seed, data_seed, init_seed = derive_seeds(cell.seed, 3)
    delta = math.nan
    init_err = final_err = math.nan
    try:
        model = make_model(cell.k, cell.radius, cell.inner_product, cell.p1, model_seed)
        delta = trial_delta(cell, model)
        obs = generate(model, cell.n, cell.noise_sigma, data_seed).observed()
        init, em_obs = _initialize(cell, obs, model, delta, init_seed)
        trace = run_em(init, em_obs, cell.t0, resample=cell.resample, truth=model)
    except (MixedRegError, np.linalg.LinAlgError) as exc:
        return TrialRecord(cell.seed, cell.k, cell.n, cell.p1, delta, cell.init_method, 0,
                           init_err, final_err, False, time.perf_counter() - start,
                           f"{type(exc).__name__}: {exc}")
    errs = tuple(trace.errs) if cell.keep_trace else ()
    final_err = trace.records[-1].err
    return TrialRecord(cell.seed, cell.k, cell.n, cell.p1, delta, cell.init_method,
                       trace.iterations_used, trace.records[0].err, final_err,
                       recovered(trace, cell), time.perf_counter() - start, "", errs)


def recovered(trace, cell: TrialCell) -> bool:
    """Zero loss and the truth reproduced to machine precision."""
    return bool(trace.exact) and trace.records[-1].err <= exact_err_level(cell.radius)


def exact_err_level(radius: float) -> float:
    return EXACT_ERR_TOL * max(1.0, radius)


def run_cells(cells, workers: int = 1) -> list[TrialRecord]:
    """Run trials in input order; with ``workers > 1`` they are spread over processes."""
    cells = list(cells)
    if workers <= 1 or len(cells) < 2:
        return [run_trial(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, cells, chunksize=max(1, len(cells) // (4 * workers))))


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def summarize_cell(records: list[TrialRecord]) -> dict:
    """Aggregate row for one (k, N) cell."""
    first = records[0]
    trials = len(records)
    wins = sum(r.exact for r in records)
    lo, hi = wilson_interval(wins, trials)
    its = [r.iterations_used for r in records if r.exact]
    return dict(k=first.k, n=first.n, n_over_k=first.n / first.k, init_method=first.init_method,
                trials=trials, successes=wins, success_rate=wins / trials, ci_low=lo, ci_high=hi,
                median_iterations=statistics.median(its) if its else None,
                failures=sum(bool(r.failure) for r in records))


CELL_COLUMNS = ("k", "n", "n_over_k", "init_method", "trials", "successes", "success_rate",
                "ci_low", "ci_high", "median_iterations", "failures")


@dataclass
class ExperimentResult:
    """Rows for CSV output plus a JSON-ready summary."""

    raw: list
    cells: list
    table: list
    summary: dict


def _run_cell(cfg: ExperimentConfig, k: int, n: int) -> list[TrialRecord]:
    return run_cells((TrialCell.from_config(cfg, k, n, i) for i in range(cfg.trials)), cfg.workers)


def sample_complexity_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Smallest grid ``N`` per ``k`` whose success rate reaches ``cfg.target``.

    Bisection over the grid assumes the rate is nondecreasing in ``N``;
    every returned ``N_star`` is a cell that was actually run in full.
    A ``k`` whose largest ``N`` misses the target is reported as censored.
    """
    raw, cells, table = [], [], []
    for k in cfg.k_values:
        grid = cfg.n_grid(k)
        rates = {}

        def rate(i):
            if i not in rates:
                recs = _run_cell(cfg, k, grid[i])
                raw.extend(recs)
                cells.append(summarize_cell(recs))
                rates[i] = cells[-1]["success_rate"]
            return rates[i]

        lo, hi = 0, len(grid) - 1
        if rate(hi) < cfg.target:
            star = None
        else:
            while lo < hi:
                mid = (lo + hi) // 2
                if rate(mid) >= cfg.target:
                    hi = mid
                else:
                    lo = mid + 1
            star = hi
        table.append(dict(k=k, n_star=None if star is None else grid[star],
                          n_star_over_k=None if star is None else grid[star] / k,
                          success_rate=None if star is None else rates[star],
                          censored=star is None,
                          low_confidence=cfg.trials < LOW_CONFIDENCE_TRIALS))
    cells.sort(key=lambda c: (c["k"], c["n"]))
    fit = linear_fit([(r["k"], r["n_star"]) for r in table if not r["censored"]])
    return ExperimentResult(raw, cells, table, dict(kind=cfg.kind, target=cfg.target,
                                                    n_star=table, fit=fit))


SWEEP_COLUMNS = ("k", "n_star", "n_star_over_k", "success_rate", "censored", "low_confidence")


def linear_fit(points) -> Optional[dict]:
    """Least-squares line ``N = a k + b`` with its coefficient of determination."""
    if len(points) < 2:
        return None
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    a, b = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a * x + b)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return dict(slope=float(a), intercept=float(b), r2=r2)


def phase_transition(cfg: ExperimentConfig) -> ExperimentResult:
    """Success rate with Wilson 95% interval for every ``(k, N)`` on the grid."""
    raw, cells = [], []
    for k in cfg.k_values:
        for n in cfg.n_grid(k):
            recs = _run_cell(cfg, k, n)
            raw.extend(recs)
            cells.append(summarize_cell(recs))
    return ExperimentResult(raw, cells, cells, dict(kind=cfg.kind, cells=cells))


def convergence_trace(cfg: ExperimentConfig, compare: str = "random") -> ExperimentResult:
    """Per-iteration error for ``cfg.init_method`` against ``compare`` on the same trials.

    Runs stop once exact; their error is carried forward to ``t0`` so every
    curve has ``t0 + 1`` points. Only the first ``k`` and ``N`` are used.
    """
    k = cfg.k_values[0]
    n = cfg.n_grid(k)[0]
    methods = [cfg.init_method] if compare == cfg.init_method else [cfg.init_method, compare]
    raw, traces, curves = [], [], []
    for method in methods:
        recs = run_cells((TrialCell.from_config(cfg, k, n, i, init_method=method, keep_trace=True)
                          for i in range(cfg.trials)), cfg.workers)
        raw.extend(recs)
        padded = []
        for r in recs:
            errs = list(r.errs) or [math.nan]
            errs += [errs[-1]] * (cfg.t0 + 1 - len(errs))
            padded.append(errs)
            traces.extend(dict(seed=r.seed, init_method=method, iteration=t, err=e)
                          for t, e in enumerate(errs))
        arr = np.array(padded, dtype=float)
        for t in range(cfg.t0 + 1):
            col = arr[:, t]
            curves.append(dict(init_method=method, iteration=t, mean_err=float(np.nanmean(col)),
                               median_err=float(np.nanmedian(col)),
                               exact_fraction=float(np.mean(col <= exact_err_level(cfg.radius)))))
    cells = [summarize_cell([r for r in raw if r.init_method == m]) for m in methods]
    return ExperimentResult(raw, cells, curves, dict(kind=cfg.kind, k=k, n=n, curves=curves,
                                                     cells=cells, traces=traces))


TRACE_COLUMNS = ("seed", "init_method", "iteration", "err")
CURVE_COLUMNS = ("init_method", "iteration", "mean_err", "median_err", "exact_fraction")


def solve_once(cell: TrialCell) -> dict:
    """Single end-to-end run with the estimate included, for the ``solve`` command."""
    model_seed, data_seed, init_seed = derive_seeds(cell.seed, 3)
    model = make_model(cell.k, cell.radius, cell.inner_product, cell.p1, model_seed)
    delta = trial_delta(cell, model)
    obs = generate(model, cell.n, cell.noise_sigma, data_seed).observed()
    init, em_obs = _initialize(cell, obs, model, delta, init_seed)
    trace = run_em(init, em_obs, cell.t0, resample=cell.resample, truth=model)
    out = solution_summary(trace, em_obs, model)
    out["exact"] = recovered(trace, cell)
    return out | dict(seed=cell.seed, k=cell.k, n=cell.n, delta=delta,
                      init_method=cell.init_method)


def solution_summary(trace, obs, model=None) -> dict:
    est: EstimatePair = trace.final
    out = dict(exact=trace.exact, zero_loss=trace.exact, iterations_used=trace.iterations_used,
               loss=loss(est, obs), beta1_hat=est.beta1.tolist(), beta2_hat=est.beta2.tolist())
    if model is not None:
        out |= dict(final_err=error_metric(est, model), init_err=trace.records[0].err,
                    beta1_true=model.beta1.tolist(), beta2_true=model.beta2.tolist())
    return out
