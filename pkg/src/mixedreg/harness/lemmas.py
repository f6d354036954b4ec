"""Monte-Carlo and exact checks of the supporting lemmas, as row tables.

Each suite returns ``(rows, verdict)``. Rows carry a per-case ``passed``
flag; the verdict applies the suite's own pass rule (some suites allow a
small fraction of statistical misses).
"""

from __future__ import annotations

import math

import numpy as np

from .. import oracles
from ..errors import MixedRegError
from ..estimator import EstimatePair, error_metric
from ..initializer import GridConfig, moment_matrix, proportion_init, spectrum_from_matrix
from ..model import MixtureModel, derive_seeds, generate, make_model

CONE_TOL = 0.02
CONE_Z = 5.0
MOMENT_NORM_TOL = 0.05
MOMENT_EIG_TOL = 0.02
CLOSED_FORM_TOL = 1e-6


def kappa(model: MixtureModel) -> float:
    """``sqrt(1 - 4 (1 - <b1, b2>^2) p1 p2)`` for unit-norm vectors."""
    ip = float(model.beta1 @ model.beta2)
    return math.sqrt(max(0.0, 1.0 - 4.0 * (1.0 - ip * ip) * model.p1 * model.p2))


def population_moment(model: MixtureModel) -> np.ndarray:
    """``E[y^2 x x^T]`` under the Gaussian design."""
    k = model.k
    m = np.zeros((k, k))
    for p, b in ((model.p1, model.beta1), (model.p2, model.beta2)):
        m += p * ((b @ b) * np.eye(k) + 2.0 * np.outer(b, b))
    return m


def unit_pair(k: int, cos: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two random unit vectors in R^k with the given inner product."""
    m = make_model(k, radius=1.0, inner_product=cos, seed=seed)
    return m.beta1, m.beta2


def _verdict(rows, min_rate=1.0) -> dict:
    n = len(rows)
    ok = sum(r["passed"] for r in rows)
    rate = ok / n if n else 0.0
    return dict(cases=n, passed=ok, pass_rate=rate, required_rate=min_rate,
                ok=bool(n) and rate >= min_rate)


def cone_suite(n_mc: int = 1_000_000, pairs: int = 20, seed: int = 0):
    """Orthogonal unit pair against ``1 +/- 2/pi``, then random pairs of mixed norms."""
    rows = []
    seeds = derive_seeds(seed, pairs + 1)
    rep = oracles.cone_spectrum_mc([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], n_mc, seeds[0])
    for name, got, want in (("sigma_max", rep.sigma_max_mc, 1 + 2 / math.pi),
                            ("sigma_min", rep.sigma_min_mc, 1 - 2 / math.pi)):
        rows.append(dict(case=0, check=name, value=got, expected=want, tol=CONE_TOL,
                         passed=abs(got - want) <= CONE_TOL))
    for i in range(1, pairs + 1):
        rng = np.random.default_rng(seeds[i])
        k = int(rng.integers(2, 7))
        u = rng.standard_normal(k) * rng.uniform(0.3, 3.0)
        v = rng.standard_normal(k) * rng.uniform(0.3, 3.0)
        rep = oracles.cone_spectrum_mc(u, v, n_mc, seeds[i])
        rows.append(dict(case=i, check="probability_bound", value=rep.prob_mc,
                         expected=0.5 if rep.norm_u > rep.norm_v else rep.norm_u / rep.norm_v,
                         tol=CONE_Z * rep.prob_se, passed=rep.probability_bound_holds(CONE_Z)))
        rows.append(dict(case=i, check="probability_closed_form", value=rep.prob_mc,
                         expected=rep.prob_theory, tol=CONE_Z * rep.prob_se,
                         passed=abs(rep.prob_mc - rep.prob_theory) <= CONE_Z * rep.prob_se))
        for name, got, want in (("sigma_max", rep.sigma_max_mc, rep.sigma_max_theory),
                                ("sigma_min", rep.sigma_min_mc, rep.sigma_min_theory)):
            rows.append(dict(case=i, check=name, value=got, expected=want, tol=CONE_TOL,
                             passed=abs(got - want) <= CONE_TOL))
    return rows, _verdict(rows)


def random_perturbation_case(rng: np.random.Generator):
    """A random ``(Sigma, M)`` meeting the gap precondition; 10% have ``l1 = l2``."""
    k = int(rng.integers(3, 9))
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    lam = np.sort(rng.uniform(-1.0, 1.0, k))[::-1]
    lam[:2] = np.sort(rng.uniform(1.2, 4.0, 2))[::-1]
    if rng.random() < 0.1:
        lam[1] = lam[0]
    sigma = (q * lam) @ q.T
    e = rng.standard_normal((k, k))
    e = (e + e.T) / 2
    e *= rng.uniform(0.01, 0.99) * (lam[1] - lam[2]) / 2 / np.linalg.norm(e, 2)
    return sigma, sigma + e


def matbound_suite(cases: int = 1000, seed: int = 0):
    rows = []
    rng = np.random.default_rng(seed)
    for i in range(cases):
        sigma, m = random_perturbation_case(rng)
        rep = oracles.perturbation_check(sigma, m)
        rows.append(dict(case=i, k=sigma.shape[0], eps=rep.eps,
                         space_lhs=max(rep.space_lhs) if rep.space_lhs else None,
                         space_rhs=rep.space_rhs, u1_lhs=rep.u1_lhs, u1_rhs=rep.u1_rhs,
                         u2_lhs=rep.u2_lhs, u2_rhs=rep.u2_rhs,
                         vector_bounds_checked=rep.vector_bounds_checked,
                         passed=bool(rep.holds)))
    return rows, _verdict(rows)


def sandwich_suite(seeds: int = 100, k: int = 10, n: int = 2000, errs=(0.05, 0.2, 0.5),
                   cos: float = 0.5, seed: int = 0):
    """Estimates at a prescribed distance from unit-norm truth, loss on ``n`` fresh samples."""
    rows = []
    for i, s in enumerate(derive_seeds(seed, seeds)):
        model_seed, data_seed, dir_seed = derive_seeds(s, 3)
        b1, b2 = unit_pair(k, cos, model_seed)
        truth = MixtureModel(b1, b2, 0.5, 0.5)
        obs = generate(truth, n, seed=data_seed).observed()
        rng = np.random.default_rng(dir_seed)
        for e in errs:
            d = rng.standard_normal((2, k))
            d *= e / np.linalg.norm(d, axis=1, keepdims=True)
            rep = oracles.loss_sandwich_check(EstimatePair(b1 + d[0], b2 + d[1]), truth, obs)
            rows.append(dict(case=i, target_err=e, err=rep.err, value=rep.value,
                             upper=rep.upper, lower=rep.lower, lower_arm=rep.lower_arm,
                             holds_upper=rep.holds_upper, holds_lower=rep.holds_lower,
                             passed=rep.holds))
    return rows, _verdict(rows, 0.95)


def moment_suite(seeds: int = 20, k: int = 4, n: int = 200_000, cos: float = 0.5,
                 p1: float = 0.5, seed: int = 0):
    rows = []
    for i, s in enumerate(derive_seeds(seed, seeds)):
        model_seed, data_seed = derive_seeds(s, 2)
        b1, b2 = unit_pair(k, cos, model_seed)
        truth = MixtureModel(b1, b2, p1, 1 - p1)
        spec = moment_matrix(generate(truth, n, seed=data_seed).observed())
        dev = float(np.linalg.norm(spec.m - population_moment(truth), 2))
        kap = kappa(truth)
        shifted = [p.value for p in spec.shifted_pairs]
        eig_err = max(abs(shifted[0] - (1 + kap) / 2), abs(shifted[1] - (1 - kap) / 2))
        rows.append(dict(case=i, norm_dev=dev, eig_dev=eig_err, kappa=kap,
                         passed_norm=dev <= MOMENT_NORM_TOL, passed_eig=eig_err <= MOMENT_EIG_TOL,
                         passed=dev <= MOMENT_NORM_TOL and eig_err <= MOMENT_EIG_TOL))
    verdict = _verdict(rows, 0.95)
    verdict["eig_all"] = all(r["passed_eig"] for r in rows)
    return rows, verdict


CLOSED_FORM_CASES = (
    # (p1, cos); the last two have merged eigenvalues and must fall back to the grid
    (0.5, 0.3), (0.5, -0.6), (0.3, 0.0), (0.7, 0.5), (0.2, -0.2), (0.35, 0.8),
    (0.5, 0.0),
)


def closed_form_suite(k: int = 6, seed: int = 0, loss_n: int = 400):
    """Exact population spectrum in, vectors out; merged spectra must use the fallback."""
    rows = []
    for i, (p1, cos) in enumerate(CLOSED_FORM_CASES):
        model_seed, data_seed = derive_seeds(seed + i, 2)
        b1, b2 = unit_pair(k, cos, model_seed)
        truth = MixtureModel(b1, b2, p1, 1 - p1)
        spec = spectrum_from_matrix(population_moment(truth))
        obs = generate(truth, loss_n, seed=data_seed).observed()
        degenerate = abs(p1 - 0.5) < 1e-12 and abs(cos) < 1e-12
        try:
            res = proportion_init(spec, p1, 1 - p1, obs, fallback_grid=GridConfig(0.3))
        except MixedRegError as exc:
            rows.append(dict(case=i, p1=p1, cos=cos, method="error", err=None,
                             fallback=False, passed=False, note=str(exc)))
            continue
        err = error_metric(res.pair, truth)
        passed = res.degenerate_fallback if degenerate else (
            res.method == "proportion" and err <= CLOSED_FORM_TOL)
        rows.append(dict(case=i, p1=p1, cos=cos, method=res.method, err=err,
                         fallback=res.degenerate_fallback, passed=passed, note=""))
    return rows, _verdict(rows)


SUITE_FUNCS = {
    "cone": lambda n_mc, seed: cone_suite(n_mc=n_mc, seed=seed),
    "matbound": lambda n_mc, seed: matbound_suite(seed=seed),
    "sandwich": lambda n_mc, seed: sandwich_suite(seed=seed),
    "moment": lambda n_mc, seed: moment_suite(seed=seed),
    "closed_form": lambda n_mc, seed: closed_form_suite(seed=seed),
}


def run_suites(name: str, n_mc: int = 1_000_000, seed: int = 0) -> dict:
    """``{suite: (rows, verdict)}`` for one suite or ``"all"``."""
    names = list(SUITE_FUNCS) if name == "all" else [name]
    return {s: SUITE_FUNCS[s](n_mc, seed) for s in names}


def hardness_report(values) -> dict:
    """Decide the SubsetSum instance through the gadget and cross-check by enumeration."""
    inst = oracles.SubsetSumInstance(tuple(values))
    sol = oracles.brute_force_mixed_solve(*oracles.hardness_gadget(inst))
    direct = oracles.subset_sum_partition(inst.values)
    out = dict(values=list(inst.values), solvable=sol is not None,
               direct_solvable=direct is not None, agree=(sol is not None) == (direct is not None))
    if sol is None:
        out["partition"] = None
        out["report"] = "unsolvable"
    else:
        part = oracles.format_partition(inst.values, *oracles.gadget_partition(inst, sol))
        out["partition"] = part
        out["report"] = f"solvable, partition {part}"
    return out


def hardness_exhaustive(max_k: int = 8, max_value: int = 10) -> dict:
    """Gadget vs direct enumeration over every multiset of values in ``[1, max_value]``."""
    total = agree = solvable = 0
    mismatches = []
    for vals in oracles.enumerate_instances(max_k, max_value):
        gadget = oracles.brute_force_mixed_solve(*oracles.hardness_gadget(vals)) is not None
        direct = oracles.subset_sum_partition(vals) is not None
        total += 1
        solvable += direct
        if gadget == direct:
            agree += 1
        elif len(mismatches) < 20:
            mismatches.append(list(vals))
    return dict(instances=total, agree=agree, solvable=solvable, mismatches=mismatches)
