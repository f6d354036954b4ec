"""Worked examples and invariants stated for each module."""

import numpy as np
import pytest

from mixedreg import (EstimatePair, InvalidInputError, MixtureModel, Observations, assign_labels,
                      em_step, error_metric, exact_recovery, generate, loss, make_model,
                      moment_matrix, proportion_init, run_em, split)
from mixedreg.harness.lemmas import population_moment, unit_pair
from mixedreg.initializer import GridConfig, MomentSpectrum, grid_init, spectrum_from_matrix
from mixedreg.linalg import EigenPair, TopTwo, least_squares, project_onto_span, spectral_norm, top2_eig
from mixedreg.oracles import (brute_force_mixed_solve, cone_spectrum_mc, hardness_gadget,
                              loss_sandwich_check, perturbation_check)

E = np.eye(5)


# model

def test_generate_e1_e2_example():
    m = MixtureModel(E[0], E[1])
    s = generate(m, 4, seed=0)
    for x, y, z in zip(s.xs, s.ys, s.zs):
        assert y == (x[0] if z == 1 else x[1])


def test_label_frequency():
    m = MixtureModel(E[0], E[1], 0.3, 0.7)
    n = 20_000
    z = generate(m, n, seed=9).zs
    assert abs(z.mean() - 0.3) <= 3 * np.sqrt(0.21 / n)


def test_noiseless_consistency(model10):
    s = generate(model10, 500, seed=1)
    pred = np.where(s.zs == 1, s.xs @ model10.beta1, s.xs @ model10.beta2)
    bound = np.finfo(float).eps * 1.5 * np.linalg.norm(s.xs, axis=1) * 10
    assert np.all(np.abs(s.ys - pred) <= bound)


def test_split_examples():
    assert [b.tolist() for b in split(10, [4, 6])] == [list(range(4)), list(range(4, 10))]
    assert split(10, [10])[0].tolist() == list(range(10))
    with pytest.raises(InvalidInputError):
        split(10, [6, 6])
    with pytest.raises(InvalidInputError):
        generate(MixtureModel(E[0], E[1]), 0)


# linalg

def test_top2_examples():
    top = top2_eig(np.diag([3.0, 2.0, 1.0]))
    assert top.values == pytest.approx([3, 2])
    np.testing.assert_allclose(np.abs(top.vectors), np.eye(3)[:, :2], atol=1e-10)
    beta = np.ones(5) / np.sqrt(5)
    top = top2_eig(np.eye(5) + 2 * np.outer(beta, beta))
    assert top.values == pytest.approx([3, 1])
    assert abs(top.first.vector @ beta) == pytest.approx(1)


def test_top2_on_many_gapped_matrices():
    rng = np.random.default_rng(123)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        lam = np.sort(rng.uniform(-2, 2, n))[::-1]
        if n > 2:
            lam[1] = max(lam[1], lam[2] + 1e-3)
        lam[0] = max(lam[0], lam[1] + 1e-3)
        m = (q * lam) @ q.T
        top = top2_eig(m)
        norm = np.linalg.norm(m, 2)
        v = top.vectors
        assert np.max(np.abs(v.T @ v - np.eye(2))) < 1e-8
        for p in top:
            assert np.linalg.norm(m @ p.vector - p.value * p.vector) <= 1e-10 * norm + 1e-14


def test_least_squares_examples():
    np.testing.assert_allclose(least_squares(np.eye(3), [1, 2, 3]), [1, 2, 3])
    rng = np.random.default_rng(0)
    for k in (1, 10, 50):
        x = rng.standard_normal((2 * k + 5, k))
        b = rng.standard_normal(k)
        got = least_squares(x, x @ b)
        assert np.linalg.norm(got - b) <= 1e-8 * np.linalg.norm(b)
    x = rng.standard_normal((2, 3))
    y = rng.standard_normal(2)
    b = least_squares(x, y)
    null = np.linalg.svd(x)[2][-1]
    assert abs(b @ null) < 1e-10 and np.allclose(x @ b, y)
    with pytest.raises(InvalidInputError):
        least_squares(np.zeros((0, 3)), [])


def test_projection_examples():
    basis = np.eye(7)[:2]
    np.testing.assert_allclose(project_onto_span(basis[0] + 2 * basis[1], basis), [1, 2, 0, 0, 0, 0, 0])
    np.testing.assert_allclose(project_onto_span(np.eye(7)[5], basis), 0)
    v = np.random.default_rng(1).standard_normal(7)
    q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((7, 2)))
    p = project_onto_span(v, q.T)
    assert np.sum((v - p) ** 2) + np.sum(p**2) == pytest.approx(np.sum(v**2), abs=1e-10)


def test_spectral_norm_examples():
    assert spectral_norm(np.diag([-5.0, 2.0])) == pytest.approx(5)
    assert spectral_norm(np.eye(4)) == pytest.approx(1)


# initializer

def test_sign_robustness():
    b1, b2 = unit_pair(5, 0.4, 3)
    truth = MixtureModel(b1, b2, 0.65, 0.35)
    spec = spectrum_from_matrix(population_moment(truth))
    obs = generate(truth, 200, seed=4).observed()
    base = error_metric(proportion_init(spec, 0.65, 0.35, obs).pair, truth)
    for s1, s2 in ((-1, 1), (1, -1), (-1, -1)):
        first, second = spec.top
        top = TopTwo(EigenPair(first.value, s1 * first.vector),
                     EigenPair(second.value, s2 * second.vector))
        flipped = MomentSpectrum(spec.m, top)
        got = error_metric(proportion_init(flipped, 0.65, 0.35, obs).pair, truth)
        assert got == pytest.approx(base, abs=1e-12)


# estimator

def test_loss_examples(model10, samples10):
    obs = samples10.observed()
    assert loss(EstimatePair.from_model(model10), obs) <= 1e-18 * len(obs)
    assert loss(EstimatePair(np.zeros(10), np.zeros(10)), obs) == pytest.approx(np.sum(obs.ys**2))


def test_loss_equals_assignment_minimum():
    rng = np.random.default_rng(0)
    n, k = 20, 3
    obs = Observations(rng.standard_normal((n, k)), rng.standard_normal(n))
    est = EstimatePair(rng.standard_normal(k), rng.standard_normal(k))
    r1 = (obs.ys - obs.xs @ est.beta1) ** 2
    r2 = (obs.ys - obs.xs @ est.beta2) ** 2
    best = np.inf
    bits = np.arange(n)
    for start in range(0, 1 << n, 1 << 16):
        masks = np.arange(start, start + (1 << 16))[:, None]
        pick = (masks >> bits) & 1
        best = min(best, float(np.min(np.where(pick == 1, r1, r2).sum(axis=1))))
    assert loss(est, obs) == pytest.approx(best, rel=1e-12)


def test_assign_labels_examples(model10, samples10):
    obs = samples10.observed()
    lab = assign_labels(EstimatePair.from_model(model10), obs)
    assert set(np.flatnonzero(samples10.zs == 1)) <= set(lab.j1.tolist())
    same = assign_labels(EstimatePair(model10.beta1, model10.beta1), obs)
    assert same.sizes == (0, len(obs))
    rng = np.random.default_rng(5)
    obs = Observations(rng.standard_normal((100, 4)), rng.standard_normal(100))
    est = EstimatePair(rng.standard_normal(4), rng.standard_normal(4))
    lab = assign_labels(est, obs)
    swapped = assign_labels(est.swapped(), obs)
    # swapped comparison selects |r2| < |r1|; its complement is |r1| <= |r2|
    r1 = np.abs(obs.ys - obs.xs @ est.beta1)
    r2 = np.abs(obs.ys - obs.xs @ est.beta2)
    assert set(swapped.j2.tolist()) == set(np.flatnonzero(r1 <= r2))
    assert set(lab.j1.tolist()) <= set(swapped.j2.tolist())


def test_em_step_single_sample_block():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((12, 4))
    y = x @ np.ones(4)
    y[0] = x[0] @ -np.ones(4)
    est, labels, degenerate = em_step(EstimatePair(-np.ones(4), np.ones(4)), Observations(x, y))
    assert labels.sizes == (1, 11) and degenerate
    np.testing.assert_allclose(est.beta1, x[0] * (y[0] / (x[0] @ x[0])))


def test_monotone_loss_without_resampling():
    for seed in range(30):
        truth = make_model(6, seed=seed)
        obs = generate(truth, 90, seed=seed).observed()
        init = EstimatePair(*np.random.default_rng(seed).standard_normal((2, 6)))
        losses = run_em(init, obs, 25, stop_on_exact=False).losses
        assert all(b <= a * (1 + 1e-12) + 1e-18 for a, b in zip(losses, losses[1:]))


def test_permutation_symmetry(model10, samples10):
    obs = samples10.observed()
    rng = np.random.default_rng(0)
    est = EstimatePair(rng.standard_normal(10), rng.standard_normal(10))
    assert loss(est, obs) == loss(est.swapped(), obs)
    assert error_metric(est, model10) == error_metric(est.swapped(), model10)
    assert exact_recovery(EstimatePair.from_model(model10).swapped(), obs)


def test_error_metric_example(model10):
    est = EstimatePair(model10.beta1 + 0.1 * np.eye(10)[0], model10.beta2)
    assert error_metric(est, model10) == pytest.approx(0.1)


def test_exact_recovery_perturbed(model10):
    obs = generate(model10, 60, seed=3).observed()
    assert not exact_recovery(EstimatePair(model10.beta1 + 1e-3, model10.beta2), obs)


def test_svd_em_final_error_regime():
    truth = make_model(10, seed=1)
    obs = generate(truth, 300, seed=2).observed()
    init = grid_init(moment_matrix(obs), GridConfig(0.3), obs)
    trace = run_em(init.pair, obs, 15, truth=truth)
    assert trace.exact and trace.records[-1].err < 1e-12
    # early iterations contract
    assert trace.errs[1] <= trace.errs[0]


# oracles

def test_cone_examples():
    rep = cone_spectrum_mc(2 * E[0], E[1], n_mc=100_000, seed=0)
    assert rep.prob_mc > 0.5
    rep = cone_spectrum_mc(0.1 * E[0], E[1], n_mc=100_000, seed=1)
    assert rep.prob_mc <= 0.1 + 3 * rep.prob_se


def test_perturbation_examples():
    sigma = np.diag([3.0, 2.0, 1.0, 1.0])
    rep = perturbation_check(sigma, sigma)
    assert rep.eps == 0 and max(rep.space_lhs) < 1e-20 and rep.u1_lhs < 1e-20 and rep.holds
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.standard_normal((4, 4))
        a = (a + a.T) / 2
        rep = perturbation_check(sigma, sigma + 0.01 * a / np.linalg.norm(a, 2))
        assert rep.holds


def test_sandwich_examples():
    b1, b2 = unit_pair(10, 0.5, 0)
    truth = MixtureModel(b1, b2)
    obs = generate(truth, 2000, seed=1).observed()
    rep = loss_sandwich_check(EstimatePair(b1, b2), truth, obs)
    assert rep.value == 0 and rep.lower == 0 and rep.holds
    rep = loss_sandwich_check(EstimatePair(-b1, -b2), truth, obs)
    assert rep.lower_arm == "separation" and rep.lower == pytest.approx(0.2 * np.sqrt(0.5) * 0.5)


def test_gadget_examples():
    x, y = hardness_gadget((1, 1))
    assert x.shape == (5, 2)
    np.testing.assert_array_equal(y, [1, 1, 0, 0, 1])
    x, y = hardness_gadget((3,))
    assert y[-1] == 1.5 and brute_force_mixed_solve(x, y) is None
    sol = brute_force_mixed_solve(*hardness_gadget((1, 2, 3)))
    for b in (sol.estimate.beta1, sol.estimate.beta2):
        for bi, ai in zip(b, (1, 2, 3)):
            assert min(abs(bi), abs(bi - ai)) < 1e-9


def test_brute_force_agrees_with_em_fixed_point():
    truth = MixtureModel([1.0, 2.0], [-1.0, 0.5])
    s = generate(truth, 6, seed=4)
    sol = brute_force_mixed_solve(s.xs, s.ys)
    assert sol is not None
    fixed, _, _ = em_step(sol.estimate, s.observed())
    assert loss(fixed, s.observed()) <= 1e-18
    assert loss(sol.estimate, s.observed()) <= 1e-18
