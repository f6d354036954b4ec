"""The eigen-solver is checked against a textbook cyclic Jacobi method
written here, independent of both LAPACK and the code under test."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mixedreg import ConvergenceError, InvalidInputError
from mixedreg.linalg import (fix_sign, least_squares, project_onto_span, spectral_norm, symmetric,
                             top2_eig)


def jacobi_eig(a, sweeps=100, tol=1e-14):
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                j = np.eye(n)
                j[p, p] = j[q, q] = c
                j[p, q], j[q, p] = s, -s
                a = j.T @ a @ j
                v = v @ j
    vals = np.diag(a)
    order = np.argsort(vals)[::-1]
    return vals[order], v[:, order]


def random_symmetric(rng, n, gap=0.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(-3, 3, n)
    lam.sort()
    lam = lam[::-1].copy()
    lam[0] += gap
    lam[0] = max(lam[0], lam[1] + gap)
    return (q * lam) @ q.T


@pytest.mark.parametrize("seed", range(25))
def test_top2_matches_jacobi(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    m = random_symmetric(rng, n, gap=0.2)
    vals, vecs = jacobi_eig(m)
    top = top2_eig(m)
    np.testing.assert_allclose(top.values, vals[:2], atol=1e-9)
    if n > 2 and vals[1] - vals[2] > 1e-3:
        for i, pair in enumerate(top):
            assert abs(abs(pair.vector @ vecs[:, i]) - 1) < 1e-8


@given(arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_top2_residual_property(a):
    m = symmetric(a)
    top = top2_eig(m)
    scale = max(1.0, np.linalg.norm(m))
    for pair in top:
        assert np.linalg.norm(m @ pair.vector - pair.value * pair.vector) <= 1e-8 * scale
        assert abs(np.linalg.norm(pair.vector) - 1) < 1e-10
    assert top.first.value >= top.second.value - 1e-9 * scale
    assert abs(top.first.vector @ top.second.vector) < 1e-8


def test_top2_degenerate_flag():
    top = top2_eig(np.diag([2.0, 2.0, 1.0]))
    assert top.degenerate
    assert top.values == pytest.approx([2.0, 2.0])
    assert not top2_eig(np.diag([3.0, 2.0, 1.0])).degenerate


def test_top2_convergence_error():
    rng = np.random.default_rng(0)
    with pytest.raises(ConvergenceError) as info:
        top2_eig(random_symmetric(rng, 30), tol=1e-16, max_iter=2)
    assert info.value.iterations == 2


def test_symmetric_rejects_bad_input():
    for bad in (np.zeros((2, 3)), np.zeros((0, 0)), np.array([[np.inf]])):
        with pytest.raises(InvalidInputError):
            symmetric(bad)
    with pytest.raises(InvalidInputError):
        top2_eig(np.eye(1))


def test_fix_sign():
    assert fix_sign(np.array([0.0, -1.0, 2.0])).tolist() == [0.0, 1.0, -2.0]
    assert fix_sign(np.array([1e-15, 3.0])).tolist() == [1e-15, 3.0]


@given(st.integers(1, 6), st.integers(1, 12), st.integers(0, 10**6))
def test_least_squares_normal_equations(k, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k))
    y = rng.standard_normal(n)
    b = least_squares(x, y)
    # first-order optimality and minimum norm (b lies in the row space)
    assert np.linalg.norm(x.T @ (y - x @ b)) <= 1e-8 * (1 + np.linalg.norm(y))
    np.testing.assert_allclose(b, np.linalg.pinv(x) @ y, atol=1e-8)


def test_least_squares_rank_deficient_min_norm():
    x = np.array([[1.0, 1.0], [2.0, 2.0]])
    b = least_squares(x, np.array([2.0, 4.0]))
    np.testing.assert_allclose(b, [1.0, 1.0])
    with pytest.raises(InvalidInputError):
        least_squares(np.zeros((2, 2)), np.zeros(3))


def test_project_onto_span():
    basis = np.eye(4)[:2]
    np.testing.assert_allclose(project_onto_span([1, 2, 3, 4], basis), [1, 2, 0, 0])
    np.testing.assert_allclose(project_onto_span([1, 2, 3, 4], basis.T), [1, 2, 0, 0])
    with pytest.raises(InvalidInputError):
        project_onto_span([1, 2, 3, 4], 2 * basis)


@pytest.mark.parametrize("seed", range(5))
def test_spectral_norm(seed):
    rng = np.random.default_rng(seed)
    m = random_symmetric(rng, 6)
    assert spectral_norm(m) == pytest.approx(np.max(np.abs(jacobi_eig(m)[0])), rel=1e-9)
    assert spectral_norm([[-4.0]]) == 4.0
