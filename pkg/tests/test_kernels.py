"""Both kernel backends against each other and against plain enumeration."""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mixedreg import kernels
from mixedreg.oracles import hardness_gadget

BACKENDS = kernels.backends()


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS


def naive_first_assignment(x, y, tol):
    m = x.shape[0]
    for idx in range(1 << m):
        labels = [(idx >> (m - 1 - i)) & 1 for i in range(m)]
        rss = 0.0
        for g in (0, 1):
            rows = [i for i in range(m) if labels[i] == g]
            if rows:
                b = np.linalg.lstsq(x[rows], y[rows], rcond=None)[0]
                r = y[rows] - x[rows] @ b
                rss += r @ r
        if np.sqrt(rss) <= tol:
            return idx
    return -1


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("values,expected", [((1, 1), 12), ((1, 2, 3), 28), ((1, 2), -1),
                                             ((2, 3, 4), -1)])
def test_gadget_first_assignment(name, values, expected):
    x, y = hardness_gadget(values)
    assert BACKENDS[name].first_consistent_assignment(x, y, 1e-9) == expected


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("seed", range(12))
def test_matches_naive_enumeration(name, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 3))
    m = int(rng.integers(2, 8))
    x = rng.integers(-2, 3, (m, k)).astype(float)
    b1, b2 = rng.integers(-2, 3, (2, k)).astype(float)
    z = rng.random(m) < 0.5
    y = np.where(z, x @ b1, x @ b2)
    if seed % 3 == 0:
        y = y + rng.standard_normal(m)
    want = naive_first_assignment(x, y, 1e-9)
    assert BACKENDS[name].first_consistent_assignment(x, y, 1e-9) == want


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_start_skips_earlier(name):
    x, y = hardness_gadget((1, 1))
    impl = BACKENDS[name]
    first = impl.first_consistent_assignment(x, y, 1e-9)
    second = impl.first_consistent_assignment(x, y, 1e-9, first + 1)
    assert second > first
    assert impl.first_consistent_assignment(x, y, 1e-9, 1 << 5) == -1


@given(arrays(float, (7, 5), elements=st.floats(0, 10)))
def test_grid_pair_backends_agree(sq):
    results = {name: mod.grid_pair_search(sq) for name, mod in BACKENDS.items()}
    ref = results["python"]
    brute = min((np.minimum(sq[:, i], sq[:, j]).sum(), i, j)
                for i, j in itertools.product(range(5), repeat=2))
    assert ref[2] == pytest.approx(brute[0])
    for got in results.values():
        assert got[:2] == ref[:2]
        assert got[2] == pytest.approx(ref[2])


def test_grid_pair_lexicographic_tie():
    sq = np.ones((3, 4))
    for mod in BACKENDS.values():
        assert mod.grid_pair_search(sq)[:2] == (0, 0)
    losses = BACKENDS["python"].grid_pair_losses(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(losses, [[1.0, 0.0], [0.0, 1.0]])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_read_only_inputs(name):
    x, y = hardness_gadget((1, 1))
    x.setflags(write=False)
    y.setflags(write=False)
    assert BACKENDS[name].first_consistent_assignment(x, y, 1e-9) == 12
    sq = np.ones((2, 3))
    sq.setflags(write=False)
    assert BACKENDS[name].grid_pair_search(sq)[:2] == (0, 0)


def test_env_var_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MIXEDREG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from mixedreg import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True).stdout.strip()
    assert out == "python"
