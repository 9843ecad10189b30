import numpy as np
import pytest

from proxsamp import _kernels


def bisect_simplex_project(v):
    """Independent oracle: find the shift theta with sum(max(v-theta,0)) = 1."""
    lo = np.min(v) - 1.0
    hi = np.max(v)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(np.maximum(v - mid, 0.0)) > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 25])
def test_simplex_projection_matches_bisection(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        v = rng.standard_normal(n) * rng.uniform(0.1, 10.0)
        w = _kernels.simplex_project(v)
        ref = bisect_simplex_project(v)
        assert w.min() >= 0.0
        assert abs(w.sum() - 1.0) < 1e-12
        np.testing.assert_allclose(w, ref, atol=1e-10)


def test_simplex_projection_feasible_input_fixed():
    v = np.array([0.2, 0.5, 0.3])
    np.testing.assert_allclose(_kernels.simplex_project(v), v, atol=1e-15)


def brute_force_dual(gram, lin, curv, n_grid=400):
    """Grid search of the dual over the 2-simplex."""
    best = -np.inf
    for t in np.linspace(0.0, 1.0, n_grid + 1):
        w = np.array([t, 1.0 - t])
        val = w @ lin - 0.5 * curv * w @ gram @ w
        best = max(best, val)
    return best


def test_dual_ascent_two_planes_vs_grid():
    rng = np.random.default_rng(3)
    for _ in range(25):
        S = rng.standard_normal((2, 4))
        gram = S @ S.T
        lin = rng.standard_normal(2)
        curv = rng.uniform(0.05, 2.0)
        step = 1.0 / (curv * np.linalg.eigvalsh(gram)[-1] + 1e-12)
        w, gap, _ = _kernels.dual_ascent(
            gram, lin, curv, step, 1e-12, 200_000, np.array([0.5, 0.5])
        )
        assert gap <= 1e-12
        val = w @ lin - 0.5 * curv * w @ gram @ w
        assert val >= brute_force_dual(gram, lin, curv) - 1e-6


def test_numpy_and_numba_paths_agree():
    rng = np.random.default_rng(5)
    S = rng.standard_normal((6, 3))
    gram = S @ S.T
    lin = rng.standard_normal(6)
    curv = 0.7
    step = 1.0 / (curv * np.linalg.eigvalsh(gram)[-1])
    w0 = np.full(6, 1.0 / 6.0)
    args = (gram, lin, curv, step, 1e-11, 100_000, w0)
    w_py, gap_py, it_py = _kernels._dual_ascent_py(*args)
    w_cur, gap_cur, it_cur = _kernels.dual_ascent(*args)
    np.testing.assert_allclose(w_py, w_cur, atol=1e-13)
    assert it_py == it_cur
