import numpy as np
import pytest

from levyconv.levy import (
    MarkedJumpPath,
    MarkSpace,
    compensated_integral,
    finite_variation_path,
    make_grid,
    path_rng,
    quadratic_variation,
    refine_grid,
    sample_prm,
)


def test_mark_space_validation():
    sp = MarkSpace(nu=np.array([1.0, 0.5]))
    assert sp.total_rate == 1.5
    assert np.allclose(sp.probabilities, [2 / 3, 1 / 3])
    with pytest.raises(ValueError):
        MarkSpace(nu=np.array([1.0, 0.0]))


def test_sample_prm_zero_horizon_is_empty():
    sp = MarkSpace(nu=np.array([2.0]))
    path = sample_prm(sp, 0.0, path_rng(0, 0))
    assert path.n_events == 0


def test_sample_prm_deterministic_per_seed():
    sp = MarkSpace(nu=np.array([1.0, 2.0]))
    a = sample_prm(sp, 3.0, path_rng(123, 7))
    b = sample_prm(sp, 3.0, path_rng(123, 7))
    assert np.array_equal(a.times, b.times) and np.array_equal(a.marks, b.marks)
    c = sample_prm(sp, 3.0, path_rng(123, 8))
    assert not (a.n_events == c.n_events and np.array_equal(a.times, c.times))


def test_sample_prm_interarrival_mean():
    # one long single-mark path: inter-arrival mean ~ 1/nu within 3 sigma
    nu = 2.0
    sp = MarkSpace(nu=np.array([nu]))
    horizon = 50_000.0
    path = sample_prm(sp, horizon, path_rng(1, 0))
    gaps = np.diff(path.times)
    n = gaps.size
    assert abs(gaps.mean() - 1 / nu) < 3 * (1 / nu) / np.sqrt(n)


def test_sample_prm_poisson_count_oracle():
    # Lambda=2, T=5: mean count over 1e5 paths within 3*sqrt(10/1e5) of 10
    sp = MarkSpace(nu=np.array([0.5, 1.5]))
    n_paths = 100_000
    counts = np.fromiter(
        (sample_prm(sp, 5.0, path_rng(2, i)).n_events for i in range(n_paths)),
        dtype=float,
        count=n_paths,
    )
    assert abs(counts.mean() - 10.0) < 3 * np.sqrt(10.0 / n_paths)


def test_jump_path_validation():
    with pytest.raises(ValueError):
        MarkedJumpPath(horizon=1.0, times=np.array([0.5, 0.5]), marks=np.array([0, 0]))
    with pytest.raises(ValueError):
        MarkedJumpPath(horizon=1.0, times=np.array([1.5]), marks=np.array([0]))


def test_make_grid_contains_jumps_and_refines_in_place():
    grid = make_grid(1.0, 8, np.array([0.33, 0.77]))
    assert 0.33 in grid and 0.77 in grid and grid[0] == 0.0 and grid[-1] == 1.0
    fine = refine_grid(grid, 2)
    assert np.all(np.isin(grid, fine))
    assert fine.size == 2 * grid.size - 1


def test_compensated_integral_zero_integrand():
    sp = MarkSpace(nu=np.array([1.0]))
    prm = sample_prm(sp, 1.0, path_rng(3, 0))
    grid = make_grid(1.0, 4, prm.times)
    m = compensated_integral(prm, sp, lambda t, j: np.zeros(2), grid)
    assert np.all(m.left == 0) and np.all(m.right == 0)


def test_compensated_integral_constant_closed_form():
    nu = 1.3
    c = np.array([0.4, -0.2])
    sp = MarkSpace(nu=np.array([nu]))
    prm = sample_prm(sp, 2.0, path_rng(4, 0))
    grid = make_grid(2.0, 16, prm.times)
    m = compensated_integral(prm, sp, lambda t, j: c, grid)
    expected = (prm.n_events - nu * 2.0) * c
    assert np.allclose(m.final, expected, atol=1e-12)


def test_compensated_integral_rejects_non_adapted_grid():
    sp = MarkSpace(nu=np.array([1.0]))
    prm = MarkedJumpPath(horizon=1.0, times=np.array([0.3141]), marks=np.array([0]))
    with pytest.raises(ValueError, match="jump-adapted"):
        compensated_integral(prm, sp, lambda t, j: np.ones(1), np.linspace(0, 1, 5))


def test_compensated_integral_is_centered_and_isometric():
    # sample mean ~ 0 within 3 sigma, and E[M](T) = E||M(T)||^2 within 3 sigma
    sp = MarkSpace(nu=np.array([0.8, 1.2]))
    vecs = np.array([[0.5, -0.1], [0.2, 0.3]])
    n_paths = 10_000
    finals = np.zeros((n_paths, 2))
    qvs = np.zeros(n_paths)
    for i in range(n_paths):
        prm = sample_prm(sp, 1.0, path_rng(5, i))
        grid = make_grid(1.0, 8, prm.times)
        m = compensated_integral(prm, sp, lambda t, j: vecs[j], grid)
        finals[i] = m.final
        qvs[i] = float(np.sum(vecs[prm.marks] ** 2))
    for k in range(2):
        assert abs(finals[:, k].mean()) <= 3 * finals[:, k].std(ddof=1) / np.sqrt(n_paths)
    sq = np.sum(finals**2, axis=1)
    diff = sq - qvs
    assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / np.sqrt(n_paths)


def test_quadratic_variation_trivial_and_single_jump():
    qv = quadratic_variation(np.array([]), np.zeros((0, 2)), grid=np.linspace(0, 1, 5))
    assert np.all(qv.values == 0)
    v = np.array([[3.0, 4.0]])
    qv = quadratic_variation(np.array([0.5]), v, grid=np.array([0.0, 0.25, 0.5, 1.0]))
    assert np.allclose(qv.values, [0.0, 0.0, 25.0, 25.0])
    assert np.all(qv.continuous_part == 0)


def test_quadratic_variation_matches_brute_force():
    rng = np.random.default_rng(6)
    times = np.sort(rng.uniform(0, 1, size=20))
    incs = rng.standard_normal((20, 3))
    grid = np.linspace(0, 1, 11)
    qv = quadratic_variation(times, incs, grid)
    for k, t in enumerate(grid):
        brute = sum(float(np.dot(incs[i], incs[i])) for i in range(20) if times[i] <= t)
        assert qv.values[k] == pytest.approx(brute, rel=1e-12, abs=1e-14)


def test_finite_variation_path_cases():
    grid = np.linspace(0, 1, 9)
    v, tv = finite_variation_path(lambda t: np.zeros(2), grid)
    assert np.all(v.right == 0) and np.all(tv == 0)

    v, tv = finite_variation_path(lambda t: np.ones(1), grid)
    assert np.allclose(v.right[:, 0], grid, atol=1e-14)
    assert np.allclose(tv, grid, atol=1e-14)


def test_finite_variation_dominates_norm_and_matches_fine_quadrature():
    grid = np.linspace(0, 2, 33)
    dens = lambda t: np.array([np.cos(5 * t), np.sin(3 * t)])
    v, tv = finite_variation_path(dens, grid)
    assert tv[-1] >= np.linalg.norm(v.final) - 1e-14

    fine, tv_fine = finite_variation_path(dens, refine_grid(grid, 10))
    assert abs(tv[-1] - tv_fine[-1]) < 1e-3
    assert np.allclose(v.final, fine.final, atol=1e-3)
