"""Poisson random measure simulation and pathwise jump calculus.

The mark space is finite with positive intensity weights nu_j, so the total
rate is finite and every realization carries finitely many jumps.  All
pathwise quantities (compensated integrals, quadratic variation, total
variation) are exact finite sums plus per-cell quadrature of the absolutely
continuous parts; grid refinement is the only error control.

Grids are jump-adapted: every jump time is a grid node.  Operations that
would silently misattribute a jump to a cell reject non-adapted grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "MarkSpace",
    "MarkedJumpPath",
    "VectorCadlagPath",
    "QuadraticVariationPath",
    "path_rng",
    "sample_prm",
    "make_grid",
    "refine_grid",
    "compensated_integral",
    "quadratic_variation",
    "finite_variation_path",
]


@dataclass(frozen=True, eq=False)
class MarkSpace:
    """Finite mark space with intensity weights nu_j > 0 (rate per unit time)."""

    nu: np.ndarray

    def __post_init__(self) -> None:
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        if nu.ndim != 1 or nu.size < 1:
            raise ValueError("nu must be a non-empty 1-d array")
        if not np.all(nu > 0):
            raise ValueError("all intensity weights must be positive")
        object.__setattr__(self, "nu", nu)

    @property
    def n_marks(self) -> int:
        return self.nu.size

    @property
    def total_rate(self) -> float:
        return float(np.sum(self.nu))

    @property
    def probabilities(self) -> np.ndarray:
        """Mark distribution of a single event: P(j) = nu_j / total_rate."""
        return self.nu / self.total_rate


@dataclass(frozen=True, eq=False)
class MarkedJumpPath:
    """One realization of the Poisson random measure on (0, horizon].

    times are strictly increasing; marks are 0-based indices into the mark
    space.
    """

    horizon: float
    times: np.ndarray
    marks: np.ndarray

    def __post_init__(self) -> None:
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        marks = np.atleast_1d(np.asarray(self.marks, dtype=np.int64))
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if times.shape != marks.shape:
            raise ValueError("times and marks must have equal length")
        if times.size and (times[0] <= 0 or times[-1] > self.horizon):
            raise ValueError("jump times must lie in (0, horizon]")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("jump times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)

    @property
    def n_events(self) -> int:
        return self.times.size


def path_rng(master_seed: int, path_index: int, stream: int = 0) -> np.random.Generator:
    """Deterministic per-path generator.

    Derived from (master_seed, path_index, stream) via SeedSequence spawn
    keys, so results are independent of worker count and platform: path i
    always sees the same stream no matter which process simulates it.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(path_index, stream))
    return np.random.default_rng(ss)


def sample_prm(space: MarkSpace, horizon: float, rng: np.random.Generator) -> MarkedJumpPath:
    """Sample a marked jump path: Poisson(total_rate * horizon) many events,
    times i.i.d. uniform on (0, horizon] then sorted, marks categorical with
    P(j) = nu_j / total_rate."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if horizon == 0:
        return MarkedJumpPath(horizon=0.0, times=np.empty(0), marks=np.empty(0, np.int64))
    n = int(rng.poisson(space.total_rate * horizon))
    times = np.sort(horizon - rng.uniform(0.0, horizon, size=n))
    # float ties have probability ~0 but would break strict ordering
    while n > 1 and np.unique(times).size < n:
        times = np.sort(horizon - rng.uniform(0.0, horizon, size=n))
    marks = rng.choice(space.n_marks, size=n, p=space.probabilities).astype(np.int64)
    return MarkedJumpPath(horizon=float(horizon), times=times, marks=marks)


@dataclass(eq=False)
class VectorCadlagPath:
    """Vector-valued cadlag path on a grid: left limits and right values per node.

    The path is identified by right continuity; left differs from right only
    at nodes flagged as jumps.  jump_mask is carried explicitly so that a
    zero-sized jump still counts as a jump node.
    """

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    jump_mask: np.ndarray

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.left = np.asarray(self.left, dtype=float)
        self.right = np.asarray(self.right, dtype=float)
        self.jump_mask = np.asarray(self.jump_mask, dtype=bool)
        k = self.times.size
        if self.left.shape != self.right.shape or self.left.shape[0] != k:
            raise ValueError("left/right value arrays must be (n_nodes, dim)")
        if self.jump_mask.shape != (k,):
            raise ValueError("jump_mask must have one flag per node")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("grid times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.left.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.right[-1]

    def jump_increments(self) -> np.ndarray:
        """Increments right - left at the jump nodes, in time order."""
        return self.right[self.jump_mask] - self.left[self.jump_mask]

    def jump_times(self) -> np.ndarray:
        return self.times[self.jump_mask]

    def sup_norm(self) -> float:
        """Largest Euclidean norm over all stored node values (left and right)."""
        nl = np.linalg.norm(self.left, axis=1)
        nr = np.linalg.norm(self.right, axis=1)
        return float(max(nl.max(), nr.max()))


@dataclass(eq=False)
class QuadraticVariationPath:
    """Nondecreasing scalar path [M](t); the continuous part is identically zero
    for the pure-jump martingales generated by this engine."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.times.shape:
            raise ValueError("values must match times")
        if self.values.size and self.values[0] != 0.0:
            raise ValueError("[M](0) must be 0")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("[M] must be nondecreasing")

    @property
    def continuous_part(self) -> np.ndarray:
        return np.zeros_like(self.values)

    @property
    def final(self) -> float:
        return float(self.values[-1])


def make_grid(horizon: float, n_cells: int, jump_times: np.ndarray | None = None) -> np.ndarray:
    """Uniform grid on [0, horizon] with every jump time inserted as a node."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    grid = np.linspace(0.0, horizon, n_cells + 1)
    if jump_times is not None and len(jump_times) > 0:
        jt = np.asarray(jump_times, dtype=float)
        if jt.min() <= 0 or jt.max() > horizon:
            raise ValueError("jump times must lie in (0, horizon]")
        grid = np.union1d(grid, jt)
    return grid


def refine_grid(grid: np.ndarray, factor: int) -> np.ndarray:
    """Insert factor-1 equally spaced interior nodes per cell.

    The original nodes are kept bit-identical, so values at common nodes can
    be compared exactly across refinement levels.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return np.asarray(grid, dtype=float).copy()
    grid = np.asarray(grid, dtype=float)
    t0, t1 = grid[:-1], grid[1:]
    interior = [t0 + (t1 - t0) * (k / factor) for k in range(1, factor)]
    return np.union1d(grid, np.concatenate(interior))


def _jump_node_indices(grid: np.ndarray, jump_times: np.ndarray) -> np.ndarray:
    """Indices of the jump times in the grid; error if any is missing."""
    idx = np.searchsorted(grid, jump_times)
    ok = (idx < grid.size) & (grid[np.minimum(idx, grid.size - 1)] == jump_times)
    if not np.all(ok):
        missing = np.asarray(jump_times)[~ok]
        raise ValueError(
            f"grid is not jump-adapted: missing jump times {missing[:5]}..."
            if missing.size > 5
            else f"grid is not jump-adapted: missing jump times {missing}"
        )
    return idx


def compensated_integral(
    path: MarkedJumpPath,
    space: MarkSpace,
    integrand: Callable[[float, int], np.ndarray],
    grid: np.ndarray,
) -> VectorCadlagPath:
    """Pathwise compensated Poisson integral M(t) of a (time, mark) integrand.

    M(t) = sum_{s_i <= t} integrand(s_i, mark_i)
           - int_0^t sum_j integrand(s, j) nu_j ds,
    with the compensator integrated by the midpoint rule per grid cell (exact
    when the integrand is constant in time).  The grid must contain every
    jump time of the path.
    """
    grid = np.asarray(grid, dtype=float)
    jump_idx = _jump_node_indices(grid, path.times)
    dim = np.atleast_1d(np.asarray(integrand(0.0, 0), dtype=float)).size

    k = grid.size
    left = np.zeros((k, dim))
    right = np.zeros((k, dim))
    jump_mask = np.zeros(k, dtype=bool)
    jump_mask[jump_idx] = True
    jump_at = {int(i): e for e, i in enumerate(jump_idx)}

    def compensator(t: float) -> np.ndarray:
        total = np.zeros(dim)
        for j in range(space.n_marks):
            total += space.nu[j] * np.asarray(integrand(t, j), dtype=float)
        return total

    for c in range(k - 1):
        h = grid[c + 1] - grid[c]
        mid = grid[c] + 0.5 * h
        drift = -h * compensator(mid)
        left[c + 1] = right[c] + drift
        if jump_mask[c + 1]:
            e = jump_at[c + 1]
            right[c + 1] = left[c + 1] + np.asarray(
                integrand(path.times[e], int(path.marks[e])), dtype=float
            )
        else:
            right[c + 1] = left[c + 1]
    return VectorCadlagPath(times=grid, left=left, right=right, jump_mask=jump_mask)


def quadratic_variation(
    jump_times: np.ndarray,
    increments: np.ndarray,
    grid: np.ndarray | None = None,
) -> QuadraticVariationPath:
    """[M](t) = sum_{s_i <= t} ||increment_i||^2, evaluated on the given grid
    (default: 0 and the jump times themselves).  The continuous part is zero:
    the compensator is continuous with finite variation and contributes
    nothing to quadratic variation."""
    jump_times = np.atleast_1d(np.asarray(jump_times, dtype=float))
    increments = np.asarray(increments, dtype=float)
    if increments.ndim == 1:
        increments = increments.reshape(-1, 1) if jump_times.size else increments.reshape(0, 1)
    if increments.shape[0] != jump_times.size:
        raise ValueError("one increment per jump time required")
    sq = np.sum(increments**2, axis=1)
    if grid is None:
        grid = np.concatenate(([0.0], jump_times))
    grid = np.asarray(grid, dtype=float)
    csum = np.concatenate(([0.0], np.cumsum(sq)))
    values = csum[np.searchsorted(jump_times, grid, side="right")]
    return QuadraticVariationPath(times=grid, values=values)


def finite_variation_path(
    density: Callable[[float], np.ndarray],
    grid: np.ndarray,
) -> tuple[VectorCadlagPath, np.ndarray]:
    """Absolutely continuous path V(t) = int_0^t density ds and its total
    variation |V|(t) = int_0^t ||density(s)|| ds, midpoint rule per cell.

    Returns the (continuous, jump-free) path and the total-variation values
    at the grid nodes.
    """
    grid = np.asarray(grid, dtype=float)
    dim = np.atleast_1d(np.asarray(density(grid[0]), dtype=float)).size
    k = grid.size
    vals = np.zeros((k, dim))
    tv = np.zeros(k)
    for c in range(k - 1):
        h = grid[c + 1] - grid[c]
        mid = grid[c] + 0.5 * h
        d = np.asarray(density(mid), dtype=float)
        vals[c + 1] = vals[c] + h * d
        tv[c + 1] = tv[c] + h * float(np.linalg.norm(d))
    path = VectorCadlagPath(
        times=grid, left=vals, right=vals.copy(), jump_mask=np.zeros(k, dtype=bool)
    )
    return path, tv
