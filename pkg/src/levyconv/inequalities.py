"""Checkers for the pathwise and in-expectation convolution inequalities.

Pathwise checks evaluate both sides of the p-th power bound

    ||X(t)||^p <= e^{p a t} ||X0||^p
                + p int_0^t e^{p a (t-s)} ||X(s-)||^{p-2} <X(s-), dZ(s)>
                + (continuous quadratic-variation term, zero here)
                + sum_{s<=t} e^{p a (t-s)} ( ||X(s)||^p - ||X(s-)||^p
                                             - p ||X(s-)||^{p-2} <X(s-), DX(s)> )

along a simulated convolution path, where a is the semigroup growth bound.
The absolutely continuous part of the dZ term is integrated by a trapezoid
rule with the drift density frozen at the cell midpoint (the same value the
integrator used), the jump parts are exact finite sums, and the whole right
side is accumulated by the stable recurrence
R(t_{k+1}) = e^{p a h} R(t_k) + local increments.

Expectation bounds with unspecified constants are verified as Monte-Carlo
ratio estimates: finite, confidence-interval bounded, and invariant under
positive scaling of the integrand (both sides are homogeneous).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .convolution import SemimartingaleDecomposition, convolve
from .hilbert import DiagonalGenerator
from .levy import (
    MarkSpace,
    VectorCadlagPath,
    compensated_integral,
    make_grid,
    path_rng,
    sample_prm,
)
from .parallel import map_paths

__all__ = [
    "PathwiseReport",
    "RatioEstimate",
    "MartingaleScenario",
    "JumpConsistencyError",
    "check_pth_power_ito",
    "check_ito_p2",
    "check_taylor_lemma",
    "taylor_lemma_margins",
    "TaylorLemmaCheck",
    "estimate_kotelenez_ratio",
    "estimate_burkholder_ratio",
    "estimate_bichteler_jacod",
    "check_bdg_corollary",
    "BdgCorollaryReport",
    "epsilon_tolerance",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


class JumpConsistencyError(ValueError):
    """The path's jumps and the driver's jumps disagree."""


@dataclass(eq=False)
class PathwiseReport:
    """Per-node left side, right side and slack of a pathwise inequality."""

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def min_slack(self) -> float:
        return float(np.min(self.slack))

    def violations(self, epsilon: float) -> int:
        """Number of nodes with slack below -epsilon."""
        return int(np.sum(self.slack < -epsilon))

    def holds(self, epsilon: float) -> bool:
        return self.violations(epsilon) == 0


def epsilon_tolerance(min_slack_h: float, min_slack_h2: float, h: float,
                      scale: float = 1.0, safety: float = 10.0) -> float:
    """Per-unit-step tolerance coefficient c for eps(h) = c h + floor.

    c is calibrated as `safety` times the observed min-slack change between
    step sizes h and h/2; the floor guards exactly-tight cases against
    rounding.  Returns c; callers form eps(h') = c h' + 1e-12 (1 + scale).
    """
    return safety * abs(min_slack_h - min_slack_h2) / h


def _eps(c: float, h: float, scale: float) -> float:
    return c * h + 1e-12 * (1.0 + scale)


def _check_jumps_consistent(X: VectorCadlagPath, Z: SemimartingaleDecomposition) -> np.ndarray:
    zt = Z.jumps.times
    xt = X.jump_times()
    if xt.size != zt.size or (xt.size and not np.array_equal(xt, zt)):
        raise JumpConsistencyError("path and driver have different jump times")
    dz = Z.jump_increments()
    dx = X.jump_increments()
    if dz.size:
        tol = 1e-9 * (1.0 + float(np.abs(dz).max()))
        if float(np.abs(dx - dz).max()) > tol:
            # for convolutions Delta X = Delta Z at every jump; anything else
            # means X was not produced from this driver
            raise JumpConsistencyError("path jump increments differ from driver jumps")
    return dz


def _assemble_report(
    X: VectorCadlagPath,
    Z: SemimartingaleDecomposition,
    gen: DiagonalGenerator,
    p: float,
    jump_rule: str,
) -> PathwiseReport:
    """Shared right-side recurrence; jump_rule selects the p-th power
    correction sum ("pth") or the p=2 quadratic-variation form ("qv")."""
    dz = _check_jumps_consistent(X, Z)
    times = X.times
    alpha = gen.alpha
    q = p - 2.0

    nl = np.linalg.norm(X.left, axis=1)
    nr = np.linalg.norm(X.right, axis=1)
    lhs = nr**p

    jump_event = np.full(times.size, -1, dtype=int)
    jump_event[np.flatnonzero(X.jump_mask)] = np.arange(dz.shape[0])

    rhs = np.empty_like(lhs)
    rhs[0] = lhs[0]
    for c in range(times.size - 1):
        h = times[c + 1] - times[c]
        w = float(np.exp(p * alpha * h))
        gbar = Z.total_drift_density(times[c] + 0.5 * h)
        f_left = nr[c] ** q * float(np.dot(X.right[c], gbar))
        f_right = nl[c + 1] ** q * float(np.dot(X.left[c + 1], gbar))
        acc = w * rhs[c] + p * 0.5 * h * (w * f_left + f_right)
        e = jump_event[c + 1]
        if e >= 0:
            xm = X.left[c + 1]
            dzv = dz[e]
            wj = nl[c + 1] ** q
            acc += p * wj * float(np.dot(xm, dzv))
            if jump_rule == "pth":
                dxv = X.right[c + 1] - xm
                acc += lhs[c + 1] - nl[c + 1] ** p - p * wj * float(np.dot(xm, dxv))
            else:
                acc += float(np.dot(dzv, dzv))
        rhs[c + 1] = acc
    return PathwiseReport(times=times.copy(), lhs=lhs, rhs=rhs)


def check_pth_power_ito(
    X: VectorCadlagPath,
    Z: SemimartingaleDecomposition,
    gen: DiagonalGenerator,
    p: float,
) -> PathwiseReport:
    """Pathwise p-th power bound along a convolution path, p >= 2.

    The dZ term is split exactly as in the decomposition: drift plus
    compensator by quadrature, jumps as an exact sum.  The continuous
    quadratic-variation term is structurally zero (the engine generates no
    continuous martingale part).
    """
    if p < 2:
        raise ValueError("the p-th power bound requires p >= 2")
    return _assemble_report(X, Z, gen, float(p), "pth")


def check_ito_p2(
    X: VectorCadlagPath,
    Z: SemimartingaleDecomposition,
    gen: DiagonalGenerator,
) -> PathwiseReport:
    """Squared-norm pathwise bound with the full [Z] quadratic-variation term.

    Agrees with check_pth_power_ito at p = 2 up to the algebraically
    equivalent regrouping of the jump terms.
    """
    return _assemble_report(X, Z, gen, 2.0, "qv")


@dataclass(frozen=True)
class TaylorLemmaCheck:
    lhs: float
    rhs: float
    holds: bool


def taylor_lemma_margins(xs: np.ndarray, ys: np.ndarray, ps: np.ndarray):
    """Vectorized two-sided evaluation of the pointwise Taylor bound

        ||x+y||^p - ||x||^p - p ||x||^{p-2} <x, y>
            <= p(p-1)/2 (||x||^{p-2} + ||x+y||^{p-2}) ||y||^2

    over rows of xs, ys with exponents ps.  Returns (lhs, rhs) arrays.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    ps = np.asarray(ps, dtype=float)
    nx = np.linalg.norm(xs, axis=1)
    ny2 = np.sum(ys**2, axis=1)
    nxy = np.linalg.norm(xs + ys, axis=1)
    dot = np.sum(xs * ys, axis=1)
    lhs = nxy**ps - nx**ps - ps * nx ** (ps - 2) * dot
    rhs = 0.5 * ps * (ps - 1) * (nx ** (ps - 2) + nxy ** (ps - 2)) * ny2
    return lhs, rhs


def check_taylor_lemma(x: np.ndarray, y: np.ndarray, p: float) -> TaylorLemmaCheck:
    """Check the pointwise Taylor bound for one pair (x, y) at exponent p >= 2."""
    if p < 2:
        raise ValueError("the Taylor bound requires p >= 2")
    lhs, rhs = taylor_lemma_margins(x, y, np.array([float(p)]))
    lhs_v, rhs_v = float(lhs[0]), float(rhs[0])
    return TaylorLemmaCheck(
        lhs=lhs_v, rhs=rhs_v, holds=lhs_v <= rhs_v * (1 + 1e-12) + 1e-12
    )


# ---------------------------------------------------------------------------
# Monte-Carlo ratio estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MartingaleScenario:
    """Parametric martingale driver for the in-expectation checkers.

    Jump amplitude of mark j at time t:
        scale * jump_matrix[j] * (1 + mod_amp * sin(mod_freq * t)).
    eigenvalues = None means A = 0 (the convolution is the plain integral).
    Everything is plain data, so scenarios cross process boundaries.
    """

    nu: np.ndarray
    jump_matrix: np.ndarray
    eigenvalues: np.ndarray | None = None
    mod_amp: float = 0.0
    mod_freq: float = 1.0
    scale: float = 1.0
    horizon: float = 1.0
    n_cells: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", np.atleast_1d(np.asarray(self.nu, dtype=float)))
        jm = np.atleast_2d(np.asarray(self.jump_matrix, dtype=float))
        object.__setattr__(self, "jump_matrix", jm)
        if self.eigenvalues is not None:
            ev = np.atleast_1d(np.asarray(self.eigenvalues, dtype=float))
            if ev.size != jm.shape[1]:
                raise ValueError("eigenvalues and jump_matrix dimension mismatch")
            object.__setattr__(self, "eigenvalues", ev)
        if jm.shape[0] != self.nu.size:
            raise ValueError("jump_matrix needs one row per mark")

    @property
    def dim(self) -> int:
        return self.jump_matrix.shape[1]

    @property
    def space(self) -> MarkSpace:
        return MarkSpace(nu=self.nu)

    @property
    def generator(self) -> DiagonalGenerator:
        ev = self.eigenvalues if self.eigenvalues is not None else np.zeros(self.dim)
        return DiagonalGenerator(eigenvalues=ev)

    def jump_value(self, t: float, j: int) -> np.ndarray:
        return self.scale * self.jump_matrix[j] * (1.0 + self.mod_amp * np.sin(self.mod_freq * t))

    def with_scale(self, c: float) -> "MartingaleScenario":
        return dataclasses.replace(self, scale=self.scale * c)


def _martingale_stats_worker(args: tuple, idx: int) -> np.ndarray:
    """Per-path statistics (sup||Y||, sup||M||, [M]_T, sup|I|) where Y is the
    convolution of M against the scenario semigroup and I(t) = int <Y(s-), dM(s)>."""
    scenario, master_seed = args
    rng = path_rng(master_seed, idx)
    space = scenario.space
    gen = scenario.generator
    prm = sample_prm(space, scenario.horizon, rng)
    grid = make_grid(scenario.horizon, scenario.n_cells, prm.times)

    Z = SemimartingaleDecomposition(
        space=space, jumps=prm, jump_value=scenario.jump_value, dim=scenario.dim
    )
    M = compensated_integral(prm, space, scenario.jump_value, grid)
    Y = M if scenario.eigenvalues is None else convolve(gen, np.zeros(gen.dim), Z, grid)

    dz = Z.jump_increments()
    qv_total = float(np.sum(dz**2))

    # scalar integral I(t) = sum <Y(s-), dM> - int <Y(s), c(s)> ds
    jump_event = np.full(grid.size, -1, dtype=int)
    jump_event[np.flatnonzero(M.jump_mask)] = np.arange(dz.shape[0])
    acc = 0.0
    sup_i = 0.0
    for c in range(grid.size - 1):
        h = grid[c + 1] - grid[c]
        cmid = Z.compensator_density(grid[c] + 0.5 * h)
        acc -= 0.5 * h * (float(np.dot(Y.right[c], cmid)) + float(np.dot(Y.left[c + 1], cmid)))
        e = jump_event[c + 1]
        if e >= 0:
            acc += float(np.dot(Y.left[c + 1], dz[e]))
        sup_i = max(sup_i, abs(acc))
    return np.array([Y.sup_norm(), M.sup_norm(), qv_total, sup_i])


def _collect_stats(
    scenario: MartingaleScenario, n_paths: int, master_seed: int, workers: int
) -> np.ndarray:
    if n_paths < 100:
        raise ValueError("ratio estimators require n_paths >= 100")
    rows = map_paths(_martingale_stats_worker, (scenario, master_seed), n_paths, workers)
    return np.vstack(rows)


@dataclass(frozen=True)
class RatioEstimate:
    """Ratio of Monte-Carlo means with a delta-method confidence interval."""

    label: str
    numerator: float
    denominator: float
    ratio: float
    ci_halfwidth: float
    n_paths: int
    degenerate: bool = False


def _ratio_estimate(label: str, num: np.ndarray, den: np.ndarray, n_paths: int) -> RatioEstimate:
    mn = float(np.mean(num))
    md = float(np.mean(den))
    if md <= 0.0 or not np.isfinite(md):
        return RatioEstimate(label, mn, md, float("nan"), float("nan"), n_paths, True)
    ratio = mn / md
    cov = np.cov(np.vstack([num, den]), ddof=1)
    var = (cov[0, 0] - 2 * ratio * cov[0, 1] + ratio**2 * cov[1, 1]) / (len(num) * md**2)
    half = _Z95 * float(np.sqrt(max(var, 0.0)))
    return RatioEstimate(label, mn, md, ratio, half, n_paths)


def estimate_kotelenez_ratio(
    scenario: MartingaleScenario,
    n_paths: int,
    master_seed: int,
    workers: int = 1,
) -> RatioEstimate:
    """E sup ||int S dM||^2 against e^{4 a T} E [M]_T; requires a >= 0."""
    gen = scenario.generator
    if gen.alpha < 0:
        raise ValueError("this maximal bound is stated for growth bound >= 0")
    stats = _collect_stats(scenario, n_paths, master_seed, workers)
    weight = float(np.exp(4.0 * gen.alpha * scenario.horizon))
    return _ratio_estimate("kotelenez", stats[:, 0] ** 2, weight * stats[:, 2], n_paths)


def estimate_burkholder_ratio(
    scenario: MartingaleScenario,
    p: float,
    n_paths: int,
    master_seed: int,
    workers: int = 1,
) -> RatioEstimate:
    """E sup ||int S dM||^p against E [M]_T^{p/2}; contraction semigroups, p >= 2."""
    if p < 2:
        raise ValueError("the convolution maximal bound requires p >= 2")
    if scenario.generator.alpha > 0:
        raise ValueError("this bound is stated for contraction semigroups (alpha <= 0)")
    stats = _collect_stats(scenario, n_paths, master_seed, workers)
    return _ratio_estimate(f"burkholder_p{p:g}", stats[:, 0] ** p, stats[:, 2] ** (p / 2), n_paths)


def _deterministic_denominators(scenario: MartingaleScenario, p: float, refine: int = 4):
    """int_0^T sum_j ||k(s, j)|| nu_j ds and the same with ||k||^p, midpoint rule."""
    n = scenario.n_cells * refine
    edges = np.linspace(0.0, scenario.horizon, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    h = scenario.horizon / n
    d1 = 0.0
    dp = 0.0
    for t in mids:
        for j in range(scenario.nu.size):
            a = float(np.linalg.norm(scenario.jump_value(float(t), j)))
            d1 += h * scenario.nu[j] * a
            dp += h * scenario.nu[j] * a**p
    return d1, dp


def estimate_bichteler_jacod(
    scenario: MartingaleScenario,
    p: float,
    n_paths: int,
    master_seed: int,
    workers: int = 1,
) -> RatioEstimate:
    """E sup ||int int k dN~||^p against E (int int ||k|| nu ds)^p + E int int ||k||^p nu ds.

    The integrand here is deterministic in (time, mark), so both denominator
    integrals are deterministic and the confidence interval comes from the
    numerator alone.  p >= 1.
    """
    if p < 1:
        raise ValueError("the L^p jump-integral bound requires p >= 1")
    stats = _collect_stats(scenario, n_paths, master_seed, workers)
    d1, dp = _deterministic_denominators(scenario, p)
    den = np.full(n_paths, d1**p + dp)
    return _ratio_estimate(f"bichteler_jacod_p{p:g}", stats[:, 1] ** p, den, n_paths)


@dataclass(frozen=True)
class BdgCorollaryReport:
    """Implied constants for E sup |int <X, dM>|^p against the two-term bound
    (X*)^{2p}/(2K) + K/2 [M]^p, per K, plus the middle bound (X*)^p [M]^{p/2}."""

    per_k: tuple[RatioEstimate, ...]
    middle: RatioEstimate

    @property
    def degenerate(self) -> bool:
        return self.middle.degenerate


def check_bdg_corollary(
    scenario: MartingaleScenario,
    p: float,
    n_paths: int,
    master_seed: int,
    k_values: tuple[float, ...] = (0.1, 1.0, 10.0),
    workers: int = 1,
) -> BdgCorollaryReport:
    """Estimate the implied constants of the scalar-integral corollary.

    X is the convolution path itself (adapted), X* its pathwise running
    supremum.  p >= 1 and every K > 0.
    """
    if p < 1:
        raise ValueError("p >= 1 required")
    if any(k <= 0 for k in k_values):
        raise ValueError("K values must be positive")
    stats = _collect_stats(scenario, n_paths, master_seed, workers)
    sup_x, qv, sup_i = stats[:, 0], stats[:, 2], stats[:, 3]
    num = sup_i**p
    per_k = tuple(
        _ratio_estimate(
            f"bdg_corollary_K{k:g}",
            num,
            sup_x ** (2 * p) / (2 * k) + 0.5 * k * qv**p,
            n_paths,
        )
        for k in k_values
    )
    middle = _ratio_estimate("bdg_corollary_middle", num, sup_x**p * qv ** (p / 2), n_paths)
    return BdgCorollaryReport(per_k=per_k, middle=middle)
