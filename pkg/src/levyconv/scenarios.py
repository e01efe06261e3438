"""Bundled scenario library and ensemble drivers.

Each verified claim has at least one named scenario so the whole battery is
one command per claim:

* ``zero-noise``            pathwise bound along pure semigroup decay
* ``jump-battery``          randomized pathwise battery, three grid levels
* ``kotelenez-sweep``       squared maximal bound ratio, growth-bound regime
* ``burkholder-sweep``      p-th maximal bound ratio, contraction regime
* ``bichteler-jacod-sweep`` L^p jump-integral bound, no semigroup
* ``bdg-corollary``         scalar-integral corollary implied constants
* ``ou-jump``               linear scalar equation with additive jumps
* ``lipschitz-small-T``     successive-approximation factorial-decay run
* ``stability-affine-additive``  deterministic-difference stability check
* ``stability-cubic``       monotone cubic stability with negative rate bound

All randomness in a scenario run derives from (master seed, path index); the
per-path tolerance of the pathwise battery is calibrated from the observed
slack change between the two coarsest grid levels.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .convolution import SemimartingaleDecomposition, convolve
from .hilbert import DiagonalGenerator
from .inequalities import (
    MartingaleScenario,
    RatioEstimate,
    check_bdg_corollary,
    check_ito_p2,
    check_pth_power_ito,
    estimate_bichteler_jacod,
    estimate_burkholder_ratio,
    estimate_kotelenez_ratio,
)
from .levy import MarkSpace, make_grid, path_rng, refine_grid, sample_prm
from .parallel import map_paths
from .solver import (
    AffineDrift,
    AffineJumpCoefficient,
    EquationSpec,
    MonotoneCubicDrift,
    PointInitial,
)

__all__ = [
    "ConvolutionCase",
    "PathwiseCaseResult",
    "BatteryResult",
    "run_jump_battery",
    "zero_noise_case",
    "sample_battery_case",
    "MomentSweepResult",
    "run_moment_sweep",
    "SCENARIOS",
    "moment_scenario",
    "equation_scenario",
]


# ---------------------------------------------------------------------------
# pathwise battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvolutionCase:
    """One pathwise-check case: generator, mark space, smooth drift density
    u + v cos(w t), and per-mark jump amplitudes B_j (1 + amp sin(freq t))."""

    eigenvalues: np.ndarray
    nu: np.ndarray
    jump_matrix: np.ndarray
    drift_const: np.ndarray
    drift_wave: np.ndarray
    drift_freq: float
    mod_amp: float
    mod_freq: float
    x0: np.ndarray
    p: float
    horizon: float = 1.0

    @property
    def generator(self) -> DiagonalGenerator:
        return DiagonalGenerator(eigenvalues=self.eigenvalues)

    @property
    def space(self) -> MarkSpace:
        return MarkSpace(nu=self.nu)

    def jump_value(self, t: float, j: int) -> np.ndarray:
        return self.jump_matrix[j] * (1.0 + self.mod_amp * np.sin(self.mod_freq * t))

    def drift_density(self, t: float) -> np.ndarray:
        return self.drift_const + self.drift_wave * np.cos(self.drift_freq * t)

    def decomposition(self, prm) -> SemimartingaleDecomposition:
        return SemimartingaleDecomposition(
            space=self.space,
            jumps=prm,
            jump_value=self.jump_value,
            dim=self.eigenvalues.size,
            drift_density=self.drift_density,
        )


def sample_battery_case(rng: np.random.Generator, max_dim: int = 8) -> ConvolutionCase:
    """Random mixed drift/jump case: d <= max_dim, p in {2, 3, 4}."""
    d = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(1, 4))
    return ConvolutionCase(
        eigenvalues=rng.uniform(-3.0, 0.6, size=d),
        nu=rng.uniform(0.3, 1.5, size=m),
        jump_matrix=rng.uniform(-0.8, 0.8, size=(m, d)),
        drift_const=rng.uniform(-1.0, 1.0, size=d),
        drift_wave=rng.uniform(-1.0, 1.0, size=d),
        drift_freq=float(rng.uniform(0.0, 4.0)),
        mod_amp=float(rng.uniform(0.0, 0.5)),
        mod_freq=float(rng.uniform(0.0, 4.0)),
        x0=rng.uniform(-1.0, 1.0, size=d),
        p=float(rng.choice([2.0, 3.0, 4.0])),
    )


def zero_noise_case(dim: int = 4) -> ConvolutionCase:
    """Contraction semigroup, no drift, zero-amplitude jumps: the bound is
    exact semigroup decay and the slack is nonnegative node by node."""
    return ConvolutionCase(
        eigenvalues=DiagonalGenerator.laplacian(dim, scale=0.25).eigenvalues,
        nu=np.array([1.0]),
        jump_matrix=np.zeros((1, dim)),
        drift_const=np.zeros(dim),
        drift_wave=np.zeros(dim),
        drift_freq=0.0,
        mod_amp=0.0,
        mod_freq=0.0,
        x0=np.linspace(1.0, 0.5, dim),
        p=3.0,
    )


@dataclass(frozen=True)
class PathwiseCaseResult:
    """Per-level outcome of one case: slack minima, calibrated tolerances,
    violation counts, and the worst disagreement between the two p = 2
    checker routes."""

    min_slack: np.ndarray
    epsilon: np.ndarray
    violations: np.ndarray
    p2_gap: float
    n_nodes: int

    @property
    def passes(self) -> bool:
        within = bool(np.all(self.min_slack >= -self.epsilon))
        nonincreasing = bool(np.all(np.diff(self.violations) <= 0))
        return within and nonincreasing and int(self.violations[-1]) == 0


def run_pathwise_case(
    case: ConvolutionCase,
    rng: np.random.Generator,
    base_cells: int = 24,
    levels: int = 3,
    collect_nodes: bool = False,
) -> tuple[PathwiseCaseResult, list]:
    """Simulate one jump realization, check the p-th power bound at `levels`
    dyadic grid refinements, and calibrate eps(h) = c h from the slack change
    between the two coarsest levels."""
    gen = case.generator
    prm = sample_prm(case.space, case.horizon, rng)
    Z = case.decomposition(prm)

    grid = make_grid(case.horizon, base_cells, prm.times)
    reports = []
    gaps = []
    for _ in range(levels):
        X = convolve(gen, case.x0, Z, grid)
        reports.append(check_pth_power_ito(X, Z, gen, case.p))
        r2a = check_pth_power_ito(X, Z, gen, 2.0)
        r2b = check_ito_p2(X, Z, gen)
        gaps.append(float(np.max(np.abs(r2a.slack - r2b.slack))))
        grid = refine_grid(grid, 2)

    mins = np.array([r.min_slack for r in reports])
    h0 = case.horizon / base_cells
    scale = float(np.max(reports[0].lhs))
    coeff = 10.0 * abs(mins[0] - mins[1]) / h0 if levels > 1 else 0.0
    eps = np.array([coeff * (h0 / 2**lv) + 1e-12 * (1.0 + scale) for lv in range(levels)])
    viol = np.array([r.violations(e) for r, e in zip(reports, eps)])
    nodes = []
    if collect_nodes:
        nodes = [(lv, r.times, r.lhs, r.rhs) for lv, r in enumerate(reports)]
    result = PathwiseCaseResult(
        min_slack=mins,
        epsilon=eps,
        violations=viol,
        p2_gap=float(np.max(gaps)),
        n_nodes=reports[-1].times.size,
    )
    return result, nodes


def _battery_worker(args: tuple, idx: int):
    fixed_case, master_seed, base_cells, levels, max_dim, collect_nodes = args
    rng = path_rng(master_seed, idx)
    case = fixed_case if fixed_case is not None else sample_battery_case(rng, max_dim)
    res, nodes = run_pathwise_case(case, rng, base_cells, levels, collect_nodes)
    return res, float(case.p), case.eigenvalues.size, nodes


@dataclass(frozen=True)
class BatteryResult:
    min_slack: np.ndarray     # (n_cases, levels)
    epsilon: np.ndarray
    violations: np.ndarray
    p2_gap: float
    p_values: np.ndarray
    dims: np.ndarray
    node_rows: tuple = ()     # (case, level, times, lhs, rhs) when collected

    @property
    def total_violations(self) -> np.ndarray:
        return self.violations.sum(axis=0)

    @property
    def passes(self) -> bool:
        within = bool(np.all(self.min_slack >= -self.epsilon))
        totals = self.total_violations
        return within and bool(np.all(np.diff(totals) <= 0)) and int(totals[-1]) == 0

    def summary(self) -> dict:
        totals = self.total_violations
        return {
            "cases": int(self.min_slack.shape[0]),
            "levels": int(self.min_slack.shape[1]),
            "min_slack_per_level": [float(x) for x in self.min_slack.min(axis=0)],
            "violations_per_level": [int(x) for x in totals],
            "max_epsilon_per_level": [float(x) for x in self.epsilon.max(axis=0)],
            "p2_checker_gap": float(self.p2_gap),
            "passes": self.passes,
        }


def run_jump_battery(
    n_cases: int,
    master_seed: int,
    base_cells: int = 24,
    levels: int = 3,
    workers: int = 1,
    case: ConvolutionCase | None = None,
    max_dim: int = 8,
    collect_nodes: bool = False,
) -> BatteryResult:
    rows = map_paths(
        _battery_worker,
        (case, master_seed, base_cells, levels, max_dim, collect_nodes),
        n_cases,
        workers,
    )
    results = [r[0] for r in rows]
    node_rows = tuple(
        (i, lv, times, lhs, rhs)
        for i, r in enumerate(rows)
        for (lv, times, lhs, rhs) in r[3]
    )
    return BatteryResult(
        min_slack=np.vstack([r.min_slack for r in results]),
        epsilon=np.vstack([r.epsilon for r in results]),
        violations=np.vstack([r.violations for r in results]),
        p2_gap=float(max(r.p2_gap for r in results)),
        p_values=np.array([r[1] for r in rows]),
        dims=np.array([r[2] for r in rows]),
        node_rows=node_rows,
    )


# ---------------------------------------------------------------------------
# moment-bound sweeps
# ---------------------------------------------------------------------------


def moment_scenario(name: str) -> MartingaleScenario:
    if name in ("kotelenez-sweep", "kotelenez"):
        return MartingaleScenario(
            nu=np.array([1.0, 0.6]),
            jump_matrix=np.array([[0.5, -0.2, 0.3, 0.1], [-0.3, 0.4, 0.0, 0.2]]),
            eigenvalues=np.array([0.2, 0.0, -0.5, -1.0]),
            mod_amp=0.3,
            mod_freq=2.0,
            horizon=1.0,
            n_cells=64,
        )
    if name in ("burkholder-sweep", "burkholder"):
        return MartingaleScenario(
            nu=np.array([1.0, 0.6]),
            jump_matrix=np.array([[0.5, -0.2, 0.3, 0.1], [-0.3, 0.4, 0.0, 0.2]]),
            eigenvalues=np.array([-0.3, -1.2, -2.7, -4.8]),
            mod_amp=0.3,
            mod_freq=2.0,
            horizon=1.0,
            n_cells=64,
        )
    if name in ("bichteler-jacod-sweep", "bichteler-jacod"):
        return MartingaleScenario(
            nu=np.array([0.8, 1.2]),
            jump_matrix=np.array([[0.4, -0.1, 0.2], [0.1, 0.3, -0.2]]),
            eigenvalues=None,
            mod_amp=0.4,
            mod_freq=3.0,
            horizon=1.0,
            n_cells=64,
        )
    if name == "bdg-corollary":
        return MartingaleScenario(
            nu=np.array([1.0]),
            jump_matrix=np.array([[0.4, -0.3]]),
            eigenvalues=np.array([-0.5, -1.0]),
            mod_amp=0.2,
            mod_freq=1.5,
            horizon=1.0,
            n_cells=64,
        )
    raise KeyError(f"unknown moment scenario {name!r}")


@dataclass(frozen=True)
class MomentSweepResult:
    """Ratio estimates across an intensity sweep plus the common-random-number
    scale-invariance spread at the base intensity."""

    label: str
    estimates: tuple[RatioEstimate, ...]
    intensity_factors: tuple[float, ...]
    invariance_spread: float
    degenerate: bool

    @property
    def passes(self) -> bool:
        if self.degenerate:
            return True
        finite = all(
            np.isfinite(e.ratio) and np.isfinite(e.ci_halfwidth) for e in self.estimates
        )
        base = max((abs(e.ratio) for e in self.estimates), default=1.0)
        return finite and self.invariance_spread <= 1e-10 * max(1.0, base)

    def summary(self) -> dict:
        return {
            "label": self.label,
            "intensity_factors": [float(f) for f in self.intensity_factors],
            "ratios": [float(e.ratio) for e in self.estimates],
            "ci_halfwidths": [float(e.ci_halfwidth) for e in self.estimates],
            "degenerate_flags": [bool(e.degenerate) for e in self.estimates],
            "invariance_spread": float(self.invariance_spread),
            "passes": self.passes,
        }


def _estimate(kind: str, scenario: MartingaleScenario, p: float, n_paths: int,
              seed: int, workers: int) -> RatioEstimate:
    if kind == "kotelenez":
        return estimate_kotelenez_ratio(scenario, n_paths, seed, workers)
    if kind == "burkholder":
        return estimate_burkholder_ratio(scenario, p, n_paths, seed, workers)
    if kind == "bichteler-jacod":
        return estimate_bichteler_jacod(scenario, p, n_paths, seed, workers)
    raise KeyError(f"unknown estimator kind {kind!r}")


def run_moment_sweep(
    kind: str,
    scenario: MartingaleScenario,
    n_paths: int,
    master_seed: int,
    p: float = 2.0,
    workers: int = 1,
    intensity_factors: tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0),
    scale_factors: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> MomentSweepResult:
    """Estimate one ratio across intensity levels and verify scale invariance
    under common random numbers at the base intensity."""
    estimates = []
    for f in intensity_factors:
        scn = dataclasses.replace(scenario, nu=scenario.nu * f)
        estimates.append(_estimate(kind, scn, p, n_paths, master_seed, workers))
    base = _estimate(kind, scenario, p, n_paths, master_seed, workers)
    spread = 0.0
    if not base.degenerate:
        for c in scale_factors:
            est = _estimate(kind, scenario.with_scale(c), p, n_paths, master_seed, workers)
            spread = max(spread, abs(est.ratio - base.ratio))
    label = f"{kind}_p{p:g}"
    return MomentSweepResult(
        label=label,
        estimates=tuple(estimates),
        intensity_factors=tuple(float(f) for f in intensity_factors),
        invariance_spread=spread,
        degenerate=base.degenerate,
    )


def run_bdg_sweep(
    scenario: MartingaleScenario,
    n_paths: int,
    master_seed: int,
    p: float = 2.0,
    workers: int = 1,
    k_values: tuple[float, ...] = (0.1, 1.0, 10.0),
    intensity_factors: tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0),
    scale_factors: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> list[MomentSweepResult]:
    """Intensity sweep and invariance spread of the corollary constants, one
    result per K."""
    out = []
    base = check_bdg_corollary(scenario, p, n_paths, master_seed, k_values, workers)
    scaled = [
        check_bdg_corollary(scenario.with_scale(c), p, n_paths, master_seed, k_values, workers)
        for c in scale_factors
    ]
    swept = [
        check_bdg_corollary(
            dataclasses.replace(scenario, nu=scenario.nu * f), p, n_paths, master_seed,
            k_values, workers,
        )
        for f in intensity_factors
    ]
    for ik, k in enumerate(k_values):
        spread = 0.0
        if not base.per_k[ik].degenerate:
            spread = max(
                abs(s.per_k[ik].ratio - base.per_k[ik].ratio) for s in scaled
            )
        out.append(
            MomentSweepResult(
                label=f"bdg_corollary_K{k:g}_p{p:g}",
                estimates=tuple(s.per_k[ik] for s in swept),
                intensity_factors=tuple(float(f) for f in intensity_factors),
                invariance_spread=spread,
                degenerate=base.per_k[ik].degenerate,
            )
        )
    return out


# ---------------------------------------------------------------------------
# equation scenarios
# ---------------------------------------------------------------------------


def equation_scenario(name: str):
    """Named equation setups.  Returns (spec, extras) where extras carries
    scenario-specific values (initial pair for stability runs, defaults)."""
    if name == "ou-jump":
        spec = EquationSpec(
            gen=DiagonalGenerator(eigenvalues=np.array([-1.0])),
            drift=AffineDrift(offset=np.array([0.0]), linear=np.array([0.0])),
            jump=AffineJumpCoefficient(gamma=np.array([0.0]), beta=np.array([[1.0]])),
            space=MarkSpace(nu=np.array([0.5])),
            x0=PointInitial(np.array([1.0])),
            horizon=2.0,
            p=2.0,
        )
        return spec, {}
    if name == "lipschitz-small-T":
        spec = EquationSpec(
            gen=DiagonalGenerator(eigenvalues=np.array([-0.5, -1.0])),
            drift=AffineDrift(offset=np.array([0.05, -0.05]), linear=np.array([0.2, 0.2])),
            jump=AffineJumpCoefficient(
                gamma=np.array([0.3]), beta=np.array([[0.2, 0.1]])
            ),
            space=MarkSpace(nu=np.array([2.0])),
            x0=PointInitial(np.array([0.6, -0.4])),
            horizon=0.5,
            p=2.0,
        )
        return spec, {"n_iters": 7}
    if name == "stability-affine-additive":
        spec = EquationSpec(
            gen=DiagonalGenerator(eigenvalues=np.array([-1.0])),
            drift=AffineDrift(offset=np.array([0.0]), linear=np.array([-0.5])),
            jump=AffineJumpCoefficient(gamma=np.array([0.0]), beta=np.array([[0.8]])),
            space=MarkSpace(nu=np.array([1.0])),
            x0=PointInitial(np.array([1.2])),
            horizon=1.5,
            p=2.0,
        )
        return spec, {"x0": np.array([1.2]), "y0": np.array([-0.7]), "exact_rate": -3.0}
    if name == "stability-cubic":
        spec = EquationSpec(
            gen=DiagonalGenerator(eigenvalues=np.array([-1.0, -1.0])),
            drift=MonotoneCubicDrift(mu=-0.5, c=1.0),
            jump=AffineJumpCoefficient(
                gamma=np.array([0.1, -0.1]),
                beta=np.array([[0.1, 0.05], [-0.05, 0.1]]),
            ),
            space=MarkSpace(nu=np.array([0.5, 0.5])),
            x0=PointInitial(np.array([0.8, -0.5])),
            horizon=1.0,
            p=2.0,
        )
        return spec, {"x0": np.array([0.8, -0.5]), "y0": np.array([0.2, 0.3])}
    raise KeyError(f"unknown equation scenario {name!r}")


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

SCENARIOS: dict[str, dict] = {
    "zero-noise": {"kind": "pathwise", "defaults": {"paths": 1, "grid_cells": 24, "grid_levels": 3}},
    "jump-battery": {"kind": "pathwise", "defaults": {"paths": 1000, "grid_cells": 24, "grid_levels": 3}},
    "kotelenez-sweep": {"kind": "moments", "estimator": "kotelenez", "defaults": {"paths": 400, "p": 2.0}},
    "burkholder-sweep": {"kind": "moments", "estimator": "burkholder", "defaults": {"paths": 400, "p": 4.0}},
    "bichteler-jacod-sweep": {
        "kind": "moments",
        "estimator": "bichteler-jacod",
        "defaults": {"paths": 400, "p_list": [1.0, 1.5, 2.0, 3.0]},
    },
    "bdg-corollary": {"kind": "moments", "estimator": "bdg", "defaults": {"paths": 400, "p": 2.0}},
    "ou-jump": {"kind": "solve", "defaults": {"paths": 8, "grid_cells": 128}},
    "lipschitz-small-T": {
        "kind": "picard",
        "defaults": {"paths": 1000, "grid_cells": 64, "n_iters": 7},
    },
    "stability-affine-additive": {
        "kind": "stability",
        "defaults": {"paths": 200, "grid_cells": 100},
    },
    "stability-cubic": {
        "kind": "stability",
        "defaults": {"paths": 10000, "grid_cells": 100},
    },
}
