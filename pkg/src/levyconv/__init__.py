"""levyconv: stochastic convolution integrals driven by compensated Poisson
random measures, with pathwise and statistical verification of their norm
inequalities, a semilinear mild-solution solver, successive-approximation
diagnostics, and moment-stability experiments."""

from .convolution import SemimartingaleDecomposition, convolve, phi1
from .hilbert import (
    DiagonalGenerator,
    apply_generator,
    apply_semigroup,
    inner,
    norm,
    yosida_generator,
    yosida_resolvent,
)
from .inequalities import (
    MartingaleScenario,
    PathwiseReport,
    RatioEstimate,
    check_bdg_corollary,
    check_ito_p2,
    check_pth_power_ito,
    check_taylor_lemma,
    estimate_bichteler_jacod,
    estimate_burkholder_ratio,
    estimate_kotelenez_ratio,
)
from .levy import (
    MarkedJumpPath,
    MarkSpace,
    QuadraticVariationPath,
    VectorCadlagPath,
    compensated_integral,
    finite_variation_path,
    make_grid,
    path_rng,
    quadratic_variation,
    refine_grid,
    sample_prm,
)
from .solver import (
    AffineDrift,
    AffineJumpCoefficient,
    EquationSpec,
    MonotoneCubicDrift,
    PointInitial,
    TruncatedGaussianInitial,
    audit_hypothesis,
    direct_solve,
    hypothesis_constants,
    picard_solve,
    realized_decomposition,
    stability_experiment,
    stability_gamma,
)

__version__ = "0.1.0"
