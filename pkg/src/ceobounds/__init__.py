"""Rate-distortion bounds for remote and CEO source coding with Gaussian observation noise."""

from .ceo import (
    CeoProblem,
    RegionQuery,
    SubsetStats,
    Verdict,
    ceo_sum_rate_lower,
    ceo_sum_rate_lower_mse,
    ceo_sum_rate_upper_mse,
    gap_bounds,
    gap_sweep,
    inner_sum_rate,
    outer_constraint,
    outer_min_sum_rate,
    rate_loss_lower,
    region_check,
    subset_stats,
)
from .density import (
    Gaussian,
    GaussianMixture,
    Laplace,
    SourceDensity,
    Tabulated,
    Uniform,
    gaussian_equivalent,
    make_density,
    parse_density,
)
from .information import entropy, entropy_power, fisher_information, kappa, remote_stats
from .jscc import (
    JsccScenario,
    MonteCarloEstimate,
    agents_required,
    analog_distortion_closed_form,
    digital_distortion_floor,
    scaling_sweep,
    simulate_analog,
)
from .remote import BoundResult, FormulaId, RdfHook

__version__ = "0.1.0"
