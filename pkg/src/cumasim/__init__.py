"""Performance analysis of CUMA multi-user networks.

Exact SIR statistics, asymptote-matched closed forms and a Monte Carlo
ground-truth simulator for interference-limited fluid-antenna receivers,
plus a sweep harness and CLI for reproducing figure-style studies.
"""

from .analytic import (
    ChannelStats,
    PairingPolicy,
    QuadratureError,
    cov_pair,
    exact_cdf_z,
    exact_er,
    exact_op,
    exact_pdf_z,
    exact_pdf_zI,
    exact_sop,
    sigma_sums,
    sop_lower_numeric,
    w_func,
)
from .approx import (
    AsymptoteCoeffs,
    GammaFit,
    approx_cdf_z,
    approx_er,
    approx_op,
    approx_pdf_z,
    approx_pdf_zI,
    asymptote_coeffs,
    beta_I,
    sop_lower_closed,
)
from .geometry import (
    CorrelationMatrix,
    PortGrid,
    correlation,
    correlation_matrix,
    grid_from_aperture,
    port_index_to_coords,
    preset_grid,
    preset_names,
)
from .harness import ComparisonReport, KSReport, SweepSpec, compare_distributions, ks_statistic, run_sweep
from .montecarlo import (
    ChannelRealization,
    SeedSpec,
    SimConfig,
    TrialResult,
    draw_realization,
    interference_sum_samples,
    mc_metrics,
    mc_sop,
    select_ports,
    sir_sample,
    sir_samples,
)
from .specfun import (
    DomainError,
    NonConvergenceError,
    SeriesControl,
    gamma_fn,
    gauss_2f1,
    kummer_1f1,
    upper_incomplete_gamma,
    whittaker_m,
)

__version__ = "0.1.0"
