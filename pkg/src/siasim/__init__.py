"""Link-level simulator and analytical engine for downlink symmetric
interference channels with opportunistic scheduling: MMSE / widely-linear
post-SINR receivers, max-SINR schedulers, Wishart minimum-eigenvalue
densities, closed-form outage probabilities and capacity scaling laws,
cross-validated by Monte Carlo."""

__version__ = "0.1.0"

from .channel import ChannelSample, WLChannelSample, draw_channel, stack_real, substream, wl_view
from .config import SystemConfig
from .errors import (
    BracketingError,
    CoefficientsUnavailableError,
    ConfigError,
    SiasimError,
    SingularMatrixError,
    UnsupportedAnalyticsError,
)
from .experiments import (
    McCurve,
    ResultRecord,
    SweepSpec,
    capacity_samples,
    emit_records,
    estimate_mean_sum_capacity,
    estimate_stream_outage_mc,
    estimate_top_mc,
    fit_scaling_exponent,
    outage_capacity_vs_L,
    parse_records,
    run_sweep,
)
from .outage import (
    TopResult,
    UsersRequired,
    area_A1,
    area_A2,
    cdf_F_complex,
    cdf_F_real_even,
    cdf_F_real_even_approx,
    cdf_F_real_k2nr1,
    cdf_F_real_k2nr3,
    q_approx,
    q_exact,
    solve_target_beta,
    sum_outage_capacity,
    top_closed_form,
    top_ub,
    top_ub_mu,
    users_required,
    users_required_complex,
)
from .receivers import (
    SinrReport,
    icm_eigensystem,
    nicm,
    post_sinr_eigenform,
    post_sinr_mmse,
    post_sinr_wl,
    sinr_lower_bound,
    stream_sinr_mu,
    wl_nicm,
)
from .scheduler import (
    ScheduleDecision,
    StreamPlan,
    StreamSpec,
    build_streams,
    exhaustive_best_group,
    max_sinr_select,
    sequential_max_sinr,
)
from .wishart import (
    MevCoefficients,
    coeff_lookup,
    laguerre_poly_neg,
    pdf_mev_complex,
    pdf_mev_real_even,
    pdf_mev_real_k2nr1,
    pdf_mev_real_k2nr3,
    real_table_key,
    sample_mev,
    tricomi_u,
)
