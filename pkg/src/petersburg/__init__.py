"""St. Petersburg sums: exact tails, asymptotics, semistable limit laws, simulation."""

from petersburg.stpdist import (
    CLASSICAL,
    GameParams,
    cdf,
    frac_log2,
    floor_log2,
    gamma_n,
    psi,
    quantile,
    sample,
    tail,
    truncated_cdf,
    truncated_moment,
)
from petersburg.exact import (
    DyadicProb,
    CappedTailTable,
    conv_ratio_curve,
    enum_oracle,
    sum_tail_exact,
    trimmed_tail_exact,
    two_sum_tail_closed,
)
from petersburg.asymptotics import (
    TailAsymptote,
    finer_as_rhs,
    gen_snr_tail_rhs,
    snr_tail_rhs,
    subexp_limits,
    uniform_bound_rhs,
)
from petersburg.limitlaw import (
    CdfCurve,
    a_const,
    cdf_from_cf,
    centering,
    centering_closed,
    cf_Wgamma,
    cf_Wjgamma,
    chernoff_bound,
    chernoff_h,
    gstar_cdf,
    log_cf_f,
    p_weight,
    r_weight,
    sample_Y,
    xi_and_f,
    y_tail_rhs,
)
from petersburg.montecarlo import (
    EmpiricalTail,
    SimPlan,
    chernoff_check,
    histogram_fig1,
    max_pmf_check,
    merge_check,
    oscillation_curve_fig2,
    simulate_trimmed,
    trimmed_merge_check,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSICAL",
    "GameParams",
    "cdf",
    "tail",
    "quantile",
    "psi",
    "frac_log2",
    "floor_log2",
    "gamma_n",
    "truncated_cdf",
    "truncated_moment",
    "sample",
    "DyadicProb",
    "CappedTailTable",
    "sum_tail_exact",
    "trimmed_tail_exact",
    "two_sum_tail_closed",
    "enum_oracle",
    "conv_ratio_curve",
    "TailAsymptote",
    "snr_tail_rhs",
    "finer_as_rhs",
    "subexp_limits",
    "gen_snr_tail_rhs",
    "uniform_bound_rhs",
    "CdfCurve",
    "p_weight",
    "r_weight",
    "log_cf_f",
    "cf_Wjgamma",
    "cf_Wgamma",
    "cdf_from_cf",
    "gstar_cdf",
    "sample_Y",
    "y_tail_rhs",
    "a_const",
    "centering",
    "centering_closed",
    "xi_and_f",
    "chernoff_h",
    "chernoff_bound",
    "EmpiricalTail",
    "SimPlan",
    "simulate_trimmed",
    "merge_check",
    "trimmed_merge_check",
    "max_pmf_check",
    "chernoff_check",
    "histogram_fig1",
    "oscillation_curve_fig2",
]
