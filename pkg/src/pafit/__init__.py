"""Preferential attachment growth models: simulation, likelihoods, MLEs,
limit laws, Monte Carlo experiment harness, and transaction ingestion."""

from .history import (
    AttachEvent,
    BoParam,
    CommunityStats,
    DegreeCounts,
    GrowthHistory,
    HpamParams,
    community_stats,
    degree_counts,
    read_history_csv,
    relabel,
    strip_memberships,
    write_history_csv,
)
from .simulate import (
    SimConfig,
    expected_degree_counts_bo,
    history_log_probability,
    simulate,
    simulate_bo,
    simulate_general_f,
    simulate_hpam,
    simulate_lcd,
    step_probability,
)
from .buckley_osthus import (
    BoFitResult,
    LimitReportBo,
    bo_limit_report,
    bo_loglik,
    bo_mle,
    bo_score,
    degree_tail_first_moment,
    degree_tail_mass,
    limit_loglik,
    limit_loglik_grad,
    limit_pk,
    sigma2_beta,
)
from .hpam import (
    HpamFitResult,
    HpamLimits,
    fixed_point_p,
    gamma_loglik,
    gamma_loglik_grad,
    gamma_mle,
    hpam_limits,
    hpam_loglik,
    limit_loglik_hpam,
    limit_loglik_hpam_grad,
    marginal_loglik_bruteforce,
    pi_mle,
    theta_from_p,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    NormalityReport,
    RawEstimate,
    SummaryRow,
    normality_diagnostic,
    replication_seed,
    run_bo_experiment,
    run_hpam_experiment,
)
from .ingest import (
    IngestReport,
    LabelingRule,
    RawEdgeList,
    build_history,
    export_transactions,
    filter_addresses,
    parse_edges,
)

__version__ = "0.1.0"
