from ._core import (
    NumericalError,
    Regulariser,
    Sample,
    SolverDiagnostics,
    TransportPlan,
    __version__,
    cluster_plan,
    cost_matrix,
    epsilon_star,
    estimate_K,
    is_feasible,
    marginal_violation,
    matched_accuracy,
    oracle_plan,
    project_hollow_bistochastic,
    qp_oracle,
    sample_mixture,
    solve_entropic,
    solve_quadratic,
    spectral_cluster,
)
