"""Differentially private equilibrium dynamics for polymatrix games."""

from .dynamics import (
    RunConfig,
    TauSchedule,
    Trace,
    convergence_bound_rhs,
    coupled_displacement,
    dense_rounds,
    export_trace,
    harmonic_mean_degree,
    hyperparams_dense,
    hyperparams_sparse,
    run,
    run_coupled,
    sparse_rounds,
    tau_schedule,
)
from .game import (
    PolymatrixGame,
    StrategyProfile,
    avg_clamped_regret,
    avg_exploitability,
    exploitability,
    gradient,
    gradient_at,
    load_game,
    monotonicity_gap,
    pure_profile,
    random_profile,
    save_game,
    time_avg_regret,
    uniform_profile,
    validate_game,
    zero_sum_residual,
)
from .graphs import (
    GraphSpec,
    bfs_distances,
    fixture_chain_flip,
    fixture_triplet_chain,
    gen_chain,
    gen_dense,
    gen_sparse,
    generate,
    resample_edge,
)
from .oracle import (
    OracleResult,
    best_response,
    best_response_dynamics,
    brute_force_exploitability,
    regularized_fixed_point,
    verify_pure_ne,
)
from .privacy import (
    PrivacyReport,
    audit,
    clubsuit,
    clubsuit_value,
    empirical_budget,
    gaussian_renyi,
    rdp_to_dp,
    spadesuit,
    spadesuit_worst_case,
    theoretical_budget,
)
from .simplex import project_simplex, proximal_step

__version__ = "0.1.0"
