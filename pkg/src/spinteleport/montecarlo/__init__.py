"""Stochastic-trajectory oracle for the teleportation protocol."""
from ._jit import DEFAULT_BACKEND, HAVE_NUMBA, get_threads, set_threads
from .engine import (
    COLUMNS,
    ComparisonRecord,
    MomentComparison,
    MomentEstimates,
    MonteCarloError,
    Regression,
    SwapEstimate,
    TrajectoryConfig,
    compare_run,
    compare_to_analytic,
    discrete_noise_variance,
    estimate_moments,
    initial_factor,
    regress_output,
    run_ensemble,
    run_swap_ensemble,
    sample_initial_spins,
    sample_inseparability,
    simulate_block,
    simulate_trajectory,
    write_trajectory_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
