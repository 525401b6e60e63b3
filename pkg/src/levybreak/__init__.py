"""Nonparametric change-point tests for the jump measure of a semimartingale.

The package simulates high-frequency increments of drift + Brownian + jump
processes, computes sequential empirical tail integrals and the break process
built from them, and runs three change-point tests (two pointwise in the jump
size, one uniform over a threshold grid) with multiplier bootstrap critical
values.  A Monte Carlo harness reproduces level and power studies.
"""

from __future__ import annotations

__version__ = "0.1.0"

from levybreak.bootstrap import (
    BootstrapConfig,
    bootstrap_column_max,
    bootstrap_sup_samples,
    bootstrap_t_process,
    draw_multipliers,
    sample_quantile,
)
from levybreak.empirical import (
    ZGrid,
    brownian_grid,
    coarse_brownian_grid,
    coarse_pure_jump_grid,
    empirical_tail,
    eta,
    pure_jump_grid,
    sequential_tail,
    tail_counts,
)
from levybreak.jump_model import (
    BreakAlternative,
    JumpModel,
    conditional_jump_quantile,
    drift_function,
    load_tail_csv,
    tail_value,
)
from levybreak.montecarlo import (
    ExperimentConfig,
    RejectionTable,
    run_estimator_study,
    run_experiment,
    validate_covariance,
    validate_small_time,
)
from levybreak.procedures import (
    ChangePointEstimate,
    DegenerateSeriesWarning,
    TestOutcome,
    cp_test,
    estimate_changepoint,
    kscp_test1,
    kscp_test2,
    run_tests,
)
from levybreak.simulator import (
    IncrementSeries,
    ProcessSpec,
    SamplerConfig,
    read_increments_csv,
    read_prices_csv,
    simulate_path,
    small_time_tail_probability,
    write_increments_csv,
)
from levybreak.statistics import (
    ks_cdf,
    ks_quantile,
    sup_stat_cp,
    t_process,
    t_surface,
    theoretical_cov_G,
    theoretical_cov_T,
    v_stat,
    w_stat,
)

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
