"""Blind sensor calibration for compressed sensing.

Jointly reconstructs P sparse signals and per-sensor multiplicative gains from
distorted linear measurements with a calibration message-passing solver, plus
an experiment harness for phase-diagram studies.
"""

from .channel import gain_CT, numeric_G, product_eh
from .harness import (
    CellAggregate,
    CellRow,
    GridResult,
    SweepSpec,
    aggregate_rows,
    alpha_min,
    cell_seed,
    measurement_count,
    read_rows_csv,
    run_phase_diagram,
    run_sigma_p_diagram,
    run_sweep,
    run_transition_profile,
    sparsity_count,
    write_rows_csv,
)
from .model import (
    GaussBernoulliPrior,
    GenerationConfig,
    ProblemInstance,
    UniformGainPrior,
    forward_product_channel,
    generate_gains,
    generate_instance,
    generate_matrix,
    generate_signals,
    load_instance,
)
from .priors import (
    GainMoments,
    OracleMoments,
    PosteriorStats,
    gain_posterior_moments,
    quadrature_oracle,
    signal_posterior_moments,
)
from .solver import (
    DivergenceError,
    SolveResult,
    SolverConfig,
    SolverState,
    compute_crit,
    compute_mse_corr,
    initialize,
    iterate_once,
    run,
)

__version__ = "0.1.0"
