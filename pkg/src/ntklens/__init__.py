"""Collective variables of the empirical tangent kernel, and RND data selection."""

from .datasets import (
    CsvSchema,
    Dataset,
    SplitSpec,
    Standardizer,
    generate_digits_idx,
    load_csv_tabular,
    load_mnist_idx,
    make_synthetic_clusters,
    make_synthetic_regression,
    split,
    standardize,
)
from .kernel import (
    NtkMatrix,
    SpectrumReport,
    collective_variables,
    compute_ntk,
    ntk_trace,
    spectrum_report,
    symmetric_eigenvalues,
    von_neumann_entropy,
)
from .network import (
    AdamConfig,
    AdamState,
    NetworkSpec,
    NetworkState,
    adam_step,
    forward,
    init_network,
    jacobian_block,
    loss_and_grad,
    param_jacobian,
)
from .seeding import derive_seed, splitmix64
from .selection import RndConfig, SelectionResult, rnd_distance, select_random, select_rnd
from .training import LinearizedCheck, TrainConfig, TrainOutcome, linearized_step_check, train
from .experiments import (
    ComparisonConfig,
    ComparisonPoint,
    CorrelationConfig,
    CorrelationMatrix,
    ExperimentRecord,
    pearson,
    run_correlation_experiment,
    run_rnd_comparison,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
