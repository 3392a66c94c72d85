"""Feature-specific adversarial imputation for mixed-type tables."""

from .numerics import RngStream, ShapeError, matmul, uniform_matrix, column_median
from .data import (
    Column,
    Schema,
    MixedDataset,
    EncodingMap,
    Encoded,
    FourPartView,
    DataError,
    UnimputableColumnError,
    parse_csv,
    read_csv,
    encode,
    decode,
    split_four_parts,
    sort_columns_by_missingness,
)
from .amputation import AmputationConfig, AmputationResult, ampute, ampute_mcar, ampute_mar, ampute_mnar
from .nn import MlpSpec, Mlp, TrainConfig, mlp_init, forward, generator_loss, discriminator_loss
from .imputer import IfganConfig, ImputeResult, impute, initial_guess, delta
from .baselines import BaselineConfig, impute_mean, impute_knn, impute_svd, impute_mice
from .metrics import rmse, fit_logistic, auroc
from .harness import ExperimentConfig, ExperimentReport, run_benchmark, emit_report, impute_matrix

__version__ = "0.1.0"
