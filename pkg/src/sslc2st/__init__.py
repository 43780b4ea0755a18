"""
sslc2st: classifier two-sample tests with semi-supervised pretraining.

The package answers "are these two samples drawn from the same
distribution?" by training a binary classifier to tell them apart and
permutation-testing its held-out performance. The semi-supervised variant
first pretrains the classifier's encoder as an autoencoder on all points
with labels stripped, then fine-tunes on the labeled training half; the
mean-embedding variants replace the accuracy statistic with a linear-kernel
MMD between extracted features.

Layout
------
- :mod:`sslc2st.nn` dense network engine (forward/backward/Adam)
- :mod:`sslc2st.hdgm` Gaussian-mixture benchmark data
- :mod:`sslc2st.pipeline` the two training phases and feature extraction
- :mod:`sslc2st.stats` statistics, analytic power, permutation test
- :mod:`sslc2st.bench` Monte-Carlo trial/sweep harness
- :mod:`sslc2st.checks` self-contained property suites
- :mod:`sslc2st.cli` the ``c2st`` command
"""

from .bench import ExperimentConfig, PowerEstimate, estimate, make_config, run_trial, sweep
from .hdgm import (
    HdgmSpec,
    LabeledDataset,
    SplitDataset,
    build_dataset,
    hdgm_pair,
    read_jsonl,
    sample_hdgm,
    shuffle_split,
    strip_labels,
    write_jsonl,
)
from .nn import AdamState, MlpModel, adam_step, backward, bce_loss, forward, init_mlp, mse_loss
from .pipeline import (
    TrainConfig,
    TrainedTest,
    default_train_config,
    extract_features,
    load_model,
    predict_proba,
    save_model,
    train_autoencoder,
    train_classifier,
    unlabeled_pool,
)
from .stats import (
    PowerInputs,
    TestOutcome,
    accuracy_statistic,
    embedding_statistic,
    epsilon_hat,
    null_threshold,
    objective_j,
    permutation_test,
    poisson_binomial_pmf,
    theoretical_power,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ExperimentConfig",
    "HdgmSpec",
    "LabeledDataset",
    "MlpModel",
    "PowerEstimate",
    "PowerInputs",
    "SplitDataset",
    "TestOutcome",
    "TrainConfig",
    "TrainedTest",
    "accuracy_statistic",
    "adam_step",
    "backward",
    "bce_loss",
    "build_dataset",
    "default_train_config",
    "embedding_statistic",
    "epsilon_hat",
    "estimate",
    "extract_features",
    "forward",
    "hdgm_pair",
    "init_mlp",
    "load_model",
    "make_config",
    "mse_loss",
    "null_threshold",
    "objective_j",
    "permutation_test",
    "poisson_binomial_pmf",
    "predict_proba",
    "read_jsonl",
    "run_trial",
    "sample_hdgm",
    "save_model",
    "shuffle_split",
    "strip_labels",
    "sweep",
    "theoretical_power",
    "train_autoencoder",
    "train_classifier",
    "unlabeled_pool",
    "write_jsonl",
]
