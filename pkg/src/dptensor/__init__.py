"""Differentially private low-rank tensor completion.

Third-order tensors are completed from partial observations by per-entry
SGD on a CP or Tucker factorization, with three epsilon-differentially
private training variants: Laplace noise on the inputs, per-update noise
on clipped gradients, or exponential-mechanism noise on the released
factor.  An experiment harness reproduces privacy-accuracy sweeps on
synthetic tensors and MovieLens-100K.
"""

from .exceptions import ConfigError, DataError, DivergenceError, ShapeError
from .tensor_ops import (
    ObservedTensor,
    all_indices,
    cp_reconstruct,
    hadamard,
    khatri_rao,
    mode_n_product,
    project,
    superdiagonal,
    tucker_reconstruct,
)
from .mechanisms import (
    Sensitivity,
    clip_l2,
    exp_mech_rows,
    exp_mech_vector,
    gradient_sensitivity,
    input_sensitivity,
    laplace_sample,
    output_sensitivity,
    spawn_rngs,
)
from .solvers import (
    CpModel,
    FitConfig,
    TuckerModel,
    cp_entry_gradients,
    cp_objective,
    fit_cp,
    fit_tucker,
    tucker_entry_gradients,
    tucker_objective,
)
from .pipelines import (
    BACKBONES,
    MECHANISMS,
    CompletionResult,
    DpConfig,
    MechanismInfo,
    complete,
    perturb_input,
    predict,
    predict_entries,
    run_gradient_perturbation,
    run_input_perturbation,
    run_output_perturbation,
    run_pipeline,
)
from .datasets import (
    BiscaleParams,
    RatingDataset,
    SyntheticData,
    SyntheticSpec,
    apply_biscale,
    biscale,
    gen_synthetic,
    invert_biscale,
    invert_min_max,
    load_ml100k,
    min_max_scale,
)
from .evaluate import (
    ExperimentConfig,
    Ml100kSource,
    ResultRow,
    benchmark_config,
    emit_report,
    evaluate_rmse,
    load_experiment_config,
    rmse,
    run_experiment,
    summarize,
)
from .modelio import load_entries, load_model, save_entries, save_model

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DivergenceError",
    "ShapeError",
    "ObservedTensor",
    "all_indices",
    "cp_reconstruct",
    "hadamard",
    "khatri_rao",
    "mode_n_product",
    "project",
    "superdiagonal",
    "tucker_reconstruct",
    "Sensitivity",
    "clip_l2",
    "exp_mech_rows",
    "exp_mech_vector",
    "gradient_sensitivity",
    "input_sensitivity",
    "laplace_sample",
    "output_sensitivity",
    "spawn_rngs",
    "CpModel",
    "FitConfig",
    "TuckerModel",
    "cp_entry_gradients",
    "cp_objective",
    "fit_cp",
    "fit_tucker",
    "tucker_entry_gradients",
    "tucker_objective",
    "BACKBONES",
    "MECHANISMS",
    "CompletionResult",
    "DpConfig",
    "MechanismInfo",
    "complete",
    "perturb_input",
    "predict",
    "predict_entries",
    "run_gradient_perturbation",
    "run_input_perturbation",
    "run_output_perturbation",
    "run_pipeline",
    "BiscaleParams",
    "RatingDataset",
    "SyntheticData",
    "SyntheticSpec",
    "apply_biscale",
    "biscale",
    "gen_synthetic",
    "invert_biscale",
    "invert_min_max",
    "load_ml100k",
    "min_max_scale",
    "ExperimentConfig",
    "Ml100kSource",
    "ResultRow",
    "benchmark_config",
    "emit_report",
    "evaluate_rmse",
    "load_experiment_config",
    "rmse",
    "run_experiment",
    "summarize",
    "load_entries",
    "load_model",
    "save_entries",
    "save_model",
]
