"""Variational quantum circuit classifiers and hybrid quantum-classical networks."""

from .circuits import build_ansatz, build_feature_map, vqc_expectation
from .data import (
    LabeledDataset,
    generate_bars_and_stripes,
    generate_blobs,
    load_dataset,
    load_iris_binary,
    preprocess_real,
    split,
)
from .models import (
    HybridNetwork,
    VqcClassifier,
    forward_hnn,
    grad_hnn,
    grad_vqc,
    load_model,
    model_from_dict,
    nll_cost,
    param_shift_derivative,
    predict_label,
    predict_proba,
    save_model,
)
from .simulator import CX, RY, Circuit, StateVector, apply_gate, run_circuit
from .training import TrainConfig, evaluate, init_params, run_experiment, train

__all__ = [
    "CX", "RY", "Circuit", "StateVector", "apply_gate", "run_circuit",
    "build_ansatz", "build_feature_map", "vqc_expectation",
    "HybridNetwork", "VqcClassifier", "forward_hnn", "grad_hnn", "grad_vqc", "nll_cost",
    "param_shift_derivative", "predict_label", "predict_proba", "model_from_dict", "load_model", "save_model",
    "LabeledDataset", "generate_bars_and_stripes", "generate_blobs", "load_dataset", "load_iris_binary",
    "preprocess_real", "split",
    "TrainConfig", "evaluate", "init_params", "run_experiment", "train",
]
