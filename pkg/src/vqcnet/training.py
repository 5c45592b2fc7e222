"""Gradient-descent training and multi-trial experiments."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import LabeledDataset, load_dataset, split
from .models import HybridNetwork, VqcClassifier, cost_from_output, labels_from_output, model_from_dict
from .simulator import make_rng

log = logging.getLogger(__name__)

METRICS = ("in_accuracy", "in_cost", "out_accuracy", "out_cost")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    learning_rate: float
    batch_size: int | None = None  # None means full batch
    init_seed: int = 0
    data_seed: int = 0
    shots: int | None = None  # None means exact expectations

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    in_cost: float
    in_accuracy: float
    out_cost: float | None = None
    out_accuracy: float | None = None


@dataclass
class TrialResult:
    trial: int
    config: TrainConfig
    initial_params: list
    final_params: list
    history: list[EpochRecord]
    model: dict = field(default_factory=dict)

    @property
    def final(self) -> EpochRecord:
        return self.history[-1]

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["final"] = asdict(self.final)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TrialResult":
        return cls(
            trial=doc["trial"],
            config=TrainConfig(**doc["config"]),
            initial_params=list(doc["initial_params"]),
            final_params=list(doc["final_params"]),
            history=[EpochRecord(**r) for r in doc["history"]],
            model=doc.get("model", {}),
        )


@dataclass
class ExperimentSummary:
    dataset: str
    model: str
    parameters: int
    trials: int
    stats: dict  # metric -> {"median", "average", "std"} or None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSummary":
        stats = doc["stats"]
        for name in METRICS:
            entry = stats.get(name)
            if entry is not None and set(entry) != {"median", "average", "std"}:
                raise ValueError(f"metric {name!r} must carry median, average and std")
        return cls(doc["dataset"], doc["model"], int(doc["parameters"]), int(doc["trials"]), stats)


def init_params(num_params: int, seed) -> np.ndarray:
    """I.i.d. uniform draws in [-pi, pi]."""
    return make_rng(seed).uniform(-np.pi, np.pi, size=num_params)


def build_model(kind: str, input_dim: int, params=None, *, hidden: int = 2, seed=None, reps: int = 1):
    """A VQC or HNN; parameters are drawn with :func:`init_params` unless given."""
    if kind == "vqc":
        count = VqcClassifier.param_count(input_dim, reps)
    elif kind == "hnn":
        count = HybridNetwork.param_count(input_dim, hidden, reps)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    if params is None:
        params = init_params(count, seed)
    doc = {"model_type": kind, "input_dim": input_dim, "hidden_count": hidden,
           "parameters": np.asarray(params, dtype=np.float64).tolist(), "reps": reps}
    return model_from_dict(doc)


def evaluate(model, ds: LabeledDataset) -> tuple[float, float]:
    """(mean NLL cost, accuracy in percent) in exact mode."""
    if len(ds) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    f = model.output(ds.features)
    accuracy = 100.0 * float(np.mean(labels_from_output(f) == ds.labels))
    return cost_from_output(f, ds.labels), accuracy


def _record(epoch, model, train_set, test_set) -> EpochRecord:
    in_cost, in_acc = evaluate(model, train_set)
    if test_set is None or len(test_set) == 0:
        return EpochRecord(epoch, in_cost, in_acc)
    out_cost, out_acc = evaluate(model, test_set)
    return EpochRecord(epoch, in_cost, in_acc, out_cost, out_acc)


def batches(n: int, batch_size: int | None, rng: np.random.Generator | None):
    """Index arrays for one epoch; shuffled when mini-batching, last batch may be short."""
    if batch_size is None or batch_size >= n:
        return [np.arange(n)]
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def train(model, train_set: LabeledDataset, test_set: LabeledDataset | None, config: TrainConfig):
    """Plain gradient descent; returns the trained model and one record per epoch.

    Record 0 holds the metrics before the first update.  Metrics are always
    exact; ``config.shots`` only affects the circuit evaluations inside the
    gradient.
    """
    if len(train_set) == 0:
        raise ValueError("training set is empty")
    if not train_set.preprocessed:
        raise ValueError(f"dataset {train_set.name!r} must be preprocessed before training")
    if config.batch_size is not None and config.batch_size > len(train_set):
        raise ValueError(f"batch_size {config.batch_size} exceeds training-set size {len(train_set)}")

    shuffle_seq, shot_seq = np.random.SeedSequence(config.init_seed).spawn(2)
    epoch_seqs = shuffle_seq.spawn(config.epochs)
    shot_rng = make_rng(shot_seq) if config.shots is not None else None

    history = [_record(0, model, train_set, test_set)]
    for epoch in range(1, config.epochs + 1):
        rng = make_rng(epoch_seqs[epoch - 1])
        for idx in batches(len(train_set), config.batch_size, rng):
            grad = model.gradient(train_set.features[idx], train_set.labels[idx],
                                  shots=config.shots, rng=shot_rng)
            model = model.with_params(model.params - config.learning_rate * grad)
        history.append(_record(epoch, model, train_set, test_set))
        log.debug("epoch %d: %s", epoch, history[-1])
    return model, history


def summarize(values) -> dict | None:
    values = [v for v in values if v is not None]
    if not values:
        return None
    arr = np.asarray(values, dtype=np.float64)
    return {"median": float(np.median(arr)), "average": float(np.mean(arr)), "std": float(np.std(arr))}


def summarize_trials(dataset: str, model_kind: str, parameters: int, results) -> ExperimentSummary:
    stats = {name: summarize([getattr(r.final, name) for r in results]) for name in METRICS}
    return ExperimentSummary(dataset, model_kind, parameters, len(results), stats)


DEFAULTS = {
    "bas": {"epochs": 20, "learning_rate": 0.5, "batch_size": None, "train_fraction": 1.0},
    "synth": {"epochs": 10, "learning_rate": 0.1, "batch_size": 16, "train_fraction": 0.8},
    "iris": {"epochs": 10, "learning_rate": 0.1, "batch_size": 16, "train_fraction": 0.8},
}


def trial_seeds(seed: int, trials: int) -> tuple[int, list[tuple[int, int]]]:
    """Dataset seed plus ``(init_seed, data_seed)`` per trial, all derived from ``seed``."""
    root = np.random.SeedSequence(seed)
    children = root.spawn(trials + 1)
    dataset_seed = int(children[0].generate_state(1)[0])
    per_trial = []
    for child in children[1:]:
        a, b = child.generate_state(2)
        per_trial.append((int(a), int(b)))
    return dataset_seed, per_trial


def run_trial(trial: int, ds: LabeledDataset, model_kind: str, config: TrainConfig,
              train_fraction: float, *, hidden: int = 2) -> TrialResult:
    if train_fraction >= 1.0:
        train_set, test_set = ds, None
    else:
        train_set, test_set = split(ds, train_fraction, config.data_seed)
    model = build_model(model_kind, ds.dim, hidden=hidden, seed=config.init_seed)
    initial = model.params.tolist()
    model, history = train(model, train_set, test_set, config)
    return TrialResult(trial, config, initial, model.params.tolist(), history, model.to_dict())


def run_experiment(dataset: str, model_kind: str, trials: int = 10, *, seed: int = 0,
                   epochs=None, learning_rate=None, batch_size="default", shots=None,
                   hidden: int = 2, train_fraction=None, bas_encoding: str = "raw"):
    """Run independent trials and aggregate their final metrics.

    Unspecified hyper-parameters take the per-dataset defaults in
    :data:`DEFAULTS`.  Returns ``(summary, trial_results, dataset)``.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if dataset not in DEFAULTS:
        raise ValueError(f"unknown dataset {dataset!r}")
    defaults = DEFAULTS[dataset]
    epochs = defaults["epochs"] if epochs is None else epochs
    learning_rate = defaults["learning_rate"] if learning_rate is None else learning_rate
    batch_size = defaults["batch_size"] if batch_size == "default" else batch_size
    train_fraction = defaults["train_fraction"] if train_fraction is None else train_fraction

    dataset_seed, seeds = trial_seeds(seed, trials)
    ds = load_dataset(dataset, dataset_seed, bas_encoding=bas_encoding)
    results = []
    for k, (init_seed, data_seed) in enumerate(seeds):
        config = TrainConfig(epochs, learning_rate, batch_size, init_seed, data_seed, shots)
        results.append(run_trial(k, ds, model_kind, config, train_fraction, hidden=hidden))
        log.info("%s/%s trial %d: %s", dataset, model_kind, k, results[-1].final)
    n_params = len(results[0].final_params)
    return summarize_trials(dataset, model_kind, n_params, results), results, ds


def history_csv(history) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "in_cost", "in_acc", "out_cost", "out_acc"])
    for r in history:
        writer.writerow([r.epoch, repr(r.in_cost), repr(r.in_accuracy),
                         "" if r.out_cost is None else repr(r.out_cost),
                         "" if r.out_accuracy is None else repr(r.out_accuracy)])
    return buf.getvalue()
