"""Datasets used by the experiments and the preprocessing that maps them into [0, pi].

Label conventions: BAS bars are +1 and stripes -1; blob cluster centred at
(+2, 0) is +1; iris virginica is +1 and versicolor -1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np

from .exceptions import DatasetParseError
from .simulator import SeedLike, make_rng

IRIS_COLUMNS = ("sepal_length", "sepal_width", "petal_length", "petal_width", "species")
IRIS_LABELS = {"versicolor": -1, "virginica": 1}


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    preprocessed: bool = False
    transform: dict | None = field(default=None)

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError(f"features must be a 2-D array, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"{X.shape[0]} feature rows but labels have shape {y.shape}")
        if not np.isin(y, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")
        if self.preprocessed and X.size and (X.min() < 0.0 or X.max() > np.pi):
            raise ValueError("preprocessed features must lie in [0, pi]")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.size

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "LabeledDataset":
        index = np.asarray(index, dtype=np.int64)
        return replace(self, features=self.features[index], labels=self.labels[index])

    def to_csv(self, path=None) -> str:
        """Write ``f0..f{d-1},label``; returns the CSV text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"f{i}" for i in range(self.dim)] + ["label"])
        for row, label in zip(self.features, self.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


BAS_ENCODINGS = {"raw": 1.0, "pi": np.pi}


def generate_bars_and_stripes(n: int, m: int, encoding: str = "raw") -> LabeledDataset:
    """All ``n x m`` bars-and-stripes images except the blank and full ones.

    A bar lights a proper nonempty subset of the ``n`` rows, a stripe a proper
    nonempty subset of the ``m`` columns.  Pixels are flattened row-major.
    Binary pixels already lie in ``[0, pi]``: ``encoding="raw"`` feeds them to
    the feature map as 0/1 radians, ``encoding="pi"`` stretches lit pixels to
    pi so that they encode as ``|1>``.
    """
    if n < 2 or m < 2:
        raise ValueError(f"bars and stripes needs n, m >= 2, got ({n}, {m})")
    if encoding not in BAS_ENCODINGS:
        raise ValueError(f"unknown BAS encoding {encoding!r}; choose from {sorted(BAS_ENCODINGS)}")
    images, labels = [], []
    for rows in product((0, 1), repeat=n):
        if 0 < sum(rows) < n:
            images.append(np.repeat(np.array(rows)[:, None], m, axis=1).ravel())
            labels.append(1)
    for cols in product((0, 1), repeat=m):
        if 0 < sum(cols) < m:
            images.append(np.repeat(np.array(cols)[None, :], n, axis=0).ravel())
            labels.append(-1)
    X = BAS_ENCODINGS[encoding] * np.array(images, dtype=np.float64)
    return LabeledDataset(f"bas{n}x{m}", X, labels, preprocessed=True)


BLOB_CENTERS = np.array([[2.0, 0.0], [-2.0, 0.0]])
BLOB_STD = 1.0


def _separated_by_midline(X: np.ndarray, y: np.ndarray) -> bool:
    # hyperplane through the midpoint of the centres, normal to their difference
    normal = BLOB_CENTERS[0] - BLOB_CENTERS[1]
    mid = BLOB_CENTERS.mean(axis=0)
    side = (X - mid) @ normal
    return bool(np.all(side * y > 0))


def generate_blobs(n_points: int = 100, seed: SeedLike = 0, max_attempts: int = 10_000) -> LabeledDataset:
    """Two isotropic Gaussian clusters in 2-D, half the points in each.

    Whole sets are redrawn from the same generator until the line through the
    midpoint of the centres separates the classes.
    """
    if n_points < 2 or n_points % 2:
        raise ValueError(f"n_points must be a positive even number, got {n_points}")
    rng = make_rng(seed)
    half = n_points // 2
    y = np.repeat([1, -1], half)
    for _ in range(max_attempts):
        X = BLOB_CENTERS[(y < 0).astype(int)] + BLOB_STD * rng.standard_normal((n_points, 2))
        if _separated_by_midline(X, y):
            order = rng.permutation(n_points)
            return LabeledDataset("synth", X[order], y[order])
    raise RuntimeError(f"no linearly separable draw in {max_attempts} attempts")


def load_iris_binary(source=None) -> LabeledDataset:
    """The 100 versicolor / virginica rows of the iris table.

    ``source`` is a CSV path (header plus four numeric columns and a species
    name); the bundled copy is used when omitted.
    """
    if source is None:
        text = resources.files("vqcnet.resources").joinpath("iris.csv").read_text()
    else:
        text = Path(source).read_text()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or len(header) != 5:
        raise DatasetParseError("expected a header with 5 columns", row=1)
    features, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise DatasetParseError(f"expected 5 fields, got {len(row)}", row=lineno)
        try:
            values = [float(v) for v in row[:4]]
        except ValueError as exc:
            raise DatasetParseError(str(exc), row=lineno) from None
        species = row[4].strip().lower().removeprefix("iris-")
        if species in IRIS_LABELS:
            features.append(values)
            labels.append(IRIS_LABELS[species])
        elif species != "setosa":
            raise DatasetParseError(f"unknown species {row[4]!r}", row=lineno)
    if not features:
        raise DatasetParseError("no versicolor or virginica rows found")
    return LabeledDataset("iris", features, labels)


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero mean, unit population variance per column; returns (Z, mean, std)."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    for j, s in enumerate(std):
        if not s > 0:
            raise ValueError(f"feature column {j} has zero variance")
    return (X - mean) / std, mean, std


def preprocess_real(ds: LabeledDataset) -> LabeledDataset:
    """Standardize, divide by the global max |value|, scale by pi/2 and shift by pi/2.

    Statistics are taken over the whole dataset.  The fitted transform is
    kept in ``transform`` so grids can be mapped back to raw units.
    """
    if ds.preprocessed:
        raise ValueError(f"dataset {ds.name!r} is already preprocessed")
    Z, mean, std = standardize(ds.features)
    scale = float(np.max(np.abs(Z)))
    X = (np.pi / 2) * (Z / scale) + np.pi / 2
    X = np.clip(X, 0.0, np.pi)  # round-off only
    transform = {"mean": mean.tolist(), "std": std.tolist(), "max_abs": scale}
    return replace(ds, features=X, preprocessed=True, transform=transform)


def apply_transform(raw, transform: dict) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)
    Z = (raw - np.asarray(transform["mean"])) / np.asarray(transform["std"])
    return (np.pi / 2) * Z / transform["max_abs"] + np.pi / 2


def split(ds: LabeledDataset, train_fraction: float, seed: SeedLike) -> tuple[LabeledDataset, LabeledDataset]:
    """Random train/test partition with ``round(train_fraction * N)`` training points."""
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    n = len(ds)
    n_train = int(round(train_fraction * n))
    if n_train == 0:
        raise ValueError("split leaves the training set empty")
    if train_fraction < 1.0 and n_train == n:
        raise ValueError("split leaves the test set empty")
    order = make_rng(seed).permutation(n)
    return ds.subset(np.sort(order[:n_train])), ds.subset(np.sort(order[n_train:]))


def load_dataset(name: str, seed: SeedLike = 0, *, bas_encoding: str = "raw") -> LabeledDataset:
    """Experiment dataset by name, preprocessed into [0, pi]."""
    if name == "bas":
        return generate_bars_and_stripes(2, 2, bas_encoding)
    if name == "synth":
        return preprocess_real(generate_blobs(100, seed))
    if name == "iris":
        return preprocess_real(load_iris_binary())
    raise ValueError(f"unknown dataset {name!r}")
