"""Command-line entry point: ``vqcnet run | grid | table``.

Exit status is 0 on success, 2 on a usage error and 1 on any runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .data import BAS_ENCODINGS, load_dataset
from .models import model_from_dict
from .training import DEFAULTS, METRICS, ExperimentSummary, history_csv, run_experiment, trial_seeds

log = logging.getLogger("vqcnet")

DEFAULT_RESOLUTION = 50


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _out_dir(arg) -> Path:
    out = Path(arg or os.environ.get("VQC_OUT_DIR") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _batch_size(text: str):
    if text.lower() == "full":
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("batch size must be positive or 'full'")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# -- table rendering -------------------------------------------------------

TABLE_HEADER = ["hardware", "data", "model", "parameters"] + [
    f"{metric}_{stat}" for metric in METRICS for stat in ("median", "avg", "std")
]
_STAT_KEYS = {"median": "median", "avg": "average", "std": "std"}


def table_rows(summaries) -> list[list]:
    rows = []
    for s in summaries:
        row = ["simulated", s.dataset, s.model.upper(), s.parameters]
        for metric in METRICS:
            entry = s.stats.get(metric)
            for stat in ("median", "avg", "std"):
                row.append(None if entry is None else entry[_STAT_KEYS[stat]])
        rows.append(row)
    return rows


def table_csv(summaries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for row in table_rows(summaries):
        writer.writerow(["N/A" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def table_text(summaries) -> str:
    groups = ["in sample accuracy", "in sample cost", "out of sample accuracy", "out of sample cost"]
    head1 = f"{'':9} {'':6} {'':5} {'':10} " + " ".join(f"{g:^23}" for g in groups)
    head2 = f"{'hardware':9} {'data':6} {'model':5} {'parameters':10} " + " ".join(
        f"{'median':>7} {'avg.':>7} {'std.':>7}" for _ in groups
    )
    lines = [head1.rstrip(), head2, "-" * len(head2)]
    for row in table_rows(summaries):
        cells = []
        for v in row[4:]:
            if v is None:
                cells.append(f"{'N/A':>7}")
            else:
                cells.append(f"{v:7.2f}")
        lines.append(f"{row[0]:9} {row[1]:6} {row[2]:5} {row[3]:>10} " + " ".join(cells))
    return "\n".join(lines) + "\n"


# -- commands --------------------------------------------------------------


def cmd_run(args) -> int:
    start = time.perf_counter()
    out = _out_dir(args.out)
    batch_size = "default" if args.batch_size is None else args.batch_size
    summary, results, ds = run_experiment(
        args.dataset, args.model, args.trials, seed=args.seed, epochs=args.epochs,
        learning_rate=args.lr, batch_size=batch_size, shots=args.shots, hidden=args.hidden,
        bas_encoding=args.bas_encoding,
    )
    files = []

    def emit(name, write):
        path = out / name
        write(path)
        files.append(str(path))

    emit("summary.json", lambda p: _dump_json(p, summary.to_dict()))
    for r in results:
        emit(f"trial_{r.trial}.json", lambda p, r=r: _dump_json(p, r.to_dict()))
        emit(f"epochs_{r.trial}.csv", lambda p, r=r: p.write_text(history_csv(r.history)))
    emit("table.txt", lambda p: p.write_text(table_text([summary])))
    emit("table.csv", lambda p: p.write_text(table_csv([summary])))
    emit("dataset.csv", lambda p: ds.to_csv(p))

    dataset_seed, seeds = trial_seeds(args.seed, args.trials)
    cfg = results[0].config
    manifest = {
        "command": "run",
        "argv": sys.argv[1:],
        "config": {
            "dataset": args.dataset, "model": args.model, "trials": args.trials,
            "epochs": cfg.epochs, "learning_rate": cfg.learning_rate, "batch_size": cfg.batch_size,
            "hidden": args.hidden, "shots": args.shots, "bas_encoding": args.bas_encoding,
            "train_fraction": DEFAULTS[args.dataset]["train_fraction"],
        },
        "seeds": {"seed": args.seed, "dataset_seed": dataset_seed,
                  "trials": [{"init_seed": a, "data_seed": b} for a, b in seeds]},
        "transform": ds.transform,
        "files": files,
        "version": _version(),
        "duration_s": time.perf_counter() - start,
    }
    _dump_json(out / "manifest.json", manifest)
    sys.stdout.write(table_text([summary]))
    return 0


def _load_model_file(path: Path):
    doc = json.loads(path.read_text())
    if "model_type" not in doc and isinstance(doc.get("model"), dict):
        doc = doc["model"]  # a trial_<k>.json from `run`
    return model_from_dict(doc)


def probability_grid(model, resolution: int) -> np.ndarray:
    """Rows of ``(x0, x1, P(+1 | x))`` over a ``resolution x resolution`` grid on [0, pi]^2."""
    axis = np.linspace(0.0, np.pi, resolution)
    x0, x1 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([x0.ravel(), x1.ravel()])
    p = (model.output(pts) + 1.0) / 2.0
    return np.column_stack([pts, np.clip(p, 0.0, 1.0)])


def _color(p: float) -> str:
    # blue (p=0) through white to red (p=1)
    if p < 0.5:
        t = p / 0.5
        r, g, b = int(59 + t * 196), int(76 + t * 179), 255
    else:
        t = (p - 0.5) / 0.5
        r, g, b = 255, int(255 - t * 180), int(255 - t * 180)
    return f"#{r:02x}{g:02x}{b:02x}"


def grid_svg(grid: np.ndarray, resolution: int, points, labels, size: int = 400) -> str:
    cell = size / resolution
    scale = size / np.pi
    p = grid[:, 2].reshape(resolution, resolution)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    for i in range(resolution):
        for j in range(resolution):
            x, y = i * cell, size - (j + 1) * cell
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell:.2f}" height="{cell:.2f}" '
                         f'fill="{_color(p[i, j])}"/>')
    above = p >= 0.5
    for i in range(resolution):
        for j in range(resolution):
            crosses = (i + 1 < resolution and above[i, j] != above[i + 1, j]) or (
                j + 1 < resolution and above[i, j] != above[i, j + 1])
            if crosses:
                x, y = i * cell, size - (j + 1) * cell
                parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell:.2f}" height="{cell:.2f}" '
                             'fill="black" fill-opacity="0.6"/>')
    for (a, b), lab in zip(points, labels):
        fill = "#b2182b" if lab > 0 else "#2166ac"
        parts.append(f'<circle cx="{a * scale:.2f}" cy="{size - b * scale:.2f}" r="4" '
                     f'fill="{fill}" stroke="black" stroke-width="1"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_grid(args) -> int:
    start = time.perf_counter()
    model = _load_model_file(Path(args.model_file))
    if model.input_dim != 2:
        raise ValueError(f"grid needs a 2-D model, got input_dim={model.input_dim}")
    out = _out_dir(args.out)
    dataset_seed, _ = trial_seeds(args.seed, 1)
    ds = load_dataset(args.dataset, dataset_seed)
    grid = probability_grid(model, args.resolution)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x0", "x1", "p"])
    writer.writerows([repr(float(v)) for v in row] for row in grid)
    (out / "grid.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x0", "x1", "label"])
    for (a, b), lab in zip(ds.features, ds.labels):
        writer.writerow([repr(float(a)), repr(float(b)), int(lab)])
    (out / "points.csv").write_text(buf.getvalue())
    (out / "grid.svg").write_text(grid_svg(grid, args.resolution, ds.features, ds.labels))

    files = [str(out / n) for n in ("grid.csv", "points.csv", "grid.svg")]
    _dump_json(out / "manifest.json", {
        "command": "grid",
        "argv": sys.argv[1:],
        "config": {"model_file": args.model_file, "dataset": args.dataset, "resolution": args.resolution},
        "seeds": {"seed": args.seed, "dataset_seed": dataset_seed},
        "transform": ds.transform,
        "files": files,
        "version": _version(),
        "duration_s": time.perf_counter() - start,
    })
    print(f"wrote {len(grid)} grid rows to {out / 'grid.csv'}")
    return 0


def cmd_table(args) -> int:
    summaries = []
    for name in args.summaries:
        try:
            summaries.append(ExperimentSummary.from_dict(json.loads(Path(name).read_text())))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{name}: cannot read summary ({exc})") from exc
    text = table_text(summaries)
    if args.out:
        out = _out_dir(args.out)
        (out / "table.txt").write_text(text)
        (out / "table.csv").write_text(table_csv(summaries))
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqcnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train VQC/HNN models over several random trials")
    run.add_argument("--dataset", choices=sorted(DEFAULTS), required=True)
    run.add_argument("--model", choices=["vqc", "hnn"], required=True)
    run.add_argument("--trials", type=_positive_int, default=10)
    run.add_argument("--epochs", type=_positive_int, default=None)
    run.add_argument("--lr", type=float, default=None)
    run.add_argument("--batch-size", type=_batch_size, default=None,
                     help="integer or 'full' (default depends on the dataset)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--shots", type=_positive_int, default=None,
                     help="estimate expectations from this many shots during training (default: exact)")
    run.add_argument("--hidden", type=_positive_int, default=2, help="hidden circuits in the HNN")
    run.add_argument("--bas-encoding", choices=sorted(BAS_ENCODINGS), default="raw")
    run.add_argument("--out", default=None, help="output directory (default: $VQC_OUT_DIR or .)")
    run.set_defaults(func=cmd_run)

    grid = sub.add_parser("grid", help="probability surface of a trained 2-D model")
    grid.add_argument("model_file")
    grid.add_argument("--dataset", choices=["synth"], default="synth")
    grid.add_argument("--resolution", type=_positive_int, default=DEFAULT_RESOLUTION)
    grid.add_argument("--seed", type=int, default=0, help="seed the model's `run` used")
    grid.add_argument("--out", default=None)
    grid.set_defaults(func=cmd_grid)

    table = sub.add_parser("table", help="merge summary.json files into one results table")
    table.add_argument("summaries", nargs="+")
    table.add_argument("--out", default=None)
    table.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - report and exit 1
        log.debug("failure", exc_info=True)
        print(f"vqcnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
