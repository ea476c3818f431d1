"""Command-line pipeline: synth, build-ref, extract, select, train, classify, evaluate.

Every artifact is a file: PGM images, CSV matrices and JSON documents. JSON
keys keep a fixed order and floats are printed with 17 significant digits, so
identical inputs and seeds reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .aggregate import (
    ForestConfig,
    RandomForest,
    ThresholdModel,
    WeightedScorer,
    evaluate,
    rf_predict,
    rf_train,
    train_threshold,
    train_weighted,
    weighted_score,
)
from .errors import (
    DataError,
    DefectSiftError,
    DimensionMismatch,
    MissingFile,
    UnwritableDir,
    UsageError,
)
from .features import (
    REGISTRY_VERSION,
    ExtractorConfig,
    ReferenceModels,
    build_reference_models,
    extract_all,
    feature_names,
    prepare,
)
from .imaging import Roi, read_pgm
from .selection import SelectionConfig, SelectionReport, select
from .synth import SynthConfig, gen_dataset, write_dataset

MODES = ("threshold", "weighted", "rf")
APPROACHES = ("a", "b", "both")


# --------------------------------------------------------------------------- #
# Canonical serialization
# --------------------------------------------------------------------------- #


def fmt_float(v: float) -> str:
    v = float(v)
    if not np.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v}")
    s = "%.17g" % v
    # Keep a float marker so integers and floats stay distinguishable on reload.
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def canonical_json(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {canonical_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(canonical_json(v, indent, _level + 1) for v in seq) + "]"
        items = [pad + canonical_json(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(path, text: str) -> None:
    p = Path(path)
    try:
        if p.parent != Path(""):
            p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UnwritableDir(f"cannot write {p}: {exc.strerror}") from exc


def write_json(path, obj) -> None:
    write_text(path, canonical_json(obj) + "\n")


def read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{p} is not valid JSON: {exc}") from exc


# --------------------------------------------------------------------------- #
# Run configuration
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class RunConfig:
    extract: ExtractorConfig = field(default_factory=ExtractorConfig)
    select: SelectionConfig = field(default_factory=SelectionConfig)
    train: ForestConfig = field(default_factory=ForestConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def to_dict(self) -> dict:
        return {
            "extract": self.extract.to_dict(),
            "select": self.select.to_dict(),
            "train": asdict(self.train),
            "synth": self.synth.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = sorted(set(d) - {"extract", "select", "train", "synth"})
        if unknown:
            raise KeyError(f"unknown config sections: {unknown}")
        train = dict(d.get("train", {}))
        bad = sorted(set(train) - {f.name for f in fields(ForestConfig)})
        if bad:
            raise KeyError(f"unknown train config keys: {bad}")
        return cls(
            ExtractorConfig.from_dict(d.get("extract", {})),
            SelectionConfig.from_dict(d.get("select", {})),
            ForestConfig(**train),
            SynthConfig.from_dict(d.get("synth", {})),
        )

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        return RunConfig(self.extract.with_(seed=seed), self.select, replace(self.train, seed=seed),
                         replace(self.synth, seed=seed))


def load_config(path, seed: int | None = None) -> RunConfig:
    if path is None:
        return RunConfig().with_seed(seed)
    d = read_json(path)
    if not isinstance(d, dict):
        raise UsageError(f"config {path} must be a JSON object")
    try:
        cfg = RunConfig.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid config {path}: {exc}") from exc
    return cfg.with_seed(seed)


# --------------------------------------------------------------------------- #
# Labels and feature matrices
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LabeledItem:
    path: str  # as written in labels.csv
    abspath: Path
    label: int | None
    roi: Roi | None


def read_labels(path) -> list[LabeledItem]:
    """``path,label`` rows; optional ``x,y,w,h`` columns give an ROI. Paths are relative to the CSV."""
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"no such file: {p}")
    with open(p, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataError(f"{p} has no rows")
    if "path" not in rows[0]:
        raise DataError(f"{p} needs a 'path' column")
    items = []
    for r in rows:
        label = r.get("label")
        if label not in (None, ""):
            label = int(label)
            if label not in (0, 1):
                raise DataError(f"label must be 0 or 1, got {label}")
        else:
            label = None
        roi = None
        if all(r.get(k) not in (None, "") for k in ("x", "y", "w", "h")):
            roi = Roi(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"]))
        items.append(LabeledItem(r["path"], p.parent / r["path"], label, roi))
    return items


def load_image(item: LabeledItem):
    if not item.abspath.is_file():
        raise MissingFile(f"no such image: {item.abspath}")
    return read_pgm(item.abspath)


@dataclass
class FeatureTable:
    paths: list
    names: list
    X: np.ndarray
    labels: np.ndarray | None

    def split(self):
        if self.labels is None:
            raise DataError("feature table has no label column")
        return self.X[self.labels == 1], self.X[self.labels == 0]


def write_features(path, table: FeatureTable) -> None:
    head = ["path", *table.names] + (["label"] if table.labels is not None else [])
    lines = [",".join(head)]
    for i, p in enumerate(table.paths):
        cells = [p] + [fmt_float(v) for v in table.X[i]]
        if table.labels is not None:
            cells.append(str(int(table.labels[i])))
        lines.append(",".join(cells))
    write_text(path, "\n".join(lines) + "\n")


def read_features(path) -> FeatureTable:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"no such file: {p}")
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0][0] != "path":
        raise DataError(f"{p} is not a feature matrix")
    head = rows[0]
    has_label = head[-1] == "label"
    names = head[1:-1] if has_label else head[1:]
    body = rows[1:]
    try:
        X = np.array([[float(v) for v in r[1:1 + len(names)]] for r in body], dtype=float)
        labels = np.array([int(r[-1]) for r in body], dtype=np.int64) if has_label else None
    except ValueError as exc:
        raise DataError(f"{p}: {exc}") from exc
    if X.shape[1] != len(names):
        raise DimensionMismatch(f"{p}: ragged rows")
    return FeatureTable([r[0] for r in body], names, X, labels)


def _extract_one(args):
    item, ref, cfg = args
    img = load_image(item)
    return extract_all(img, item.roi, ref, cfg).values


def extract_table(items, ref, cfg: ExtractorConfig, jobs: int = 1) -> FeatureTable:
    work = [(it, ref, cfg) for it in items]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_extract_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        rows = [_extract_one(w) for w in work]
    labels = [it.label for it in items]
    lab = None if any(v is None for v in labels) else np.array(labels, dtype=np.int64)
    return FeatureTable([it.path for it in items], list(feature_names(cfg)), np.vstack(rows), lab)


# --------------------------------------------------------------------------- #
# Models
# --------------------------------------------------------------------------- #


def resolve_features(report: SelectionReport) -> tuple[list[int], str]:
    """Indices to train on, preferring approach B, then A, then every feature."""
    for approach in ("b", "a"):
        kept = report.kept(approach)
        present = report.kept_b if approach == "b" else report.kept_a
        if present is not None and kept:
            return kept, approach
    return list(range(len(report.names))), "all"


def train_model(table: FeatureTable, report: SelectionReport, mode: str, cfg: RunConfig) -> dict:
    if table.labels is None:
        raise DataError("training needs a label column")
    if list(report.names) != list(table.names):
        raise DimensionMismatch("selection report and feature matrix name different features")
    indices, source = resolve_features(report)
    out = {
        "mode": mode,
        "registry_version": REGISTRY_VERSION,
        "feature_names": list(table.names),
        "feature_source": source,
        "indices": indices,
    }
    if mode == "threshold":
        # The first kept feature is the best ranked one.
        out["model"] = train_threshold(table.X, table.labels, indices[0]).to_dict()
    elif mode == "weighted":
        out["model"] = train_weighted(table.X, table.labels, indices).to_dict()
    elif mode == "rf":
        forest = rf_train(table.X[:, indices], table.labels, cfg.train)
        out["model"] = forest.to_dict()
    else:
        raise UsageError(f"mode must be one of {MODES}")
    return out


def predict(model: dict, table: FeatureTable) -> tuple[np.ndarray, np.ndarray]:
    names = model["feature_names"]
    if list(table.names) != list(names):
        raise DimensionMismatch(f"model expects {len(names)} registry features, matrix has {len(table.names)}")
    mode = model["mode"]
    if mode == "threshold":
        return ThresholdModel.from_dict(model["model"]).predict(table.X)
    if mode == "weighted":
        scorer = WeightedScorer.from_dict(model["model"])
        s = np.atleast_1d(weighted_score(scorer, table.X))
        return (s >= 0.5).astype(np.int64), s
    if mode == "rf":
        forest = RandomForest.from_dict(model["model"])
        return rf_predict(forest, table.X[:, model["indices"]])
    raise DataError(f"unknown model mode {mode!r}")


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #


def cmd_synth(args, cfg: RunConfig) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    samples = gen_dataset(args.n, cfg.synth)
    try:
        labels = write_dataset(args.out_dir, samples)
    except OSError as exc:
        raise UnwritableDir(f"cannot write {args.out_dir}: {exc}") from exc
    n_def = sum(s.label for s in samples)
    print(f"wrote {len(samples)} images ({n_def} defect, {len(samples) - n_def} noise) and {labels}")
    return 0


def cmd_build_ref(args, cfg: RunConfig) -> int:
    items = read_labels(args.labels)
    dataset = []
    for it in items:
        if it.label is None:
            raise DataError(f"{it.path} has no label")
        img = load_image(it)
        roi = (it.roi or Roi.full(img)).clip(img.width, img.height)
        dataset.append((prepare(img, roi, cfg.extract), it.label))
    ref = build_reference_models(dataset, cfg.extract)
    write_json(args.out, ref.to_dict())
    print(f"reference models from {len(dataset)} images: best fits defect={ref.tp_best} noise={ref.fp_best}")
    return 0


def cmd_extract(args, cfg: RunConfig) -> int:
    items = read_labels(args.labels)
    ref = None
    if args.ref is not None:
        ref = ReferenceModels.from_dict(read_json(args.ref))
    else:
        print("warning: no reference models given; likelihood features use sentinels", file=sys.stderr)
    jobs = args.jobs or os.cpu_count() or 1
    table = extract_table(items, ref, cfg.extract, jobs)
    write_features(args.out, table)
    print(f"extracted {table.X.shape[1]} features from {len(items)} images")
    return 0


def cmd_select(args, cfg: RunConfig) -> int:
    table = read_features(args.features)
    tp, fp = table.split()
    report = select(tp, fp, table.names, args.approach, cfg.select)
    write_json(args.out, report.to_dict())
    if args.table:
        print(report.to_table())
    for approach in ("a", "b"):
        if (report.kept_a if approach == "a" else report.kept_b) is not None:
            kept = report.kept(approach)
            print(f"approach {approach.upper()} kept {len(kept)}: {', '.join(report.names[i] for i in kept)}")
    return 0


def cmd_train(args, cfg: RunConfig) -> int:
    table = read_features(args.features)
    report = SelectionReport.from_dict(read_json(args.report))
    model = train_model(table, report, args.mode, cfg)
    write_json(args.out, model)
    names = [table.names[i] for i in model["indices"]]
    print(f"trained {args.mode} model on {len(names)} features ({model['feature_source']})")
    if args.mode == "threshold":
        m = model["model"]
        print(f"{table.names[m['index']]} {m['direction']} {m['theta']:.6g} (balanced accuracy {m['balanced_accuracy']:.4f})")
    elif args.mode == "weighted":
        print(f"weights sum = {sum(model['model']['weights']):.12g}")
    else:
        oob = model["model"]["oob_accuracy"]
        print(f"{model['model']['n_trees']} trees, out-of-bag accuracy {oob if oob is None else round(oob, 4)}")
    return 0


def cmd_classify(args, cfg: RunConfig) -> int:
    model = read_json(args.model)
    table = read_features(args.features)
    cls, score = predict(model, table)
    lines = ["path,score,class"]
    lines += [f"{p},{fmt_float(s)},{int(c)}" for p, s, c in zip(table.paths, score, cls)]
    write_text(args.out, "\n".join(lines) + "\n")
    print(f"classified {len(table.paths)} items: {int(np.sum(cls))} defect")
    return 0


def cmd_evaluate(args, cfg: RunConfig) -> int:
    model = read_json(args.model)
    table = read_features(args.features)
    if table.labels is None:
        raise DataError("evaluation needs a label column")
    cls, score = predict(model, table)
    metrics = evaluate(cls, score, table.labels)
    write_json(args.out, metrics)
    print(" ".join(f"{k}={metrics[k]:.4f}" for k in ("accuracy", "precision", "recall", "f1", "roc_auc")))
    return 0


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    epilog = "default --config (every key optional; unknown keys rejected):\n" + canonical_json(
        RunConfig().to_dict())
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON (sections extract, select, train, synth)")
    common.add_argument("--seed", type=int, help="overrides every seed in the configuration")

    p = argparse.ArgumentParser(prog="defectsift", description=__doc__.splitlines()[0], epilog=epilog,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="generate a labeled synthetic image set")
    s.add_argument("out_dir")
    s.add_argument("--n", type=int, required=True, help="images per class")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("build-ref", parents=[common], help="fit per-class reference models")
    s.add_argument("labels", help="labels CSV (path,label[,x,y,w,h])")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build_ref)

    s = sub.add_parser("extract", parents=[common], help="compute the feature matrix")
    s.add_argument("labels")
    s.add_argument("--ref", help="reference models JSON (optional)")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("select", parents=[common], help="run the statistical feature selection")
    s.add_argument("features")
    s.add_argument("--out", required=True)
    s.add_argument("--approach", choices=APPROACHES, default="b")
    s.add_argument("--table", action="store_true", help="print the report as a table")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("train", parents=[common], help="train a classifier on the selected features")
    s.add_argument("features")
    s.add_argument("--report", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--mode", choices=MODES, default="rf")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", parents=[common], help="write predictions (path,score,class)")
    s.add_argument("model")
    s.add_argument("features")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("evaluate", parents=[common], help="write accuracy, precision, recall, f1 and roc_auc")
    s.add_argument("model")
    s.add_argument("features")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("defectsift: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.seed)
        return args.func(args, cfg)
    except DefectSiftError as exc:
        print(f"defectsift: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
