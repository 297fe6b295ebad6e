"""CSV ingestion, label encoding, and stratified splitting for real datasets."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .classifier import TrainingSet


@dataclass
class DatasetManifest:
    path: str
    label_column: str | int = "label"
    feature_columns: list | None = None  # None = all non-label columns
    class_filter: list | None = None  # keep only these label values
    noise_augment: int = 0
    per_class_train: int = 100
    per_class_test: int = 50
    seed: int = 0

    @classmethod
    def from_json(cls, path) -> "DatasetManifest":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        split = doc.pop("split", {})
        doc.setdefault("per_class_train", split.get("per_class_train", 100))
        doc.setdefault("per_class_test", split.get("per_class_test", 50))
        doc.setdefault("seed", split.get("seed", 0))
        return cls(**doc)


@dataclass
class LabeledFrame:
    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), re-encoded 1..c
    label_names: dict  # encoded label -> original string
    dropped_rows: int = 0
    standardize_stats: tuple | None = field(default=None)

    @property
    def class_count(self) -> int:
        return len(self.label_names)

    def decode(self, encoded) -> list:
        return [self.label_names[int(v)] for v in np.atleast_1d(encoded)]


def load_csv(manifest: DatasetManifest) -> LabeledFrame:
    """Parse a headered CSV; rows with unparseable feature cells are dropped and counted."""
    with open(manifest.path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{manifest.path}: empty file") from None
        rows = list(reader)
    if isinstance(manifest.label_column, int):
        label_idx = manifest.label_column
        if not 0 <= label_idx < len(header):
            raise ValueError(f"label column index {label_idx} out of range")
    else:
        if manifest.label_column not in header:
            raise ValueError(f"label column {manifest.label_column!r} not in header")
        label_idx = header.index(manifest.label_column)
    if manifest.feature_columns is not None:
        feat_idx = []
        for col in manifest.feature_columns:
            if isinstance(col, int):
                feat_idx.append(col)
            elif col in header:
                feat_idx.append(header.index(col))
            else:
                raise ValueError(f"feature column {col!r} not in header")
    else:
        feat_idx = [i for i in range(len(header)) if i != label_idx]

    keep = None if manifest.class_filter is None else {str(v) for v in manifest.class_filter}
    feats, raw_labels, dropped = [], [], 0
    for row in rows:
        if len(row) <= max(feat_idx + [label_idx]):
            dropped += 1
            continue
        lab = row[label_idx]
        if keep is not None and lab not in keep:
            continue
        try:
            vals = [float(row[i]) for i in feat_idx]
        except ValueError:
            dropped += 1
            continue
        if any(not np.isfinite(v) for v in vals):
            dropped += 1
            continue
        feats.append(vals)
        raw_labels.append(lab)
    if not feats:
        raise ValueError(f"{manifest.path}: no usable rows")
    # encode labels by first appearance
    encoding: dict = {}
    for lab in raw_labels:
        if lab not in encoding:
            encoding[lab] = len(encoding) + 1
    labels = np.array([encoding[lab] for lab in raw_labels])
    names = {v: k for k, v in encoding.items()}
    return LabeledFrame(
        features=np.array(feats, dtype=np.float64),
        labels=labels,
        label_names=names,
        dropped_rows=dropped,
    )


def stratified_split(frame: LabeledFrame, per_class_train: int, per_class_test: int, seed: int):
    """Disjoint seeded within-class split; returns (TrainingSet, X_test, y_test)."""
    from .synth import derived_rng

    rng = derived_rng(seed, 7)
    classes, test_X, test_y = [], [], []
    for lab in sorted(frame.label_names):
        idx = np.nonzero(frame.labels == lab)[0]
        need = per_class_train + per_class_test
        if idx.size < need:
            name = frame.label_names[lab]
            raise ValueError(
                f"class {name!r} has {idx.size} rows, needs {need} for the requested split"
            )
        chosen = rng.choice(idx, size=need, replace=False)
        classes.append((lab, frame.features[chosen[:per_class_train]]))
        test_X.append(frame.features[chosen[per_class_train:]])
        test_y.append(np.full(per_class_test, lab))
    train = TrainingSet.from_class_list(classes)
    return train, np.vstack(test_X), np.concatenate(test_y)


def standardize(train: TrainingSet, X_test: np.ndarray):
    """Per-feature z-transform with statistics fit on the training data only."""
    all_train = np.vstack(train.class_samples)
    mu = all_train.mean(axis=0)
    sd = all_train.std(axis=0, ddof=1)
    sd = np.where(sd > 0.0, sd, 1.0)
    classes = [
        (lab, (m - mu) / sd) for lab, m in zip(train.labels, train.class_samples)
    ]
    return TrainingSet.from_class_list(classes), (X_test - mu) / sd
