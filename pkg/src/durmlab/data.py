"""Synthetic blobs, CSV ingestion and deterministic splits."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Bad or unreadable input data."""


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise DataError(f"features must be a non-empty N x D matrix, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError("one label per feature row required")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DataError(f"labels must lie in [0, {self.num_classes})")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def digest(self) -> str:
        return content_digest(self.features, self.labels)

    def subset(self, idx, **provenance) -> Dataset:
        idx = np.asarray(idx, dtype=np.int64)
        features, labels = self.features[idx], self.labels[idx]
        prov = {**self.provenance, **provenance, "parent_digest": self.digest()}
        prov["digest"] = content_digest(features, labels)
        return Dataset(features, labels, self.num_classes, prov)


def content_digest(features: np.ndarray, labels: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(features, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(labels, dtype="<i8").tobytes())
    return h.hexdigest()


def blob_centers(num_classes: int, dim: int, separation: float) -> np.ndarray:
    """Class c sits at ``separation * e_c``; classes past ``dim`` use ``-e_{c-dim}``."""
    if num_classes > 2 * dim:
        raise DataError(f"dim={dim} cannot hold {num_classes} distinct centers (need dim >= {math.ceil(num_classes / 2)})")
    centers = np.zeros((num_classes, dim))
    for c in range(num_classes):
        if c < dim:
            centers[c, c] = separation
        else:
            centers[c, c - dim] = -separation
    return centers


def gen_blobs(seed: int, num_classes: int, per_class: int, dim: int, separation: float, spread: float) -> Dataset:
    if num_classes < 1 or per_class < 1 or dim < 1:
        raise DataError("num_classes, per_class and dim must be positive")
    if not spread > 0:
        raise DataError("spread must be positive")
    centers = blob_centers(num_classes, dim, separation)
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(num_classes), per_class)
    features = centers[labels] + spread * rng.standard_normal((labels.size, dim))
    order = rng.permutation(labels.size)
    features, labels = features[order], labels[order]
    provenance = {
        "source": "blobs",
        "seed": int(seed),
        "num_classes": int(num_classes),
        "per_class": int(per_class),
        "dim": int(dim),
        "separation": float(separation),
        "spread": float(spread),
        "digest": content_digest(features, labels),
    }
    return Dataset(features, labels, num_classes, provenance)


def load_csv(path, label_column: str) -> Dataset:
    """Read a comma-separated, UTF-8 file with a header row.

    Every column other than ``label_column`` must be numeric. Labels that are
    all non-negative integers are used as-is; anything else is mapped to
    indices in order of first appearance. Rows in error messages are 1-based
    data rows (the header is not counted).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None
    rows = list(csv.reader(io.StringIO(text), delimiter=",", quoting=csv.QUOTE_NONE, strict=True))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header {header}")
    if len(rows) < 2:
        raise DataError(f"{path}: header present but no data rows")
    label_idx = header.index(label_column)
    feature_cols = [i for i in range(len(header)) if i != label_idx]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns")

    features = np.empty((len(rows) - 1, len(feature_cols)))
    raw_labels = []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} fields, header has {len(header)}")
        for j, col in enumerate(feature_cols):
            cell = row[col].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {r}, column {header[col]!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}: row {r}, column {header[col]!r}: non-finite value {cell!r}")
            features[r - 1, j] = value
        raw_labels.append(row[label_idx].strip())

    if all(s.isdigit() for s in raw_labels):
        labels = np.array([int(s) for s in raw_labels], dtype=np.int64)
        names = [str(i) for i in range(int(labels.max()) + 1)]
    else:
        mapping: dict[str, int] = {}
        for s in raw_labels:
            mapping.setdefault(s, len(mapping))
        labels = np.array([mapping[s] for s in raw_labels], dtype=np.int64)
        names = list(mapping)
    provenance = {
        "source": "csv",
        "path": str(path),
        "label_column": label_column,
        "file_sha256": hashlib.sha256(raw).hexdigest(),
        "class_names": names,
        "digest": content_digest(features, labels),
    }
    return Dataset(features, labels, len(names), provenance)


def train_test_split(data: Dataset, test_fraction: float, seed: int, stratified: bool = True) -> tuple[Dataset, Dataset]:
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    if stratified:
        test_idx = []
        for c in range(data.num_classes):
            members = np.flatnonzero(data.labels == c)
            if members.size == 0:
                continue
            if members.size < 2:
                raise DataError(f"class {c} has {members.size} sample; stratified split needs at least 2")
            n_test = min(max(int(round(members.size * test_fraction)), 1), members.size - 1)
            test_idx.append(rng.permutation(members)[:n_test])
        test_idx = np.sort(np.concatenate(test_idx))
    else:
        n = len(data)
        if n < 2:
            raise DataError("need at least 2 samples to split")
        n_test = min(max(int(round(n * test_fraction)), 1), n - 1)
        test_idx = np.sort(rng.permutation(n)[:n_test])
    mask = np.zeros(len(data), dtype=bool)
    mask[test_idx] = True
    split = {"test_fraction": float(test_fraction), "split_seed": int(seed), "stratified": bool(stratified)}
    train = data.subset(np.flatnonzero(~mask), split={**split, "part": "train"})
    test = data.subset(np.flatnonzero(mask), split={**split, "part": "test"})
    return train, test


def longtail_counts(num_classes: int, head_count: int, imbalance_ratio: float) -> list[int]:
    """Per-class sizes decaying exponentially from ``head_count`` to ``head_count / ratio``."""
    if imbalance_ratio < 1:
        raise DataError(f"imbalance ratio must be >= 1, got {imbalance_ratio}")
    if num_classes == 1:
        return [int(head_count)]
    return [
        int(math.floor(head_count * imbalance_ratio ** (-c / (num_classes - 1)) + 0.5))
        for c in range(num_classes)
    ]


def make_longtail(data: Dataset, imbalance_ratio: float, seed: int, head_count: int | None = None) -> Dataset:
    """Subsample each class to an exponential long-tail profile.

    Class 0 is the head. ``head_count`` defaults to the number of class-0
    samples available. Samples are drawn without replacement and the
    original row order is kept.
    """
    available = data.class_counts()
    head = int(available[0]) if head_count is None else int(head_count)
    targets = longtail_counts(data.num_classes, head, imbalance_ratio)
    rng = np.random.default_rng(seed)
    keep = []
    for c, want in enumerate(targets):
        if want > available[c]:
            raise DataError(f"class {c} has {available[c]} samples, long-tail profile needs {want}")
        members = np.flatnonzero(data.labels == c)
        keep.append(rng.choice(members, size=want, replace=False))
    idx = np.sort(np.concatenate(keep))
    return data.subset(
        idx,
        longtail={"imbalance_ratio": float(imbalance_ratio), "seed": int(seed), "counts": targets},
    )
