"""Run manifests and artifact writers.

A manifest's digest covers the schema version, the training config and the
dataset provenance, never the timestamps, so re-serializing a manifest
reproduces its digest.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1"


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def digest_of(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass
class RunManifest:
    config: dict
    dataset: dict
    kind: str = "train"
    schema_version: str = SCHEMA_VERSION
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def digest(self) -> str:
        return digest_of(
            {"schema_version": self.schema_version, "kind": self.kind, "config": self.config, "dataset": self.dataset}
        )

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "digest": self.digest,
            "config": _plain(self.config),
            "dataset": _plain(self.dataset),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        m = cls(config=d["config"], dataset=d["dataset"], kind=d.get("kind", "train"),
                schema_version=d["schema_version"], created_at=d.get("created_at", ""))
        if "digest" in d and d["digest"] != m.digest:
            raise ValueError("manifest digest does not match its contents")
        return m


def write_json(path, obj, digest: str | None = None) -> None:
    doc = _plain(obj)
    if digest is not None:
        doc = {"schema_version": SCHEMA_VERSION, "manifest_digest": digest, **doc}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def write_csv(path, header: list[str], rows, digest: str | None = None) -> None:
    """CSV with an optional leading ``# manifest_digest=...`` comment line."""
    with open(path, "w", newline="") as fh:
        if digest is not None:
            fh.write(f"# manifest_digest={digest}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
