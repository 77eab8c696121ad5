"""Append-only JSON-lines result store with an integrity manifest."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__ as ENGINE_VERSION
from ..metrics.classification import CleanMetrics
from ..metrics.robustness import RobustnessMetrics
from .spec import RunConfig

RESULTS_FILE = "results.jsonl"
MANIFEST_FILE = "manifest.json"

# Slack allowed on the per-coordinate L-inf containment check.
LINF_TOLERANCE = 1e-12


class StoreIntegrityError(RuntimeError):
    """Manifest mismatch or a record violating a hard invariant."""


@dataclass
class RunResult:
    """One sweep cell's full outcome (or its failure diagnostic)."""

    config: RunConfig
    clean: CleanMetrics | None = None
    robust: RobustnessMetrics | None = None
    max_perturbation: float | None = None
    train_time_s: float | None = None
    attack_time_s: float | None = None
    failed: bool = False
    diagnostic: str | None = None
    engine_version: str = ENGINE_VERSION

    def to_record(self) -> dict:
        """Flat dict for grouping and aggregation."""
        rec = self.config.as_dict()
        rec["failed"] = self.failed
        rec["engine_version"] = self.engine_version
        rec["train_time_s"] = self.train_time_s
        rec["attack_time_s"] = self.attack_time_s
        rec["max_perturbation"] = self.max_perturbation
        if self.clean is not None:
            rec.update(
                accuracy=self.clean.accuracy,
                precision=self.clean.precision,
                recall=self.clean.recall,
                f1=self.clean.f1,
            )
        else:
            rec.update(accuracy=None, precision=None, recall=None, f1=None)
        if self.robust is not None:
            rec.update(
                asr=self.robust.asr,
                asr_denominator=self.robust.denominator,
                flip_count=self.robust.flip_count,
                mean_confidence_drop=self.robust.mean_confidence_drop,
            )
        else:
            rec.update(asr=None, asr_denominator=None, flip_count=None, mean_confidence_drop=None)
        return rec

    def to_json(self) -> str:
        payload = {
            "config": self.config.as_dict(),
            "failed": self.failed,
            "diagnostic": self.diagnostic,
            "engine_version": self.engine_version,
            "train_time_s": self.train_time_s,
            "attack_time_s": self.attack_time_s,
            "max_perturbation": self.max_perturbation,
            "clean": self.clean.as_dict() if self.clean is not None else None,
            "robust": None,
        }
        if self.robust is not None:
            drops = self.robust.confidence_drops
            payload["robust"] = {
                "asr": self.robust.asr,
                "denominator": self.robust.denominator,
                "flip_count": self.robust.flip_count,
                "confidence_drops": None if drops is None else [float(v) for v in drops],
            }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunResult":
        raw = json.loads(line)
        clean = None
        if raw["clean"] is not None:
            c = raw["clean"]
            clean = CleanMetrics(
                accuracy=c["accuracy"],
                precision=c["precision"],
                recall=c["recall"],
                f1=c["f1"],
                confusion=np.zeros((0, 0), dtype=np.int64),  # counts are not persisted
                mode=c["mode"],
            )
        robust = None
        if raw["robust"] is not None:
            r = raw["robust"]
            drops = r["confidence_drops"]
            robust = RobustnessMetrics(
                asr=r["asr"],
                denominator=r["denominator"],
                flip_count=r["flip_count"],
                confidence_drops=None if drops is None else np.asarray(drops),
            )
        return cls(
            config=RunConfig.from_dict(raw["config"]),
            clean=clean,
            robust=robust,
            max_perturbation=raw["max_perturbation"],
            train_time_s=raw["train_time_s"],
            attack_time_s=raw["attack_time_s"],
            failed=raw["failed"],
            diagnostic=raw["diagnostic"],
            engine_version=raw["engine_version"],
        )


def corpus_hash(x_values: np.ndarray, y_ids: np.ndarray) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(np.ascontiguousarray(x_values, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(y_ids, dtype="<i8").tobytes())
    return h.hexdigest()


class ResultStore:
    """Directory holding results.jsonl plus manifest.json.

    Appends are idempotent by run key: re-running a completed cell is skipped
    by the runner unless forced.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.results_path = self.path / RESULTS_FILE
        self.manifest_path = self.path / MANIFEST_FILE

    @classmethod
    def open(cls, path, spec_hash: str, corpus_digest: str) -> "ResultStore":
        """Create the store, or re-open it verifying the manifest matches."""
        store = cls(path)
        store.path.mkdir(parents=True, exist_ok=True)
        if store.manifest_path.exists():
            manifest = store.manifest()
            if manifest["corpus_hash"] != corpus_digest:
                raise StoreIntegrityError(
                    f"store at {store.path} was built from a different corpus "
                    f"({manifest['corpus_hash'][:12]}.. != {corpus_digest[:12]}..)"
                )
            if manifest["spec_hash"] != spec_hash:
                raise StoreIntegrityError(
                    f"store at {store.path} was built from a different sweep spec"
                )
        else:
            manifest = {
                "spec_hash": spec_hash,
                "corpus_hash": corpus_digest,
                "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
                "engine_version": ENGINE_VERSION,
            }
            store.manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        return store

    def manifest(self) -> dict:
        return json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def append(self, result: RunResult) -> None:
        with self.results_path.open("a", encoding="utf-8") as fh:
            fh.write(result.to_json() + "\n")

    def load_results(self) -> list[RunResult]:
        if not self.results_path.exists():
            return []
        with self.results_path.open(encoding="utf-8") as fh:
            return [RunResult.from_json(line) for line in fh if line.strip()]

    def completed_keys(self) -> set[tuple]:
        return {r.config.run_key() for r in self.load_results()}

    def records(self) -> list[dict]:
        return [r.to_record() for r in self.load_results()]


def validate_store(store: ResultStore, expected_runs=None) -> None:
    """Hard integrity gate over a finished store.

    Checks the epsilon-ball containment of every successful run, uniqueness of
    run keys, and (when the expected enumeration is given) full coverage.
    """
    results = store.load_results()
    seen = {}
    for res in results:
        key = res.config.run_key()
        if key in seen:
            raise StoreIntegrityError(f"duplicate run {key}")
        seen[key] = res
        if res.failed:
            if not res.diagnostic:
                raise StoreIntegrityError(f"failed run {key} carries no diagnostic")
            continue
        if res.max_perturbation is None:
            raise StoreIntegrityError(f"run {key} is missing its perturbation norm")
        if res.max_perturbation > res.config.epsilon + LINF_TOLERANCE:
            raise StoreIntegrityError(
                f"run {key}: |x_adv - x| = {res.max_perturbation} exceeds "
                f"epsilon {res.config.epsilon}"
            )
    if expected_runs is not None:
        expected = {run.run_key() for run in expected_runs}
        missing = expected - set(seen)
        extra = set(seen) - expected
        if missing or extra:
            raise StoreIntegrityError(
                f"coverage mismatch: {len(missing)} missing, {len(extra)} unexpected"
            )
