"""Sweep execution: one training per model cell, reused across its attack cells."""

from __future__ import annotations

import time
import traceback
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np
from threadpoolctl import threadpool_limits

from ..attacks.evasion import AttackConfig, attack_batch
from ..datapipe.bundle import DatasetBundle, make_bundle
from ..datapipe.matrix import FeatureMatrix, LabelVector
from ..datapipe.ranking import rank_features, select_top_k
from ..metrics.classification import clean_metrics
from ..metrics.robustness import AsrUndefined, robustness_metrics
from ..neuralnet.network import ArchitectureSpec, init_network, predict
from ..neuralnet.training import adversarial_fit, fit
from .spec import CLEAN_DEFENSE, RunConfig, SweepSpec, enumerate_runs
from .store import ResultStore, RunResult, corpus_hash


@dataclass
class BundleSource:
    """Builds train/test bundles at any feature-subset size from one corpus.

    Features are ranked once over the full corpus; a bundle at size k keeps
    the k highest-ranked columns and then splits rows with the given seed.
    """

    x: FeatureMatrix
    y: LabelVector
    split_fraction: float = 0.8
    undersample: bool = True
    label_mode: str = "binary"

    def __post_init__(self):
        self._ranking = None
        self._cache: dict[tuple[int, int], DatasetBundle] = {}

    def corpus_digest(self) -> str:
        return corpus_hash(self.x.values, self.y.ids)

    def ranking(self):
        if self._ranking is None:
            self._ranking = rank_features(self.x, self.y)
        return self._ranking

    def bundle(self, feature_count: int, seed: int) -> DatasetBundle:
        key = (feature_count, seed)
        if key not in self._cache:
            subset = select_top_k(self.x, self.ranking(), feature_count)
            made = make_bundle(subset, self.y, self.split_fraction, self.undersample, seed)
            made = replace(made, feature_subset_size=feature_count)
            self._cache[key] = made
        return self._cache[key]


def _train_cell(source: BundleSource, spec: SweepSpec, runs: list[RunConfig]):
    """Train the model shared by one cell's attack runs; returns everything
    the attack loop needs."""
    first = runs[0]
    bundle = source.bundle(first.feature_count, first.bundle_seed)
    arch = ArchitectureSpec.preset(
        first.depth,
        input_dim=bundle.n_features,
        activation=first.activation,
        dropout_p=first.dropout,
        output_classes=bundle.train_y.k,
    )
    net = init_network(arch, seed=first.model_seed)
    training = replace(spec.training, seed=first.model_seed)
    if first.defense == CLEAN_DEFENSE:
        trained, train_time, _ = fit(net, bundle, training)
    else:
        arm = next(a for a in spec.adversarial_arms if a.name == first.defense)
        trained, train_time, _ = adversarial_fit(
            net, bundle, training, arm.adv_config(seed=first.model_seed)
        )
    mode = "binary" if bundle.train_y.k == 2 else "macro"
    clean = clean_metrics(bundle.test_y.ids, predict(trained, bundle.test_x.values), mode=mode)
    return bundle, trained, clean, train_time


def run_cell(source: BundleSource, spec: SweepSpec, runs: list[RunConfig]) -> list[RunResult]:
    """Execute one model cell: train once, attack once per (attack, epsilon)."""
    try:
        bundle, trained, clean, train_time = _train_cell(source, spec, runs)
    except Exception:
        diag = traceback.format_exc(limit=3)
        return [RunResult(config=run, failed=True, diagnostic=diag) for run in runs]

    results = []
    for run in runs:
        try:
            cfg = AttackConfig.default(run.attack, run.epsilon, seed=run.attack_seed)
            t0 = time.perf_counter()
            outcome = attack_batch(trained, bundle, cfg)
            attack_time = time.perf_counter() - t0
            try:
                robust = robustness_metrics(outcome, bundle.test_y)
            except AsrUndefined as exc:
                results.append(
                    RunResult(config=run, clean=clean, train_time_s=train_time,
                              failed=True, diagnostic=f"asr undefined: {exc}")
                )
                continue
            results.append(
                RunResult(
                    config=run,
                    clean=clean,
                    robust=robust,
                    max_perturbation=outcome.max_linf(),
                    train_time_s=train_time,
                    attack_time_s=attack_time,
                )
            )
        except Exception:
            results.append(
                RunResult(config=run, clean=clean, train_time_s=train_time,
                          failed=True, diagnostic=traceback.format_exc(limit=3))
            )
    return results


def group_cells(runs: list[RunConfig]) -> list[list[RunConfig]]:
    """Group runs into model cells, preserving enumeration order."""
    cells: dict[tuple, list[RunConfig]] = {}
    for run in runs:
        cells.setdefault(run.cell_key(), []).append(run)
    return list(cells.values())


_WORKER_STATE: dict = {}


def _init_worker(source: BundleSource, spec: SweepSpec):
    _WORKER_STATE["source"] = source
    _WORKER_STATE["spec"] = spec


def _worker(cell_runs: list[RunConfig]) -> list[RunResult]:
    # Single-threaded BLAS inside workers keeps results identical at any
    # parallelism level.
    with threadpool_limits(limits=1):
        return run_cell(_WORKER_STATE["source"], _WORKER_STATE["spec"], cell_runs)


def execute(
    spec: SweepSpec,
    source: BundleSource,
    store_path,
    parallelism: int = 1,
    force: bool = False,
) -> ResultStore:
    """Run every enumerated cell, skipping ones the store already holds.

    Results land in enumeration order regardless of parallelism, and failed
    cells record their diagnostic without aborting the sweep.
    """
    runs = enumerate_runs(spec)
    store = ResultStore.open(store_path, spec.spec_hash(), source.corpus_digest())
    done = set() if force else store.completed_keys()
    pending = [run for run in runs if run.run_key() not in done]
    cells = group_cells(pending)
    if not cells:
        return store

    if parallelism <= 1:
        with threadpool_limits(limits=1):
            for cell in cells:
                for result in run_cell(source, spec, cell):
                    store.append(result)
        return store

    ctx = get_context()
    with ctx.Pool(
        processes=parallelism, initializer=_init_worker, initargs=(source, spec)
    ) as pool:
        for results in pool.imap(_worker, cells):
            for result in results:
                store.append(result)
    return store

