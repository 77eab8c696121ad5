"""Command-line front end: prep, rank, train, attack, sweep, report.

Exit codes: 0 success, 1 I/O errors, 2 schema or validation errors. Every
--out is written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .attacks.evasion import AttackConfig, attack_batch, write_outcome_csv
from .datapipe.bundle import (
    load_bundle,
    load_corpus,
    make_bundle,
    save_bundle,
    save_corpus,
)
from .datapipe.preprocess import PreprocessConfig, apply_preprocessor, fit_preprocessor
from .datapipe.ranking import rank_features, select_top_k, write_ranking_csv
from .datapipe.synth import SynthSpec, synth_dataset
from .datapipe.table import SchemaError, ingest_csv, load_schema
from .metrics.aggregate import aggregate, write_aggregate_csv
from .metrics.classification import clean_metrics
from .metrics.robustness import robustness_metrics
from .neuralnet.network import (
    ARCH_PRESETS,
    ArchitectureSpec,
    init_network,
    load_network,
    predict,
    save_network,
)
from .neuralnet.training import AdvTrainConfig, TrainingConfig, adversarial_fit, fit
from .sweep.runner import BundleSource, execute
from .sweep.spec import SweepSpec, enumerate_runs
from .sweep.store import ResultStore, validate_store

# Figure key -> (grouping columns, value column) rendered by `report`.
FIGURES = {
    "depth_asr": (("depth",), "asr"),
    "eps_asr": (("depth", "epsilon"), "asr"),
    "attack_asr": (("attack", "depth"), "asr"),
    "activation_asr": (("activation", "attack"), "asr"),
    "dropout_asr": (("depth", "dropout"), "asr"),
    "conf_depth": (("depth",), "mean_confidence_drop"),
    "conf_features": (("depth", "feature_count"), "mean_confidence_drop"),
    "conf_attack": (("depth", "attack"), "mean_confidence_drop"),
    "defense_compare": (("defense", "epsilon"), "asr"),
}

CONF_FIGURES = {"conf_depth", "conf_features", "conf_attack"}


def _atomic_write(path: Path, writer) -> None:
    """Run writer(temp_path), then rename the temp file onto path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _parse_kv(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _parse_arch(text: str) -> tuple[int, ...]:
    if text in ARCH_PRESETS:
        return ARCH_PRESETS[text]
    try:
        return tuple(int(w) for w in text.split(","))
    except ValueError:
        raise ValueError(
            f"--arch must be model1..model5 or comma-separated widths, got {text!r}"
        ) from None


def cmd_prep(args) -> int:
    schema_path = Path(args.schema)
    if not schema_path.exists():
        raise SchemaError(f"no such schema file: {schema_path}")
    schema = load_schema(schema_path)
    table = ingest_csv(args.csv, schema)

    maps_dir = Path(args.maps) if args.maps else None
    config = PreprocessConfig(
        drop_columns=tuple(args.drop.split(",")) if args.drop else (),
        label_mode=args.label_mode,
        benign_label=args.benign_label,
        port_map_path=str(maps_dir / "port_protocol.map") if maps_dir else None,
        prefix_map_path=str(maps_dir / "ip_prefix_region.map") if maps_dir else None,
        derive_protocol_from=args.derive_protocol_from,
        derive_region_from=args.derive_region_from,
    )
    state = fit_preprocessor(table, config)
    x, y = apply_preprocessor(table, state)
    bundle = make_bundle(x, y, args.split, args.undersample, args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "state.json", lambda p: p.write_text(state.to_json(), encoding="utf-8"))
    _atomic_write(out / "corpus.npz", lambda p: save_corpus(x, y, p))
    _atomic_write(out / "bundle.npz", lambda p: save_bundle(bundle, p))

    report = {
        "rows_ingested": table.row_count,
        "rows_dropped": table.dropped_row_count,
        "columns_dropped": state.dropped_columns,
        "feature_count": x.n_features,
        "classes": list(y.class_names),
        "train_class_counts": [int(c) for c in bundle.train_y.counts()],
        "test_class_counts": [int(c) for c in bundle.test_y.counts()],
        "undersampled": bool(args.undersample),
        "seed": args.seed,
        "split_fraction": args.split,
    }
    _atomic_write(
        out / "prep_report.json",
        lambda p: p.write_text(json.dumps(report, indent=2), encoding="utf-8"),
    )
    print(f"prep: {table.row_count} rows ({table.dropped_row_count} dropped), "
          f"{x.n_features} features -> {out}")
    print(f"train class counts: {report['train_class_counts']}")
    return 0


def cmd_rank(args) -> int:
    bundle = load_bundle(args.bundle)
    ranking = rank_features(bundle.train_x, bundle.train_y)
    _atomic_write(Path(args.out), lambda p: write_ranking_csv(ranking, p))
    top = ranking.entries[: min(5, len(ranking.entries))]
    print(f"ranked {len(ranking.entries)} features (train split) -> {args.out}")
    for i, e in enumerate(top, start=1):
        print(f"  {i}. {e.name}  F={e.f_statistic:.4g}  cum={e.cumulative_importance:.3f}")
    return 0


def cmd_train(args) -> int:
    bundle = load_bundle(args.bundle)
    if args.k is not None and args.k < bundle.n_features:
        ranking = rank_features(bundle.train_x, bundle.train_y)
        names = ranking.top_names(args.k)
        bundle = replace(
            bundle,
            train_x=bundle.train_x.select(names),
            test_x=bundle.test_x.select(names),
            feature_subset_size=args.k,
        )
    widths = _parse_arch(args.arch)
    spec = ArchitectureSpec(
        input_dim=bundle.n_features,
        hidden=tuple((w, args.activation) for w in widths),
        output_classes=bundle.train_y.k,
        dropout_p=args.dropout,
    )
    net = init_network(spec, seed=args.seed)
    cfg = TrainingConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        seed=args.seed,
    )
    if args.adv_eps is not None:
        adv = AdvTrainConfig(
            inner_attack=AttackConfig.default(args.adv_kind, args.adv_eps, seed=args.seed),
            adversarial_fraction=args.adv_fraction,
        )
        trained, train_time, curve = adversarial_fit(net, bundle, cfg, adv)
    else:
        trained, train_time, curve = fit(net, bundle, cfg)

    _atomic_write(Path(args.out), lambda p: save_network(trained, p))
    mode = "binary" if bundle.train_y.k == 2 else "macro"
    cm = clean_metrics(bundle.test_y.ids, predict(trained, bundle.test_x.values), mode=mode)
    print(f"trained {'+'.join(str(w) for w in widths)} ({args.activation}, dropout {args.dropout}) "
          f"on {bundle.n_features} features -> {args.out}")
    print(f"hidden widths: {','.join(str(w) for w in widths)}")
    print(f"train time: {train_time:.2f}s  final loss: {curve[-1]:.4f}")
    print(f"test accuracy={cm.accuracy:.4f} precision={cm.precision:.4f} "
          f"recall={cm.recall:.4f} f1={cm.f1:.4f}")
    return 0


def cmd_attack(args) -> int:
    net = load_network(args.model)
    bundle = load_bundle(args.bundle)
    if bundle.n_features > net.input_dim:
        # model was trained on a top-k subset; rebuild the same reduction
        ranking = rank_features(bundle.train_x, bundle.train_y)
        names = ranking.top_names(net.input_dim)
        bundle = replace(
            bundle,
            train_x=bundle.train_x.select(names),
            test_x=bundle.test_x.select(names),
            feature_subset_size=net.input_dim,
        )
    overrides = {}
    if args.kind in ("bim", "pgd"):
        overrides["alpha"] = args.alpha if args.alpha is not None else args.eps / 4
        overrides["iterations"] = args.iters
        if args.kind == "pgd":
            overrides["random_start_radius"] = (
                args.radius if args.radius is not None else args.eps
            )
    cfg = AttackConfig(
        kind=args.kind,
        epsilon=args.eps,
        seed=args.seed,
        clip_to_feature_range=args.clip,
        **overrides,
    )
    outcome = attack_batch(net, bundle, cfg)
    _atomic_write(Path(args.out), lambda p: write_outcome_csv(outcome, bundle.test_y, p))
    robust = robustness_metrics(outcome, bundle.test_y)
    print(f"{args.kind} eps={args.eps} on {bundle.test_x.n_samples} test rows -> {args.out}")
    print(f"ASR: {robust.asr:.4f} ({robust.flip_count}/{robust.denominator})")
    print(f"mean confidence drop: {robust.mean_confidence_drop:.4f}")
    print(f"max |x_adv - x|: {outcome.max_linf():.6g} (budget {args.eps})")
    print(f"gradient batch evaluations: {outcome.queries}")
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.spec)
    if args.corpus:
        x, y = load_corpus(args.corpus)
    elif args.synth:
        kv = _parse_kv(args.synth)
        synth = SynthSpec(
            separation=float(kv.get("separation", 2.5)),
            informative=int(kv.get("informative", 2)),
            decay=float(kv.get("decay", 1.0)),
            label_noise=float(kv.get("label_noise", 0.0)),
        )
        x, y = synth_dataset(
            synth, n=int(kv.get("n", 20000)), d=int(kv.get("d", 123)),
            seed=int(kv.get("seed", 0)),
        )
    else:
        raise ValueError("sweep needs --corpus or --synth")
    source = BundleSource(x, y, split_fraction=args.split, undersample=args.undersample)
    store = execute(spec, source, args.store, parallelism=args.parallelism, force=args.force)
    validate_store(store, enumerate_runs(spec))
    records = store.records()
    failed = sum(1 for r in records if r["failed"])
    print(f"sweep complete: {len(records)} runs in {args.store} ({failed} failed)")
    return 0


def cmd_report(args) -> int:
    if args.figure not in FIGURES:
        raise ValueError(f"unknown figure key {args.figure!r}; expected one of {sorted(FIGURES)}")
    group_by, value = FIGURES[args.figure]
    store = ResultStore(args.store)
    results = store.load_results()
    if not results:
        raise ValueError(f"store {args.store} is empty")
    records = [r.to_record() for r in results]
    stats = aggregate(records, group_by=group_by, value=value)
    if not stats:
        raise ValueError(f"no populated groups for figure {args.figure!r}")
    _atomic_write(Path(args.out), lambda p: write_aggregate_csv(stats, group_by, p))
    print(f"{args.figure}: {len(stats)} rows -> {args.out}")

    if args.figure in CONF_FIGURES:
        dist_path = Path(args.out).with_name(Path(args.out).stem + "_distributions.csv")

        def write_dists(p: Path):
            import csv

            with p.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow([*group_by, "confidence_drop"])
                for res in results:
                    if res.failed or res.robust is None or res.robust.confidence_drops is None:
                        continue
                    rec = res.to_record()
                    key = [rec[g] for g in group_by]
                    for drop in res.robust.confidence_drops:
                        writer.writerow([*key, repr(float(drop))])

        _atomic_write(dist_path, write_dists)
        print(f"per-sample drop distributions -> {dist_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustnids",
        description="Train, attack, and sweep dense tabular intrusion-detection models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="ingest a CSV and fit the preprocessing pipeline")
    p.add_argument("--csv", required=True, help="input CSV with a header row")
    p.add_argument("--schema", required=True, help="column schema file (name,kind lines)")
    p.add_argument("--maps", help="directory with port_protocol.map and ip_prefix_region.map")
    p.add_argument("--out", required=True, help="output directory for state/corpus/bundle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument("--undersample", action="store_true", help="equalize training class counts")
    p.add_argument("--label-mode", choices=("binary", "multiclass"), default="binary")
    p.add_argument("--benign-label", default="Benign")
    p.add_argument("--drop", help="comma-separated columns to drop")
    p.add_argument("--derive-protocol-from", help="port column to map to a protocol")
    p.add_argument("--derive-region-from", help="IP column to map to a region")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("rank", help="rank bundle features by ANOVA F on the train split")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True, help="ranking CSV path")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train a dense model on a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--arch", default="model1", help="model1..model5 or comma widths (64,128)")
    p.add_argument("--k", type=int, help="keep only the top-k ranked features")
    p.add_argument("--activation", choices=("relu", "tanh", "elu"), default="relu")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("sgd", "adam"), default="adam")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adv-eps", type=float, help="adversarially train at this budget")
    p.add_argument("--adv-kind", choices=("fgsm", "bim", "pgd"), default="pgd")
    p.add_argument("--adv-fraction", type=float, default=0.5)
    p.add_argument("--out", required=True, help="model file path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="attack a trained model on a bundle's test split")
    p.add_argument("--model", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--kind", choices=("fgsm", "bim", "pgd"), required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, help="iterative step size (default eps/4)")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--radius", type=float, help="pgd random start radius (default eps)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip", action="store_true", help="clip to the train feature range")
    p.add_argument("--out", required=True, help="per-row outcome CSV path")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="run a sweep spec against a corpus")
    p.add_argument("--spec", required=True, help="sweep spec JSON file")
    p.add_argument("--corpus", help="corpus .npz from prep")
    p.add_argument("--synth", help="synthetic corpus, e.g. n=20000,d=123,separation=2.5")
    p.add_argument("--store", required=True, help="result store directory")
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--undersample", action="store_true", default=True)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--force", action="store_true", help="re-run completed cells")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="emit an aggregate CSV for one figure")
    p.add_argument("--store", required=True)
    p.add_argument("--figure", required=True, help="|".join(sorted(FIGURES)))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
