"""Recipe-vs-adversarial-training comparison over a shared attack grid."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..metrics.aggregate import aggregate
from ..neuralnet.training import TrainingConfig
from .runner import BundleSource, execute
from .spec import AdvArm, SweepSpec
from .store import ResultStore

RECIPE_ARM = "recipe"

# The inherently robust baseline: one hidden layer, a constrained feature
# space, ReLU, trained clean.
RECIPE_DEPTH = 1
RECIPE_FEATURES = 30
RECIPE_ACTIVATION = "relu"


@dataclass
class ComparisonRow:
    arm: str
    epsilon: float
    mean_asr: float
    ci95_half_width: float
    n: int


def default_deep_arms(all_features: int, activations=("relu", "tanh", "elu")) -> tuple[AdvArm, ...]:
    """Adversarially trained deep arms: the two deepest presets on the full
    feature set, one arm per activation."""
    arms = []
    for act in activations:
        for depth in (4, 5):
            arms.append(
                AdvArm(
                    name=f"advtrain-model{depth}-{act}",
                    depth=depth,
                    feature_count=all_features,
                    activation=act,
                )
            )
    return tuple(arms)


@dataclass
class DefenseComparison:
    rows: list[ComparisonRow]
    store: ResultStore

    def arm_asr(self, arm: str, epsilon: float) -> float:
        for row in self.rows:
            if row.arm == arm and row.epsilon == epsilon:
                return row.mean_asr
        raise KeyError(f"no row for arm={arm!r} epsilon={epsilon}")

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arm", "epsilon", "mean_asr", "ci95", "n"])
            for row in self.rows:
                writer.writerow(
                    [row.arm, row.epsilon, repr(row.mean_asr), repr(row.ci95_half_width), row.n]
                )


def compare_defenses(
    source: BundleSource,
    store_path,
    training: TrainingConfig | None = None,
    attacks=("fgsm", "bim", "pgd"),
    epsilons=(0.1, 0.3, 0.5),
    repeats: int = 1,
    base_seed: int = 0,
    deep_arms: tuple[AdvArm, ...] | None = None,
    recipe_features: int = RECIPE_FEATURES,
    parallelism: int = 1,
) -> DefenseComparison:
    """Run the clean recipe model and the adversarially trained deep arms
    against the shared attack grid; emit mean ASR per arm per epsilon."""
    if deep_arms is None:
        deep_arms = default_deep_arms(all_features=source.x.n_features)
    spec = SweepSpec(
        depths=(RECIPE_DEPTH,),
        feature_counts=(recipe_features,),
        activations=(RECIPE_ACTIVATION,),
        dropouts=(0.0,),
        attacks=tuple(attacks),
        epsilons=tuple(epsilons),
        repeats=repeats,
        base_seed=base_seed,
        training=training if training is not None else TrainingConfig(),
        adversarial_arms=deep_arms,
    )
    store = execute(spec, source, store_path, parallelism=parallelism)

    records = []
    for rec in store.records():
        rec = dict(rec)
        rec["arm"] = RECIPE_ARM if rec["defense"] == "clean" else rec["defense"]
        records.append(rec)
    stats = aggregate(records, group_by=("arm", "epsilon"), value="asr")
    rows = [
        ComparisonRow(
            arm=str(stat.group[0]),
            epsilon=float(stat.group[1]),
            mean_asr=stat.mean,
            ci95_half_width=stat.ci95_half_width,
            n=stat.n,
        )
        for stat in stats
    ]
    return DefenseComparison(rows=rows, store=store)
