"""End-to-end experiment grid: build variants, train, evaluate, report.

One experiment fixes a dataset source, a mask parameterization
(radius, drop probability, one shared random-mask seed), a model and a
training recipe. For every requested training variant it trains one
model and evaluates it on all three test variants after every epoch; the
final epoch's errors populate the gap report.

The same mask parameters and seed are used to filter the train and the
test split, so both see the exact same masks. Artifacts (config echo,
per-row checkpoints and histories, report files, figures, timings) land
under a run directory; a failed stage leaves partial artifacts plus an
error summary behind.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path

from ..data import (
    LabeledDataset,
    PowerLawSpec,
    gcn_stats,
    load_cifar10,
    preprocess,
    subset_balanced,
    synth_twoclass,
)
from ..filtering import build_variants
from ..model import ConvNetConfig, TrainConfig, init_params, save_history, train
from .figures import save_gap_figure, save_history_figure
from .report import TRAIN_VARIANTS, GapReport, GapRow, emit_report


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    source: dict  # see _load_source for the recognized kinds
    radius: float
    drop_prob: float
    mask_seed: int
    preprocess: str  # "gcn" | "unit_scale" | "none"
    model: ConvNetConfig
    train: TrainConfig
    rows: tuple = TRAIN_VARIANTS

    def __post_init__(self):
        unknown = set(self.rows) - set(TRAIN_VARIANTS)
        if unknown:
            raise ValueError(f"unknown training variants {sorted(unknown)}")
        if self.preprocess not in ("gcn", "unit_scale", "none"):
            raise ValueError(f"unknown preprocess mode {self.preprocess!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source": self.source,
            "radius": self.radius,
            "drop_prob": self.drop_prob,
            "mask_seed": self.mask_seed,
            "preprocess": self.preprocess,
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "rows": list(self.rows),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            name=d["name"],
            source=d["source"],
            radius=d["radius"],
            drop_prob=d["drop_prob"],
            mask_seed=d["mask_seed"],
            preprocess=d["preprocess"],
            model=ConvNetConfig.from_dict(d["model"]),
            train=TrainConfig.from_dict(d["train"]),
            rows=tuple(d.get("rows", TRAIN_VARIANTS)),
        )


def _load_source(source: dict) -> tuple[LabeledDataset, LabeledDataset]:
    """Materialize (train, test) from a source description."""
    kind = source.get("kind")
    if kind == "cifar10":
        train_ds = load_cifar10(source["train_path"])
        test_ds = load_cifar10(source["test_path"])
        if source.get("train_count"):
            train_ds = subset_balanced(train_ds, source["train_count"])
        if source.get("test_count"):
            test_ds = subset_balanced(test_ds, source["test_count"])
        return train_ds, test_ds
    if kind == "twoclass":
        noise_train = PowerLawSpec(
            amplitude=source.get("noise_amplitude", 1.0),
            eta=source.get("noise_eta", 0.0),
            seed=source.get("seed", 0),
        )
        # test split draws from the next seed so the two are disjoint
        noise_test = PowerLawSpec(
            amplitude=noise_train.amplitude,
            eta=noise_train.eta,
            seed=noise_train.seed + 1,
        )
        common = dict(
            height=source.get("height", 32),
            width=source.get("width", 32),
            cue_freq_low=source["cue_freq_low"],
            cue_freq_high=source["cue_freq_high"],
            cue_amplitude=source.get("cue_amplitude", 1.0),
        )
        return (
            synth_twoclass(source["train_count"], noise=noise_train, **common),
            synth_twoclass(source["test_count"], noise=noise_test, **common),
        )
    raise ValueError(f"unknown dataset source kind {kind!r}")


def _normalize(config, train_variant, test_variants):
    """Apply the configured preprocessing, GCN statistics from the train split."""
    if config.preprocess == "none":
        return train_variant, test_variants
    if config.preprocess == "unit_scale":
        return (
            preprocess(train_variant, "unit_scale"),
            {k: preprocess(v, "unit_scale") for k, v in test_variants.items()},
        )
    stats = gcn_stats(train_variant)
    return (
        preprocess(train_variant, "gcn", stats),
        {k: preprocess(v, "gcn", stats) for k, v in test_variants.items()},
    )


def run_experiment(config: ExperimentConfig, out_dir, log=None) -> GapReport:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    say = log if log is not None else (lambda msg: None)

    stage = "load-source"
    timings = {}
    t_start = time.perf_counter()
    try:
        train_src, test_src = _load_source(config.source)
        say(f"loaded source: {len(train_src)} train / {len(test_src)} test images")

        stage = "build-variants"
        train_variants = build_variants(
            train_src, config.radius, config.drop_prob, config.mask_seed
        )
        test_variants = build_variants(
            test_src, config.radius, config.drop_prob, config.mask_seed
        )
        test_variants.pop("augmented")
        say("variants built (radial r=%g, random p=%g, seed %d)"
            % (config.radius, config.drop_prob, config.mask_seed))

        rows = []
        for variant in config.rows:
            stage = f"train-{variant}"
            t_row = time.perf_counter()
            row_dir = out_dir / variant
            row_dir.mkdir(exist_ok=True)
            train_ds, eval_sets = _normalize(config, train_variants[variant], test_variants)
            net = init_params(config.model)
            say(f"[{variant}] training on {len(train_ds)} images")
            net, history = train(
                net,
                train_ds,
                eval_sets,
                config.train,
                dump_dir=row_dir,
                checkpoint_path=row_dir / "checkpoint.ckpt",
                log=(lambda msg, v=variant: say(f"[{v}] {msg}")),
            )
            save_history(history, row_dir / "history.json")
            save_history_figure(history, row_dir / "history.png", title=f"trained on {variant}")
            rows.append(GapRow(train_variant=variant, errors=dict(history[-1]["errors"])))
            timings[variant] = time.perf_counter() - t_row

        stage = "report"
        timings["total"] = time.perf_counter() - t_start
        report = GapReport(
            rows=rows,
            metadata={
                "name": config.name,
                "source": config.source,
                "mask": {
                    "radius": config.radius,
                    "drop_prob": config.drop_prob,
                    "seed": config.mask_seed,
                },
                "preprocess": config.preprocess,
                "model": config.model.to_dict(),
                "train": config.train.to_dict(),
                "rows": list(config.rows),
                "wall_clock": timings,
            },
        )
        for fmt, suffix in (("json", "json"), ("csv", "csv"), ("markdown", "md")):
            (out_dir / f"report.{suffix}").write_text(emit_report(report, fmt))
        save_gap_figure(report, out_dir / "report.png", title=config.name)
        (out_dir / "timings.json").write_text(
            json.dumps(timings, indent=2, sort_keys=True) + "\n"
        )
        return report
    except Exception as e:
        (out_dir / "error_summary.json").write_text(
            json.dumps(
                {"stage": stage, "error": f"{type(e).__name__}: {e}"}, indent=2
            )
            + "\n"
        )
        raise
