"""Command-line interface.

Subcommands: masks, filter, synth, train, gap, spectra, export-images.
Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure.

numpy (and everything that imports it) is loaded lazily so that
``--threads`` can pin the BLAS thread pools via environment variables
before the first numpy import.
"""

import argparse
import json
import os
import sys
from pathlib import Path


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _set_threads(n: int) -> None:
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "VECLIB_MAXIMUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ[var] = str(n)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for stochastic steps")
    p.add_argument("--out-dir", default=".", help="directory for output artifacts")
    p.add_argument("--config", help="JSON config file (subcommand-specific schema)")
    p.add_argument("--threads", type=int, help="cap BLAS/OpenMP thread pools")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("masks", help="emit a mask bitmap and its statistics")
    p.add_argument("--kind", choices=["radial", "random"], required=True)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--radius", type=float, help="radial cutoff (kind=radial)")
    p.add_argument("--drop-prob", type=float, help="mode drop probability (kind=random)")
    _add_common(p)

    p = sub.add_parser("filter", help="build filtered variants of a dataset")
    p.add_argument("--input", required=True, help="variant base path or cifar10 file/dir")
    p.add_argument("--format", choices=["variant", "cifar10"], default="variant")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--drop-prob", type=float, required=True)
    p.add_argument(
        "--variants",
        default="unfiltered,radial,random,augmented",
        help="comma-separated subset to write",
    )
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("kind", choices=["powerlaw", "twoclass"])
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--channels", type=int, default=1, help="powerlaw only")
    p.add_argument("--amplitude", type=float, default=1.0, help="noise/power amplitude")
    p.add_argument("--eta", type=float, default=0.0, help="power-law exponent offset")
    p.add_argument("--cue-low", type=int, help="twoclass low cue frequency (cycles)")
    p.add_argument("--cue-high", type=int, help="twoclass high cue frequency (cycles)")
    p.add_argument("--cue-amplitude", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("train", help="train one model from a JSON config")
    _add_common(p)

    p = sub.add_parser("gap", help="run the full train/test variant grid")
    _add_common(p)

    p = sub.add_parser("spectra", help="radial power profiles and power-law fits")
    p.add_argument("--input", action="append", required=True, help="variant base path (repeatable)")
    p.add_argument("--limit", type=int, help="use at most this many images per dataset")
    _add_common(p)

    p = sub.add_parser("export-images", help="write dataset images (and mask) as pnm")
    p.add_argument("--input", required=True, help="variant base path")
    p.add_argument("--indices", default="0", help="comma-separated image indices")
    p.add_argument("--mask", action="store_true", help="also export the mask bitmap")
    _add_common(p)

    return parser


def _require(args, names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValueError(f"missing required option(s): {', '.join('--' + n for n in missing)}")


def cmd_masks(args) -> int:
    from .harness.report import export_mask
    from .masks import keep_fraction, radial_mask, random_mask

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "radial":
        _require(args, ["radius"])
        mask = radial_mask(args.height, args.width, args.channels, args.radius)
    else:
        _require(args, ["drop-prob"])
        mask = random_mask(args.height, args.width, args.channels, args.drop_prob, args.seed)
    name = f"mask_{args.kind}"
    export_mask(mask, out / f"{name}.pnm")
    stats = {
        "provenance": mask.provenance.to_dict(),
        "shape": list(mask.shape),
        "keep_fraction": keep_fraction(mask),
        "kept_per_channel": [int(plane.sum()) for plane in mask.data],
    }
    (out / f"{name}.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    print(
        f"{args.kind} mask {args.channels}x{args.height}x{args.width}: "
        f"keep fraction {stats['keep_fraction']:.4f}"
    )
    return 0


def cmd_filter(args) -> int:
    from .data import load_cifar10, load_variant, save_variant
    from .filtering import build_variants

    dataset = load_cifar10(args.input) if args.format == "cifar10" else load_variant(args.input)
    variants = build_variants(dataset, args.radius, args.drop_prob, args.seed)
    wanted = [v.strip() for v in args.variants.split(",") if v.strip()]
    unknown = set(wanted) - set(variants)
    if unknown:
        raise ValueError(f"unknown variants {sorted(unknown)}")
    out = Path(args.out_dir)
    for name in wanted:
        save_variant(variants[name], out / name)
        print(f"wrote {out / name}.{{manifest,f32,labels}} ({len(variants[name])} images)")
    return 0


def cmd_synth(args) -> int:
    from .data import PowerLawSpec, save_variant, synth_powerlaw, synth_twoclass

    spec = PowerLawSpec(amplitude=args.amplitude, eta=args.eta, seed=args.seed)
    if args.kind == "powerlaw":
        ds = synth_powerlaw(args.count, args.channels, args.height, args.width, spec)
    else:
        _require(args, ["cue-low", "cue-high"])
        ds = synth_twoclass(
            args.count,
            args.height,
            args.width,
            args.cue_low,
            args.cue_high,
            noise=spec,
            cue_amplitude=args.cue_amplitude,
        )
    out = Path(args.out_dir)
    save_variant(ds, out / args.kind)
    print(f"wrote {out / args.kind}.{{manifest,f32,labels}} ({len(ds)} images)")
    return 0


def cmd_train(args) -> int:
    from .data import load_variant, preprocess
    from .harness.figures import save_history_figure
    from .model import (
        ConvNetConfig,
        TrainConfig,
        init_params,
        load_checkpoint,
        save_history,
        train,
    )

    if args.config is None:
        raise ValueError("train requires --config")
    cfg = json.loads(Path(args.config).read_text())
    dataset = load_variant(cfg["dataset"])
    eval_sets = {name: load_variant(base) for name, base in cfg.get("eval", {}).items()}
    mode = cfg.get("preprocess", "none")
    if mode != "none":
        dataset = preprocess(dataset, mode)
        eval_sets = {k: preprocess(v, mode) for k, v in eval_sets.items()}
    model_cfg = ConvNetConfig.from_dict(cfg["model"])
    train_cfg = TrainConfig.from_dict(cfg["train"])

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoint.ckpt"
    resume = None
    net = init_params(model_cfg)
    if cfg.get("resume") and ckpt.exists():
        net, resume = load_checkpoint(ckpt)
        print(f"resuming from epoch {resume['epoch']}")
    net, history = train(
        net,
        dataset,
        eval_sets,
        train_cfg,
        dump_dir=out,
        checkpoint_path=ckpt,
        resume=resume,
        log=print,
    )
    save_history(history, out / "history.json")
    if history:
        save_history_figure(history, out / "history.png")
    print(f"finished: {len(history)} epochs, checkpoint at {ckpt}")
    return 0


def cmd_gap(args) -> int:
    from .harness.experiment import ExperimentConfig, run_experiment

    if args.config is None:
        raise ValueError("gap requires --config")
    config = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    report = run_experiment(config, args.out_dir, log=print)
    for row in report.rows:
        errs = " ".join(f"{k}={100 * v:.2f}%" for k, v in row.errors.items())
        print(f"{row.train_variant:<11} {errs} gap={100 * row.gap:.2f}%")
    return 0


def cmd_spectra(args) -> int:
    import csv

    from .data import load_variant
    from .harness.figures import save_spectra_figure
    from .harness.spectra import dataset_spectrum

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles, fits = {}, {}
    for base in args.input:
        label = Path(base).name
        radii, means, fit = dataset_spectrum(load_variant(base), limit=args.limit)
        profiles[label] = (radii, means)
        fits[label] = fit
        print(
            f"{label}: A={fit.amplitude:.4g} eta={fit.eta:.3f} "
            f"residual={fit.residual:.3g} bins={fit.bins_used}(+{fit.bins_excluded} zero)"
        )
    with (out / "spectra.csv").open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "radius", "mean_power"])
        for label, (radii, means) in profiles.items():
            for r, m in zip(radii, means):
                writer.writerow([label, repr(float(r)), repr(float(m))])
    (out / "fits.json").write_text(
        json.dumps({k: vars(v) for k, v in fits.items()}, indent=2, sort_keys=True) + "\n"
    )
    save_spectra_figure(profiles, out / "spectra.png", fits)
    return 0


def cmd_export_images(args) -> int:
    from .data import load_variant
    from .harness.report import export_images, export_mask
    from .masks import MaskProvenance, mask_from_provenance

    dataset = load_variant(args.input)
    indices = [int(tok) for tok in args.indices.split(",") if tok.strip()]
    paths = export_images(dataset, indices, args.out_dir)
    for p in paths:
        print(f"wrote {p}")
    if args.mask:
        if not dataset.manifest.mask:
            raise ValueError("dataset manifest records no mask provenance")
        c, h, w = dataset.manifest.shape
        mask = mask_from_provenance(h, w, c, MaskProvenance.from_dict(dataset.manifest.mask))
        mask_path = Path(args.out_dir) / "mask.pnm"
        export_mask(mask, mask_path)
        print(f"wrote {mask_path}")
    return 0


_COMMANDS = {
    "masks": cmd_masks,
    "filter": cmd_filter,
    "synth": cmd_synth,
    "train": cmd_train,
    "gap": cmd_gap,
    "spectra": cmd_spectra,
    "export-images": cmd_export_images,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        _set_threads(args.threads)

    from .errors import DataFormatError, DimensionError, NumericalError

    try:
        return _COMMANDS[args.command](args)
    except (DataFormatError, DimensionError, OSError) as e:
        print(f"specshift: data error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"specshift: numerical failure: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"specshift: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
