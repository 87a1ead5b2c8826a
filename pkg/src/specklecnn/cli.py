"""Command-line surface: synth, train, eval, predict.

Exit codes: 0 success, 2 bad flags, 3 dataset/decode errors, 4 I/O or
checkpoint errors, 5 laser-color mismatch (override with --force).
"""

import argparse
import sys

from .checkpoint import load_checkpoint
from .dataset import load_remap, scan_dataset
from .errors import (CheckpointError, DatasetError, LaserMismatchError)
from .imageio import load_image
from .metrics import evaluate, format_report, write_confusion_csv, \
    write_report_csv
from .model import predict
from .preprocess import LaserColor, preprocess
from .speckle import synth_dataset
from .training import TrainConfig, run_training

PROFILES = {"full": 256, "tiny": 64}


def _laser_arg(value):
    return LaserColor.from_name(value)


def _add_laser(p, default="green", help_suffix=""):
    p.add_argument("--laser", type=_laser_arg, default=default,
                   metavar="{red,green,blue}",
                   help=f"laser color whose channel is used "
                        f"(default: {default}){help_suffix}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="specklecnn",
        description="Train and evaluate a single-channel speckle-pattern "
                    "material classifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic speckle dataset")
    p.add_argument("--classes", type=int, required=True,
                   help="number of material classes (minimum 2)")
    p.add_argument("--per-class", type=int, required=True,
                   help="images per class")
    p.add_argument("--side", type=int, default=64,
                   help="image side in pixels (default: 64)")
    p.add_argument("--out", required=True, help="output directory")
    _add_laser(p)
    p.add_argument("--seed", type=int, default=0,
                   help="generator seed (default: 0)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a classifier on a dataset tree")
    p.add_argument("--data", required=True,
                   help="dataset root (one folder per class)")
    p.add_argument("--out", default="model.spkl",
                   help="checkpoint path (default: model.spkl)")
    p.add_argument("--history", default="history.csv",
                   help="training history CSV path (default: history.csv)")
    _add_laser(p)
    p.add_argument("--profile", choices=sorted(PROFILES), default="full",
                   help="input side: full=256, tiny=64 (default: full)")
    p.add_argument("--epochs", type=int, default=100,
                   help="training epochs (default: 100)")
    p.add_argument("--lr", type=float, default=0.001,
                   help="Adamax learning rate (default: 0.001)")
    p.add_argument("--beta1", type=float, default=0.9,
                   help="Adamax first-moment decay (default: 0.9)")
    p.add_argument("--beta2", type=float, default=0.999,
                   help="Adamax infinity-norm decay (default: 0.999)")
    p.add_argument("--batch-size", type=int, default=32,
                   help="mini-batch size (default: 32)")
    p.add_argument("--val-fraction", type=float, default=0.2,
                   help="validation fraction per class (default: 0.2)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for init, split and shuffles (default: 0)")
    p.add_argument("--remap", default=None,
                   help="CSV mapping variant folders to material classes")
    p.add_argument("--crop-center", action="store_true",
                   help="center-crop instead of bilinear resize")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("model", help="checkpoint path")
    p.add_argument("--data", required=True, help="dataset root")
    _add_laser(p, default=None,
               help_suffix="; defaults to the checkpoint's")
    p.add_argument("--report", default="report.csv",
                   help="per-class metrics CSV (default: report.csv)")
    p.add_argument("--confusion", default="confusion.csv",
                   help="confusion matrix CSV (default: confusion.csv)")
    p.add_argument("--force", action="store_true",
                   help="proceed despite a laser-color mismatch")
    p.add_argument("--remap", default=None,
                   help="CSV mapping variant folders to material classes")
    p.add_argument("--crop-center", action="store_true",
                   help="center-crop instead of bilinear resize")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify a single image")
    p.add_argument("model", help="checkpoint path")
    p.add_argument("image", help="image path (.ppm or .png)")
    _add_laser(p, default=None,
               help_suffix="; defaults to the checkpoint's")
    p.add_argument("--crop-center", action="store_true",
                   help="center-crop instead of bilinear resize")
    p.set_defaults(func=cmd_predict)

    return parser


def cmd_synth(args):
    if args.classes < 2:
        print("specklecnn synth: --classes must be at least 2",
              file=sys.stderr)
        return 2
    if args.per_class < 1:
        print("specklecnn synth: --per-class must be at least 1",
              file=sys.stderr)
        return 2
    names = synth_dataset(args.classes, args.per_class, args.side,
                          args.out, args.laser, args.seed)
    print(f"wrote {args.classes * args.per_class} images in "
          f"{len(names)} classes to {args.out}")
    return 0


def cmd_train(args):
    config = TrainConfig(data_dir=args.data, out_path=args.out,
                         history_path=args.history, laser=args.laser,
                         input_side=PROFILES[args.profile],
                         epochs=args.epochs, lr=args.lr, beta1=args.beta1,
                         beta2=args.beta2, batch_size=args.batch_size,
                         val_fraction=args.val_fraction, seed=args.seed,
                         remap_path=args.remap, crop=args.crop_center)
    try:
        config.validate()
    except ValueError as exc:
        print(f"specklecnn train: {exc}", file=sys.stderr)
        return 2
    run_training(config, log=print)
    return 0


def _resolve_laser(args, metadata):
    stored = LaserColor.from_name(metadata["laser"])
    if args.laser is None:
        return stored
    if args.laser is not stored and not getattr(args, "force", True):
        raise LaserMismatchError(
            f"checkpoint was trained with laser "
            f"{stored.name.lower()} but --laser "
            f"{args.laser.name.lower()} was given (use --force to "
            f"override)")
    return args.laser


def cmd_eval(args):
    params, metadata = load_checkpoint(args.model)
    laser = _resolve_laser(args, metadata)
    remap = load_remap(args.remap) if args.remap else None
    ds = scan_dataset(args.data, laser, params.input_side,
                      crop=args.crop_center, remap=remap)
    try:
        rep, cm = evaluate(params, ds)
    except ValueError as exc:
        raise DatasetError(str(exc)) from None
    write_report_csv(rep, args.report)
    write_confusion_csv(cm, args.confusion)
    print(format_report(rep))
    print(f"accuracy {rep.accuracy:.4f}")
    print(f"macro_f1 {rep.macro_f1:.4f}")
    return 0


def cmd_predict(args):
    params, metadata = load_checkpoint(args.model)
    laser = _resolve_laser(args, metadata)
    try:
        img = load_image(args.image)
    except OSError as exc:
        raise DatasetError(f"cannot read {args.image}: {exc}") from None
    tensor = preprocess(img, laser, params.input_side,
                        crop=args.crop_center)
    idx, prob = predict(params, tensor)
    print(f"{metadata['class_names'][idx]} {prob:.4f}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LaserMismatchError as exc:
        print(f"specklecnn: {exc}", file=sys.stderr)
        return 5
    except DatasetError as exc:
        print(f"specklecnn: {exc}", file=sys.stderr)
        return 3
    except (CheckpointError, OSError) as exc:
        print(f"specklecnn: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"specklecnn: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
