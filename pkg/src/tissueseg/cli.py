"""Command-line front end.

Commands: ``otsu``, ``bayes``, ``bayes-smooth``, ``phantom`` and ``eval``.
Exit status is 0 on success, 1 on a processing error and 2 on bad
arguments.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bayes import EM_MAX_ITERS, PRIOR_MODES, classify_bayes
from .evaluation import DEFAULT_MEANS, DEFAULT_NOISE, DEFAULT_SIZE, make_phantom, metrics_csv
from .otsu import apply_thresholds, multi_otsu
from .raster import LabelMap, compute_histogram, load_label_pgm, load_pgm, save_label_pgm, save_pgm
from .smoothing import DEFAULT_ITERATIONS, DEFAULT_SIGMA, classify_bayes_smoothed

DEFAULT_CLASSES = 4


def apply_merge_map(labels: LabelMap, merge) -> LabelMap:
    """Relabel ``labels`` through ``merge`` (``merge[src] = dst``).

    The map must cover every source class and its targets must form the
    range ``0..max``.
    """
    merge = [int(m) for m in merge]
    if len(merge) != labels.num_classes:
        raise ValueError(
            f"merge map has {len(merge)} entries for {labels.num_classes} classes"
        )
    if min(merge) < 0 or set(merge) != set(range(max(merge) + 1)):
        raise ValueError(f"merge targets must cover 0..{max(merge)} without gaps")
    table = np.asarray(merge, dtype=np.int64)
    return LabelMap(table[labels.labels], max(merge) + 1)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _class_count(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 classes, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="tissueseg",
        description="Unsupervised tissue classification of grayscale PGM images.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    labels_out = argparse.ArgumentParser(add_help=False)
    labels_out.add_argument("--input", required=True, help="input image (PGM)")
    labels_out.add_argument("--output", required=True, help="output label map (PGM)")
    labels_out.add_argument("--classes", type=_class_count, default=DEFAULT_CLASSES,
                            help="number of classes C")
    labels_out.add_argument("--merge", type=_int_list, default=None,
                            help="comma-separated label->label remap applied to the output, "
                                 "e.g. 0,1,2,3,3")
    labels_out.add_argument("--raw-labels", action="store_true",
                            help="write raw label indices instead of spreading them over 0..255")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--priors", choices=PRIOR_MODES, default="uniform",
                       help="class priors: uniform or mixture proportions")
    model.add_argument("--em-iters", type=_non_negative, default=EM_MAX_ITERS,
                       help="maximum EM iterations (0 skips refinement)")

    p = sub.add_parser("otsu", parents=[labels_out], formatter_class=fmt,
                       help="multi-level Otsu thresholding")
    p.add_argument("--thresholds", type=int, default=None,
                   help="number of thresholds n (default: classes - 1)")
    p.add_argument("--report", default=None,
                   help="text report path (default: output with .txt suffix)")

    p = sub.add_parser("bayes", parents=[labels_out, model], formatter_class=fmt,
                       help="Gaussian-mixture Bayesian MAP classification")
    p.add_argument("--report", default=None,
                   help="model report path (default: output with .txt suffix)")

    p = sub.add_parser("bayes-smooth", parents=[labels_out, model], formatter_class=fmt,
                       help="Bayesian classification with Gaussian-smoothed posteriors")
    p.add_argument("--sigma", type=_positive_float, default=DEFAULT_SIGMA,
                   help="smoothing kernel standard deviation (pixels)")
    p.add_argument("--iterations", type=_non_negative, default=DEFAULT_ITERATIONS,
                   help="number of smoothing passes")

    p = sub.add_parser("phantom", formatter_class=fmt, help="generate a synthetic phantom")
    p.add_argument("--output", required=True, help="phantom image path (PGM)")
    p.add_argument("--truth", default=None,
                   help="ground-truth label map path (default: <output stem>_truth.pgm)")
    p.add_argument("--width", type=int, default=DEFAULT_SIZE, help="image width")
    p.add_argument("--height", type=int, default=DEFAULT_SIZE, help="image height")
    p.add_argument("--means", type=_float_list, default=list(DEFAULT_MEANS),
                   help="comma-separated ascending class means")
    p.add_argument("--noise", type=float, default=DEFAULT_NOISE, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0, help="noise generator seed")
    p.add_argument("--raw-labels", action="store_true",
                   help="write raw truth labels instead of spreading them over 0..255")

    p = sub.add_parser("eval", formatter_class=fmt, help="Dice metrics against ground truth")
    p.add_argument("--truth", required=True, help="ground-truth label map (PGM)")
    p.add_argument("--input", required=True, help="predicted label map (PGM)")
    p.add_argument("--output", required=True, help="metrics CSV path")
    p.add_argument("--classes", type=_class_count, default=DEFAULT_CLASSES,
                   help="number of classes C in both maps")
    return parser


def _sidecar(output: str, suffix: str) -> Path:
    return Path(output).with_suffix(suffix)


def _write_labels(args, labels: LabelMap):
    if args.merge is not None:
        labels = apply_merge_map(labels, args.merge)
    Path(args.output).write_bytes(save_label_pgm(labels, scale=not args.raw_labels))


def _check_merge(parser, args, num_classes: int):
    merge = args.merge
    if merge is None:
        return
    if len(merge) != num_classes:
        parser.error(f"--merge needs {num_classes} entries, got {len(merge)}")
    if min(merge) < 0 or set(merge) != set(range(max(merge) + 1)):
        parser.error("--merge targets must form a contiguous range starting at 0")


def _run_otsu(args):
    image = load_pgm(Path(args.input).read_bytes())
    result = multi_otsu(compute_histogram(image), args.thresholds)
    _write_labels(args, apply_thresholds(image, result.thresholds))
    report = (
        f"thresholds: {' '.join(str(t) for t in result.thresholds)}\n"
        f"sigma_b: {result.sigma_b:.10g}\n"
        f"eta: {result.eta:.10g}\n"
    )
    Path(args.report or _sidecar(args.output, ".txt")).write_text(report)


def _run_bayes(args):
    image = load_pgm(Path(args.input).read_bytes())
    labels, model = classify_bayes(image, args.classes, args.priors, args.em_iters)
    _write_labels(args, labels)
    lines = ["class weight mean variance"]
    for c in range(model.num_classes):
        lines.append(
            f"{c} {model.weights[c]:.10g} {model.means[c]:.10g} {model.variances[c]:.10g}"
        )
    Path(args.report or _sidecar(args.output, ".txt")).write_text("\n".join(lines) + "\n")


def _run_bayes_smooth(args):
    image = load_pgm(Path(args.input).read_bytes())
    labels = classify_bayes_smoothed(
        image, args.classes, args.sigma, args.iterations, args.priors, args.em_iters
    )
    _write_labels(args, labels)


def _run_phantom(args):
    phantom = make_phantom(args.width, args.height, args.means, args.noise, args.seed)
    out = Path(args.output)
    truth = Path(args.truth) if args.truth else out.with_name(out.stem + "_truth.pgm")
    out.write_bytes(save_pgm(phantom.image))
    truth.write_bytes(save_label_pgm(phantom.truth, scale=not args.raw_labels))


def _run_eval(args):
    truth = load_label_pgm(Path(args.truth).read_bytes(), args.classes)
    predicted = load_label_pgm(Path(args.input).read_bytes(), args.classes)
    Path(args.output).write_text(metrics_csv(truth, predicted))


_COMMANDS = {
    "otsu": _run_otsu,
    "bayes": _run_bayes,
    "bayes-smooth": _run_bayes_smooth,
    "phantom": _run_phantom,
    "eval": _run_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "otsu":
        if args.thresholds is None:
            args.thresholds = args.classes - 1
        _check_merge(parser, args, args.thresholds + 1)
    elif args.command in ("bayes", "bayes-smooth"):
        _check_merge(parser, args, args.classes)
    try:
        _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"tissueseg: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
