"""Batch command line: segment, phantom, eval, calibrate, histogram.

Exit codes: 0 success, 1 usage or I/O error, 2 liver not found.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import EmptyCorpus, LiverNotFound, LiverSegError
from .evaluation import evaluate_corpus
from .histogram import DEFAULT_THRESHOLDS, ThresholdPair, calibrate_thresholds, compute_histogram
from .imgio import load_mask, load_pgm, save_pgm, to_8bit, mask_to_image
from .phantom import make_phantom
from .pipeline import PipelineConfig, dump_stages, run_pipeline, write_stage_images

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_FOUND = 2

# config-file key -> PipelineConfig field (thresholds handled separately)
_CONFIG_KEYS = {
    "median": ("median_window", int),
    "se_radius": ("se_radius", int),
    "se_shape": ("se_shape", str),
    "min_area": ("min_area_fraction", float),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def read_config_file(path) -> dict:
    """Parse key=value lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def resolve_config(args) -> PipelineConfig:
    """Flags override the config file, which overrides built-in defaults."""
    file_values = read_config_file(args.config) if args.config else {}
    s1 = args.s1 if args.s1 is not None else int(file_values.get("s1", DEFAULT_THRESHOLDS.s1))
    s2 = args.s2 if args.s2 is not None else int(file_values.get("s2", DEFAULT_THRESHOLDS.s2))
    kwargs = {}
    for key, (field, cast) in _CONFIG_KEYS.items():
        flag = getattr(args, key)
        if flag is not None:
            kwargs[field] = flag
        elif key in file_values:
            kwargs[field] = cast(file_values[key])
    return PipelineConfig(thresholds=ThresholdPair(s1, s2), **kwargs)


def find_corpus(directory) -> list[tuple[str, Path, Path]]:
    """(name, image path, truth path) for every NAME.pgm with a NAME_truth.pgm."""
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"corpus directory not found: {directory}")
    pairs = []
    for image in sorted(directory.glob("*.pgm")):
        if image.stem.endswith("_truth"):
            continue
        truth = image.with_name(f"{image.stem}_truth.pgm")
        if truth.exists():
            pairs.append((image.stem, image, truth))
    if not pairs:
        raise EmptyCorpus(f"no NAME.pgm / NAME_truth.pgm pairs in {directory}")
    return pairs


def load_corpus(directory):
    entries = find_corpus(directory)
    ids = [name for name, _, _ in entries]
    pairs = [(to_8bit(load_pgm(img)), load_mask(truth)) for _, img, truth in entries]
    return ids, pairs


# -- commands ---------------------------------------------------------------


def cmd_segment(args, manifest):
    cfg = resolve_config(args)
    manifest["inputs"] = [str(args.input)]
    manifest["config"] = cfg.as_dict()
    img = to_8bit(load_pgm(args.input))
    try:
        result = run_pipeline(img, cfg)
    except LiverNotFound as exc:
        write_stage_images(exc.stages, args.out)
        print(f"liver not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    dump_stages(result, args.out)
    return EXIT_OK


def cmd_phantom(args, manifest):
    band = ThresholdPair(args.s1, args.s2)
    manifest["config"] = {
        "width": args.width, "height": args.height, "seed": args.seed,
        "sigma": args.sigma, "s1": band.s1, "s2": band.s2,
    }
    phantom = make_phantom(args.width, args.height, args.seed, args.sigma, band)
    prefix = Path(args.out)
    if prefix.parent != Path(""):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    save_pgm(phantom.image, f"{prefix}.pgm")
    save_pgm(mask_to_image(phantom.truth), f"{prefix}_truth.pgm")
    return EXIT_OK


def cmd_eval(args, manifest):
    cfg = resolve_config(args)
    manifest["inputs"] = [str(args.corpus)]
    manifest["config"] = cfg.as_dict() | {"jobs": args.jobs}
    ids, pairs = load_corpus(args.corpus)
    out = Path(args.out or args.corpus)
    stage_dir = out / "stages" if args.stages else None
    report = evaluate_corpus(pairs, cfg, ids=ids, jobs=args.jobs, stage_dir=stage_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    print(report.summary())
    return EXIT_OK


def cmd_calibrate(args, manifest):
    if not 1 <= args.step <= 64:
        raise UsageError(f"--step must be in [1, 64], got {args.step}")
    cfg = resolve_config(args)
    manifest["inputs"] = [str(args.corpus)]
    manifest["config"] = cfg.as_dict() | {"step": args.step, "jobs": args.jobs}
    _, pairs = load_corpus(args.corpus)
    best, mean_dice = calibrate_thresholds(pairs, args.step, cfg, jobs=args.jobs)
    text = f"s1={best.s1}\ns2={best.s2}\nmean_dice={mean_dice:.6f}\n"
    Path(args.out).write_text(text)
    print(f"s1={best.s1} s2={best.s2} mean_dice={mean_dice:.3f}")
    return EXIT_OK


def cmd_histogram(args, manifest):
    manifest["inputs"] = [str(args.input)]
    hist = compute_histogram(to_8bit(load_pgm(args.input)))
    if args.out:
        Path(args.out).write_text(hist.to_csv())
    else:
        sys.stdout.write(hist.to_csv())
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def _add_config_flags(p):
    p.add_argument("--config", help="key=value config file (flags take precedence)")
    p.add_argument("--s1", type=int, help="lower intensity threshold (inclusive)")
    p.add_argument("--s2", type=int, help="upper intensity threshold (inclusive)")
    p.add_argument("--median", type=int, help="median window side: 3, 5, 7 or 9")
    p.add_argument("--se-radius", dest="se_radius", type=int, help="closing element radius")
    p.add_argument("--se-shape", dest="se_shape", choices=("square", "cross"))
    p.add_argument("--min-area", dest="min_area", type=float,
                   help="reject components smaller than this fraction of the slice")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="liverseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--manifest", help="append the run manifest to this JSON-lines file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="segment one slice and dump every stage")
    p.add_argument("input")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_segment, out_dir=lambda a: Path(a.out))

    p = sub.add_parser("phantom", help="write a synthetic slice and its truth mask")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--s1", type=int, default=DEFAULT_THRESHOLDS.s1)
    p.add_argument("--s2", type=int, default=DEFAULT_THRESHOLDS.s2)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_phantom, out_dir=lambda a: Path(a.out).parent)

    p = sub.add_parser("eval", help="score a corpus of NAME.pgm / NAME_truth.pgm pairs")
    p.add_argument("--corpus", required=True)
    _add_config_flags(p)
    p.add_argument("--out", help="report directory (default: the corpus directory)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--stages", action="store_true", help="also dump every image's stages")
    p.set_defaults(func=cmd_eval, out_dir=lambda a: Path(a.out or a.corpus))

    p = sub.add_parser("calibrate", help="grid-search s1/s2 on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--step", type=int, default=5)
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="config file to write")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_calibrate, out_dir=lambda a: Path(a.out).parent)

    p = sub.add_parser("histogram", help="export the 256-bin histogram as CSV")
    p.add_argument("input")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_histogram, out_dir=lambda a: Path(a.out).parent if a.out else None)
    return parser


def _append_manifest(args, manifest):
    if args.manifest:
        path = Path(args.manifest)
    else:
        out_dir = args.out_dir(args)
        if out_dir is None or not out_dir.is_dir():
            return
        path = out_dir / "runs.jsonl"
    try:
        with open(path, "a") as fh:
            fh.write(json.dumps(manifest, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"warning: cannot append manifest to {path}: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "inputs": [],
        "config": {},
        "version": __version__,
    }
    start = time.perf_counter()
    try:
        code = args.func(args, manifest)
    except (LiverSegError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    manifest["exit_code"] = code
    manifest["duration_s"] = round(time.perf_counter() - start, 6)
    _append_manifest(args, manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
