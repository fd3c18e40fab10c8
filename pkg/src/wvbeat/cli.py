"""Command-line pipeline: ingest-check, segment, transform, augment, train,
eval, classify, bench, reproduce, export-images.

Every subcommand is deterministic given --seed; the root seed is recorded
in every manifest and report. Exit codes: 0 success, 2 validation error,
3 I/O error, 4 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import augment as aug
from . import ingest, metrics, segmentation, tensorio, tfr
from .errors import DivergenceError, FileFormatError, ValidationError
from .labels import CLASS_ORDER, ClassLabel
from .model import CnnModel, fit, load_model, load_schedule, save_model

#: Published per-class counts of the standard split, used by ingest-check.
REFERENCE_COUNTS = {
    "train": {"F": 641, "N": 72471, "Q": 6431, "S": 2223, "V": 5788},
    "test": {"F": 162, "N": 18118, "Q": 1608, "S": 556, "V": 1448},
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    try:
        args.func(args)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wvbeat", description=__doc__)
    parser.set_defaults(command=None)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest-check", help="validate a beat CSV and report class counts")
    p.add_argument("csv", type=Path)
    p.add_argument("--split", choices=("train", "test"), default=None,
                   help="compare counts against the published split distribution")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("segment", help="raw strip CSV -> beat CSV")
    p.add_argument("strip_csv", type=Path)
    p.add_argument("out_csv", type=Path)
    p.add_argument("--fs", type=float, required=True, help="strip sampling rate in Hz")
    p.add_argument("--window-s", type=float, default=10.0)
    p.add_argument("--beat-s", type=float, default=1.2,
                   help="beat duration; 1.496 matches the public per-beat files")
    p.add_argument("--threshold", type=float, default=segmentation.DEFAULT_THRESHOLD)
    p.add_argument("--resample-fs", type=float, default=125.0,
                   help="per-window resampling rate before beat extraction")
    p.add_argument("--label", default="Q",
                   help="class code written to every beat row (segmentation does not label)")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("transform", help="beat CSV -> WVD image tensor")
    p.add_argument("csv", type=Path)
    p.add_argument("tensor", type=Path)
    p.add_argument("--ramp", type=float, default=tfr.DEFAULT_RAMP_STRENGTH)
    p.add_argument("--no-ramp", action="store_true")
    p.add_argument("--no-analytic", action="store_true",
                   help="use the raw real-signal WVD instead of the analytic signal")
    p.add_argument("--size", type=int, default=tfr.IMAGE_SIZE)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("augment", help="balance classes in a beat CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("out_csv", type=Path)
    p.add_argument("--target", type=int, required=True, help="records per class")
    p.add_argument("--mode", choices=("noise", "repeat"), default="noise")
    p.add_argument("--noise-fraction", type=float, default=aug.DEFAULT_NOISE_FRACTION)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train a model on an image tensor")
    p.add_argument("tensor", type=Path)
    p.add_argument("model_out", type=Path)
    p.add_argument("--schedule", default="10", help="preset number 1-10 or JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--history", type=Path, default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on an image tensor")
    p.add_argument("model", type=Path)
    p.add_argument("tensor", type=Path)
    p.add_argument("--drop-q", action="store_true")
    p.add_argument("--out-prefix", type=Path, default=None,
                   help="write <prefix>.json, <prefix>.txt and <prefix>.confusion.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("classify", help="classify beats from a beat CSV")
    p.add_argument("model", type=Path)
    p.add_argument("csv", type=Path)
    p.add_argument("--ramp", type=float, default=tfr.DEFAULT_RAMP_STRENGTH)
    p.add_argument("--no-ramp", action="store_true")
    p.add_argument("--no-analytic", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="single-core per-beat latency")
    p.add_argument("model", type=Path)
    p.add_argument("csv", type=Path)
    p.add_argument("-n", "--num-beats", type=int, default=100)
    p.add_argument("--ramp", type=float, default=tfr.DEFAULT_RAMP_STRENGTH)
    p.add_argument("--no-analytic", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reproduce", help="transform + train + evaluate for one preset")
    p.add_argument("--train-csv", type=Path, required=True)
    p.add_argument("--test-csv", type=Path, required=True)
    p.add_argument("--preset", default="10", help="schedule preset number or JSON file")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--cap-per-class", type=int, default=None,
                   help="stratified per-class cap applied to the training set")
    p.add_argument("--augment-target", type=int, default=None,
                   help="balance classes to this count before transforming")
    p.add_argument("--no-ramp", action="store_true")
    p.add_argument("--drop-q", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("export-images", help="tensor -> 8-bit grayscale PNGs")
    p.add_argument("tensor", type=Path)
    p.add_argument("out_dir", type=Path)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_export_images)
    return parser


def _counts_by_code(ds: ingest.Dataset) -> dict[str, int]:
    return {c.code: n for c, n in ingest.class_distribution(ds).items()}


def _single_thread_blas():
    """Pin BLAS pools to one thread for latency measurement, when possible."""
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:
        import contextlib

        return contextlib.nullcontext()


def cmd_ingest_check(args) -> None:
    ds = ingest.load_beat_csv(args.csv, split_tag=args.split or "train")
    counts = _counts_by_code(ds)
    result = {
        "file": str(args.csv),
        "n_records": len(ds),
        "beat_length": ds.beat_length,
        "counts": counts,
    }
    if args.split:
        expected = REFERENCE_COUNTS[args.split]
        result["matches_reference"] = counts == expected
        if counts != expected:
            result["expected"] = expected
            print(f"warning: class counts do not match the published {args.split} split",
                  file=sys.stderr)
    print(json.dumps(result, indent=2))


def cmd_segment(args) -> None:
    label = ClassLabel.from_code(args.label)
    raw = np.loadtxt(args.strip_csv, dtype=np.float64, ndmin=1)
    if raw.ndim != 1:
        raise ValidationError("strip CSV must hold a single column of floats")
    strip = segmentation.EcgStrip(raw, args.fs)
    beats: list[np.ndarray] = []
    for window in segmentation.window_strip(strip, args.window_s):
        normalized, constant = segmentation.normalize_window(window)
        if constant:
            continue
        if args.resample_fs and args.resample_fs != normalized.fs:
            normalized = segmentation.resample_strip(normalized, args.resample_fs)
        peaks = segmentation.detect_r_peaks(normalized, args.threshold)
        if len(peaks) == 0:
            continue
        beats.extend(segmentation.extract_beats(normalized, peaks, args.beat_s))
    if not beats:
        raise ValidationError("no beats could be extracted from the strip")
    samples = np.clip(np.stack(beats), 0.0, 1.0).astype(np.float32)
    ds = ingest.Dataset(
        samples=samples,
        labels=np.full(len(beats), int(label), dtype=np.int64),
        split_tag="train",
    )
    manifest = ingest.write_beat_csv(ds, args.out_csv)
    print(json.dumps({"beats": len(beats), "beat_length": ds.beat_length,
                      "manifest": str(manifest)}, indent=2))


def _transform_dataset(ds: ingest.Dataset, *, size, ramp, analytic, workers) -> np.ndarray:
    return tfr.transform_beats(
        ds.samples, size=size, ramp_strength=ramp, analytic=analytic, workers=workers
    )


def cmd_transform(args) -> None:
    ds = ingest.load_beat_csv(args.csv)
    ramp = 0.0 if args.no_ramp else args.ramp
    images = _transform_dataset(
        ds, size=args.size, ramp=ramp, analytic=not args.no_analytic, workers=args.workers
    )
    side = tensorio.save_tensor(
        args.tensor, images, ds.labels, ramp_strength=ramp,
        extra_meta={"seed": args.seed, "analytic": not args.no_analytic,
                    "source": str(args.csv)},
    )
    print(json.dumps({"tensor": str(args.tensor), "sidecar": str(side),
                      "count": int(images.shape[0])}, indent=2))


def cmd_augment(args) -> None:
    ds = ingest.load_beat_csv(args.csv)
    plan = aug.AugmentPlan(target_count=args.target, mode=args.mode,
                           noise_fraction=args.noise_fraction, seed=args.seed)
    balanced = aug.balance_classes(ds, plan)
    manifest_path = ingest.write_beat_csv(balanced, args.out_csv)
    manifest = json.loads(manifest_path.read_text())
    manifest["augment_plan"] = {"target_count": plan.target_count, "mode": plan.mode,
                                "noise_fraction": plan.noise_fraction, "seed": plan.seed}
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(json.dumps(manifest, indent=2))


def cmd_train(args) -> None:
    images, labels, _meta = tensorio.load_tensor(args.tensor)
    schedule = load_schedule(args.schedule)
    model = schedule.build_model(seed=args.seed)
    model, history = fit(model, images, labels, schedule, seed=args.seed,
                         verbose=not args.quiet)
    save_model(model, args.model_out)
    if args.history:
        args.history.write_text(json.dumps(history.to_dict(), indent=2) + "\n")
    print(json.dumps({"model": str(args.model_out), "epochs_run": len(history),
                      "stopped_early": history.stopped_early}, indent=2))


def _write_report(report: metrics.MetricsReport, cm_csv: str | None,
                  out_prefix: Path | None, extra: dict) -> None:
    payload = {**extra, "report": report.to_dict()}
    if out_prefix is None:
        print(report.format_table())
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(str(out_prefix) + ".json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    Path(str(out_prefix) + ".txt").write_text(report.format_table())
    if cm_csv is not None:
        Path(str(out_prefix) + ".confusion.csv").write_text(cm_csv)


def cmd_eval(args) -> None:
    model = load_model(args.model)
    images, labels, meta = tensorio.load_tensor(args.tensor)
    preds = metrics.predict_batches(model, images)
    report = metrics.evaluate_predictions(labels, preds, drop_q=args.drop_q)
    if args.drop_q:
        keep = labels != int(ClassLabel.Q)
        cm_csv = None
        if not (preds[keep] == int(ClassLabel.Q)).any():
            codes = tuple(c for c in metrics.CLASS_CODES if c != "Q")
            cm_csv = metrics.confusion_matrix(labels[keep], preds[keep], codes).to_csv()
    else:
        cm_csv = metrics.confusion_matrix(labels, preds).to_csv()
    _write_report(report, cm_csv, args.out_prefix,
                  {"tensor": str(args.tensor), "drop_q": args.drop_q})


def cmd_classify(args) -> None:
    model = load_model(args.model)
    ds = ingest.load_beat_csv(args.csv)
    ramp = 0.0 if args.no_ramp else args.ramp
    images = _transform_dataset(ds, size=model.arch.input_hw[0], ramp=ramp,
                                analytic=not args.no_analytic, workers=1)
    probs = model.forward(images, training=False)
    out = [
        {"index": i,
         "label": CLASS_ORDER[int(np.argmax(p))].code,
         "probabilities": {c.code: float(p[int(c)]) for c in CLASS_ORDER}}
        for i, p in enumerate(probs)
    ]
    print(json.dumps(out, indent=2))


def cmd_bench(args) -> None:
    model = load_model(args.model)
    ds = ingest.load_beat_csv(args.csv)
    n = min(args.num_beats, len(ds))
    report: dict = {"n_beats": n, "single_threaded": True}
    if n == 0:
        print(json.dumps(report, indent=2))
        return
    size = model.arch.input_hw[0]
    transform_times = []
    infer_times = []
    totals = []
    with _single_thread_blas():
        for i in range(n):
            beat = ds.samples[i].astype(np.float64)
            t0 = time.perf_counter()
            image = tfr.beat_to_image(beat, size=size, ramp_strength=args.ramp,
                                      analytic=not args.no_analytic)
            t1 = time.perf_counter()
            model.forward(image[None, :, :], training=False)
            t2 = time.perf_counter()
            transform_times.append(t1 - t0)
            infer_times.append(t2 - t1)
            totals.append(t2 - t0)
    for key, values in (("transform", transform_times), ("inference", infer_times),
                        ("total", totals)):
        arr = np.array(values)
        report[key] = {
            "mean_ms": float(arr.mean() * 1e3),
            "p95_ms": float(np.percentile(arr, 95) * 1e3),
        }
    print(json.dumps(report, indent=2))


def cmd_reproduce(args) -> None:
    schedule = load_schedule(args.preset)
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    ramp = 0.0 if args.no_ramp else tfr.DEFAULT_RAMP_STRENGTH

    train_ds = ingest.load_beat_csv(args.train_csv, split_tag="train")
    test_ds = ingest.load_beat_csv(args.test_csv, split_tag="test")
    if args.cap_per_class:
        train_ds = ingest.stratified_subset(train_ds, args.cap_per_class, seed=args.seed)
    if args.augment_target or schedule.use_augmented:
        target = args.augment_target or max(ingest.class_distribution(train_ds).values())
        plan = aug.AugmentPlan(target_count=target, seed=args.seed)
        train_ds = aug.balance_classes(train_ds, plan)

    x_train = _transform_dataset(train_ds, size=tfr.IMAGE_SIZE, ramp=ramp,
                                 analytic=True, workers=args.workers)
    x_test = _transform_dataset(test_ds, size=tfr.IMAGE_SIZE, ramp=ramp,
                                analytic=True, workers=args.workers)

    model = schedule.build_model(seed=args.seed)
    model, history = fit(model, x_train, train_ds.labels, schedule, seed=args.seed,
                         verbose=not args.quiet)
    save_model(model, out_dir / "model.wvcn")
    (out_dir / "history.json").write_text(json.dumps(history.to_dict(), indent=2) + "\n")

    preds = metrics.predict_batches(model, x_test)
    report = metrics.evaluate_predictions(test_ds.labels, preds, drop_q=args.drop_q)
    if args.drop_q:
        cm_csv = None
    else:
        cm_csv = metrics.confusion_matrix(test_ds.labels, preds).to_csv()
    extra = {
        "schedule": schedule.name,
        "seed": args.seed,
        "ramp_strength": ramp,
        "drop_q": args.drop_q,
        "train_records": len(train_ds),
        "test_records": len(test_ds),
    }
    _write_report(report, cm_csv, out_dir / "report", extra)
    if not args.quiet:
        print(report.format_table())


def cmd_export_images(args) -> None:
    images, labels, _meta = tensorio.load_tensor(args.tensor)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    n = len(images) if args.limit is None else min(args.limit, len(images))
    for i in range(n):
        code = ClassLabel(int(labels[i])).code
        tensorio.write_png_gray(args.out_dir / f"{i:05d}_{code}.png", images[i])
    print(json.dumps({"exported": n, "out_dir": str(args.out_dir)}, indent=2))


if __name__ == "__main__":
    sys.exit(main())
