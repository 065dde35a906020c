"""
Command-line interface.

    mmgesture synth --kinds PH,PL --per-class 5 --out out/
    mmgesture process --input out/PH_000.mmwc --label PH
    mmgesture augment --manifest out/manifest.json --factor 4
    mmgesture segment --input stream.mmwc --plot
    mmgesture train --manifest out/manifest.json --augment
    mmgesture eval --manifest test/manifest.json --model out/model.digm
    mmgesture stream --synthetic 20 --oracle-dtw --no-pace
    mmgesture bench --trials 1000
    mmgesture monitor --synthetic 20 --oracle-dtw
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from . import __version__
from .exceptions import MmGestureError
from .models.config import ModelConfig, Settings
from .models.evaluation import DatasetEntry, DatasetManifest
from .models.gesture import GestureKind
from .services import augmentation, classifier, storage
from .services.corpus import random_script
from .services.drai_pipeline import archive_to_rdis, process_sequence, static_rai
from .services.radar_front import synthesize_script
from .services.segmentation import DynamicWindowSegmenter, locate_user, mask_to_roi
from .services.stream_runner import (
    StreamRunner, bench_pipeline, build_stream_script, model_classifier, run_stream,
)
from .services.trajectory_matcher import synthetic_templates
from .utils.calculations import format_ms, format_percentage, stage_stats
from .utils.labels import label_parser
from .utils.plotting import render_motion_trace

logger = logging.getLogger("mmgesture")


def _out_dir(args, settings: Settings) -> Path:
    out = Path(args.out or settings.storage.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args, settings: Settings) -> int:
    """Render labeled gesture samples: raw cubes, DRAI sequences, archives and a manifest."""
    out = _out_dir(args, settings)
    kinds = label_parser.parse_list(args.kinds)
    entries = []
    for kind in kinds:
        for i in range(args.per_class):
            rng = np.random.default_rng([args.seed, kind.value, i])
            script = random_script(
                kind, rng, distance=(args.min_distance, args.max_distance),
                angle_deg=(-args.max_angle, args.max_angle), snr_db=args.snr,
            )
            cubes = synthesize_script(script, settings.radar)
            seq, archive = process_sequence(cubes, settings.radar, settings.pipeline, kind, script.anchor_angle)
            stem = f"{kind.name}_{i:03d}"
            storage.write_adc_cubes(out / f"{stem}.mmwc", cubes)
            storage.write_drai_sequence(out / f"{stem}.drai", seq)
            storage.save_rdi_archive(out / f"{stem}.rdi.npz", archive)
            entries.append(
                DatasetEntry(
                    path=f"{stem}.drai", label=kind, user="synthetic", room="synthetic",
                    location=f"{script.anchor_distance:.1f}m", angle_deg=math.degrees(script.anchor_angle),
                )
            )
    storage.save_manifest(DatasetManifest(entries=entries), out / "manifest.json")
    print(f"Wrote {len(entries)} samples to {out}")
    return 0


def cmd_process(args, settings: Settings) -> int:
    """Turn a raw cube file into a DRAI sequence file and its channel archive."""
    out = _out_dir(args, settings)
    cubes = storage.read_adc_cubes(args.input)
    label = label_parser.parse(args.label) if args.label else None
    seq, archive = process_sequence(cubes, settings.radar, settings.pipeline, label)
    stem = Path(args.input).stem
    storage.write_drai_sequence(out / f"{stem}.drai", seq)
    storage.save_rdi_archive(out / f"{stem}.rdi.npz", archive)
    print(f"Processed {len(cubes)} frames into {out / (stem + '.drai')}")
    return 0


def cmd_augment(args, settings: Settings) -> int:
    out = _out_dir(args, settings)
    policy = augmentation.load_policy(args.policy) if args.policy else settings.augment
    if args.factor:
        policy = policy.model_copy(update={"variants_per_input": args.factor})
    dataset = storage.load_dataset(args.manifest, tuple(settings.model.frame_shape), settings.radar.frame_period)
    variants = augmentation.augment_batch(dataset, policy, args.seed)
    entries = []
    for i, seq in enumerate(variants):
        name = f"aug_{i:05d}.drai"
        storage.write_drai_sequence(out / name, seq)
        entries.append(DatasetEntry(path=name, label=seq.label, angle_deg=math.degrees(seq.angle_tag)))
    storage.save_manifest(DatasetManifest(entries=entries), out / "manifest.json")
    print(f"Wrote {len(variants)} augmented sequences to {out}")
    return 0


def cmd_segment(args, settings: Settings) -> int:
    """Print the gesture windows found in a raw cube stream."""
    segmenter = DynamicWindowSegmenter(settings.segmenter)
    cubes = storage.read_adc_cubes(args.input)
    seq, archive = process_sequence(cubes, settings.radar, settings.pipeline)
    # User position from the first frame's static image.
    roi = locate_user(static_rai(archive_to_rdis(archive[0]), settings.radar, 0, 0.0), settings.clean, settings.roi)
    windows = []
    for frame in seq.frames:
        window = segmenter.push(mask_to_roi(frame, roi) if roi is not None else frame)
        if window is not None:
            windows.append(window)
    tail = segmenter.flush()
    if tail is not None:
        windows.append(tail)
    period = settings.radar.frame_period
    for window in windows:
        print(json.dumps({
            "stream_id": Path(args.input).stem,
            "start_frame": window.start_frame,
            "end_frame": window.end_frame,
            "t_start_s": round(window.start_frame * period, 4),
            "t_end_s": round((window.end_frame + 1) * period, 4),
        }))
    if args.plot:
        print(render_motion_trace(segmenter.trace.eta, settings.segmenter.motion_threshold))
    return 0


def cmd_train(args, settings: Settings) -> int:
    out = _out_dir(args, settings)
    manifest = storage.load_manifest(args.manifest)
    print(storage.summarize_manifest(manifest))
    dataset = storage.load_dataset(args.manifest, tuple(settings.model.frame_shape), settings.radar.frame_period)
    train_cfg = settings.train.model_copy(update={
        "augmented": args.augment or settings.train.augmented,
        "epochs": args.epochs or settings.train.epochs,
        "steps": args.steps or settings.train.steps,
        "seed": args.seed,
    })
    if train_cfg.augmented:
        dataset = list(dataset) + augmentation.augment_batch(dataset, settings.augment, args.seed)
    model_cfg = settings.model
    if args.preset == "full":
        model_cfg = ModelConfig.full(**model_cfg.model_dump(exclude={"embedding_size", "recurrent_hidden"}))
    elif args.preset == "lite":
        model_cfg = ModelConfig.lite(**model_cfg.model_dump(exclude={"embedding_size", "recurrent_hidden"}))
    model, curve = classifier.train(dataset, model_cfg, train_cfg)
    path = out / "model.digm"
    classifier.save_checkpoint(model, path)
    print(f"Trained {model.parameter_count()} parameters for {len(curve)} steps, final loss {curve[-1]:.4f}")
    print(f"Saved {path}")
    return 0


def cmd_eval(args, settings: Settings) -> int:
    manifest = storage.load_manifest(args.manifest)
    print(storage.summarize_manifest(manifest))
    dataset = storage.load_dataset(args.manifest, tuple(settings.model.frame_shape), settings.radar.frame_period)
    model = classifier.load_checkpoint(args.model)
    accuracy, confusion = classifier.evaluate(model, dataset)
    print(f"accuracy: {format_percentage(accuracy)} on {len(dataset)} sequences")
    names = [kind.name for kind in GestureKind][: confusion.shape[0]]
    print("      " + " ".join(f"{n:>4}" for n in names))
    for name, row in zip(names, confusion):
        print(f"{name:>4}  " + " ".join(f"{v:>4}" for v in row))
    return 0


def _stream_source(args, settings: Settings):
    """Cubes and ground truth of the requested stream."""
    if args.input:
        return storage.read_adc_cubes(args.input), None, None
    rng = np.random.default_rng(args.seed)
    gestures = [kind for kind in GestureKind if kind.is_gesture]
    kinds = [gestures[int(rng.integers(len(gestures)))] for _ in range(args.synthetic)]
    script = build_stream_script(kinds, settings.radar, seed=args.seed, snr_db=settings.stream.snr_db)
    return script.cubes(settings.radar), script.bursts(settings.radar), script


def _stream_classifier(args, settings: Settings):
    if args.oracle_dtw:
        return synthetic_templates(settings).predict
    if not args.model:
        raise MmGestureError("stream needs --model or --oracle-dtw")
    return model_classifier(classifier.load_checkpoint(args.model))


def cmd_stream(args, settings: Settings) -> int:
    cubes, bursts, _ = _stream_source(args, settings)
    predict = _stream_classifier(args, settings)
    pace = settings.stream.pace if args.pace is None else args.pace

    def emit(event):
        storage.write_event_lines([event], sys.stdout)

    report = run_stream(cubes, settings, predict, pace=pace, bursts=bursts, on_event=emit)
    total = stage_stats(report.frame_latency_ms)
    print(
        f"frames: {total.count}  mean {format_ms(total.mean_ms)}  p99 {format_ms(total.p99_ms)}",
        file=sys.stderr,
    )
    if report.cra is not None:
        print(f"CRA {format_percentage(report.cra)}  MPR {format_percentage(report.mpr)}", file=sys.stderr)
    return 0


def cmd_bench(args, settings: Settings) -> int:
    stats = bench_pipeline(settings, trials=args.trials, seed=args.seed)
    print(f"{'stage':<20}{'mean':>12}{'p99':>12}")
    for name, stage in stats.items():
        print(f"{name:<20}{format_ms(stage.mean_ms, 3):>12}{format_ms(stage.p99_ms, 3):>12}")
    return 0


def cmd_monitor(args, settings: Settings) -> int:
    from .app import MonitorApp

    cubes, bursts, _ = _stream_source(args, settings)
    runner = StreamRunner(settings, _stream_classifier(args, settings))
    MonitorApp(runner, iter(cubes), bursts).run()
    return 0


def _add_stream_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="Raw cube file (.mmwc)")
    source.add_argument("--synthetic", type=int, metavar="N", help="Synthetic stream of N random gestures")
    parser.add_argument("--model", help="Checkpoint (.digm)")
    parser.add_argument("--oracle-dtw", action="store_true", help="Use the trajectory template matcher")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmgesture", description="mmWave gesture recognition laboratory")
    parser.add_argument("--version", action="version", version=f"mmgesture {__version__}")
    parser.add_argument("--config", help="Settings file (default: config.yaml)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Render synthetic labeled samples")
    p.add_argument("--kinds", default="PH,PL,LS,RS,CT,AT,NG")
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--min-distance", type=float, default=0.6)
    p.add_argument("--max-distance", type=float, default=1.0)
    p.add_argument("--max-angle", type=float, default=30.0, help="Degrees either side of boresight")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("process", help="Raw cubes to a DRAI sequence")
    p.add_argument("--input", required=True)
    p.add_argument("--label")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("augment", help="Augment a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--policy", help="Policy file (YAML or JSON)")
    p.add_argument("--factor", type=int, help="Variants per input")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("segment", help="Find gesture windows in a cube stream")
    p.add_argument("--input", required=True)
    p.add_argument("--plot", action="store_true", help="Plot the motion indicator")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("train", help="Train the classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--augment", action="store_true")
    p.add_argument("--epochs", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--preset", choices=["config", "lite", "full"], default="config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a checkpoint on a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", help="Continuous recognition on a stream")
    _add_stream_source(p)
    p.add_argument("--pace", dest="pace", action="store_true", default=None)
    p.add_argument("--no-pace", dest="pace", action="store_false")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("bench", help="Time the pipeline stages")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("monitor", help="Terminal monitor of a stream")
    _add_stream_source(p)
    p.set_defaults(func=cmd_monitor)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        settings = storage.load_settings(args.config)
        return args.func(args, settings)
    except (ValidationError, MmGestureError, ValueError) as e:
        print(f"mmgesture: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, OSError) as e:
        print(f"mmgesture: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
