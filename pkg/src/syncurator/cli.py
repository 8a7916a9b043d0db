"""Command-line front end for the scoring / filtering / evaluation pipeline.

Subcommands::

    syncurator score  <pairs...>  --out DIR     score pairs -> scores.json
    syncurator filter --scores F  --out DIR     rank + compose -> manifest.json
    syncurator eval   --pairs ... --embeddings ... --out DIR
                                                 metric table -> metrics.json/.csv
    syncurator synth  --out DIR [grid flags]    emit synthetic pair corpus
    syncurator trace  <pair>      --out DIR     per-channel signal CSV
    syncurator report [--scores F --manifest F --metrics F] --out DIR

Exit codes: 0 success, 1 partial or complete failure, 2 invalid invocation.
Every output embeds the resolved configuration and tool version; reruns on
identical inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ._version import __version__
from .channels import Channel, Stage, extract_channels, unwrap_angles
from .config import RunConfig, parse_ratio, parse_weights, resolve_config
from .curation import (
    Composition,
    build_manifest,
    kinds_from_scores,
    manifest_bytes,
    parse_scores,
    score_pair,
    scores_bytes,
)
from .dsp import interpolate_gaps, savitzky_golay, z_normalize
from .errors import SyncuratorError, TooSparse
from .evalmetrics import compute_metrics, eval_sync, load_embedding_bundle
from .jsonio import canonical_json_bytes
from .landmarks import load_pair, write_pair
from .synth import MotionParams, SynthSpec, generate_pair

EVAL_TABLE_ROWS = (
    ("Synchronization", "Speech Corr.", "speech_corr"),
    ("Synchronization", "Gaze Corr.", "gaze_corr"),
    ("Synchronization", "Blink Corr.", "blink_corr"),
    ("Synchronization", "Pose Corr.", "pose_corr"),
    ("Edit Fidelity", "Directional CLIP (image)", "directional_clip_image"),
    ("Edit Fidelity", "Directional CLIP (text-dual)", "directional_clip_text_dual"),
    ("Edit Fidelity", "CLIP-Text Align.", "clip_text_align"),
    ("Identity Preservation", "ArcFace Sim.", "arcface_sim"),
)

NA = "N/A"


def _expand(paths: list[str], pattern: str) -> list[Path]:
    out: list[Path] = []
    for entry in paths:
        path = Path(entry)
        if path.is_dir():
            out.extend(sorted(path.glob(pattern)))
        else:
            out.append(path)
    return out


def _out_dir(args) -> Path:
    directory = Path(args.out)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _jobs(cfg: RunConfig) -> int:
    return cfg.jobs if cfg.jobs else (os.cpu_count() or 1)


def _run_parallel(worker, items, jobs: int):
    """Apply worker to items, preserving item order in the result list."""
    if jobs <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


def cmd_score(args) -> int:
    cfg = resolve_config(vars(args), args.config)
    files = _expand(args.pairs, "*.pair.json")
    if not files:
        print("error: no pair files found", file=sys.stderr)
        return 1
    weights = cfg.effective_weights()

    def worker(path: Path):
        try:
            return score_pair(load_pair(path), weights, cfg.dsp), None
        except SyncuratorError as exc:
            return None, {"path": str(path), "error": str(exc)}

    results = _run_parallel(worker, files, _jobs(cfg))
    scores = [score for score, _ in results if score is not None]
    errors = [error for _, error in results if error is not None]
    for error in errors:
        print(f"error: {error['path']}: {error['error']}", file=sys.stderr)

    out = _out_dir(args) / "scores.json"
    out.write_bytes(scores_bytes(scores, weights, cfg.dsp, cfg.echo(), errors=errors))
    discarded = sum(1 for s in scores if s.discarded)
    print(
        f"scored {len(scores)} pairs ({discarded} discarded), "
        f"{len(errors)} file failures -> {out}",
        file=sys.stderr,
    )
    return 1 if errors else 0


def cmd_filter(args) -> int:
    cfg = resolve_config(vars(args), args.config)
    scores = parse_scores(Path(args.scores).read_bytes())
    manifest = build_manifest(
        scores,
        kinds_from_scores(scores),
        target_size=cfg.target_size,
        ratio=cfg.ratio,
        composition=cfg.composition,
        seed=cfg.seed,
    )
    out = _out_dir(args) / "manifest.json"
    out.write_bytes(manifest_bytes(manifest, cfg.effective_weights(), cfg.dsp, cfg.echo()))
    print(f"manifest of {len(manifest.accepted)} pairs -> {out}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    cfg = resolve_config(vars(args), args.config)
    pair_files = _expand(args.pairs or [], "*.pair.json")
    emb_files = _expand(args.embeddings or [], "*.emb.json")
    if not pair_files and not emb_files:
        print("error: nothing to evaluate", file=sys.stderr)
        return 1

    errors: list[dict] = []
    rows: dict[str, dict] = {}

    def row_for(pair_id: str) -> dict:
        if pair_id not in rows:
            rows[pair_id] = {"pair_id": pair_id}
            for _, _, key in EVAL_TABLE_ROWS:
                rows[pair_id][key] = None
        return rows[pair_id]

    def sync_worker(path: Path):
        try:
            pair = load_pair(path)
        except SyncuratorError as exc:
            return None, None, {"path": str(path), "error": str(exc)}
        try:
            return pair.pair_id, eval_sync(pair, cfg.dsp), None
        except TooSparse as exc:
            # Insufficient coverage marks the sync block N/A, not a failure.
            return pair.pair_id, exc, None

    for pair_id, sync, error in _run_parallel(sync_worker, pair_files, _jobs(cfg)):
        if error is not None:
            errors.append(error)
            continue
        row = row_for(pair_id)
        if isinstance(sync, TooSparse):
            row.setdefault("unavailable", {})["sync"] = str(sync)
        else:
            row["speech_corr"] = sync[Channel.SPEECH]
            row["gaze_corr"] = sync[Channel.GAZE]
            row["blink_corr"] = sync[Channel.BLINK]
            row["pose_corr"] = sync[Channel.POSE]

    for path in emb_files:
        try:
            report = compute_metrics(load_embedding_bundle(path))
        except SyncuratorError as exc:
            errors.append({"path": str(path), "error": str(exc)})
            continue
        row = row_for(report.pair_id)
        row["directional_clip_image"] = report.directional_clip_image
        row["directional_clip_text_dual"] = report.directional_clip_text_dual
        row["clip_text_align"] = report.clip_text_align
        row["arcface_sim"] = report.arcface_sim
        row["frames_skipped"] = report.frames_skipped
        row["faces_missing"] = report.faces_missing
        if report.unavailable:
            row.setdefault("unavailable", {}).update(report.unavailable)

    for error in errors:
        print(f"error: {error['path']}: {error['error']}", file=sys.stderr)

    ordered = [rows[pair_id] for pair_id in sorted(rows)]
    aggregate = {}
    for _, _, key in EVAL_TABLE_ROWS:
        values = [row[key] for row in ordered if row.get(key) is not None]
        aggregate[key] = {
            "mean": sum(values) / len(values) if values else None,
            "n_pairs": len(values),
        }

    directory = _out_dir(args)
    doc = {
        "tool": "syncurator",
        "version": __version__,
        "config": cfg.echo(),
        "errors": errors,
        "aggregate": aggregate,
        "pairs": ordered,
    }
    (directory / "metrics.json").write_bytes(canonical_json_bytes(doc))

    table = io.StringIO()
    writer = csv.writer(table, lineterminator="\n")
    writer.writerow(["block", "metric", "mean", "n_pairs"])
    for block, label, key in EVAL_TABLE_ROWS:
        mean = aggregate[key]["mean"]
        writer.writerow(
            [block, label, NA if mean is None else f"{mean:.6f}", aggregate[key]["n_pairs"]]
        )
    (directory / "metrics.csv").write_text(table.getvalue(), encoding="utf-8")

    print(
        f"evaluated {len(ordered)} pairs, {len(errors)} file failures -> "
        f"{directory / 'metrics.json'}",
        file=sys.stderr,
    )
    return 1 if errors else 0


def _parse_lags(text: str) -> list[int]:
    if ":" in text:
        start, stop = text.split(":")
        return list(range(int(start), int(stop) + 1))
    return [int(part) for part in text.split(",")]


def cmd_synth(args) -> int:
    directory = _out_dir(args)
    motion = MotionParams(
        speech_period=args.speech_period,
        blink_period=args.blink_period,
    )
    specs = []
    seed = args.base_seed
    for lag in args.lags:
        for _ in range(args.seeds_per_lag):
            specs.append(
                SynthSpec(
                    n_frames=args.n_frames,
                    fps=args.fps,
                    lag_frames=lag,
                    noise_sigma=args.noise,
                    dropout_rate=args.dropout,
                    seed=seed,
                    motion=motion,
                )
            )
            seed += 1
    for _ in range(args.identical):
        specs.append(
            SynthSpec(n_frames=args.n_frames, fps=args.fps, seed=seed, motion=motion)
        )
        seed += 1

    written = []
    for spec in specs:
        record_path = write_pair(generate_pair(spec), directory)
        written.append(record_path.name)

    index = {
        "tool": "syncurator",
        "version": __version__,
        "n_frames": args.n_frames,
        "fps": args.fps,
        "lags": args.lags,
        "seeds_per_lag": args.seeds_per_lag,
        "noise_sigma": args.noise,
        "dropout_rate": args.dropout,
        "identical": args.identical,
        "base_seed": args.base_seed,
        "pair_files": written,
    }
    (directory / "synth_index.json").write_bytes(canonical_json_bytes(index))
    print(f"wrote {len(written)} pairs -> {directory}", file=sys.stderr)
    return 0


def cmd_trace(args) -> int:
    cfg = resolve_config(vars(args), args.config)
    pair = load_pair(args.pair)
    wanted_channels = (
        None if not args.channels else {Channel(name) for name in args.channels.split(",")}
    )
    wanted_stage = None if args.stage is None else Stage(args.stage)

    table = io.StringIO()
    writer = csv.writer(table, lineterminator="\n")
    writer.writerow(["frame", "view", "channel", "component", "stage", "value"])

    for bundle in (pair.source, pair.edited):
        channel_set = extract_channels(bundle)
        for signal in channel_set.components():
            if wanted_channels and signal.channel not in wanted_channels:
                continue
            stages = [signal]
            try:
                # Same chain as scoring: unwrap circular angles first.
                interpolated = interpolate_gaps(unwrap_angles(signal), cfg.dsp)
                smoothed = savitzky_golay(interpolated, cfg.dsp)
                stages += [interpolated, smoothed, z_normalize(smoothed, cfg.dsp)]
            except TooSparse as exc:
                print(f"note: {bundle.view.value}: {exc}; raw stage only", file=sys.stderr)
            for staged in stages:
                if wanted_stage and staged.stage is not wanted_stage:
                    continue
                for frame, value in enumerate(staged.values):
                    writer.writerow(
                        [
                            frame,
                            bundle.view.value,
                            staged.channel.value,
                            staged.component,
                            staged.stage.value,
                            "" if math.isnan(value) else repr(float(value)),
                        ]
                    )

    out = _out_dir(args) / f"{pair.pair_id}.trace.csv"
    out.write_text(table.getvalue(), encoding="utf-8")
    print(f"trace -> {out}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    cfg = resolve_config(vars(args), args.config)
    doc = {
        "tool": "syncurator",
        "version": __version__,
        "config": cfg.echo(),
    }
    for name, path in (
        ("scores", args.scores),
        ("manifest", args.manifest),
        ("metrics", args.metrics),
    ):
        if path is not None:
            doc[name] = json.loads(Path(path).read_bytes())
    if args.traces:
        doc["traces"] = [
            {"path": trace, "rows": sum(1 for _ in open(trace)) - 1} for trace in args.traces
        ]
    out = _out_dir(args) / "report.json"
    out.write_bytes(canonical_json_bytes(doc))
    print(f"report -> {out}", file=sys.stderr)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML or JSON config file (env SYNCURATOR_CONFIG)")
    parser.add_argument("--weights", type=parse_weights, help="speech,gaze,blink,pose")
    parser.add_argument(
        "--drop-channel",
        dest="drop_channel",
        choices=[c.value for c in Channel],
        help="leave-one-out: zero this channel's weight and renormalize",
    )
    parser.add_argument(
        "--composition", choices=[c.value for c in Composition], default=None
    )
    parser.add_argument("--target-size", dest="target_size", type=int)
    parser.add_argument("--ratio", type=parse_ratio, help="edited:identical, e.g. 3:1")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--jobs", type=int, help="worker pool size (default: logical cores)")
    parser.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syncurator",
        description="Score, curate, and evaluate paired portrait videos from landmark "
        "time series and embedding bundles.",
    )
    parser.add_argument("--version", action="version", version=f"syncurator {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score pair files")
    p_score.add_argument("pairs", nargs="+", help="pair record files or directories")
    _add_config_flags(p_score)
    p_score.set_defaults(func=cmd_score)

    p_filter = sub.add_parser("filter", help="build a training manifest from scores")
    p_filter.add_argument("--scores", required=True, help="scores.json from `score`")
    _add_config_flags(p_filter)
    p_filter.set_defaults(func=cmd_filter)

    p_eval = sub.add_parser("eval", help="compute the full metric table")
    p_eval.add_argument("--pairs", nargs="*", help="pair record files or directories")
    p_eval.add_argument(
        "--embeddings", nargs="*", help="embedding bundle files or directories"
    )
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="emit a synthetic pair corpus")
    p_synth.add_argument("--lags", type=_parse_lags, default=[0], help="e.g. 0:9 or 0,2,5")
    p_synth.add_argument("--seeds-per-lag", dest="seeds_per_lag", type=int, default=1)
    p_synth.add_argument("--noise", type=float, default=0.0, help="landmark noise sigma")
    p_synth.add_argument("--dropout", type=float, default=0.0, help="detection dropout rate")
    p_synth.add_argument("--identical", type=int, default=0, help="extra unmodified pairs")
    p_synth.add_argument("--n-frames", dest="n_frames", type=int, default=81)
    p_synth.add_argument("--fps", type=float, default=20.0)
    p_synth.add_argument("--base-seed", dest="base_seed", type=int, default=0)
    p_synth.add_argument("--speech-period", dest="speech_period", type=float, default=20.0)
    p_synth.add_argument("--blink-period", dest="blink_period", type=float, default=30.0)
    p_synth.add_argument("--out", default="out", help="output directory")
    p_synth.set_defaults(func=cmd_synth)

    p_trace = sub.add_parser("trace", help="export per-channel signals as CSV")
    p_trace.add_argument("pair", help="pair record file")
    p_trace.add_argument("--channels", help="comma-separated channel subset")
    p_trace.add_argument(
        "--stage", choices=[s.value for s in Stage], help="restrict to one stage"
    )
    _add_config_flags(p_trace)
    p_trace.set_defaults(func=cmd_trace)

    p_report = sub.add_parser("report", help="combine run outputs into one document")
    p_report.add_argument("--scores")
    p_report.add_argument("--manifest")
    p_report.add_argument("--metrics")
    p_report.add_argument("--traces", nargs="*", help="trace CSVs to index in the report")
    _add_config_flags(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SyncuratorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
