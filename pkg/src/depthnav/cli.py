"""Command-line entry point: label, eval, simulate, primitives dump, losses check."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import io as dio
from .config import build_config
from .evaluation import PredictionSet, compute_metrics
from .labeling import label_dataset
from .losses import depth_loss, mean_softmax_cross_entropy, run_gradient_checks, softmax_cross_entropy
from .primitives import generate_primitives
from .simulator import EpisodeConfig, run_scene

import numpy as np

DEPTH_SUFFIXES = (".png", ".raw", ".depth")


def config_options(fn):
    for opt in (
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Key-value config file."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out",
                     help="Output directory."),
        click.option("--seed", type=int, default=None, help="Seed for randomized commands."),
        click.option("--voxel-size", "voxel_size", type=float, default=None),
        click.option("--dmax", "d_max", type=float, default=None),
        click.option("--w", "w", type=float, default=None),
        click.option("--robot-radius", "robot_radius", type=float, default=None),
        click.option("--horizon", "safety_horizon", type=float, default=None),
    ):
        fn = opt(fn)
    return fn


def _config(config_path, **overrides):
    try:
        return build_config(Path(config_path) if config_path else None, overrides)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
def main():
    """Depth-image trajectory labeling, evaluation, and simulation."""


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@config_options
def label(input_dir, config_path, out_dir, **overrides):
    """Label every depth raster in INPUT_DIR and write the label CSV."""
    cfg = _config(config_path, **overrides)
    try:
        k = cfg.intrinsics()
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None

    paths = sorted(p for p in Path(input_dir).iterdir()
                   if p.suffix.lower() in DEPTH_SUFFIXES)
    if not paths:
        raise click.ClickException(f"no depth rasters found in {input_dir}")

    def frames():
        for p in paths:
            try:
                yield p.stem, dio.read_depth_any(p)
            except (ValueError, OSError) as exc:
                raise click.ClickException(f"{p}: {exc}") from None

    prims = generate_primitives(cfg.arc_length, cfg.n_samples)
    result = label_dataset(frames(), k, prims, cfg.cost_params(), voxel_size=cfg.voxel_size)

    out = Path(out_dir)
    dio.write_label_csv(out / "labels.csv", result.records)
    summary = {
        "frames": len(result.records),
        "failures": len(result.failures),
        "safety_horizon": cfg.safety_horizon,
    }
    for cls, frac in result.distribution.items():
        summary[f"fraction_{cls.label}"] = frac
    dio.write_keyvalue(out / "label_summary.txt", summary)
    click.echo(f"labeled {len(result.records)} frames -> {out / 'labels.csv'}")
    if result.failures:
        for fid, msg in result.failures:
            click.echo(f"failed frame {fid}: {msg}", err=True)
        raise click.ClickException(f"{len(result.failures)} frames failed")


@main.command("eval")
@click.argument("labels_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("predictions_csv", type=click.Path(exists=True, dir_okay=False))
@config_options
def eval_cmd(labels_csv, predictions_csv, config_path, out_dir, **overrides):
    """Score a predictions CSV (frame_id,class) against a label CSV."""
    cfg = _config(config_path, **overrides)
    records = dio.read_label_csv(Path(labels_csv), safety_horizon=cfg.safety_horizon)
    preds = dio.read_predictions_csv(Path(predictions_csv))
    labeled_ids = {r.frame_id for r in records}
    skipped = len(preds) - sum(1 for fid in preds if fid in labeled_ids)
    usable = {fid: cls for fid, cls in preds.items() if fid in labeled_ids}
    if not usable:
        raise click.ClickException("no predictions match labeled frames")
    try:
        report = compute_metrics(PredictionSet.from_pairs(usable, records), n_skipped=skipped)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    out = Path(out_dir)
    dio.atomic_write_text(out / "metrics.txt", report.format_text() + "\n")
    dio.write_keyvalue(out / "metrics.kv", report.as_dict())
    click.echo(report.format_text())


@main.command()
@click.argument("scene_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-frames", is_flag=True, help="Write rendered depth rasters.")
@click.option("--advance", type=float, default=None)
@click.option("--max-steps", "max_steps", type=int, default=None)
@config_options
def simulate(scene_file, dump_frames, advance, max_steps, config_path, out_dir, **overrides):
    """Run a closed-loop episode over SCENE_FILE and write the flight log."""
    overrides = dict(overrides, advance=advance, max_steps=max_steps)
    cfg = _config(config_path, **overrides)
    try:
        k = cfg.intrinsics()
        scene = dio.read_scene(Path(scene_file))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None

    out = Path(out_dir)
    on_frame = None
    if dump_frames:
        frames_dir = out / "frames"

        def on_frame(i, depth):
            dio.write_depth_raw(frames_dir / f"frame_{i:05d}.raw", depth)

    episode = EpisodeConfig(k=k, prims=generate_primitives(cfg.arc_length, cfg.n_samples),
                            params=cfg.cost_params(), advance=cfg.advance,
                            max_steps=cfg.max_steps, max_range=cfg.max_range,
                            voxel_size=cfg.voxel_size)
    try:
        log = run_scene(scene, episode, on_frame=on_frame)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    dio.atomic_write_text(out / "simlog.csv", dio.format_simlog_csv(log))
    dio.write_keyvalue(out / "sim_summary.txt", dio.simlog_summary(log))
    click.echo(f"{log.termination}: traveled {log.traveled:.2f} m over {len(log.steps)} steps, "
               f"mean clearance {log.mean_obstacle_distance:.2f} m"
               + (", COLLIDED" if log.collided else ""))
    if log.collided:
        sys.exit(3)


@main.group()
def primitives():
    """Motion-primitive inspection."""


@primitives.command("dump")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (stdout if omitted).")
@click.option("--arc-length", type=float, default=2.5)
@click.option("--n-samples", type=int, default=50)
def primitives_dump(out_path, arc_length, n_samples):
    """Emit the primitive waypoints as CSV for plotting."""
    try:
        prims = generate_primitives(arc_length, n_samples)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    text = dio.format_primitives_csv(prims)
    if out_path is None:
        click.echo(text, nl=False)
    else:
        dio.atomic_write_text(Path(out_path), text)
        click.echo(f"wrote {out_path}")


@main.group()
def losses():
    """Loss-function self tests."""


@losses.command("check")
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=int, default=50)
def losses_check(seed, trials):
    """Gradient-check every loss against central finite differences."""
    failures = 0

    value, _ = softmax_cross_entropy(np.zeros(5), np.eye(5)[0])
    uniform_ok = abs(value - np.log(5.0)) < 1e-12
    click.echo(f"uniform-logit cross entropy = ln 5: {'PASS' if uniform_ok else 'FAIL'}")
    failures += not uniform_ok

    value, _ = depth_loss(np.ones((4, 4)), np.zeros((4, 4)))
    offset_ok = abs(value - 0.5) < 1e-12
    click.echo(f"constant-offset depth loss = 0.5: {'PASS' if offset_ok else 'FAIL'}")
    failures += not offset_ok

    batch_val, _ = mean_softmax_cross_entropy(np.zeros((3, 5)), np.eye(5)[:3])
    batch_ok = abs(batch_val - np.log(5.0)) < 1e-12
    click.echo(f"batch-mean cross entropy: {'PASS' if batch_ok else 'FAIL'}")
    failures += not batch_ok

    passed = run_gradient_checks(seed=seed, trials=trials)
    for name, count in passed.items():
        ok = count == trials
        click.echo(f"{name} gradient vs finite differences: {count}/{trials} "
                   f"{'PASS' if ok else 'FAIL'}")
        failures += not ok
    if failures:
        raise click.ClickException(f"{failures} loss checks failed")
    click.echo("all loss checks passed")


if __name__ == "__main__":
    main()
