"""File formats: depth rasters, key-value configs, CSVs, scene files.

All writers go through an atomic write-temp-then-rename so partial outputs
never appear under the final name.
"""

from __future__ import annotations

import csv
import io as _io
import math
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import CameraIntrinsics, DepthImage
from .labeling import CostBreakdown, LabelRecord
from .primitives import PrimitiveSet, TrajectoryClass
from .simulator import Box, RobotPose, Scene, SceneWorld, SimLog


def atomic_write_bytes(path: Path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# Depth rasters
# ---------------------------------------------------------------------------


def write_depth_png(path: Path, depth: DepthImage):
    """16-bit grayscale PNG in millimeters; invalid pixels become 0."""
    mm = np.where(depth.valid, np.round(depth.depth * 1000.0), 0.0)
    mm = np.clip(mm, 0, 65535).astype(np.uint16)
    buf = _io.BytesIO()
    Image.fromarray(mm).save(buf, format="PNG")
    atomic_write_bytes(Path(path), buf.getvalue())


def read_depth_png(path: Path) -> DepthImage:
    with Image.open(path) as img:
        raw = np.asarray(img)
    if raw.dtype not in (np.uint16, np.int32, np.uint8):
        raise ValueError(f"{path}: expected a 16-bit grayscale PNG, got dtype {raw.dtype}")
    return DepthImage.from_millimeters(raw.astype(np.uint32))


_RAW_MAGIC = "depthraw"


def write_depth_raw(path: Path, depth: DepthImage, scale: float = 1.0):
    """Binary float32 raster with a one-line text header: width height scale.

    Stored values times `scale` give meters; nonpositive or nonfinite values
    mean invalid.
    """
    header = f"{_RAW_MAGIC} {depth.width} {depth.height} {float(scale):.17g}\n".encode("ascii")
    vals = np.where(depth.valid, depth.depth / scale, 0.0).astype("<f4")
    atomic_write_bytes(Path(path), header + vals.tobytes())


def read_depth_raw(path: Path) -> DepthImage:
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 4 or parts[0] != _RAW_MAGIC:
        raise ValueError(f"{path}: not a depth raster (bad header)")
    width, height, scale = int(parts[1]), int(parts[2]), float(parts[3])
    vals = np.frombuffer(data[nl + 1:], dtype="<f4")
    if vals.size != width * height:
        raise ValueError(f"{path}: payload holds {vals.size} floats, expected {width * height}")
    depth = vals.reshape(height, width).astype(np.float64) * scale
    valid = np.isfinite(depth) & (depth > 0)
    return DepthImage(np.where(valid, depth, 0.0), valid)


def read_depth_any(path: Path) -> DepthImage:
    path = Path(path)
    if path.suffix.lower() == ".png":
        return read_depth_png(path)
    return read_depth_raw(path)


# ---------------------------------------------------------------------------
# Key-value configs
# ---------------------------------------------------------------------------


def parse_keyvalue(text: str) -> dict[str, str]:
    """`key = value` lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" in body:
            key, _, value = body.partition("=")
        else:
            key, _, value = body.partition(" ")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        out[key] = value
    return out


def read_keyvalue(path: Path) -> dict[str, str]:
    return parse_keyvalue(Path(path).read_text())


def write_keyvalue(path: Path, values: dict):
    lines = [f"{k} = {_fmt(v)}" for k, v in values.items()]
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def intrinsics_from_keyvalue(values: dict[str, str]) -> CameraIntrinsics:
    try:
        return CameraIntrinsics(
            fx=float(values["fx"]), fy=float(values["fy"]),
            cx=float(values["cx"]), cy=float(values["cy"]),
            width=int(values["width"]), height=int(values["height"]),
        )
    except KeyError as exc:
        raise ValueError(f"intrinsics config is missing key {exc.args[0]!r}") from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


# ---------------------------------------------------------------------------
# Label CSV
# ---------------------------------------------------------------------------


def _label_columns() -> list[str]:
    cols = ["frame_id", "label", "top2_second"]
    for prefix in ("J", "clearance", "safe_full", "safe_trunc"):
        cols += [f"{prefix}_{c.label}" for c in TrajectoryClass]
    return cols


def format_label_csv(records: list[LabelRecord]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_label_columns())
    for r in records:
        row = [r.frame_id, r.label.label, r.top2[1].label]
        row += [f"{r.costs[c].total:.9g}" for c in TrajectoryClass]
        row += [f"{r.costs[c].min_clearance:.9g}" for c in TrajectoryClass]
        row += [int(r.safe_full[c]) for c in TrajectoryClass]
        row += [int(r.safe_truncated[c]) for c in TrajectoryClass]
        writer.writerow(row)
    return buf.getvalue()


def write_label_csv(path: Path, records: list[LabelRecord]):
    atomic_write_text(Path(path), format_label_csv(records))


def read_label_csv(path: Path, safety_horizon: float = 2.0) -> list[LabelRecord]:
    """Rebuild label records from CSV; cost splits are not stored, so the
    per-class breakdowns carry the total and NaN components."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            costs = {}
            safe_full = {}
            safe_trunc = {}
            for c in TrajectoryClass:
                total = float(row[f"J_{c.label}"])
                clear = float(row[f"clearance_{c.label}"])
                full = bool(int(row[f"safe_full_{c.label}"]))
                costs[c] = CostBreakdown(f_obst=math.nan, f_smooth=math.nan,
                                         total=total, min_clearance=clear,
                                         collides=not full)
                safe_full[c] = full
                safe_trunc[c] = bool(int(row[f"safe_trunc_{c.label}"]))
            label = TrajectoryClass.from_label(row["label"])
            records.append(LabelRecord(
                frame_id=row["frame_id"], costs=costs, label=label,
                top2=(label, TrajectoryClass.from_label(row["top2_second"])),
                safe_full=safe_full, safe_truncated=safe_trunc,
                safety_horizon=safety_horizon,
            ))
    return records


def read_predictions_csv(path: Path) -> dict[str, TrajectoryClass]:
    """Two columns: frame_id, class."""
    preds: dict[str, TrajectoryClass] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty predictions file")
        rows = [header] if header and header[0] != "frame_id" else []
        rows += list(reader)
        for row in rows:
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}: prediction rows need frame_id,class")
            preds[row[0]] = TrajectoryClass.from_label(row[1])
    return preds


def write_predictions_csv(path: Path, preds: dict[str, TrajectoryClass]):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame_id", "class"])
    for fid in sorted(preds):
        writer.writerow([fid, preds[fid].label])
    atomic_write_text(Path(path), buf.getvalue())


# ---------------------------------------------------------------------------
# Primitive CSV
# ---------------------------------------------------------------------------


def format_primitives_csv(prims: PrimitiveSet) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class_id", "index", "x", "y", "z", "heading"])
    for traj in prims:
        for i, (wp, hd) in enumerate(zip(traj.waypoints, traj.headings)):
            writer.writerow([traj.class_id.label, i,
                             f"{wp[0] + 0.0:.9g}", f"{wp[1] + 0.0:.9g}",
                             f"{wp[2] + 0.0:.9g}", f"{hd + 0.0:.9g}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Scenes and simulation logs
# ---------------------------------------------------------------------------


def write_scene(path: Path, scene: Scene):
    lines = []
    b = scene.world.bounds
    lines.append("bounds " + " ".join(f"{v:.9g}" for v in (*b.lo, *b.hi)))
    for box in scene.world.boxes:
        lines.append("box " + " ".join(f"{v:.9g}" for v in (*box.lo, *box.hi)))
    p = scene.start.position
    lines.append(f"start {p[0]:.9g} {p[1]:.9g} {p[2]:.9g} {scene.start.yaw:.9g}")
    if scene.goal is not None:
        lines.append("goal " + " ".join(f"{v:.9g}" for v in (*scene.goal.lo, *scene.goal.hi)))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_scene(path: Path) -> Scene:
    bounds = None
    boxes: list[Box] = []
    start = None
    goal = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        kind, *rest = body.split()
        vals = [float(v) for v in rest]
        if kind == "bounds" and len(vals) == 6:
            bounds = Box(vals[:3], vals[3:])
        elif kind == "box" and len(vals) == 6:
            boxes.append(Box(vals[:3], vals[3:]))
        elif kind == "start" and len(vals) == 4:
            start = RobotPose(vals[:3], vals[3])
        elif kind == "goal" and len(vals) == 6:
            goal = Box(vals[:3], vals[3:])
        else:
            raise ValueError(f"{path}:{lineno}: bad scene line {line!r}")
    if bounds is None or start is None:
        raise ValueError(f"{path}: scene needs 'bounds' and 'start' lines")
    return Scene(SceneWorld(tuple(boxes), bounds), start, goal)


def format_simlog_csv(log: SimLog) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "x", "y", "z", "yaw", "class", "clearance", "micros"])
    for i, st in enumerate(log.steps):
        p = st.pose.position
        writer.writerow([i, f"{p[0] + 0.0:.9g}", f"{p[1] + 0.0:.9g}", f"{p[2] + 0.0:.9g}",
                         f"{st.pose.yaw + 0.0:.9g}", st.chosen.label,
                         f"{st.min_clearance:.9g}", f"{st.micros:.1f}"])
    return buf.getvalue()


def simlog_summary(log: SimLog) -> dict:
    micros = [st.micros for st in log.steps]
    return {
        "steps": len(log.steps),
        "traveled_m": log.traveled,
        "mean_obstacle_distance_m": log.mean_obstacle_distance,
        "collided": log.collided,
        "termination": log.termination,
        "median_step_micros": float(np.median(micros)) if micros else math.nan,
    }


# ---------------------------------------------------------------------------
# Distance-field debug dump
# ---------------------------------------------------------------------------


def write_field_dump(path: Path, field) -> None:
    """Binary float32 volume with a one-line header: dims, voxel size, origin."""
    nx, ny, nz = field.dims
    o = field.origin
    header = (f"distfield {nx} {ny} {nz} {float(field.voxel_size):.17g} "
              f"{float(o[0]):.17g} {float(o[1]):.17g} {float(o[2]):.17g}\n").encode("ascii")
    atomic_write_bytes(Path(path), header + field.dist.astype("<f4").tobytes())


def read_field_dump(path: Path):
    from .distance_field import DistanceField

    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 8 or parts[0] != "distfield":
        raise ValueError(f"{path}: not a distance-field dump")
    nx, ny, nz = int(parts[1]), int(parts[2]), int(parts[3])
    voxel = float(parts[4])
    origin = [float(parts[5]), float(parts[6]), float(parts[7])]
    vals = np.frombuffer(data[nl + 1:], dtype="<f4").astype(np.float64)
    if vals.size != nx * ny * nz:
        raise ValueError(f"{path}: payload size mismatch")
    return DistanceField(origin, voxel, vals.reshape(nx, ny, nz))
