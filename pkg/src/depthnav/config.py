"""Run configuration shared by the CLI subcommands.

Precedence: CLI flag > config file > built-in default.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .geometry import CameraIntrinsics
from .io import read_keyvalue
from .labeling import CostParams


@dataclass
class RunConfig:
    # intrinsics (required for labeling/simulation; no sensible defaults)
    fx: float | None = None
    fy: float | None = None
    cx: float | None = None
    cy: float | None = None
    width: int | None = None
    height: int | None = None
    # labeling
    voxel_size: float = 0.10
    d_max: float = 3.5
    w: float = 0.5
    robot_radius: float = 0.30
    safety_horizon: float = 2.0
    arc_length: float = 2.5
    n_samples: int = 50
    # simulation
    advance: float = 0.5
    max_steps: int = 200
    max_range: float = 10.0
    # randomized commands
    seed: int = 0

    def intrinsics(self) -> CameraIntrinsics:
        missing = [k for k in ("fx", "fy", "cx", "cy", "width", "height")
                   if getattr(self, k) is None]
        if missing:
            raise ValueError(f"config is missing intrinsics keys: {', '.join(missing)}")
        return CameraIntrinsics(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy,
                                width=self.width, height=self.height)

    def cost_params(self) -> CostParams:
        return CostParams(d_max=self.d_max, w=self.w, robot_radius=self.robot_radius,
                          safety_horizon=self.safety_horizon)


_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}
_INT_FIELDS = {"width", "height", "n_samples", "max_steps", "seed"}


def _coerce(name: str, raw) -> float | int:
    if name in _INT_FIELDS:
        return int(float(raw))
    return float(raw)


def build_config(config_path: Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file values over defaults, then CLI overrides over both."""
    cfg = RunConfig()
    if config_path is not None:
        for key, value in read_keyvalue(config_path).items():
            if key not in _FIELD_TYPES:
                raise ValueError(f"{config_path}: unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config override {key!r}")
        setattr(cfg, key, _coerce(key, value))
    return cfg
