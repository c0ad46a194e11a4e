import hashlib

import numpy as np
import pytest
from click.testing import CliRunner

from depthnav import io as dio
from depthnav.cli import main
from depthnav.geometry import DepthImage
from depthnav.primitives import TrajectoryClass
from depthnav.simulator import Box, RobotPose, Scene, SceneWorld


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def cam_cfg(tmp_path):
    path = tmp_path / "cam.cfg"
    path.write_text("fx = 32\nfy = 32\ncx = 31.5\ncy = 23.5\nwidth = 64\nheight = 48\n"
                    "voxel_size = 0.2\n")
    return path


@pytest.fixture()
def frames_dir(tmp_path):
    d = tmp_path / "frames"
    d.mkdir()
    depth = np.full((48, 64), 7.0)
    dio.write_depth_raw(d / "a_empty.raw", DepthImage(depth))
    wall_left = depth.copy()
    wall_left[:, :32] = 1.0
    dio.write_depth_png(d / "b_wall.png", DepthImage(wall_left))
    dio.write_depth_raw(d / "c_wall_r.raw", DepthImage(wall_left[:, ::-1].copy()))
    return d


class TestHelpAndErrors:
    @pytest.mark.parametrize("cmd", [[], ["label"], ["eval"], ["simulate"],
                                     ["primitives", "dump"], ["losses", "check"]])
    def test_help_exits_zero(self, runner, cmd):
        result = runner.invoke(main, cmd + ["--help"])
        assert result.exit_code == 0
        assert "Usage" in result.output

    def test_unknown_flag_nonzero(self, runner):
        result = runner.invoke(main, ["label", "--frobnicate"])
        assert result.exit_code != 0

    def test_empty_directory_names_it(self, runner, tmp_path, cam_cfg):
        empty = tmp_path / "empty"
        empty.mkdir()
        result = runner.invoke(main, ["label", str(empty), "--config", str(cam_cfg)])
        assert result.exit_code != 0
        assert "empty" in result.output


class TestLabelCommand:
    def test_labels_directory(self, runner, tmp_path, cam_cfg, frames_dir):
        out = tmp_path / "out"
        result = runner.invoke(main, ["label", str(frames_dir), "--config", str(cam_cfg),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = (out / "labels.csv").read_text().strip().splitlines()
        assert len(rows) == 4  # header + 3 frames
        summary = dio.read_keyvalue(out / "label_summary.txt")
        fracs = [float(v) for k, v in summary.items() if k.startswith("fraction_")]
        assert sum(fracs) == pytest.approx(1.0)
        # the mirrored wall frame gets the mirrored label
        records = dio.read_label_csv(out / "labels.csv")
        by_id = {r.frame_id: r.label for r in records}
        assert by_id["c_wall_r"] == by_id["b_wall"].mirrored

    def test_rerun_byte_identical(self, runner, tmp_path, cam_cfg, frames_dir):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        for out in (out1, out2):
            result = runner.invoke(main, ["label", str(frames_dir), "--config", str(cam_cfg),
                                          "--out", str(out)])
            assert result.exit_code == 0
        h1 = hashlib.sha256((out1 / "labels.csv").read_bytes()).hexdigest()
        h2 = hashlib.sha256((out2 / "labels.csv").read_bytes()).hexdigest()
        assert h1 == h2

    def test_flag_overrides_config(self, runner, tmp_path, cam_cfg, frames_dir):
        out = tmp_path / "o"
        result = runner.invoke(main, ["label", str(frames_dir), "--config", str(cam_cfg),
                                      "--out", str(out), "--dmax", "1.0"])
        assert result.exit_code == 0
        # a smaller cutoff shrinks every obstacle cost
        recs = dio.read_label_csv(out / "labels.csv")
        assert all(r.costs[c].total <= 4.0 for r in recs for c in TrajectoryClass)


class TestEvalCommand:
    def test_eval_pipeline(self, runner, tmp_path, cam_cfg, frames_dir):
        out = tmp_path / "out"
        runner.invoke(main, ["label", str(frames_dir), "--config", str(cam_cfg),
                             "--out", str(out)])
        records = dio.read_label_csv(out / "labels.csv")
        preds = {r.frame_id: r.label for r in records}
        dio.write_predictions_csv(tmp_path / "preds.csv", preds)
        result = runner.invoke(main, ["eval", str(out / "labels.csv"),
                                      str(tmp_path / "preds.csv"), "--out", str(out)])
        assert result.exit_code == 0, result.output
        kv = dio.read_keyvalue(out / "metrics.kv")
        assert float(kv["accuracy"]) == 1.0
        assert "accuracy" in (out / "metrics.txt").read_text()


class TestSimulateCommand:
    def test_simulate_scene(self, runner, tmp_path, cam_cfg):
        world = SceneWorld((Box([-2, -2, 3.0], [2, 2, 3.4]),),
                           Box([-4, -4, -1], [4, 4, 6]))
        scene = Scene(world, RobotPose([0, 0, 0], 0.0), goal=None)
        scene_path = tmp_path / "scene.txt"
        dio.write_scene(scene_path, scene)
        out = tmp_path / "sim"
        result = runner.invoke(main, ["simulate", str(scene_path), "--config", str(cam_cfg),
                                      "--out", str(out), "--max-steps", "3",
                                      "--dump-frames"])
        assert result.exit_code in (0, 3), result.output
        csv_text = (out / "simlog.csv").read_text()
        assert csv_text.splitlines()[0] == "step,x,y,z,yaw,class,clearance,micros"
        summary = dio.read_keyvalue(out / "sim_summary.txt")
        assert int(summary["steps"]) >= 1
        frames = sorted((out / "frames").iterdir())
        assert len(frames) == int(summary["steps"])
        img = dio.read_depth_raw(frames[0])
        assert img.width == 64 and img.height == 48


class TestPrimitivesDump:
    def test_stdout(self, runner):
        result = runner.invoke(main, ["primitives", "dump", "--n-samples", "5"])
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0] == "class_id,index,x,y,z,heading"
        assert len(lines) == 1 + 5 * 5

    def test_to_file(self, runner, tmp_path):
        path = tmp_path / "prims.csv"
        result = runner.invoke(main, ["primitives", "dump", "--out", str(path)])
        assert result.exit_code == 0
        assert path.exists()
        assert len(path.read_text().splitlines()) == 1 + 5 * 50


class TestLossesCheck:
    def test_all_pass(self, runner):
        result = runner.invoke(main, ["losses", "check", "--trials", "5", "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert "all loss checks passed" in result.output
        assert result.output.count("PASS") == 6
