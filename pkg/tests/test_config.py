import pytest

from depthnav.config import build_config


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return path


class TestPrecedence:
    def test_defaults(self):
        cfg = build_config()
        assert cfg.voxel_size == 0.10
        assert cfg.d_max == 3.5
        assert cfg.w == 0.5

    def test_file_overrides_default(self, tmp_path):
        path = write_cfg(tmp_path, "d_max = 2.0\nvoxel_size = 0.2\n")
        cfg = build_config(path)
        assert cfg.d_max == 2.0 and cfg.voxel_size == 0.2
        assert cfg.w == 0.5  # untouched default

    def test_cli_overrides_file(self, tmp_path):
        path = write_cfg(tmp_path, "d_max = 2.0\nw = 0.9\n")
        cfg = build_config(path, {"d_max": 1.25})
        assert cfg.d_max == 1.25  # flag wins
        assert cfg.w == 0.9       # file wins over default

    def test_none_overrides_ignored(self, tmp_path):
        path = write_cfg(tmp_path, "d_max = 2.0\n")
        cfg = build_config(path, {"d_max": None, "w": None})
        assert cfg.d_max == 2.0 and cfg.w == 0.5

    def test_full_matrix(self, tmp_path):
        # one field from each source, all three at once
        path = write_cfg(tmp_path, "w = 0.9\nrobot_radius = 0.26\n")
        cfg = build_config(path, {"robot_radius": 0.2})
        assert cfg.w == 0.9            # file
        assert cfg.robot_radius == 0.2  # flag
        assert cfg.d_max == 3.5        # default


class TestValidation:
    def test_unknown_file_key(self, tmp_path):
        path = write_cfg(tmp_path, "warp_speed = 9\n")
        with pytest.raises(ValueError, match="warp_speed"):
            build_config(path)

    def test_unknown_override(self):
        with pytest.raises(ValueError):
            build_config(None, {"nope": 1})

    def test_int_fields_coerced(self, tmp_path):
        path = write_cfg(tmp_path, "width = 64\nmax_steps = 25\n")
        cfg = build_config(path)
        assert cfg.width == 64 and isinstance(cfg.width, int)
        assert cfg.max_steps == 25

    def test_intrinsics_require_all_keys(self, tmp_path):
        path = write_cfg(tmp_path, "fx = 32\nfy = 32\n")
        cfg = build_config(path)
        with pytest.raises(ValueError, match="cx"):
            cfg.intrinsics()

    def test_intrinsics_and_params_build(self, tmp_path):
        path = write_cfg(tmp_path, "fx = 32\nfy = 32\ncx = 31.5\ncy = 23.5\n"
                                   "width = 64\nheight = 48\nd_max = 1.5\n")
        cfg = build_config(path)
        assert cfg.intrinsics().width == 64
        assert cfg.cost_params().d_max == 1.5
