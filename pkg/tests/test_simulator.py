import numpy as np
import pytest

from conftest import make_world, random_boxes
from depthnav.labeling import CostParams
from depthnav.primitives import TrajectoryClass
from depthnav.simulator import (Box, EpisodeConfig, RobotPose, Scene, SceneWorld,
                                corridor_scene, dead_end_scene, door_scene, mirror_scene,
                                render_depth, run_episode, run_scene, step)


@pytest.fixture(scope="module")
def sim_cfg(small_k, prims):
    return EpisodeConfig(k=small_k, prims=prims, params=CostParams(robot_radius=0.26),
                        advance=0.5, max_steps=20, max_range=8.0, voxel_size=0.15)


def origin_pose():
    return RobotPose([0.0, 0.0, 0.0], 0.0)


class TestRenderDepth:
    def test_empty_world_max_range(self, small_k):
        world = make_world([])
        img = render_depth(world, origin_pose(), small_k, 8.0)
        assert np.all(img.depth == 8.0)
        assert img.valid.all()

    def test_fronto_parallel_wall_center_depth(self, small_k):
        wall = Box([-4, -4, 3.0], [4, 4, 3.4])
        img = render_depth(make_world([wall]), origin_pose(), small_k, 8.0)
        # principal point sits between the four central pixels; all see the wall
        assert img.depth[24, 32] == pytest.approx(3.0, abs=1e-9)

    def test_depth_is_optical_axis_distance(self, small_k):
        wall = Box([-4, -4, 2.0], [4, 4, 2.2])
        img = render_depth(make_world([wall]), origin_pose(), small_k, 8.0)
        assert np.allclose(img.depth[img.depth < 8.0], 2.0, atol=1e-9)

    def test_oblique_wall_supersampling_oracle(self, small_k):
        # thin slab rotated by using a stack of offset boxes to fake obliqueness
        boxes = [Box([-3 + 0.1 * i, -4, 2.0 + 0.08 * i], [3 + 0.1 * i, 4, 2.08 + 0.08 * i])
                 for i in range(20)]
        world = make_world(boxes)
        img = render_depth(world, origin_pose(), small_k, 9.0)
        k = small_k
        rng_u = np.linspace(-0.45, 0.45, 10)
        for v, u in ((24, 10), (24, 32), (24, 50), (10, 32)):
            samples = []
            for du in rng_u:
                for dv in rng_u:
                    d = np.array([(u + du - k.cx) / k.fx, (v + dv - k.cy) / k.fy, 1.0])
                    best = 9.0
                    for b in world.boxes:
                        with np.errstate(divide="ignore", invalid="ignore"):
                            t0 = (b.lo - 0.0) / d
                            t1 = (b.hi - 0.0) / d
                        tn = np.fmax.reduce(np.fmin(t0, t1))
                        tf = np.fmin.reduce(np.fmax(t0, t1))
                        if tn <= tf and tn > 0:
                            best = min(best, tn)
                    samples.append(best)
            assert img.depth[v, u] == pytest.approx(np.mean(samples), abs=0.1)

    def test_pose_inside_box_rejected(self, small_k):
        world = make_world([Box([-1, -1, -1], [1, 1, 1])])
        with pytest.raises(ValueError):
            render_depth(world, origin_pose(), small_k, 8.0)

    def test_mirrored_scene_renders_mirrored_image(self, small_k):
        rng = np.random.default_rng(21)
        scene = Scene(make_world(random_boxes(rng)), origin_pose())
        img = render_depth(scene.world, scene.start, small_k, 8.0)
        m = mirror_scene(scene)
        img_m = render_depth(m.world, m.start, small_k, 8.0)
        assert np.array_equal(img_m.depth, img.depth[:, ::-1])


class TestStep:
    def test_empty_world_goes_straight(self, small_k, sim_cfg):
        world = make_world([])
        pose, logged, hit, _ = step(world, origin_pose(), sim_cfg)
        assert logged.chosen == TrajectoryClass.STRAIGHT
        assert np.allclose(pose.position, [0, 0, 0.5])
        assert pose.yaw == 0.0
        assert not hit

    def test_two_steps_compose(self, small_k, sim_cfg):
        world = make_world([])
        pose, _, _, _ = step(world, origin_pose(), sim_cfg)
        pose, _, _, _ = step(world, pose, sim_cfg)
        assert np.allclose(pose.position, [0, 0, 1.0])

    def test_wall_dead_ahead_turns(self, small_k, sim_cfg):
        # narrow blocker at 1.2 m: inside straight's path, clear of the 90 degree arcs
        wall = Box([-0.4, -4, 1.2], [0.4, 4, 1.5])
        world = make_world([wall])
        _, logged, _, _ = step(world, origin_pose(), sim_cfg)
        assert logged.chosen != TrajectoryClass.STRAIGHT
        # the labeling itself must agree: straight is not the argmin
        totals = {c: logged.record.costs[c].total for c in TrajectoryClass}
        assert totals[TrajectoryClass.STRAIGHT] > min(totals.values())

    def test_yaw_follows_tangent(self, small_k, sim_cfg):
        wall = Box([-0.4, -4, 1.2], [0.4, 4, 1.5])
        world = make_world([wall])
        pose, logged, _, _ = step(world, origin_pose(), sim_cfg)
        kappa = sim_cfg.prims[logged.chosen].curvature
        assert kappa != 0.0
        assert pose.yaw == pytest.approx(kappa * sim_cfg.advance)

    def test_advance_validation(self, small_k, prims):
        with pytest.raises(ValueError):
            EpisodeConfig(k=small_k, prims=prims, advance=5.0)


class TestRunEpisode:
    def test_determinism(self, small_k, sim_cfg):
        rng = np.random.default_rng(31)
        world = make_world(random_boxes(rng, n=2, z_range=(2.5, 5.0)))
        log1 = run_episode(world, origin_pose(), sim_cfg)
        log2 = run_episode(world, origin_pose(), sim_cfg)
        assert [s.chosen for s in log1.steps] == [s.chosen for s in log2.steps]
        assert all(np.array_equal(a.pose.position, b.pose.position)
                   for a, b in zip(log1.steps, log2.steps))
        assert log1.traveled == log2.traveled
        assert log1.termination == log2.termination

    def test_mirror_equivariance(self, small_k, sim_cfg):
        rng = np.random.default_rng(32)
        scene = Scene(make_world(random_boxes(rng, n=3, z_range=(2.0, 6.0))), origin_pose())
        log = run_scene(scene, sim_cfg)
        log_m = run_scene(mirror_scene(scene), sim_cfg)
        assert len(log.steps) == len(log_m.steps)
        for a, b in zip(log.steps, log_m.steps):
            assert b.chosen == a.chosen.mirrored
            assert b.pose.position[0] == pytest.approx(-a.pose.position[0], abs=1e-9)
            assert b.pose.position[2] == pytest.approx(a.pose.position[2], abs=1e-9)
            assert b.pose.yaw == pytest.approx(-a.pose.yaw, abs=1e-9)

    def test_no_unflagged_pose_in_collision(self, small_k, sim_cfg):
        for seed in range(6):
            rng = np.random.default_rng(40 + seed)
            world = make_world(random_boxes(rng, n=4, z_range=(1.5, 6.0)))
            log = run_episode(world, origin_pose(), sim_cfg)
            if not log.collided:
                for s in log.steps:
                    assert world.clearance(s.pose.position) >= sim_cfg.params.robot_radius

    def test_traveled_accumulates(self, small_k, sim_cfg):
        world = make_world([])
        log = run_episode(world, origin_pose(), sim_cfg)
        assert log.traveled == pytest.approx(0.5 * len(log.steps))

    def test_goal_termination(self, small_k, sim_cfg):
        world = make_world([])
        goal = Box([-1, -1, 2.0], [1, 1, 3.0])
        log = run_episode(world, origin_pose(), sim_cfg, goal=goal)
        assert log.termination == "goal"
        assert len(log.steps) == 4  # reaches the inclusive goal face at z = 2.0

    def test_start_inside_obstacle_rejected(self, small_k, sim_cfg):
        world = make_world([Box([-1, -1, -1], [1, 1, 1])])
        with pytest.raises(ValueError):
            run_episode(world, origin_pose(), sim_cfg)

    def test_out_of_bounds_termination(self, small_k, prims):
        cfg = EpisodeConfig(k=small_k, prims=prims, params=CostParams(robot_radius=0.26),
                            advance=2.0, max_steps=30, max_range=8.0, voxel_size=0.2)
        world = SceneWorld((), Box([-3, -3, -1], [3, 3, 3]))
        log = run_episode(world, origin_pose(), cfg)
        assert log.termination == "out_of_bounds"


class TestCanonicalScenes:
    def test_scene_invariants(self):
        for scene in (corridor_scene(), door_scene(), dead_end_scene()):
            assert scene.world.in_free_space(scene.start.position)
            assert scene.world.bounds.contains(scene.start.position)

    def test_door_scene_gap_width(self):
        scene = door_scene(gap=0.78)
        door_edges = sorted(
            b.hi[0] for b in scene.world.boxes if b.lo[2] == 4.0 and b.hi[0] < 1.0)
        assert door_edges and door_edges[0] == pytest.approx(-0.39)

    def test_mirror_scene_involution(self):
        scene = door_scene()
        twice = mirror_scene(mirror_scene(scene))
        for a, b in zip(scene.world.boxes, twice.world.boxes):
            assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
