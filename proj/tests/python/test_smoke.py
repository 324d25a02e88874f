import numpy as np
import pytest

import sketchrl


def test_rasterize_horizontal_segment():
    canvas = np.zeros((8, 8), dtype=np.uint8)
    out = sketchrl.rasterize_segment(canvas, (1, 2), (5, 2))
    assert out.shape == (8, 8)
    assert out[2, 1:6].tolist() == [1] * 5
    assert out.sum() == 5
    assert canvas.sum() == 0
    assert sketchrl.rasterize_segment(canvas, (1, 2), (5, 2), pen_down=False).sum() == 0


def test_mapping_round_trip():
    assert sketchrl.physical_to_pixel(0.5, 0.3) == (1, 1)
    for px in [(0, 0), (41, 41), (17, 3)]:
        x, y = sketchrl.pixel_to_physical(px)
        assert sketchrl.physical_to_pixel(x, y) == px
    with pytest.raises(IndexError):
        sketchrl.pixel_to_physical((42, 42))


def test_l2_score():
    a = np.zeros((4, 4), dtype=np.uint8)
    b = a.copy()
    b[1, 2] = 1
    assert sketchrl.l2_score(a, a) == 0.0
    assert sketchrl.l2_score(a, b) == pytest.approx(-1 / 16)
    with pytest.raises(ValueError):
        sketchrl.l2_score(a, np.zeros((4, 5), dtype=np.uint8))


def test_commander_rollout_telescopes():
    targets, labels = sketchrl.generate_dataset("square", 1, 3)
    goal = targets[0]
    rng = np.random.default_rng(0)
    env = sketchrl.CommanderEnv()
    commands = rng.uniform(0, 1, size=(50, 3)).tolist()
    canvas, rewards, positions = env.rollout(goal, commands)
    assert labels == ["square"]
    assert len(rewards) == len(positions) == 50
    expected = sketchrl.l2_score(canvas, goal) - sketchrl.l2_score(np.zeros_like(goal), goal)
    assert sum(rewards) == pytest.approx(expected, abs=1e-12)
    assert all(0 <= x < 42 and 0 <= y < 42 for x, y in positions)


def test_forward_kinematics_and_reward():
    poses = sketchrl.initial_poses()
    assert len(poses) == 9
    (x, y, z), roll, pitch = sketchrl.forward_kinematics(poses[4])
    assert (x, y) == pytest.approx((10.5, 10.5), abs=1e-3)
    assert z == pytest.approx(0.0, abs=1e-3)
    with pytest.raises(IndexError):
        sketchrl.forward_kinematics([0.0] * 6)
    assert sketchrl.stroker_reward([1, 0, 0], [1, 0, 0], 0, 0) > sketchrl.stroker_reward([1, 0, 0], [0, 1, 0], 0, 0)


def test_run_config():
    cfg = sketchrl.default_run_config()
    assert cfg["commander"]["episode"]["episode_length"] == 50
    merged = sketchrl.validate_run_config({"commander": {"sac": {"gamma": 0.5}}})
    assert merged["commander"]["sac"]["gamma"] == 0.5
    with pytest.raises(ValueError, match="gama"):
        sketchrl.validate_run_config({"commander": {"sac": {"gama": 0.5}}})
