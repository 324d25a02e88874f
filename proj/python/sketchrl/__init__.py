"""Hierarchical RL sketching agent."""

import json

from ._sketchrl import (
    CommanderEnv,
    forward_kinematics,
    generate_dataset,
    initial_poses,
    l2_score,
    physical_to_pixel,
    pixel_to_physical,
    rasterize_segment,
    stroker_reward,
)
from . import _sketchrl


def default_run_config():
    return json.loads(_sketchrl.default_run_config_json())


def validate_run_config(config):
    """Returns the full configuration after overlaying config on the defaults."""
    return json.loads(_sketchrl.validate_run_config_json(json.dumps(config)))


__all__ = [
    "CommanderEnv",
    "default_run_config",
    "forward_kinematics",
    "generate_dataset",
    "initial_poses",
    "l2_score",
    "physical_to_pixel",
    "pixel_to_physical",
    "rasterize_segment",
    "stroker_reward",
    "validate_run_config",
]
