from pathlib import Path

import numpy as np
import pytest

from uttg.urdf import RobotConfig, generate_config, parse_urdf

FIXTURES = Path(__file__).parent / "fixtures"


def load_model(name: str):
    return parse_urdf((FIXTURES / f"{name}.urdf").read_text())


def servo_config() -> RobotConfig:
    """Planar 2-link config tuned for the standard streams.

    The acceleration limit is raised via the documented per-joint override
    (URDF carries no acceleration field; the synthesis rule is a floor, not
    a ceiling): the standard sinusoid's stop/start transients need roughly
    270 rad/s^2 at a 20 Hz cadence.
    """
    config = generate_config(load_model("planar_2link"), "base_link", "tool")
    config.acceleration_limits = np.full(config.dof, 300.0)
    return config


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def planar_model():
    return load_model("planar_2link")


@pytest.fixture
def planar_config() -> RobotConfig:
    return generate_config(load_model("planar_2link"), "base_link", "tool")


@pytest.fixture
def seven_dof_config() -> RobotConfig:
    return generate_config(load_model("seven_dof"), "base_link", "tool")


@pytest.fixture
def demo_config() -> RobotConfig:
    return servo_config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
