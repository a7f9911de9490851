import json
from pathlib import Path

import numpy as np
import pytest

from machstiff.ingest import default_sensor_config
from machstiff.synth import SynthSpec, tool_block_like_spec, random_stiffness, simulate_campaign

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture
def stiffness_fixture() -> dict:
    return load_fixture("tool_block_stiffness.json")


@pytest.fixture
def center_fixture() -> dict:
    return load_fixture("center_lines.json")


@pytest.fixture
def sensor_config():
    return default_sensor_config(0.1)


@pytest.fixture
def noiseless_campaign(sensor_config):
    K = random_stiffness(np.random.default_rng(3), 1e3)
    return K, simulate_campaign(SynthSpec(K, sensor_config))


@pytest.fixture
def noisy_campaign():
    return simulate_campaign(tool_block_like_spec(11))
