import numpy as np
import pytest

from machstiff.errors import SchemaError, SingularK, ValidationError
from machstiff.ingest import check_rank, default_sensor_config
from machstiff.solver import identify
from machstiff.synth import (
    SynthSpec,
    load_spec,
    tool_block_like_spec,
    protocol_levels,
    random_stiffness,
    simulate_campaign,
    spec_from_dict,
    translational_load_cases,
)

from conftest import FIXTURES, load_fixture


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestProtocol:
    def test_default_levels(self):
        assert protocol_levels() == [300.0, 600.0, 900.0, 1200.0, 1500.0, 1800.0, 2000.0]

    def test_exact_multiple(self):
        assert protocol_levels(500.0, 2000.0) == [500.0, 1000.0, 1500.0, 2000.0]

    def test_invalid(self):
        with pytest.raises(ValidationError):
            protocol_levels(0.0, 100.0)


class TestSimulate:
    def test_campaign_shape(self, noiseless_campaign):
        _, c = noiseless_campaign
        assert c.block_id == "BT" and len(c.cases) == 6
        assert [s.phase for s in c.cases[0].steps] == ["charge"] * 7 + ["discharge"] * 7
        check_rank(c)

    def test_same_seed_identical(self):
        assert simulate_campaign(tool_block_like_spec(4)) == simulate_campaign(tool_block_like_spec(4))

    def test_different_seed_differs(self):
        assert simulate_campaign(tool_block_like_spec(4)) != simulate_campaign(tool_block_like_spec(5))

    def test_hysteresis_cancels(self, sensor_config):
        K = random_stiffness(np.random.default_rng(8), 1e3)
        c = simulate_campaign(SynthSpec(K, sensor_config, hysteresis=5e-6))
        assert _rel(identify(c).stiffness, K) < 1e-10

    def test_singular(self, sensor_config):
        K = np.ones((6, 6))
        with pytest.raises(SingularK):
            simulate_campaign(SynthSpec(K, sensor_config))

    def test_too_ill_conditioned(self, sensor_config):
        K = np.diag([1.0, 1, 1, 1, 1, 1e-7])
        with pytest.raises(ValidationError):
            simulate_campaign(SynthSpec(K, sensor_config))

    def test_negative_noise(self, sensor_config):
        with pytest.raises(ValidationError):
            SynthSpec(np.eye(6), sensor_config, sigma=-1.0)

    def test_translational_block(self, sensor_config):
        K = np.array([[2e7, 1e6, 0], [5e5, 2.5e7, 0], [0, 0, 2.85e8]])
        c = simulate_campaign(SynthSpec(K, sensor_config, translational_load_cases(), hysteresis=1e-6))
        ident = identify(c)
        assert ident.block_id == "BW" and ident.stiffness.shape == (3, 3)
        assert _rel(ident.stiffness, K) < 1e-10
        assert ident.error_matrix.shape == (3, 3)

    def test_noise_degrades_recovery(self):
        """Mean recovered-K error and mean error_percent both grow with sigma."""
        errs, pct = [], []
        for sigma in (2e-8, 1e-7, 5e-7):
            e, p = [], []
            for seed in range(50):
                spec = tool_block_like_spec(seed, sigma=sigma)
                ident = identify(simulate_campaign(spec))
                e.append(_rel(ident.stiffness, spec.K_true))
                p.append(ident.error_matrix.mean())
            errs.append(np.mean(e))
            pct.append(np.mean(p))
        assert errs[0] < errs[1] < errs[2]
        assert pct[0] < pct[1] < pct[2]


class TestSpecFile:
    def test_bt_fixture(self):
        spec = load_spec(FIXTURES / "synth_bt.json")
        assert spec.block_id == "BT" and spec.repetitions == 5
        np.testing.assert_allclose(spec.sensor_config.pairs[0].spacing, 0.1)
        np.testing.assert_array_equal(spec.K_true, tool_block_like_spec(0).K_true)

    def test_bw_fixture(self):
        spec = load_spec(FIXTURES / "synth_bw.json")
        assert spec.block_id == "BW" and len(spec.cases) == 3

    def test_missing_key(self):
        doc = load_fixture("synth_bw.json")
        del doc["K_true"]
        with pytest.raises(SchemaError):
            spec_from_dict(doc)
