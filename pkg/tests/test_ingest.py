import copy
import json

import numpy as np
import pytest

from machstiff.errors import GeometryError, RankError, SchemaError
from machstiff.ingest import (
    SensorConfig,
    SensorPair,
    campaign_from_csv,
    campaign_from_dict,
    campaign_to_dict,
    default_sensor_config,
    dumps_exact,
    load_json_exact,
    parse_campaign,
    reading_matrix,
    readings_to_twist,
    twist_to_reading_matrix,
    write_campaign,
)
from machstiff.synth import default_load_cases


def _doc(campaign) -> dict:
    return load_json_exact(dumps_exact(campaign_to_dict(campaign)))


class TestSensorModel:
    def test_forward_and_inverse(self, sensor_config):
        G = twist_to_reading_matrix(sensor_config)
        np.testing.assert_allclose(reading_matrix(sensor_config) @ G, np.eye(6), atol=1e-12)

    def test_pair_formulas(self, sensor_config):
        # pair 1 reads x, split along z: mean -> eps_x, difference / a -> rho_y
        m = np.array([1e-6, 3e-6, 0, 0, 0, 0])
        t = readings_to_twist(m, sensor_config)
        assert t.translation[0] == pytest.approx(2e-6)
        assert t.rotation[1] == pytest.approx(2e-6 / 0.1)

    def test_spacing_zero_rejected(self):
        with pytest.raises(GeometryError):
            default_sensor_config(0.0)

    def test_duplicate_sensor_index(self):
        x, y, z = (1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)
        with pytest.raises(GeometryError):
            SensorConfig((SensorPair(x, z, 0.1, (1, 2)), SensorPair(y, x, 0.1, (1, 4)), SensorPair(z, y, 0.1, (5, 6))))

    def test_degenerate_rotation_axes(self):
        x, y, z = (1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)
        with pytest.raises(GeometryError):
            SensorConfig((SensorPair(x, z, 0.1, (1, 2)), SensorPair(y, z, 0.1, (3, 4)), SensorPair(z, x, 0.1, (5, 6))))


class TestJson:
    def test_round_trip_bit_exact(self, noisy_campaign, tmp_path):
        path = tmp_path / "c.json"
        write_campaign(noisy_campaign, path)
        assert parse_campaign(path) == noisy_campaign

    def test_write_is_deterministic(self, noisy_campaign, tmp_path):
        write_campaign(noisy_campaign, tmp_path / "a.json")
        write_campaign(parse_campaign(tmp_path / "a.json"), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_unit_conversion(self, noiseless_campaign):
        _, c = noiseless_campaign
        doc = _doc(c)
        step = doc["cases"][0]["steps"][0]
        assert float(step["force_daN"]) == pytest.approx(30.0)
        assert float(doc["sensor_config"]["pairs"][0]["spacing_mm"]) == pytest.approx(100.0)

    def test_wrong_unit_tag(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        step = doc["cases"][0]["steps"][0]
        step["force_N"] = step.pop("force_daN")
        with pytest.raises(SchemaError, match="wrong unit tag"):
            campaign_from_dict(doc)

    def test_extra_key_rejected(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        doc["operator"] = "someone"
        with pytest.raises(SchemaError):
            campaign_from_dict(doc)

    def test_five_cases_rank_error(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        doc["cases"] = doc["cases"][:5]
        with pytest.raises(RankError):
            campaign_from_dict(doc)

    def test_repetition_series_averaged(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        doc["repetitions"] = 2
        for case in doc["cases"]:
            for s in case["steps"]:
                r = s["readings_um"]
                s["readings_um"] = [r, r]
        c = campaign_from_dict(doc)
        ref = noiseless_campaign[1]
        np.testing.assert_allclose(c.cases[0].steps[3].readings.values, ref.cases[0].steps[3].readings.values, rtol=1e-15)
        assert c.cases[0].steps[3].readings.std == (0.0,) * 6

    def test_repetition_count_mismatch(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        doc["repetitions"] = 3
        s = doc["cases"][0]["steps"][0]
        s["readings_um"] = [s["readings_um"]] * 2
        with pytest.raises(SchemaError):
            campaign_from_dict(doc)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(SchemaError):
            parse_campaign(p)

    def test_single_charge_step_rejected(self, noiseless_campaign):
        doc = _doc(noiseless_campaign[1])
        doc["cases"][0]["steps"] = [s for s in doc["cases"][0]["steps"] if s["phase"] == "discharge"] + \
            [next(s for s in doc["cases"][0]["steps"] if s["phase"] == "charge")]
        with pytest.raises(SchemaError):
            campaign_from_dict(doc)


class TestCsv:
    def test_matches_json_campaign(self, noiseless_campaign, tmp_path):
        _, c = noiseless_campaign
        doc = _doc(c)
        lines = ["case,phase,force_daN,m1,m2,m3,m4,m5,m6"]
        for case in doc["cases"]:
            for s in case["steps"]:
                row = [case["label"], s["phase"], str(s["force_daN"])] + [str(v) for v in s["readings_um"]]
                lines += [",".join(row)] * 2
        path = tmp_path / "log.csv"
        path.write_text("\n".join(lines) + "\n")
        geo = {g.label: (g.direction, g.applied_at) for g in default_load_cases()}
        from_csv = campaign_from_csv(path, "BT", c.sensor_config, geo)
        assert from_csv.repetitions == 2
        for a, b in zip(from_csv.cases, c.cases):
            for sa, sb in zip(a.steps, b.steps):
                assert sa.force == sb.force
                np.testing.assert_allclose(sa.readings.values, sb.readings.values, rtol=1e-15, atol=0)

    def test_missing_column(self, tmp_path, sensor_config):
        path = tmp_path / "log.csv"
        path.write_text("case,phase,force_daN,m1\n")
        with pytest.raises(SchemaError):
            campaign_from_csv(path, "BT", sensor_config, {})
