import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from machstiff.errors import DegenerateAbscissa, LevelMismatch, ValidationError, ZeroScale
from machstiff.fitting import ChargePath, error_percent, fit_line, midline, midline_plot, paths_from_series

LEVELS = [300.0, 600.0, 900.0, 1200.0, 1500.0, 1800.0, 2000.0]


def _paths(slope, h, noise=None):
    f = np.array(LEVELS)
    up = slope * f + h
    down = slope * f - h
    if noise is not None:
        up, down = up + noise[0], down + noise[1]
    return ChargePath(tuple(zip(f, up)), "charge"), ChargePath(tuple(zip(f[::-1], down[::-1])), "discharge")


class TestFitLine:
    def test_exact_line(self):
        s, b, rms = fit_line([(0, 1), (1, 3), (2, 5)])
        assert (s, b) == pytest.approx((2.0, 1.0))
        assert rms == pytest.approx(0.0, abs=1e-15)

    def test_equal_forces(self):
        with pytest.raises(DegenerateAbscissa):
            fit_line([(1, 1), (1, 2)])

    def test_matches_polyfit(self):
        rng = np.random.default_rng(0)
        x, y = rng.uniform(0, 10, 20), rng.normal(size=20)
        s, b, _ = fit_line(np.column_stack([x, y]))
        np.testing.assert_allclose([s, b], np.polyfit(x, y, 1), rtol=1e-12)


class TestMidline:
    def test_hysteresis_cancels(self):
        fit = midline(*_paths(1e-8, 3e-6))
        assert fit.slope == pytest.approx(1e-8, rel=1e-12)
        assert fit.intercept == pytest.approx(0.0, abs=1e-18)
        assert fit.error_percent < 1e-9
        np.testing.assert_allclose(fit.half_widths, 3e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e-6, 1e-6).filter(lambda v: abs(v) > 1e-12), st.floats(0, 1e-4))
    def test_symmetric_offset_property(self, slope, h):
        fit = midline(*_paths(slope, h))
        assert fit.slope == pytest.approx(slope, rel=1e-9)

    def test_charge_only(self):
        ch, _ = _paths(2e-8, 0.0)
        fit = midline(ch)
        assert fit.slope == pytest.approx(2e-8)
        assert fit.half_widths == (0.0,) * len(LEVELS)

    def test_level_mismatch(self):
        ch, dis = _paths(1e-8, 1e-6)
        dis = ChargePath(tuple((f + (5.0 if f == 900.0 else 0.0), v) for f, v in dis.points), "discharge")
        with pytest.raises(LevelMismatch) as exc:
            midline(ch, dis)
        assert 900.0 in exc.value.levels

    def test_non_monotone_path(self):
        with pytest.raises(ValidationError):
            ChargePath(((0, 0), (2, 1), (1, 2)))

    def test_error_percent_definition(self):
        rng = np.random.default_rng(2)
        fit = midline(*_paths(1e-8, 1e-6, rng.normal(0, 1e-7, (2, len(LEVELS)))))
        r = np.asarray(fit.residuals)
        expected = 100 * np.sqrt(np.mean(r**2)) / np.max(np.abs(fit.midpoints))
        assert fit.error_percent == pytest.approx(expected)

    def test_zero_scale(self):
        assert error_percent(0.0, 0.0) == 0.0
        with pytest.raises(ZeroScale):
            error_percent(1e-9, 0.0)

    def test_paths_from_series(self):
        ch, dis = paths_from_series([1, 2, 2, 1], [1, 2, 3, 4], ["charge", "charge", "discharge", "discharge"])
        assert ch.points == ((1.0, 1.0), (2.0, 2.0))
        assert dis.points == ((2.0, 3.0), (1.0, 4.0))

    def test_plot_is_deterministic(self):
        ch, dis = _paths(1e-8, 1e-6)
        fit = midline(ch, dis)
        a = midline_plot(ch, dis, fit, "case")
        assert a == midline_plot(ch, dis, fit, "case")
        assert a.startswith("<svg") and "midline" in a
