import math

import numpy as np
import pytest

from machstiff.errors import ValidationError
from machstiff.sizing import BeamSpec, deflection, sweep_csv, sweep_lengths, sweep_plot

STEEL = BeamSpec(P=1000.0, L=180.0, E=2.1e5, D=60.0)


class TestDeflection:
    def test_reference_fixture(self):
        d, k = deflection(STEEL)
        assert STEEL.inertia == pytest.approx(6.3617e5, rel=1e-4)
        assert d == pytest.approx(0.0146, rel=5e-3)
        assert k == pytest.approx(6.9e7, rel=0.02)

    def test_cubic_in_length(self):
        d1, _ = deflection(STEEL)
        d2, _ = deflection(BeamSpec(1000.0, 360.0, 2.1e5, 60.0))
        assert d2 / d1 == pytest.approx(8.0, rel=1e-14)

    def test_quartic_in_diameter(self):
        _, k1 = deflection(STEEL)
        _, k2 = deflection(BeamSpec(1000.0, 180.0, 2.1e5, 120.0))
        assert k2 / k1 == pytest.approx(16.0, rel=1e-14)

    @pytest.mark.parametrize("P", [1.0, 250.0, 4000.0])
    def test_homogeneous_in_force(self, P):
        d, k = deflection(BeamSpec(P, 180.0, 2.1e5, 60.0))
        d0, k0 = deflection(STEEL)
        assert d == pytest.approx(d0 * P / 1000.0, rel=1e-14)
        assert k == pytest.approx(k0, rel=1e-14)

    def test_si_equivalence(self):
        P, L, E, D = 1000.0, 0.18, 2.1e11, 0.06
        k_si = 3 * E * (math.pi * D**4 / 64) / L**3
        assert deflection(STEEL)[1] == pytest.approx(k_si, rel=1e-12)

    @pytest.mark.parametrize("field", ["P", "L", "E", "D"])
    def test_positive(self, field):
        kw = dict(P=1.0, L=1.0, E=1.0, D=1.0)
        kw[field] = 0.0
        with pytest.raises(ValidationError):
            BeamSpec(**kw)


class TestSweep:
    def test_single_point(self):
        rows = sweep_lengths(STEEL, 180.0, 180.0, 10.0)
        assert len(rows) == 1 and (rows[0].delta, rows[0].k) == deflection(STEEL)

    def test_monotone_and_cubic(self):
        rows = sweep_lengths(STEEL, 100.0, 300.0, 10.0)
        d = np.array([r.delta for r in rows])
        k = np.array([r.k for r in rows])
        assert np.all(np.diff(d) > 0) and np.all(np.diff(k) < 0)
        by_L = {r.L: r.delta for r in rows}
        assert by_L[200.0] / by_L[100.0] == pytest.approx(8.0, rel=1e-14)
        assert any(r.L == 180.0 and 1e7 <= r.k <= 1e8 for r in rows)

    def test_bad_range(self):
        with pytest.raises(ValidationError):
            sweep_lengths(STEEL, 300.0, 100.0, 10.0)
        with pytest.raises(ValidationError):
            sweep_lengths(STEEL, 100.0, 300.0, 0.0)

    def test_outputs(self):
        rows = sweep_lengths(STEEL, 100.0, 120.0, 10.0)
        assert sweep_csv(rows).splitlines()[0] == "L_mm,delta_mm,k_N_per_m"
        assert len(sweep_csv(rows).splitlines()) == 4
        assert sweep_plot(rows, STEEL).startswith("<svg")
