import math

import numpy as np
import pytest

from pipedrive.errors import InvalidSpecError, ResonanceError, StabilityError
from pipedrive.model import LoadPulse, derive_pipe
from pipedrive.radial import (
    Oscillogram,
    asymptote_step,
    asymptote_valid,
    oracle_constants,
    pulsed_response,
    radial_energy,
    radial_grid,
    solve_radial,
    validity_window,
)

from conftest import P0_REF, ref_pipe, ref_soil


class TestAsymptote:
    def test_reference_value(self):
        # 88e3 / (2 pi 2.549e8) * ln(2*357*0.02/0.045)
        G = 2000 * 357.0**2
        expected = 88e3 / (2 * math.pi * G) * math.log(2 * 357 * 0.02 / 0.045)
        got = asymptote_step(ref_pipe(), ref_soil(20.0), P0_REF, 0.02)
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(3.17e-4, rel=3e-3)

    def test_zero_at_log_origin(self):
        t = 0.045 / (2 * 357.0)
        assert asymptote_step(ref_pipe(), ref_soil(20.0), P0_REF, t) == pytest.approx(0.0, abs=1e-18)
        assert not asymptote_valid(ref_pipe(), ref_soil(20.0), t * 0.5)
        assert asymptote_valid(ref_pipe(), ref_soil(20.0), t * 2)

    def test_doubling_adds_log2(self):
        p, s = ref_pipe(), ref_soil(20.0)
        d = asymptote_step(p, s, P0_REF, 0.04) - asymptote_step(p, s, P0_REF, 0.02)
        assert d == pytest.approx(P0_REF * math.log(2) / (2 * math.pi * s.G), rel=1e-12)

    def test_domain(self):
        with pytest.raises(InvalidSpecError):
            asymptote_step(ref_pipe(), ref_soil(20.0), P0_REF, 0.0)

    def test_vectorised(self):
        out = asymptote_step(ref_pipe(), ref_soil(20.0), P0_REF, np.array([0.01, 0.02]))
        assert out.shape == (2,)

    def test_window(self):
        lo, hi = validity_window(ref_pipe(), ref_soil(20.0))
        assert lo == pytest.approx(10 * 0.045 / 357)
        assert hi == pytest.approx(2 * (20 - 0.045) / 357)


class TestOracleConstants:
    def test_reference_values(self):
        k = oracle_constants(ref_pipe(), ref_soil(2.0), P0_REF)
        G = 2000 * 357.0**2
        assert k.U_stat == pytest.approx(P0_REF * math.log(2.0 / 0.045) / (2 * math.pi * G), rel=1e-14)
        assert k.U_stat == pytest.approx(2.085e-4, rel=1e-3)
        assert k.beta == pytest.approx(8268.6, rel=1e-4)
        assert k.U0 == pytest.approx(k.U_stat, rel=1e-15)

    def test_euler_radius(self):
        s = ref_soil(0.045 * math.e)
        assert oracle_constants(ref_pipe(), s, P0_REF).U_stat == pytest.approx(P0_REF / (2 * math.pi * s.G), rel=1e-14)

    def test_requires_r2_beyond_r(self):
        with pytest.raises(InvalidSpecError):
            oracle_constants(ref_pipe(), ref_soil(0.04), P0_REF)


class TestPulsedResponse:
    def setup_method(self):
        self.pipe, self.soil = ref_pipe(), ref_soil(2.0)
        self.k = oracle_constants(self.pipe, self.soil, P0_REF)

    def test_zero_at_start(self):
        load = LoadPulse.half_sine(P0_REF, 1e-3)
        assert pulsed_response(self.pipe, self.k, load, 0.0) == 0.0

    def test_slow_pulse_matches_simplified(self):
        t0 = math.pi / (self.k.beta / 100)
        load = LoadPulse.half_sine(P0_REF, t0)
        exact = pulsed_response(self.pipe, self.k, load, t0 / 2)
        simple = pulsed_response(self.pipe, self.k, load, t0 / 2, simplified=True)
        assert simple == pytest.approx(self.k.U0, rel=1e-12)
        assert exact == pytest.approx(simple, rel=0.03)

    def test_continuous_at_pulse_end(self):
        load = LoadPulse.half_sine(P0_REF, 0.37e-3)
        before = pulsed_response(self.pipe, self.k, load, load.t0)
        after = pulsed_response(self.pipe, self.k, load, load.t0 * (1 + 1e-12))
        assert after == pytest.approx(before, rel=1e-6, abs=1e-15)

    def test_solves_oscillator(self):
        # independent check: U'' + beta^2 U = Q/m by central differences of the closed form
        load = LoadPulse.half_sine(P0_REF, 0.5e-3)
        m = derive_pipe(self.pipe).S_t * self.pipe.rho
        t = np.array([0.1e-3, 0.3e-3, 0.8e-3, 1.5e-3])
        h = 1e-8
        U = lambda x: pulsed_response(self.pipe, self.k, load, x)
        acc = (U(t + h) - 2 * U(t) + U(t - h)) / h**2
        Q = np.where(t < load.t0, P0_REF * np.sin(load.omega_star * t), 0.0)
        np.testing.assert_allclose(acc + self.k.beta**2 * U(t), Q / m, rtol=1e-4, atol=1e-3 * P0_REF / m)

    def test_resonance(self):
        load = LoadPulse.half_sine(P0_REF, math.pi / self.k.beta)
        with pytest.raises(ResonanceError):
            pulsed_response(self.pipe, self.k, load, 1e-4)

    def test_needs_half_sine(self):
        with pytest.raises(InvalidSpecError):
            pulsed_response(self.pipe, self.k, LoadPulse.step(1.0), 1e-4)


class TestSolveRadial:
    def test_zero_load(self):
        o = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.step(0.0), 0.01)
        assert np.all(o.U == 0)

    def test_starts_at_rest(self):
        o = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.step(P0_REF), 0.001)
        assert o.t[0] == 0 and o.U[0] == 0
        assert o.t[-1] >= 0.001 - 1e-15

    def test_linear_in_load(self):
        a = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.half_sine(P0_REF, 1e-3), 0.02)
        b = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.half_sine(3.7 * P0_REF, 1e-3), 0.02)
        scale = np.max(np.abs(b.U))
        assert np.max(np.abs(b.U - 3.7 * a.U)) <= 1e-10 * scale

    def test_probe_stride(self):
        a = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.step(P0_REF), 0.005)
        b = solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.step(P0_REF), 0.005, probe_stride=5)
        np.testing.assert_array_equal(b.U[1:], a.U[5::5][: b.U.size - 1])

    def test_unstable_step_rejected(self):
        with pytest.raises(StabilityError):
            radial_grid(ref_pipe(), ref_soil(2.0), 0.01, h_t=2 * 0.01 / 357)

    def test_grid_fits_annulus(self):
        g = radial_grid(ref_pipe(), ref_soil(2.0), 0.01)
        assert g.r[-1] == pytest.approx(2.0, rel=1e-12)
        assert g.h_r <= 0.01

    def test_bad_horizon(self):
        with pytest.raises(InvalidSpecError):
            solve_radial(ref_pipe(), ref_soil(2.0), LoadPulse.step(P0_REF), 0.0)

    def test_energy_balance_fine_grid(self):
        # the one-sided coupling row is not energy-neutral; its defect vanishes under refinement
        pipe, soil = ref_pipe(), ref_soil(2.0)
        drifts = []
        for h_r in (0.005, 0.0025):
            t, e, w = radial_energy(pipe, soil, LoadPulse.step(P0_REF), radial_grid(pipe, soil, h_r), 10_000)
            drifts.append(np.max(np.abs(e - w)) / np.max(np.abs(w)))
        assert drifts[1] <= 0.005
        assert drifts[1] < drifts[0]

    def test_oscillogram_csv(self, tmp_path):
        o = Oscillogram(np.array([0.0, 1e-3]), np.array([0.0, 1.5e-4]))
        o.to_csv(tmp_path / "u.csv")
        text = (tmp_path / "u.csv").read_text().splitlines()
        assert text[0] == "t_s,U_m"
        assert float(text[2].split(",")[1]) == 1.5e-4


@pytest.mark.xfail(strict=True, reason="clamped annulus rings without loss; a 2*pi/beta window does not filter its modes")
def test_running_mean_settles_to_static():
    pipe, soil = ref_pipe(), ref_soil(2.0)
    k = oracle_constants(pipe, soil, P0_REF)
    o = solve_radial(pipe, soil, LoadPulse.step(P0_REF), 0.1, h_r=0.005)
    n = int(round(2 * math.pi / k.beta / (o.t[1] - o.t[0])))
    mean = np.convolve(o.U, np.ones(n) / n, "valid")
    late = o.t[n - 1:] > 10 * (soil.R2 - pipe.R) / 357
    assert np.all(np.abs(mean[late] / k.U_stat - 1) <= 0.05)
