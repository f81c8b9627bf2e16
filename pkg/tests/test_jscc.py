import math
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from ceobounds.density import Gaussian, Laplace, SourceDensity, Tabulated, Uniform
from ceobounds.errors import KappaUnavailable, SamplerUnavailable
from ceobounds.jscc import (
    CSV_HEADER,
    JsccScenario,
    agents_required,
    analog_distortion_closed_form,
    analog_distortion_linear,
    centralized_floor,
    digital_distortion_floor,
    fit_scaling,
    scaling_sweep,
    simulate_analog,
)

G = Gaussian(0.0, 1.0)


def ones(m=4, density=G, **kw):
    return JsccScenario(density, m, 1.0, 1.0, 1.0, **kw)


class TestScenario:
    @pytest.mark.parametrize(
        "kw", [dict(m=0), dict(obs_noise_var=0.0), dict(power=-1.0), dict(channel_noise_var=0.0), dict(samples=0), dict(gain=0.0)]
    )
    def test_validation(self, kw):
        base = dict(density=G, m=2, obs_noise_var=1.0, power=1.0, channel_noise_var=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            JsccScenario(**base)

    def test_encoder_meets_power(self):
        s = JsccScenario(G, 3, 0.5, 2.0, 1.0)
        assert s.encoder_gain**2 * (1.0 + 0.5) == pytest.approx(2.0)


class TestDigital:
    def test_all_ones(self):
        assert digital_distortion_floor(ones()) == pytest.approx(1 / (math.log(17) + 1), abs=1e-12)

    def test_no_power_limit(self):
        s = JsccScenario(Laplace(0.0, 1.0), 4, 1.0, 1e-300, 1.0)
        assert digital_distortion_floor(s) == pytest.approx(1.0, rel=1e-9)  # N(X)/kappa = 1/J

    def test_laplace_same_as_gaussian(self):
        assert digital_distortion_floor(ones(density=Laplace(0.0, 1.0))) == pytest.approx(0.26088, abs=1e-5)

    @settings(max_examples=40, deadline=None)
    @given(vx=st.floats(0.1, 5), vz=st.floats(0.1, 5), p=st.floats(0.01, 10), vc=st.floats(0.01, 10), m=st.integers(1, 500))
    def test_gaussian_hand_formula(self, vx, vz, p, vc, m):
        s = JsccScenario(Gaussian(0.0, vx), m, vz, p, vc)
        hand = vz * vx / (vx * math.log(1 + m * m * p / vc) + vz)
        assert digital_distortion_floor(s) == pytest.approx(hand, rel=1e-12)

    def test_kappa_unavailable(self):
        with pytest.raises(KappaUnavailable):
            digital_distortion_floor(ones(density=Uniform(0.0, 1.0)))


class TestAnalogClosedForm:
    def test_values(self):
        assert analog_distortion_closed_form(ones()) == pytest.approx(3 / 11, abs=1e-15)
        assert analog_distortion_closed_form(ones(m=1)) == pytest.approx(0.75)

    def test_noiseless_channel(self):
        s = JsccScenario(G, 5, 1.0, 1.0, 1e-14)
        assert analog_distortion_closed_form(s) == pytest.approx(1 / 6, rel=1e-12)

    def test_symbolic_lmmse_oracle(self):
        vx, vz, vc, p, m = sp.symbols("vx vz vc p m", positive=True)
        g = sp.sqrt(p / (vx + vz))
        c = g * m * vx / (g**2 * (m**2 * vx + m * vz) + vc)
        mse = vx - c * g * m * vx
        closed = vx * vz / (m * vx + vz) * (1 + m * (vx * vc / vz) / ((m * vx + vz) / (vx + vz) * m * p + vc))
        assert sp.simplify(mse - closed) == 0

    @settings(max_examples=60, deadline=None)
    @given(vx=st.floats(0.1, 5), vz=st.floats(0.1, 5), p=st.floats(0.01, 10), vc=st.floats(0.01, 10), m=st.integers(1, 200))
    def test_properties(self, vx, vz, p, vc, m):
        s = JsccScenario(Gaussian(0.0, vx), m, vz, p, vc)
        d = analog_distortion_closed_form(s)
        assert d >= centralized_floor(s) * (1 - 1e-12)
        assert d == pytest.approx(analog_distortion_linear(s), rel=1e-10)
        assert analog_distortion_closed_form(replace(s, m=m + 1)) <= d * (1 + 1e-12)
        dig = digital_distortion_floor(s)
        assert digital_distortion_floor(replace(s, m=m + 1)) <= dig * (1 + 1e-12)
        assert digital_distortion_floor(replace(s, power=2 * p)) <= dig * (1 + 1e-12)


class TestSimulation:
    def test_single_sample(self):
        est = simulate_analog(ones(samples=1))
        assert est.n == 1 and math.isnan(est.stderr) and math.isfinite(est.mean)

    def test_deterministic_and_worker_independent(self):
        s = ones(samples=150_000, seed=11)
        a = simulate_analog(s)
        b = simulate_analog(s, workers=3)
        assert a == b

    def test_seed_changes_draws(self):
        assert simulate_analog(ones(samples=1000, seed=1)).mean != simulate_analog(ones(samples=1000, seed=2)).mean

    @pytest.mark.parametrize("density", [Laplace.unit_variance(), Uniform(-1.0, 3.0), Gaussian(2.0, 0.5)])
    def test_matches_closed_form(self, density):
        s = ones(density=density, samples=200_000, seed=3)
        est = simulate_analog(s)
        assert abs(est.mean - analog_distortion_closed_form(s)) <= 4 * est.stderr

    def test_gain_override_matches_linear_formula(self):
        s = ones(samples=200_000, seed=8, gain=0.3)
        est = simulate_analog(s)
        assert abs(est.mean - analog_distortion_linear(s)) <= 4 * est.stderr
        assert analog_distortion_linear(s) != pytest.approx(analog_distortion_closed_form(s))

    def test_tabulated_source(self):
        x = np.linspace(-8, 8, 1601)
        tab = Tabulated(x=x, values=np.exp(-np.abs(x)))
        s = ones(density=tab, samples=100_000, seed=5)
        est = simulate_analog(s)
        assert abs(est.mean - analog_distortion_closed_form(s)) <= 4 * est.stderr

    def test_sampler_unavailable(self):
        class NoSampler(SourceDensity):
            mean = 0.0
            variance = 1.0

        with pytest.raises(SamplerUnavailable):
            simulate_analog(ones(density=NoSampler(), samples=10))


class TestSweep:
    def test_single_point_matches_point_operations(self):
        (row,) = scaling_sweep(ones(samples=5000, seed=2), [4])
        s = ones(samples=5000, seed=2)
        assert row.digital_floor == digital_distortion_floor(s)
        assert row.analog_closed == analog_distortion_closed_form(s)
        assert row.analog_sim_mean == simulate_analog(s).mean
        assert tuple(row.as_tuple()[:1]) == (4,)
        assert CSV_HEADER == ("m", "digital_floor", "analog_closed", "analog_sim_mean", "analog_sim_stderr", "samples", "seed")

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            scaling_sweep(ones(), [])
        with pytest.raises(ValueError):
            scaling_sweep(ones(), [4, 2])

    def test_asymptotic_trends(self):
        ms = [2**k for k in range(1, 11)]
        rows = scaling_sweep(ones(), ms, simulate=False)
        scaled = [r.digital_floor * math.log(r.m**2 + 1) for r in rows]
        assert abs(scaled[-1] - 1.0) < abs(scaled[0] - 1.0)
        assert rows[-1].analog_closed * rows[-1].m == pytest.approx(1.0, rel=5e-3)
        fit = fit_scaling(rows)
        assert fit.digital_coef > 0 and fit.analog_coef == pytest.approx(1.0, rel=0.1)

    def test_agents_required(self):
        need = agents_required(ones(), 0.05)
        assert need.analog == 21
        assert analog_distortion_closed_form(ones(m=20)) > 0.05 >= analog_distortion_closed_form(ones(m=21))
        assert digital_distortion_floor(ones(m=need.digital)) <= 0.05 < digital_distortion_floor(ones(m=need.digital - 1))
        assert need.ratio > 100

    def test_unreachable_target(self):
        need = agents_required(ones(), 1e-12, limit=1 << 20)
        assert need.digital is None and math.isinf(need.ratio)
