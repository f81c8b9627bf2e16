import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ceobounds.density import (
    Gaussian,
    GaussianMixture,
    Laplace,
    SourceDensity,
    Tabulated,
    Uniform,
    gaussian_equivalent,
    make_density,
    parse_density,
)
from ceobounds.errors import ConfigError, ConvolutionUnderresolved, SamplerUnavailable
from ceobounds.information import (
    entropy,
    entropy_power,
    fisher_information,
    gaussian_smoothed_entropy_power,
    smoothed_entropy,
)

TWO_PI_E = 2 * math.pi * math.e


def grid_entropy(pdf, lo, hi, n=400_001):
    """Independent oracle: trapezoid of -f log f on a dense grid."""
    x = np.linspace(lo, hi, n)
    f = pdf(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(f > 0, -f * np.log(f), 0.0)
    return float(np.trapezoid(g, x))


def gaussian_blur(pdf, lo, hi, s, n=200_001):
    """Independent oracle: direct convolution with a Gaussian kernel on a grid."""
    x = np.linspace(lo, hi, n)
    dx = x[1] - x[0]
    k = np.arange(-int(8 * math.sqrt(s) / dx), int(8 * math.sqrt(s) / dx) + 1) * dx
    kern = np.exp(-k**2 / (2 * s)) / math.sqrt(2 * math.pi * s) * dx
    return x, np.convolve(pdf(x), kern, mode="same")


class TestClosedForms:
    def test_gaussian_entropy_and_power(self):
        g = Gaussian(0.0, 2.5)
        assert entropy(g) == pytest.approx(0.5 * math.log(TWO_PI_E * 2.5), abs=1e-14)
        assert entropy_power(g) == 2.5
        assert entropy_power(g, numeric=True) == pytest.approx(2.5, rel=1e-10)
        assert fisher_information(g) == pytest.approx(1 / 2.5)

    def test_laplace(self):
        d = Laplace(0.3, 0.7)
        assert d.variance == pytest.approx(2 * 0.49)
        assert entropy(d) == pytest.approx(1 + math.log(1.4), abs=1e-12)
        assert entropy(d, numeric=True) == pytest.approx(1 + math.log(1.4), abs=1e-10)
        assert fisher_information(d) == pytest.approx(1 / 0.49)
        assert entropy_power(d) == pytest.approx(math.exp(2 + 2 * math.log(1.4)) / TWO_PI_E)

    def test_unit_variance_laplace(self):
        assert Laplace.unit_variance().variance == pytest.approx(1.0)

    def test_uniform(self):
        d = Uniform(-1.0, 3.0)
        assert d.variance == pytest.approx(16 / 12)
        assert entropy(d) == pytest.approx(math.log(4.0))
        assert entropy(d, numeric=True) == pytest.approx(math.log(4.0), abs=1e-10)
        assert math.isinf(fisher_information(d))

    def test_mixture_entropy_matches_grid_oracle(self):
        d = GaussianMixture((0.3, 0.7), (-1.0, 1.5), (0.4, 0.9))
        oracle = grid_entropy(d.pdf, -12, 14)
        assert entropy(d) == pytest.approx(oracle, abs=1e-8)
        assert d.mean == pytest.approx(0.3 * -1 + 0.7 * 1.5)
        second = 0.3 * (0.4 + 1.0) + 0.7 * (0.9 + 2.25)
        assert d.variance == pytest.approx(second - d.mean**2)

    def test_mixture_weights_normalised(self):
        d = GaussianMixture((1.0, 3.0), (0.0, 1.0), (1.0, 1.0))
        assert d.weights == pytest.approx((0.25, 0.75))


class TestSmoothing:
    @pytest.mark.parametrize(
        "dens", [Laplace(0.0, 1.0), Uniform(0.0, 1.0), GaussianMixture((0.5, 0.5), (-1.0, 1.0), (0.3, 0.3))]
    )
    def test_smoothed_pdf_matches_direct_convolution(self, dens):
        s = 0.05
        lo, hi = dens.quadrature_range(0.0)
        x, blurred = gaussian_blur(dens.pdf, lo - 3, hi + 3, s)
        sel = slice(len(x) // 4, 3 * len(x) // 4)
        np.testing.assert_allclose(np.exp(dens.smoothed_logpdf(x[sel], s)), blurred[sel], atol=2e-5)

    def test_smoothed_gaussian_is_gaussian(self):
        g = Gaussian(1.0, 0.5)
        assert gaussian_smoothed_entropy_power(g, 0.25) == pytest.approx(0.75)
        assert smoothed_entropy(g, 0.25) == pytest.approx(0.5 * math.log(TWO_PI_E * 0.75))

    def test_smoothed_score_is_log_derivative(self):
        d = Laplace(0.0, 1.0)
        x = np.linspace(-4, 4, 41)
        h = 1e-6
        fd = (d.smoothed_logpdf(x + h, 0.3) - d.smoothed_logpdf(x - h, 0.3)) / (2 * h)
        np.testing.assert_allclose(d.smoothed_score(x, 0.3), fd, atol=1e-6)

    def test_negative_smoothing_rejected(self):
        with pytest.raises(ValueError):
            smoothed_entropy(Laplace(0, 1), -0.1)

    @settings(max_examples=25, deadline=None)
    @given(
        family=st.sampled_from(["laplace", "uniform", "mixture"]),
        scale=st.floats(0.2, 3.0),
        s=st.floats(1e-3, 5.0),
    )
    def test_entropy_power_inequality(self, family, scale, s):
        if family == "laplace":
            d = Laplace(0.0, scale)
        elif family == "uniform":
            d = Uniform(0.0, scale)
        else:
            d = GaussianMixture((0.4, 0.6), (-scale, scale), (0.2 * scale, 0.5 * scale))
        assert gaussian_smoothed_entropy_power(d, s) >= entropy_power(d) + s - 1e-10

    @settings(max_examples=25, deadline=None)
    @given(var=st.floats(0.05, 20.0), mean=st.floats(-5, 5))
    def test_gaussian_maximises_entropy_power(self, var, mean):
        for d in (Laplace(mean, math.sqrt(var / 2)), Uniform(mean, mean + math.sqrt(12 * var))):
            assert entropy_power(d) <= d.variance * (1 + 1e-12)
            assert gaussian_equivalent(d).variance == pytest.approx(d.variance)


class TestTabulated:
    def test_file_round_trip(self, tmp_path):
        x = np.linspace(-30, 30, 6001)
        lap = Laplace(0.0, 1.0)
        tab = Tabulated(x=x, values=lap.pdf(x))
        path = tmp_path / "lap.txt"
        tab.to_file(path)
        back = Tabulated.from_file(path)
        np.testing.assert_allclose(back.values, tab.values)
        assert back.variance == pytest.approx(lap.variance, rel=1e-3)
        assert entropy(back) == pytest.approx(entropy(lap), abs=1e-3)

    def test_grid_header_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("# grid=5\n0 0\n1 1\n2 0\n")
        with pytest.raises(ConfigError):
            Tabulated.from_file(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 0\n1 1\n2 0\n")
        with pytest.raises(ConfigError):
            Tabulated.from_file(path)

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(ConfigError):
            Tabulated(x=np.array([0.0, 0.1, 0.3]), values=np.array([0.0, 1.0, 0.0]))

    def test_renormalises(self):
        tab = Tabulated(x=np.linspace(0, 1, 3), values=np.array([0.0, 4.0, 0.0]))
        assert tab.normalization == pytest.approx(0.5)
        assert tab.numeric_mass() == pytest.approx(1.0)

    def test_smoothing_below_grid_resolution(self):
        tab = Tabulated(x=np.linspace(0, 1, 11), values=np.ones(11))
        with pytest.raises(ConvolutionUnderresolved):
            gaussian_smoothed_entropy_power(tab, 1e-4)

    def test_smoothed_entropy_power_close_to_parametric(self):
        x = np.linspace(-15, 15, 6001)
        lap = Laplace(0.0, 1.0)
        tab = Tabulated(x=x, values=lap.pdf(x))
        assert gaussian_smoothed_entropy_power(tab, 0.5) == pytest.approx(
            gaussian_smoothed_entropy_power(lap, 0.5), rel=1e-3
        )

    def test_inverse_cdf_sampler(self):
        x = np.linspace(0, 1, 101)
        tab = Tabulated(x=x, values=np.ones_like(x))
        draws = tab.sample(np.random.default_rng(1), 200_000)
        assert draws.min() >= 0 and draws.max() <= 1
        assert draws.mean() == pytest.approx(0.5, abs=5e-3)


class TestSampling:
    @pytest.mark.parametrize(
        "dens", [Gaussian(1.0, 2.0), Laplace(-0.5, 0.8), Uniform(2.0, 5.0), GaussianMixture((0.2, 0.8), (-2, 1), (0.5, 1.5))]
    )
    def test_sample_moments(self, dens):
        x = dens.sample(np.random.default_rng(7), 400_000)
        assert x.mean() == pytest.approx(dens.mean, abs=6 * dens.std / math.sqrt(x.size))
        assert x.var() == pytest.approx(dens.variance, rel=0.02)

    def test_sampler_unavailable(self):
        class Bare(SourceDensity):
            pass

        with pytest.raises(SamplerUnavailable):
            Bare().sample(np.random.default_rng(0), 3)


class TestParsing:
    def test_parse_families(self):
        assert parse_density("gaussian:variance=2,mean=1") == Gaussian(1.0, 2.0)
        assert parse_density("laplace:b=2").scale == 2.0
        assert parse_density("laplace:variance=1").variance == pytest.approx(1.0)
        assert parse_density("uniform:low=0,high=1") == Uniform(0.0, 1.0)
        mix = parse_density("gaussian-mixture:weights=0.5;0.5,means=-1;1,variances=1;2")
        assert mix.variances == (1.0, 2.0)

    def test_make_density_tabulated(self, tmp_path):
        path = tmp_path / "u.txt"
        Tabulated(x=np.linspace(0, 1, 5), values=np.ones(5)).to_file(path)
        tab = make_density("tabulated", path=str(path))
        assert tab.variance == pytest.approx(1 / 12)

    @pytest.mark.parametrize("text", ["cauchy:scale=1", "laplace:b", "tabulated"])
    def test_bad_strings(self, text):
        with pytest.raises(ConfigError):
            parse_density(text)

    @pytest.mark.parametrize("args", [(0.0, -1.0)])
    def test_invalid_parameters(self, args):
        with pytest.raises(ValueError):
            Gaussian(*args)
        with pytest.raises(ValueError):
            Laplace(*args)
        with pytest.raises(ValueError):
            Uniform(1.0, 0.0)
