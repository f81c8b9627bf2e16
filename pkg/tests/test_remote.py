import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ceobounds.density import Gaussian, GaussianMixture, Laplace, Uniform
from ceobounds.information import entropy_power, remote_stats
from ceobounds.remote import (
    BoundKind,
    RdfHook,
    RdfKind,
    default_rdf,
    epi_explicit_lower,
    epi_explicit_upper_formula,
    epi_remote_lower,
    epi_remote_upper,
    epi_upper_at_rate,
    linear_test_channel_distortion,
    log_plus,
    remote_bounds_table,
    remote_explicit,
    remote_sandwich,
    shannon_bounds,
)

HALF_LN2 = 0.5 * math.log(2)
G11 = Gaussian(0.0, 1.0)
LAP = Laplace(0.0, 1.0)


def test_log_plus():
    assert log_plus(0.5) == 0.0
    assert log_plus(-1.0) == 0.0
    assert log_plus(math.e) == pytest.approx(1.0)


class TestShannon:
    def test_gaussian_tight(self):
        lo, hi = shannon_bounds(G11, 0.5)
        assert lo.value == pytest.approx(HALF_LN2) and hi.value == pytest.approx(HALF_LN2)
        assert lo.kind is BoundKind.LOWER and hi.kind is BoundKind.UPPER

    def test_upper_clamps(self):
        assert shannon_bounds(LAP, 2.0)[1].value == 0.0
        assert shannon_bounds(LAP, 5.0)[1].value == 0.0

    def test_uniform_values(self):
        lo, hi = shannon_bounds(Uniform(0.0, 1.0), 0.01)
        assert lo.value == pytest.approx(0.5 * math.log(100 / (2 * math.pi * math.e)), abs=1e-12)
        assert lo.value == pytest.approx(0.88365, abs=1e-5)
        assert hi.value == pytest.approx(0.5 * math.log(100 / 12), abs=1e-12)


class TestSandwich:
    def test_gaussian_collapse(self):
        lo, hi = remote_sandwich(remote_stats(G11, 1.0), 0.75)
        assert lo.value == pytest.approx(HALF_LN2, abs=1e-12) and hi.value == pytest.approx(HALF_LN2, abs=1e-12)

    def test_upper_zero_at_total_variance(self):
        st_ = remote_stats(LAP, 1.0, mc_samples=0)
        assert remote_sandwich(st_, st_.d0 + st_.var_v)[1].value == 0.0

    @pytest.mark.parametrize("d", [0.5, 0.3])
    def test_invalid_at_or_below_d0(self, d):
        lo, hi = remote_sandwich(remote_stats(G11, 1.0), d)
        assert not lo.valid and not hi.valid and math.isnan(lo.value)


class TestExplicit:
    def test_gaussian_collapse(self):
        lo, hi = remote_explicit(G11, 1.0, 0.75)
        assert lo.value == pytest.approx(HALF_LN2, abs=1e-12)
        assert hi.value == pytest.approx(lo.value, abs=1e-12)

    def test_pole_at_threshold(self):
        st_ = remote_stats(LAP, 1.0, mc_samples=0)
        thr = st_.entropy_power_x / st_.entropy_power_y
        near = remote_explicit(LAP, 1.0, thr * (1 + 1e-9), stats=st_)[0]
        far = remote_explicit(LAP, 1.0, thr * 1.1, stats=st_)[0]
        assert near.value > far.value + 5
        assert not remote_explicit(LAP, 1.0, thr, stats=st_)[0].valid

    def test_laplace_strict_gap(self):
        lo, hi = remote_explicit(LAP, 1.0, 1.0)
        assert lo.valid and hi.valid and lo.value < hi.value
        assert "N(X)N(Z)/N(Y)" in lo.domain_note


class TestEpi:
    def test_gaussian_values(self):
        exact = epi_remote_lower(G11, 1.0, 0.75, RdfHook.gaussian_exact(1.0))
        assert exact.value == pytest.approx(0.5 * math.log(4 / 3) + 0.5 * math.log(3 / 2), abs=1e-12)
        assert epi_remote_upper(G11, 1.0, 0.75).value == pytest.approx(HALF_LN2, abs=1e-12)

    def test_zero_rate_reduces_to_slack_term(self):
        v = epi_remote_lower(LAP, 1.0, 100.0)
        n = entropy_power(LAP)
        from ceobounds.information import gaussian_smoothed_entropy_power

        assert v.value == pytest.approx(0.5 * log_plus(n / (gaussian_smoothed_entropy_power(LAP, 1.0) - 1.0)))

    @pytest.mark.parametrize("d", [0.7, 1.0, 1.7])
    def test_laplace_paths_agree(self, d):
        a = epi_remote_lower(LAP, 1.0, d, RdfHook.shannon_lower(LAP))
        b = epi_explicit_lower(LAP, 1.0, d)
        assert b.valid and a.value == pytest.approx(b.value, abs=1e-12)

    def test_laplace_below_explicit_threshold(self):
        # N(X) var_Z / N(Y) = 0.596 > 0.5: only the general form is defined
        assert not epi_explicit_lower(LAP, 1.0, 0.5).valid
        a = epi_remote_lower(LAP, 1.0, 0.5, RdfHook.shannon_lower(LAP))
        assert a.value == pytest.approx(0.5 * math.log(entropy_power(LAP) / 0.5))

    def test_laplace_upper(self):
        assert epi_remote_upper(LAP, 1.0, 1.0).value == pytest.approx(math.log(2), abs=1e-12)

    def test_upper_clamps_to_zero(self):
        assert epi_remote_upper(LAP, 1.0, 2.0).value == 0.0
        assert epi_remote_upper(LAP, 1.0, 3.0).value == 0.0

    def test_upper_threshold(self):
        assert not epi_remote_upper(LAP, 1.0, 2 / 3).valid
        assert epi_remote_upper(LAP, 1.0, 2 / 3 + 1e-9).valid

    def test_rate_range(self):
        assert not epi_upper_at_rate(LAP, 1.0, -0.1).valid
        assert not epi_upper_at_rate(LAP, 1.0, 0.5 * math.log(1 + 2.0) + 1e-6).valid
        assert epi_upper_at_rate(LAP, 1.0, 0.0).value == 0.0

    @settings(max_examples=40, deadline=None)
    @given(var=st.floats(0.2, 5), noise=st.floats(0.05, 5), frac=st.floats(0.02, 0.98))
    def test_test_channel_rate_gives_closed_form(self, var, noise, frac):
        d = Laplace(0.0, math.sqrt(var / 2))
        thr = var * noise / (var + noise)
        dist = thr + frac * (var - thr)
        r = 0.5 * math.log(var / dist)
        assert linear_test_channel_distortion(d, noise, r) == pytest.approx(dist, rel=1e-12)
        assert epi_remote_upper(d, noise, dist).value == pytest.approx(
            epi_explicit_upper_formula(d, noise, dist), abs=1e-12
        )

    @settings(max_examples=30, deadline=None)
    @given(scale=st.floats(0.3, 2.0), noise=st.floats(0.1, 3.0), frac=st.floats(0.01, 0.999))
    def test_shannon_rdf_matches_explicit_when_d_below_entropy_power(self, scale, noise, frac):
        d = Laplace(0.0, scale)
        n = entropy_power(d)
        from ceobounds.information import gaussian_smoothed_entropy_power

        thr = n * noise / gaussian_smoothed_entropy_power(d, noise)
        dist = thr + frac * (n - thr)
        a = epi_remote_lower(d, noise, dist, RdfHook.shannon_lower(d))
        b = epi_explicit_lower(d, noise, dist)
        assert a.value == pytest.approx(b.value, rel=1e-12, abs=1e-12)


def test_default_rdf_kinds():
    assert default_rdf(G11).kind is RdfKind.GAUSSIAN_EXACT
    assert default_rdf(LAP).kind is RdfKind.SHANNON_LB_MSE
    assert RdfHook.user(lambda d: 1.0).kind is RdfKind.USER_SUPPLIED


CATALOG = [
    Gaussian(0.0, 1.0),
    Gaussian(1.0, 2.0),
    Laplace(0.0, 1.0),
    Laplace(0.0, 0.5),
    Uniform(0.0, 1.0),
    GaussianMixture((0.5, 0.5), (-1.0, 1.0), (0.3, 0.3)),
]

# bounds on the remote function (the Shannon upper bound is on R_X, not R^R_X)
REMOTE_LOWER = {"shannon-lower", "remote-sandwich-lower", "remote-explicit-lower", "epi-general-lower",
                "epi-explicit-lower", "remote-composite-lower"}
REMOTE_UPPER = {"remote-sandwich-upper", "remote-explicit-upper", "epi-explicit-upper"}


@pytest.mark.parametrize("dens", CATALOG, ids=lambda d: d.describe())
@pytest.mark.parametrize("noise", [0.1, 1.0])
def test_every_lower_below_every_upper(dens, noise):
    st_ = remote_stats(dens, noise, mc_samples=0)
    for frac in np.linspace(0.05, 1.5, 12):
        d = st_.d0 + frac * dens.variance
        rows = remote_bounds_table(dens, noise, d, stats=st_)
        lows = [r.value for r in rows if r.valid and r.formula_id.value in REMOTE_LOWER]
        highs = [r.value for r in rows if r.valid and r.formula_id.value in REMOTE_UPPER]
        assert all(r.value >= 0 for r in rows if r.valid)
        if lows and highs:
            assert max(lows) <= min(highs) + 1e-9


@pytest.mark.parametrize("dens", CATALOG, ids=lambda d: d.describe())
def test_bounds_nonincreasing_in_distortion(dens):
    st_ = remote_stats(dens, 0.5, mc_samples=0)
    grid = st_.d0 + np.linspace(0.01, 2.0, 25) * dens.variance
    tables = [remote_bounds_table(dens, 0.5, d, stats=st_) for d in grid]
    for k in range(len(tables[0])):
        vals = [t[k].value for t in tables if t[k].valid]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:])), tables[0][k].formula_id


def test_gaussian_collapse_numeric_path():
    g = Gaussian(0.0, 1.5)
    st_ = remote_stats(g, 0.8, numeric=True, mc_samples=0)
    for d in (0.6, 0.9, 1.2):
        lo, hi = remote_sandwich(st_, d)
        assert lo.value == pytest.approx(hi.value, abs=1e-6)
        a, b = remote_explicit(g, 0.8, d, stats=st_, numeric=True)
        assert a.value == pytest.approx(b.value, abs=1e-6)
        assert epi_explicit_lower(g, 0.8, d, numeric=True).value == pytest.approx(
            epi_remote_upper(g, 0.8, d).value, abs=1e-6
        )
