"""Point-to-point bounds: direct and remote rate-distortion functions.

Every bound is returned as a :class:`BoundResult`. ``log+`` is applied term
by term exactly as each formula is written, and every stated distortion
threshold is checked strictly; outside it the result has ``valid=False``
and ``value`` is NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .density import Gaussian, SourceDensity
from .information import (
    RemoteStats,
    entropy_power,
    gaussian_smoothed_entropy_power,
    remote_stats,
)


class BoundKind(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


class FormulaId(str, Enum):
    SHANNON_LOWER = "shannon-lower"
    SHANNON_UPPER = "shannon-upper"
    REMOTE_SANDWICH_LOWER = "remote-sandwich-lower"
    REMOTE_SANDWICH_UPPER = "remote-sandwich-upper"
    REMOTE_EXPLICIT_LOWER = "remote-explicit-lower"
    REMOTE_EXPLICIT_UPPER = "remote-explicit-upper"
    EPI_GENERAL_LOWER = "epi-general-lower"
    EPI_EXPLICIT_LOWER = "epi-explicit-lower"
    EPI_RATE_UPPER = "epi-rate-upper"
    EPI_EXPLICIT_UPPER = "epi-explicit-upper"
    REMOTE_COMPOSITE_LOWER = "remote-composite-lower"
    CEO_OUTER_LP = "ceo-outer-lp"
    CEO_INNER_LP = "ceo-inner-lp"
    CEO_SUM_LOWER_GENERAL = "ceo-sum-lower-general"
    CEO_SUM_LOWER_MSE = "ceo-sum-lower-mse"
    CEO_SUM_UPPER_MSE = "ceo-sum-upper-mse"
    GAP_CONSTANT_D = "gap-constant-d"
    GAP_SCALED_D = "gap-scaled-d"
    RATE_LOSS_LOWER = "rate-loss-lower"
    JSCC_DIGITAL_FLOOR = "jscc-digital-floor"
    JSCC_ANALOG = "jscc-analog"
    ENTROPY = "entropy"
    ENTROPY_POWER = "entropy-power"
    FISHER_INFORMATION = "fisher-information"
    KAPPA_FINITE_DIFFERENCE = "kappa-finite-difference"
    KAPPA_DE_BRUIJN = "kappa-de-bruijn"


@dataclass(frozen=True)
class BoundResult:
    value: float
    kind: BoundKind
    valid: bool
    domain_note: str
    formula_id: FormulaId

    def __float__(self):
        return self.value


def log_plus(x: float) -> float:
    """max(0, log x); nonpositive arguments give 0."""
    return math.log(x) if x > 1.0 else 0.0


def _result(value, kind, formula, note, valid=True):
    if not valid:
        value = math.nan
    return BoundResult(float(value), BoundKind(kind), bool(valid), note, FormulaId(formula))


class RdfKind(str, Enum):
    SHANNON_LB_MSE = "shannon-lb-mse"
    GAUSSIAN_EXACT = "gaussian-exact"
    USER_SUPPLIED = "user-supplied"


@dataclass(frozen=True)
class RdfHook:
    """Rate-distortion function R_X(D) of the source, in nats."""

    evaluator: Callable[[float], float]
    kind: RdfKind

    def __call__(self, d: float) -> float:
        return float(self.evaluator(d))

    @classmethod
    def shannon_lower(cls, density: SourceDensity, *, numeric: bool = False) -> "RdfHook":
        n = entropy_power(density, numeric=numeric)
        return cls(lambda d: 0.5 * log_plus(n / d), RdfKind.SHANNON_LB_MSE)

    @classmethod
    def gaussian_exact(cls, variance: float) -> "RdfHook":
        return cls(lambda d: 0.5 * log_plus(variance / d), RdfKind.GAUSSIAN_EXACT)

    @classmethod
    def user(cls, fn: Callable[[float], float]) -> "RdfHook":
        return cls(fn, RdfKind.USER_SUPPLIED)


def default_rdf(density: SourceDensity, *, numeric: bool = False) -> RdfHook:
    if isinstance(density, Gaussian):
        return RdfHook.gaussian_exact(density.variance)
    return RdfHook.shannon_lower(density, numeric=numeric)


def shannon_bounds(density: SourceDensity, d: float, *, numeric: bool = False) -> tuple[BoundResult, BoundResult]:
    """Shannon lower bound and maximum-entropy upper bound on R_X(D), MSE."""
    if not d > 0:
        raise ValueError(f"distortion must be positive, got {d}")
    n = entropy_power(density, numeric=numeric)
    lower = _result(0.5 * log_plus(n / d), "lower", "shannon-lower", "all D > 0")
    upper = _result(0.5 * log_plus(density.variance / d), "upper", "shannon-upper", "all D > 0")
    return lower, upper


def remote_sandwich(stats: RemoteStats, d: float) -> tuple[BoundResult, BoundResult]:
    """Bounds on R^R_X(D) = R_V(D - D_0) through the conditional mean V."""
    ok = d > stats.d0
    note = f"D={d:.6g} > D0={stats.d0:.6g}" if ok else f"D={d:.6g} <= D0={stats.d0:.6g}"
    excess = d - stats.d0
    lo = 0.5 * log_plus(stats.entropy_power_v / excess) if ok else math.nan
    hi = 0.5 * log_plus(stats.var_v / excess) if ok else math.nan
    return (
        _result(lo, "lower", "remote-sandwich-lower", note, ok),
        _result(hi, "upper", "remote-sandwich-upper", note, ok),
    )


def remote_explicit(
    density: SourceDensity,
    noise_var: float,
    d: float,
    *,
    stats: RemoteStats | None = None,
    numeric: bool = False,
) -> tuple[BoundResult, BoundResult]:
    """Bounds that replace D_0 by its estimation bracket.

    Lower: 1/2 log+ [N(V)/D * N(Y) / (N(Y) - N(X) var_Z / D)] for D > N(X) var_Z / N(Y).
    Upper: the same with variances, for D > var_X var_Z / var_Y.
    """
    if stats is None:
        stats = remote_stats(density, noise_var, numeric=numeric, mc_samples=0)
    nx, ny = stats.entropy_power_x, stats.entropy_power_y
    vx, vy = stats.variance_x, stats.variance_y
    lo_thr = nx * noise_var / ny
    hi_thr = vx * noise_var / vy
    lo_ok, hi_ok = d > lo_thr, d > hi_thr
    lo = hi = math.nan
    # one clamp over the product: clamping N(V)/D alone overstates the lower
    # bound once D > N(V)
    if lo_ok:
        lo = 0.5 * log_plus(stats.entropy_power_v / d * ny / (ny - nx / d * noise_var))
    if hi_ok:
        hi = 0.5 * log_plus(stats.var_v / d * vy / (vy - vx / d * noise_var))
    return (
        _result(lo, "lower", "remote-explicit-lower", _thr_note(d, lo_thr, "N(X)N(Z)/N(Y)"), lo_ok),
        _result(hi, "upper", "remote-explicit-upper", _thr_note(d, hi_thr, "var(X)var(Z)/var(Y)"), hi_ok),
    )


def _thr_note(d, thr, label):
    rel = ">" if d > thr else "<="
    return f"D={d:.6g} {rel} {label}={thr:.6g}"


def epi_remote_lower(
    density: SourceDensity,
    noise_var: float,
    d: float,
    rdf: RdfHook | None = None,
    *,
    numeric: bool = False,
) -> BoundResult:
    """R_X(D) + 1/2 log+ N(X) / (N(Y) - var_Z exp(2 R_X(D))), any distortion.

    When the denominator is not positive only R_X(D) remains, which is
    still a valid lower bound on the remote function.
    """
    rdf = rdf or default_rdf(density, numeric=numeric)
    r = rdf(d)
    nx = entropy_power(density, numeric=numeric)
    ny = gaussian_smoothed_entropy_power(density, noise_var, numeric=numeric)
    denom = ny - noise_var * math.exp(2.0 * r)
    if denom > 0:
        value = r + 0.5 * log_plus(nx / denom)
        note = f"var_Z e^(2R)={ny - denom:.6g} < N(Y)={ny:.6g}"
    else:
        value = r
        note = f"var_Z e^(2R)={ny - denom:.6g} >= N(Y)={ny:.6g}; R_X(D) only"
    return _result(value, "lower", "epi-general-lower", note)


def epi_explicit_lower(density: SourceDensity, noise_var: float, d: float, *, numeric: bool = False) -> BoundResult:
    """MSE form of the EPI lower bound (Shannon lower bound for R_X)."""
    nx = entropy_power(density, numeric=numeric)
    ny = gaussian_smoothed_entropy_power(density, noise_var, numeric=numeric)
    thr = nx * noise_var / ny
    ok = d > thr
    value = math.nan
    if ok:
        value = 0.5 * log_plus(nx / d) + 0.5 * log_plus(nx / (ny - nx / d * noise_var))
    return _result(value, "lower", "epi-explicit-lower", _thr_note(d, thr, "N(X)var_Z/N(Y)"), ok)


def epi_upper_at_rate(density: SourceDensity, noise_var: float, r: float) -> BoundResult:
    """r + 1/2 log+ var_X / (var_Y - var_Z e^(2r)) for 0 <= r <= 1/2 log(1 + var_X/var_Z).

    This bounds R^R_X(D) for every D at least the distortion of the best
    estimator from Y plus extra Gaussian noise of variance
    var_X/(e^(2r) - 1) - var_Z; see :func:`linear_test_channel_distortion`.
    """
    vx = density.variance
    r_max = 0.5 * math.log1p(vx / noise_var)
    ok = 0.0 <= r <= r_max
    note = f"0 <= r={r:.6g} <= {r_max:.6g}" if ok else f"r={r:.6g} outside [0, {r_max:.6g}]"
    value = math.nan
    if ok:
        denom = vx + noise_var - noise_var * math.exp(2.0 * r)
        value = r + 0.5 * log_plus(vx / denom) if denom > 0 else math.inf
    return _result(value, "upper", "epi-rate-upper", note, ok)


def linear_test_channel_distortion(density: SourceDensity, noise_var: float, r: float) -> float:
    """MSE of the best linear estimate of X from X + Z + W at test-channel rate r."""
    vx = density.variance
    if r <= 0:
        return vx
    total_noise = vx / math.expm1(2.0 * r)
    return vx * total_noise / (vx + total_noise)


def epi_remote_upper(density: SourceDensity, noise_var: float, d: float) -> BoundResult:
    """MSE upper bound with the test-channel rate chosen as 1/2 log+ var_X / D."""
    vx = density.variance
    vy = vx + noise_var
    thr = vx * noise_var / vy
    ok = d > thr
    note = _thr_note(d, thr, "var(X)var(Z)/var(Y)")
    if not ok:
        return _result(math.nan, "upper", "epi-explicit-upper", note, False)
    r = 0.5 * log_plus(vx / d)
    via_rate = epi_upper_at_rate(density, noise_var, r)
    return _result(via_rate.value, "upper", "epi-explicit-upper", note)


def epi_explicit_upper_formula(density: SourceDensity, noise_var: float, d: float) -> float:
    """Closed form of :func:`epi_remote_upper`, written out term by term."""
    vx = density.variance
    vy = vx + noise_var
    return 0.5 * log_plus(vx / d) + 0.5 * log_plus(vx / (vy - vx / d * noise_var))


def remote_composite_lower(
    density: SourceDensity, noise_var: float, d: float, *, stats: RemoteStats | None = None, numeric: bool = False
) -> BoundResult:
    """Largest valid value among the explicit and EPI lower bounds."""
    a, _ = remote_explicit(density, noise_var, d, stats=stats, numeric=numeric)
    b = epi_explicit_lower(density, noise_var, d, numeric=numeric)
    valid = [x for x in (a, b) if x.valid]
    if not valid:
        return _result(math.nan, "lower", "remote-composite-lower", f"{a.domain_note}; {b.domain_note}", False)
    best = max(valid, key=lambda x: x.value)
    return _result(best.value, "lower", "remote-composite-lower", f"max via {best.formula_id.value}")


def remote_bounds_table(
    density: SourceDensity, noise_var: float, d: float, *, numeric: bool = False, stats: RemoteStats | None = None
) -> list[BoundResult]:
    """Every point-to-point bound at one distortion, in a fixed order."""
    if stats is None:
        stats = remote_stats(density, noise_var, numeric=numeric, mc_samples=0)
    out = list(shannon_bounds(density, d, numeric=numeric))
    out += remote_sandwich(stats, d)
    out += remote_explicit(density, noise_var, d, stats=stats, numeric=numeric)
    out.append(epi_remote_lower(density, noise_var, d, numeric=numeric))
    out.append(epi_explicit_lower(density, noise_var, d, numeric=numeric))
    out.append(epi_remote_upper(density, noise_var, d))
    out.append(remote_composite_lower(density, noise_var, d, stats=stats, numeric=numeric))
    return out
