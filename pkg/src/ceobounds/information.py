"""Entropy, entropy power, Fisher information and conditional-mean statistics.

All quantities are in nats. Parametric shortcuts are used unless
``numeric=True`` forces the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .density import Gaussian, SourceDensity, Tabulated
from .errors import DerivativeUnstable, KappaUnavailable, PosteriorUnderflow

TWO_PI_E = 2.0 * math.pi * math.e
KAPPA_LADDER = (1e-2, 1e-3, 1e-4)
KAPPA_RTOL = 1e-3


def entropy_power_from_entropy(h: float) -> float:
    return math.exp(2.0 * h) / TWO_PI_E


def entropy(density: SourceDensity, *, numeric: bool = False) -> float:
    """Differential entropy h(X) in nats."""
    if not numeric:
        h = density.analytic_entropy(0.0)
        if h is not None:
            return h
    return density.numeric_entropy(0.0)


def entropy_power(density: SourceDensity, *, numeric: bool = False) -> float:
    """exp(2 h(X)) / (2 pi e); exactly the variance for a Gaussian."""
    if isinstance(density, Gaussian) and not numeric:
        return density.variance
    return entropy_power_from_entropy(entropy(density, numeric=numeric))


def fisher_information(density: SourceDensity, *, numeric: bool = False) -> float:
    if not numeric:
        j = density.analytic_fisher(0.0)
        if j is not None:
            return j
    return density.numeric_fisher(0.0)


@dataclass(frozen=True)
class SmoothedStats:
    """Statistics of X + sqrt(s) G."""

    s: float
    entropy_s: float
    entropy_power_s: float
    fisher_s: float


@lru_cache(maxsize=4096)
def _smoothed_entropy(density, s, numeric):
    if not numeric:
        h = density.analytic_entropy(s)
        if h is not None:
            return h
    return density.numeric_entropy(s)


@lru_cache(maxsize=4096)
def _smoothed_fisher(density, s, numeric):
    if not numeric:
        j = density.analytic_fisher(s)
        if j is not None:
            return j
    return density.numeric_fisher(s)


def smoothed_entropy(density: SourceDensity, s: float, *, numeric: bool = False) -> float:
    if s < 0:
        raise ValueError(f"smoothing variance must be >= 0, got {s}")
    return _smoothed_entropy(density, float(s), numeric)


def smoothed_entropy_power(
    density: SourceDensity, s: float, *, numeric: bool = False, fisher: bool = True
) -> SmoothedStats:
    """Entropy power (and Fisher information) of ``X + sqrt(s) G``.

    ``fisher=False`` skips the Fisher integral when only the entropy power is
    needed.
    """
    h = smoothed_entropy(density, s, numeric=numeric)
    if isinstance(density, Gaussian) and not numeric:
        n_s = density.variance + s
    else:
        n_s = entropy_power_from_entropy(h)
    j = _smoothed_fisher(density, float(s), numeric) if fisher else math.nan
    return SmoothedStats(s=float(s), entropy_s=h, entropy_power_s=n_s, fisher_s=j)


def gaussian_smoothed_entropy_power(density: SourceDensity, s: float, *, numeric: bool = False) -> float:
    return smoothed_entropy_power(density, s, numeric=numeric, fisher=False).entropy_power_s


@dataclass(frozen=True)
class KappaEstimate:
    finite_difference: float
    de_bruijn: float
    ladder: tuple[float, ...]
    slopes: tuple[float, ...]

    @property
    def agree(self) -> bool:
        return _agree(self.finite_difference, self.de_bruijn, KAPPA_RTOL)


def _agree(a, b, rtol):
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= rtol * abs(b)


def kappa_routes(
    density: SourceDensity,
    *,
    ladder: tuple[float, ...] = KAPPA_LADDER,
    numeric: bool = False,
) -> KappaEstimate:
    """Both estimates of the right-derivative of N(X + sqrt(s) G) at s = 0.

    Finite differences are taken on ``s = c * variance`` for ``c`` in
    ``ladder`` and extrapolated to ``s -> 0`` with the model
    ``slope(s) = kappa + a sqrt(s) + b s``: the sqrt term is what a kink in
    the density (e.g. Laplace) produces and vanishes for smooth densities.
    The oracle is the de Bruijn identity ``kappa = N(X) J(X)``.
    """
    n0 = entropy_power(density, numeric=numeric)
    s = np.asarray(ladder, dtype=float) * density.variance
    slopes = np.array(
        [(gaussian_smoothed_entropy_power(density, si, numeric=numeric) - n0) / si for si in s]
    )
    basis = [np.ones_like(s), np.sqrt(s), s][: len(s)]
    coef, *_ = np.linalg.lstsq(np.stack(basis, axis=1), slopes, rcond=None)
    fd = float(coef[0])
    oracle = n0 * fisher_information(density, numeric=numeric)
    return KappaEstimate(fd, oracle, tuple(float(c) for c in ladder), tuple(float(q) for q in slopes))


@lru_cache(maxsize=256)
def _kappa_cached(density, ladder, numeric, rtol):
    est = kappa_routes(density, ladder=ladder, numeric=numeric)
    if not _agree(est.finite_difference, est.de_bruijn, rtol):
        raise DerivativeUnstable(
            f"kappa of {density.describe()}: finite difference {est.finite_difference:.6g} "
            f"vs de Bruijn {est.de_bruijn:.6g} (rtol {rtol:g})",
            finite_difference=est.finite_difference,
            de_bruijn=est.de_bruijn,
        )
    return est.de_bruijn


def kappa(
    density: SourceDensity,
    *,
    ladder: tuple[float, ...] = KAPPA_LADDER,
    numeric: bool = False,
    rtol: float = KAPPA_RTOL,
) -> float:
    """d/ds N(X + sqrt(s) G) at s = 0, cross-checked against N(X) J(X).

    Returns the de Bruijn value once the finite-difference route confirms
    it. Raises :class:`DerivativeUnstable` when the two routes disagree by more
    than ``rtol`` (always the case when J(X) is infinite, e.g. for uniform
    sources, whose entropy power grows like sqrt(s)).
    """
    return _kappa_cached(density, tuple(ladder), numeric, rtol)


def require_kappa(density: SourceDensity, value: float | None = None) -> float:
    """kappa for formulas that need it finite; ``value`` overrides the estimate."""
    if value is not None:
        if not (math.isfinite(value) and value > 0):
            raise KappaUnavailable(f"kappa override must be finite and positive, got {value}")
        return float(value)
    try:
        return kappa(density)
    except DerivativeUnstable as exc:
        raise KappaUnavailable(str(exc)) from exc


@dataclass(frozen=True)
class RemoteStats:
    """Estimation statistics of X from Y = X + Z, Z ~ N(0, noise_var)."""

    noise_var: float
    d0: float
    var_v: float
    entropy_power_v: float
    entropy_power_y: float
    variance_x: float
    entropy_power_x: float
    d0_mc: float = math.nan
    d0_mc_stderr: float = math.nan

    @property
    def variance_y(self) -> float:
        return self.variance_x + self.noise_var


def _gl_nodes(pieces, max_width, order):
    t, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in zip(pieces[:-1], pieces[1:]):
        k = max(1, int(math.ceil((b - a) / max_width)))
        edges = np.linspace(a, b, k + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        xs.append((0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel())
        ws.append((0.5 * (hi - lo) * w + 0 * lo).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _posterior_moments(density, noise_var, y, x, wx, chunk=512):
    """log f_Y(y), E[X|y], Var[X|y] by log-domain quadrature over x."""
    logprior = np.log(wx) + density.logpdf(x)
    keep = np.isfinite(logprior)
    x, logprior = x[keep], logprior[keep]
    log_fy = np.empty(y.size)
    m1 = np.empty(y.size)
    var = np.empty(y.size)
    c = -0.5 * math.log(2.0 * math.pi * noise_var)
    for i in range(0, y.size, chunk):
        yy = y[i : i + chunk, None]
        joint = logprior + c - 0.5 * (yy - x) ** 2 / noise_var
        lf = logsumexp(joint, axis=1)
        if not np.all(np.isfinite(lf)):
            raise PosteriorUnderflow(f"posterior mass underflows at y in [{yy.min():.4g}, {yy.max():.4g}]")
        post = np.exp(joint - lf[:, None])
        mean = post @ x
        log_fy[i : i + chunk] = lf
        m1[i : i + chunk] = mean
        var[i : i + chunk] = np.sum(post * (x - mean[:, None]) ** 2, axis=1)
    return log_fy, m1, var


def remote_stats(
    density: SourceDensity,
    noise_var: float,
    *,
    numeric: bool = False,
    mc_samples: int = 20000,
    seed: int = 0,
) -> RemoteStats:
    """D_0 = E[(X - V)^2], var(V) and N(V) for V = E[X | Y].

    N(V) uses that V = g(Y) with g'(y) = Var[X | Y=y] / noise_var > 0, so
    h(V) = h(Y) + E[log g'(Y)]. D_0 is also estimated by Monte Carlo
    (``mc_samples=0`` disables it).
    """
    if not noise_var > 0:
        raise ValueError(f"noise variance must be positive, got {noise_var}")
    vx = density.variance
    nx = entropy_power(density, numeric=numeric)
    ny = gaussian_smoothed_entropy_power(density, noise_var, numeric=numeric)
    if isinstance(density, Gaussian) and not numeric:
        d0 = vx * noise_var / (vx + noise_var)
        var_v = vx * vx / (vx + noise_var)
        stats = dict(d0=d0, var_v=var_v, entropy_power_v=var_v)
        grid = None
    else:
        sz = math.sqrt(noise_var)
        spread = 0.5 * min(sz, 4.0 * density.std)
        xlo, xhi = density.quadrature_range(0.0)
        xpieces = density._pieces(0.0)
        order = 16 if len(xpieces) < 400 else 4
        x, wx = _gl_nodes(xpieces, spread, order)
        r = 8.5 * sz
        ypieces = np.unique(np.concatenate([[xlo - r, xhi + r], [p for p in density.breakpoints(0.0) if xlo < p < xhi]]))
        if isinstance(density, Tabulated):
            ypieces = np.array([xlo - r, xhi + r])
        y, wy = _gl_nodes(ypieces, spread, 16)
        log_fy, m1, var = _posterior_moments(density, noise_var, y, x, wx)
        fy = np.exp(log_fy) * wy
        mass = fy.sum()
        fy = fy / mass
        mean_v = fy @ m1
        d0 = float(fy @ var)
        var_v = float(fy @ (m1 - mean_v) ** 2)
        h_y = float(-(fy @ log_fy))
        h_v = h_y + float(fy @ np.log(var / noise_var))
        stats = dict(d0=d0, var_v=var_v, entropy_power_v=entropy_power_from_entropy(h_v))
        grid = (y, m1)
    mc = {}
    if mc_samples:
        mc = _d0_monte_carlo(density, noise_var, grid, mc_samples, seed)
    return RemoteStats(
        noise_var=float(noise_var),
        variance_x=vx,
        entropy_power_x=nx,
        entropy_power_y=ny,
        **stats,
        **mc,
    )


def _d0_monte_carlo(density, noise_var, grid, n, seed):
    rng = np.random.default_rng(seed)
    x = density.sample(rng, n)
    y = x + math.sqrt(noise_var) * rng.standard_normal(n)
    if grid is None:
        g = density.variance / (density.variance + noise_var)
        v = density.mean + g * (y - density.mean)
    else:
        v = np.interp(y, *grid)
    err = (x - v) ** 2
    stderr = float(err.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return {"d0_mc": float(err.mean()), "d0_mc_stderr": stderr}


def lmmse(variance_x: float, variance_noise_total: float) -> tuple[float, float]:
    """Gain and error of the best linear estimate of X from X + N."""
    if variance_x < 0 or variance_noise_total < 0:
        raise ValueError("variances must be nonnegative")
    total = variance_x + variance_noise_total
    if total == 0:
        return 1.0, 0.0
    return variance_x / total, variance_x * variance_noise_total / total
