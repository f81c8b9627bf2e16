"""Source density models.

Every family exposes the density of ``X + sqrt(s) G`` (``G`` standard
normal) through :meth:`SourceDensity.smoothed_logpdf` and its score; the
parametric families do the convolution in closed form, tabulated densities
convolve numerically on their grid. Entropies and Fisher informations are
integrated over a truncated support that holds all but ``TAIL_MASS`` of the
probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import ClassVar

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, logsumexp

from .errors import (
    ConfigError,
    ConvolutionUnderresolved,
    NonIntegrableDensity,
    SamplerUnavailable,
)

TAIL_MASS = 1e-13
MASS_TOL = 1e-8
LOG_2PI = math.log(2.0 * math.pi)
_SQRT2PI = math.sqrt(2.0 * math.pi)
# ndtr(-_GAUSS_Z) * 2 < TAIL_MASS
_GAUSS_Z = 7.6


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    UNIFORM = "uniform"
    GAUSSIAN_MIXTURE = "gaussian-mixture"
    TABULATED = "tabulated"


def _log1mexp(a):
    """log(1 - exp(a)) for a <= 0."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > -math.log(2.0), np.log(-np.expm1(a)), np.log1p(-np.exp(a)))


def _log_ndtr_diff(u, v):
    """log(Phi(u) - Phi(v)) for u > v, stable in both tails."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    left = log_ndtr(u) + _log1mexp(log_ndtr(v) - log_ndtr(u))
    right = log_ndtr(-v) + _log1mexp(log_ndtr(-u) - log_ndtr(-v))
    return np.where(u + v < 0.0, left, right)


def _gauss_logpdf(x, mean, var):
    return -0.5 * (LOG_2PI + np.log(var)) - 0.5 * (x - mean) ** 2 / var


@dataclass(frozen=True)
class SourceDensity:
    """Base class. Subclasses are immutable and safe to share across threads."""

    family: ClassVar[Family]

    # -- required per family -------------------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def params(self) -> dict:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def smoothed_logpdf(self, x, s: float = 0.0):
        raise NotImplementedError

    def smoothed_score(self, x, s: float = 0.0):
        """d/dx log f_s(x)."""
        raise NotImplementedError

    def quadrature_range(self, s: float = 0.0) -> tuple[float, float]:
        raise NotImplementedError

    def breakpoints(self, s: float = 0.0) -> list[float]:
        return []

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise SamplerUnavailable(f"no sampler for {type(self).__name__}")

    # analytic shortcuts; None means "integrate numerically"
    def analytic_entropy(self, s: float = 0.0) -> float | None:
        return None

    def analytic_fisher(self, s: float = 0.0) -> float | None:
        return None

    # -- shared ----------------------------------------------------------
    def logpdf(self, x):
        return self.smoothed_logpdf(x, 0.0)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family.value}({inner})"

    def _pieces(self, s: float) -> np.ndarray:
        lo, hi = self.quadrature_range(s)
        pts = [p for p in self.breakpoints(s) if lo < p < hi]
        return np.unique(np.concatenate([[lo, hi], pts]))

    def _integrate(self, integrand, s: float) -> float:
        pieces = self._pieces(s)
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            for a, b in zip(pieces[:-1], pieces[1:]):
                try:
                    val, _ = integrate.quad(
                        integrand, a, b, epsabs=1e-15, epsrel=1e-13, limit=400
                    )
                except integrate.IntegrationWarning as exc:
                    raise NonIntegrableDensity(
                        f"{self.describe()}: quadrature failed on [{a:.4g}, {b:.4g}]: {exc}"
                    ) from exc
                total += val
        return total

    def numeric_mass(self, s: float = 0.0) -> float:
        return self._integrate(lambda x: math.exp(self.smoothed_logpdf(x, s)), s)

    def numeric_entropy(self, s: float = 0.0) -> float:
        def integrand(x):
            lf = float(self.smoothed_logpdf(x, s))
            return 0.0 if lf == -math.inf else -math.exp(lf) * lf

        mass = self.numeric_mass(s)
        if abs(mass - 1.0) > MASS_TOL:
            raise NonIntegrableDensity(
                f"{self.describe()} (s={s:g}): truncated mass {mass!r} deviates from 1"
            )
        return self._integrate(integrand, s)

    def numeric_fisher(self, s: float = 0.0) -> float:
        def integrand(x):
            lf = float(self.smoothed_logpdf(x, s))
            if lf == -math.inf:
                return 0.0
            return math.exp(lf) * float(self.smoothed_score(x, s)) ** 2

        return self._integrate(integrand, s)


@dataclass(frozen=True)
class Gaussian(SourceDensity):
    mu: float = 0.0
    var: float = 1.0
    family: ClassVar[Family] = Family.GAUSSIAN

    def __post_init__(self):
        if not self.var > 0:
            raise ConfigError(f"Gaussian variance must be positive, got {self.var}")

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.var

    @property
    def params(self):
        return {"mean": self.mu, "variance": self.var}

    def support(self):
        return (-math.inf, math.inf)

    def smoothed_logpdf(self, x, s=0.0):
        return _gauss_logpdf(x, self.mu, self.var + s)

    def smoothed_score(self, x, s=0.0):
        return -(np.asarray(x, dtype=float) - self.mu) / (self.var + s)

    def quadrature_range(self, s=0.0):
        r = _GAUSS_Z * math.sqrt(self.var + s)
        return (self.mu - r, self.mu + r)

    def breakpoints(self, s=0.0):
        sd = math.sqrt(self.var + s)
        return [self.mu + k * sd for k in (-3.0, -1.0, 0.0, 1.0, 3.0)]

    def sample(self, rng, n):
        return rng.normal(self.mu, math.sqrt(self.var), size=n)

    def analytic_entropy(self, s=0.0):
        return 0.5 * math.log(2.0 * math.pi * math.e * (self.var + s))

    def analytic_fisher(self, s=0.0):
        return 1.0 / (self.var + s)


@dataclass(frozen=True)
class Laplace(SourceDensity):
    """Density exp(-|x - loc| / scale) / (2 scale)."""

    loc: float = 0.0
    scale: float = 1.0
    family: ClassVar[Family] = Family.LAPLACE

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError(f"Laplace scale must be positive, got {self.scale}")

    @classmethod
    def unit_variance(cls, loc: float = 0.0) -> "Laplace":
        return cls(loc=loc, scale=1.0 / math.sqrt(2.0))

    @property
    def mean(self):
        return self.loc

    @property
    def variance(self):
        return 2.0 * self.scale**2

    @property
    def params(self):
        return {"loc": self.loc, "scale": self.scale}

    def support(self):
        return (-math.inf, math.inf)

    def _log_terms(self, x, s):
        b = self.scale
        t = np.asarray(x, dtype=float) - self.loc
        sd = math.sqrt(s)
        l1 = -t / b + log_ndtr(t / sd - sd / b)
        l2 = t / b + log_ndtr(-t / sd - sd / b)
        return l1, l2

    def smoothed_logpdf(self, x, s=0.0):
        b = self.scale
        if s == 0.0:
            t = np.asarray(x, dtype=float) - self.loc
            return -math.log(2.0 * b) - np.abs(t) / b
        l1, l2 = self._log_terms(x, s)
        return -math.log(2.0 * b) + s / (2.0 * b * b) + np.logaddexp(l1, l2)

    def smoothed_score(self, x, s=0.0):
        # Gaussian-kernel terms of f_s' cancel exactly, leaving a tanh.
        b = self.scale
        if s == 0.0:
            t = np.asarray(x, dtype=float) - self.loc
            return -np.sign(t) / b
        l1, l2 = self._log_terms(x, s)
        return -np.tanh(0.5 * (l1 - l2)) / b

    def quadrature_range(self, s=0.0):
        r = self.scale * math.log(1.0 / TAIL_MASS) + _GAUSS_Z * math.sqrt(s)
        return (self.loc - r, self.loc + r)

    def breakpoints(self, s=0.0):
        pts = [self.loc]
        if s > 0:
            sd = math.sqrt(s)
            for k in (0.25, 1.0, 3.0, 8.0):
                pts += [self.loc - k * sd, self.loc + k * sd]
        for k in (1.0, 4.0, 12.0):
            pts += [self.loc - k * self.scale, self.loc + k * self.scale]
        return pts

    def sample(self, rng, n):
        return rng.laplace(self.loc, self.scale, size=n)

    def analytic_entropy(self, s=0.0):
        return 1.0 + math.log(2.0 * self.scale) if s == 0.0 else None

    def analytic_fisher(self, s=0.0):
        return 1.0 / self.scale**2 if s == 0.0 else None


@dataclass(frozen=True)
class Uniform(SourceDensity):
    low: float = 0.0
    high: float = 1.0
    family: ClassVar[Family] = Family.UNIFORM

    def __post_init__(self):
        if not self.high > self.low:
            raise ConfigError(f"Uniform needs low < high, got [{self.low}, {self.high}]")

    @property
    def width(self):
        return self.high - self.low

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    @property
    def variance(self):
        return self.width**2 / 12.0

    @property
    def params(self):
        return {"low": self.low, "high": self.high}

    def support(self):
        return (self.low, self.high)

    def smoothed_logpdf(self, x, s=0.0):
        x = np.asarray(x, dtype=float)
        if s == 0.0:
            inside = (x >= self.low) & (x <= self.high)
            return np.where(inside, -math.log(self.width), -np.inf)
        sd = math.sqrt(s)
        return _log_ndtr_diff((x - self.low) / sd, (x - self.high) / sd) - math.log(self.width)

    def smoothed_score(self, x, s=0.0):
        x = np.asarray(x, dtype=float)
        if s == 0.0:
            return np.zeros_like(x)
        sd = math.sqrt(s)
        u = (x - self.low) / sd
        v = (x - self.high) / sd
        logdiff = _log_ndtr_diff(u, v)
        lphi_u = -0.5 * (LOG_2PI + u * u)
        lphi_v = -0.5 * (LOG_2PI + v * v)
        return (np.exp(lphi_u - logdiff) - np.exp(lphi_v - logdiff)) / sd

    def quadrature_range(self, s=0.0):
        r = 8.5 * math.sqrt(s)
        return (self.low - r, self.high + r)

    def breakpoints(self, s=0.0):
        pts = [self.low, self.high]
        if s > 0:
            sd = math.sqrt(s)
            for k in (0.5, 1.5, 3.0, 5.0):
                pts += [self.low - k * sd, self.low + k * sd, self.high - k * sd, self.high + k * sd]
        return pts

    def sample(self, rng, n):
        return rng.uniform(self.low, self.high, size=n)

    def analytic_entropy(self, s=0.0):
        return math.log(self.width) if s == 0.0 else None

    def analytic_fisher(self, s=0.0):
        # Jump discontinuities at both edges.
        return math.inf if s == 0.0 else None


@dataclass(frozen=True)
class GaussianMixture(SourceDensity):
    weights: tuple[float, ...] = (0.5, 0.5)
    means: tuple[float, ...] = (-2.0, 2.0)
    variances: tuple[float, ...] = (1.0, 1.0)
    family: ClassVar[Family] = Family.GAUSSIAN_MIXTURE

    def __post_init__(self):
        w, m, v = (tuple(float(t) for t in a) for a in (self.weights, self.means, self.variances))
        if not (len(w) == len(m) == len(v)) or not w:
            raise ConfigError("mixture weights, means and variances must have equal nonzero length")
        if min(w) < 0 or min(v) <= 0:
            raise ConfigError("mixture weights must be >= 0 and variances > 0")
        total = sum(w)
        object.__setattr__(self, "weights", tuple(x / total for x in w))
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)

    @property
    def mean(self):
        return float(np.dot(self.weights, self.means))

    @property
    def variance(self):
        w, m, v = (np.asarray(a) for a in (self.weights, self.means, self.variances))
        return float(np.dot(w, v + m**2) - np.dot(w, m) ** 2)

    @property
    def params(self):
        return {"weights": list(self.weights), "means": list(self.means), "variances": list(self.variances)}

    def support(self):
        return (-math.inf, math.inf)

    def _component_logs(self, x, s):
        x = np.asarray(x, dtype=float)[..., None]
        v = np.asarray(self.variances) + s
        return np.log(self.weights) + _gauss_logpdf(x, np.asarray(self.means), v), v

    def smoothed_logpdf(self, x, s=0.0):
        comp, _ = self._component_logs(x, s)
        return logsumexp(comp, axis=-1)

    def smoothed_score(self, x, s=0.0):
        comp, v = self._component_logs(x, s)
        resp = np.exp(comp - logsumexp(comp, axis=-1, keepdims=True))
        xx = np.asarray(x, dtype=float)[..., None]
        return np.sum(resp * (-(xx - np.asarray(self.means)) / v), axis=-1)

    def quadrature_range(self, s=0.0):
        sd = math.sqrt(max(self.variances) + s)
        return (min(self.means) - _GAUSS_Z * sd, max(self.means) + _GAUSS_Z * sd)

    def breakpoints(self, s=0.0):
        pts = []
        for m, v in zip(self.means, self.variances):
            sd = math.sqrt(v + s)
            pts += [m - 2 * sd, m, m + 2 * sd]
        return pts

    def sample(self, rng, n):
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        mu = np.asarray(self.means)[idx]
        sd = np.sqrt(np.asarray(self.variances))[idx]
        return mu + sd * rng.standard_normal(n)

    def analytic_entropy(self, s=0.0):
        if len(self.weights) == 1:
            return 0.5 * math.log(2.0 * math.pi * math.e * (self.variances[0] + s))
        return None


@dataclass(frozen=True, eq=False)
class Tabulated(SourceDensity):
    """Piecewise-linear pdf on a uniform grid, zero outside the grid.

    The pdf is renormalized on construction; ``normalization`` records the
    factor that was applied.
    """

    x: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 3))
    values: np.ndarray = field(default_factory=lambda: np.array([0.0, 2.0, 0.0]))
    normalization: float = 1.0
    family: ClassVar[Family] = Family.TABULATED

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ConfigError("tabulated density needs matching 1-D x and pdf columns (>= 2 rows)")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise ConfigError("tabulated x must be strictly increasing")
        if not np.allclose(dx, dx[0], rtol=1e-6, atol=0.0):
            raise ConfigError("tabulated x must lie on a uniform grid")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ConfigError("tabulated pdf must be finite and nonnegative")
        mass = float(np.trapezoid(f, x))
        if not mass > 0:
            raise ConfigError("tabulated pdf integrates to zero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", f / mass)
        object.__setattr__(self, "normalization", 1.0 / mass)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dx) / mass])
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def from_file(cls, path) -> "Tabulated":
        """Load a two-column ``x pdf`` text file with a ``# grid=<n>`` header."""
        text = Path(path).read_text().splitlines()
        if not text or not text[0].lstrip().startswith("#"):
            raise ConfigError(f"{path}: missing '# grid=<n>' header line")
        header = text[0].lstrip("# ").strip()
        if not header.startswith("grid="):
            raise ConfigError(f"{path}: malformed header {text[0]!r}")
        try:
            n = int(header.split("=", 1)[1])
            data = np.loadtxt(text[1:], ndmin=2)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if data.shape != (n, 2):
            raise ConfigError(f"{path}: header says grid={n}, found {data.shape[0]} rows of {data.shape[1]} columns")
        return cls(x=data[:, 0], values=data[:, 1])

    def to_file(self, path) -> None:
        rows = "\n".join(f"{float(a)!r} {float(b)!r}" for a, b in zip(self.x, self.values))
        Path(path).write_text(f"# grid={self.x.size}\n{rows}\n")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def _moment(self, k: int) -> float:
        # exact for piecewise-linear f: 3-point Gauss-Legendre per cell
        nodes, w = np.polynomial.legendre.leggauss(3)
        a, b = self.x[:-1], self.x[1:]
        fa, fb = self.values[:-1], self.values[1:]
        t = 0.5 * (nodes[:, None] + 1.0)
        xs = a + t * (b - a)
        fs = fa + t * (fb - fa)
        return float(np.sum(0.5 * w[:, None] * (b - a) * fs * xs**k))

    @property
    def mean(self):
        return self._moment(1)

    @property
    def variance(self):
        return self._moment(2) - self._moment(1) ** 2

    @property
    def params(self):
        return {"grid": int(self.x.size), "lo": float(self.x[0]), "hi": float(self.x[-1]), "normalization": self.normalization}

    def support(self):
        return (float(self.x[0]), float(self.x[-1]))

    def _smoothed_grid(self, s):
        if s == 0.0:
            return self.x, self.values
        sd = math.sqrt(s)
        dx = self.dx
        if sd < dx:
            raise ConvolutionUnderresolved(
                f"kernel std {sd:.3g} narrower than tabulation step {dx:.3g}"
            )
        pad = int(math.ceil(8.5 * sd / dx))
        n = self.x.size
        grid = self.x[0] + dx * np.arange(-pad, n + pad)
        f = np.zeros(grid.size)
        f[pad : pad + n] = self.values
        k = np.arange(-pad, pad + 1) * dx
        kernel = np.exp(-0.5 * k**2 / s) / (_SQRT2PI * sd) * dx
        fs = np.convolve(f, kernel, mode="same")
        return grid, fs / np.trapezoid(fs, grid)

    def smoothed_logpdf(self, x, s=0.0):
        grid, f = self._smoothed_grid(s)
        with np.errstate(divide="ignore"):
            return np.log(np.interp(x, grid, f, left=0.0, right=0.0))

    def smoothed_score(self, x, s=0.0):
        grid, f = self._smoothed_grid(s)
        df = np.gradient(f, grid)
        fx = np.interp(x, grid, f, left=0.0, right=0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(fx > 0, np.interp(x, grid, df) / fx, 0.0)

    def breakpoints(self, s=0.0):
        return list(self.x) if s == 0.0 else []

    def quadrature_range(self, s=0.0):
        grid, _ = self._smoothed_grid(s)
        return (float(grid[0]), float(grid[-1]))

    def numeric_mass(self, s=0.0):
        grid, f = self._smoothed_grid(s)
        return float(np.trapezoid(f, grid))

    def numeric_entropy(self, s=0.0):
        grid, f = self._smoothed_grid(s)
        if s == 0.0:
            return -_piecewise_linear_flogf(grid, f)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(f > 0, f * np.log(f), 0.0)
        return -float(np.trapezoid(g, grid))

    def numeric_fisher(self, s=0.0):
        grid, f = self._smoothed_grid(s)
        if s == 0.0:
            if f[0] > 0 or f[-1] > 0 or np.any(f[1:-1] == 0):
                return math.inf
            slope = np.diff(f) / np.diff(grid)
            lf = np.log(f)
            # cell integral of slope^2 / f for linear f
            with np.errstate(divide="ignore", invalid="ignore"):
                cell = np.where(
                    np.abs(np.diff(f)) > 1e-12 * f[:-1],
                    slope * np.diff(lf),
                    slope**2 * np.diff(grid) / f[:-1],
                )
            return float(np.sum(cell))
        df = np.gradient(f, grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(f > 0, df**2 / f, 0.0)
        return float(np.trapezoid(g, grid))

    def analytic_entropy(self, s=0.0):
        return self.numeric_entropy(s) if s == 0.0 else None

    def analytic_fisher(self, s=0.0):
        return self.numeric_fisher(s) if s == 0.0 else None

    def sample(self, rng, n):
        cdf = getattr(self, "_cdf", None)
        if cdf is None:
            raise SamplerUnavailable("tabulated density has no inverse-CDF table")
        return np.interp(rng.uniform(size=n), cdf, self.x)


def _piecewise_linear_flogf(x, f) -> float:
    """Exact integral of f log f for linear interpolation of f on x."""

    def antider(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, u * u * (2.0 * np.log(u) - 1.0) / 4.0, 0.0)

    def g(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, u * np.log(u), 0.0)

    h = np.diff(x)
    f0, f1 = f[:-1], f[1:]
    d = f1 - f0
    close = np.abs(d) <= 1e-9 * np.maximum(f0, f1)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = h * (antider(f1) - antider(f0)) / d
    simpson = h * (g(f0) + 4.0 * g(0.5 * (f0 + f1)) + g(f1)) / 6.0
    return float(np.sum(np.where(close, simpson, exact)))


def gaussian_equivalent(density: SourceDensity) -> Gaussian:
    """Gaussian with the same mean and variance."""
    return Gaussian(mu=density.mean, var=density.variance)


def make_density(family: str, **params) -> SourceDensity:
    """Build a density from its family name and keyword parameters."""
    try:
        fam = Family(family.strip().lower())
    except ValueError:
        raise ConfigError(f"unknown density family {family!r}") from None
    if fam is Family.GAUSSIAN:
        return Gaussian(mu=float(params.get("mean", 0.0)), var=float(params.get("variance", 1.0)))
    if fam is Family.LAPLACE:
        if "variance" in params:
            scale = math.sqrt(float(params["variance"]) / 2.0)
        else:
            scale = float(params.get("scale", params.get("b", 1.0)))
        return Laplace(loc=float(params.get("loc", 0.0)), scale=scale)
    if fam is Family.UNIFORM:
        return Uniform(low=float(params.get("low", 0.0)), high=float(params.get("high", 1.0)))
    if fam is Family.GAUSSIAN_MIXTURE:
        def vec(key, default):
            v = params.get(key, default)
            if isinstance(v, str):
                v = [float(t) for t in v.replace(";", ",").split(",") if t.strip()]
            return tuple(float(t) for t in v)

        return GaussianMixture(
            weights=vec("weights", (0.5, 0.5)),
            means=vec("means", (-2.0, 2.0)),
            variances=vec("variances", (1.0, 1.0)),
        )
    if "path" not in params:
        raise ConfigError("tabulated density needs a 'path' parameter")
    return Tabulated.from_file(params["path"])


def parse_density(text: str) -> SourceDensity:
    """Parse ``family:key=value,key=value`` (mixture vectors use ``;``)."""
    family, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"bad density parameter {item!r} in {text!r}")
        params[key.strip()] = value.strip()
    return make_density(family, **params)
