"""Joint source-channel coding over a Gaussian multiple-access channel.

M agents observe ``X + Z_i`` and share one additive Gaussian MAC with
per-agent power ``P``. The digital (separation) architecture has a
distortion floor that decays like ``1/log M``. Amplify-and-forward with a
linear decoder decays like ``1/M``.

Randomness: every Monte Carlo batch draws from its own Philox stream
seeded with ``SeedSequence([seed, point, batch])``. Results therefore do
not depend on the number of workers or on completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .density import SourceDensity
from .information import entropy_power, require_kappa

BATCH = 1 << 16
CSV_HEADER = ("m", "digital_floor", "analog_closed", "analog_sim_mean", "analog_sim_stderr", "samples", "seed")


@dataclass(frozen=True)
class JsccScenario:
    density: SourceDensity
    m: int
    obs_noise_var: float
    power: float
    channel_noise_var: float
    samples: int = 100_000
    seed: int = 0
    gain: float | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        for name in ("obs_noise_var", "power", "channel_noise_var"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and positive, got {v}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError(f"samples must be a positive integer, got {self.samples}")
        if self.gain is not None and not self.gain > 0:
            raise ValueError(f"gain override must be positive, got {self.gain}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "samples", int(self.samples))

    @property
    def encoder_gain(self) -> float:
        """Gain meeting the power constraint with equality, unless overridden."""
        if self.gain is not None:
            return float(self.gain)
        return math.sqrt(self.power / (self.density.variance + self.obs_noise_var))

    @property
    def decoder_coefficient(self) -> float:
        g, m = self.encoder_gain, self.m
        vx, vz = self.density.variance, self.obs_noise_var
        return g * m * vx / (g * g * (m * m * vx + m * vz) + self.channel_noise_var)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n: int


def digital_distortion_floor(scenario: JsccScenario, *, kappa_value: float | None = None) -> float:
    """Smallest distortion any compress-then-transmit scheme can reach."""
    k = require_kappa(scenario.density, kappa_value)
    n = entropy_power(scenario.density)
    vz = scenario.obs_noise_var
    capacity = math.log1p(scenario.m**2 * scenario.power / scenario.channel_noise_var)
    return n * vz / (n * capacity + k * vz)


def analog_distortion_closed_form(scenario: JsccScenario) -> float:
    """Distortion of amplify-and-forward with the power-matched gain and LMMSE decoder."""
    m = scenario.m
    vx, vz, vc, p = scenario.density.variance, scenario.obs_noise_var, scenario.channel_noise_var, scenario.power
    floor = vx * vz / (m * vx + vz)
    boost = (m * vx + vz) / (vx + vz) * m * p
    return floor * (1.0 + m * (vx * vc / vz) / (boost + vc))


def analog_distortion_linear(scenario: JsccScenario) -> float:
    """Exact LMMSE distortion for the scenario's encoder gain (override included)."""
    g, m = scenario.encoder_gain, scenario.m
    vx = scenario.density.variance
    return vx - scenario.decoder_coefficient * g * m * vx


def centralized_floor(scenario: JsccScenario) -> float:
    vx, vz = scenario.density.variance, scenario.obs_noise_var
    return vx * vz / (scenario.m * vx + vz)


def _batch_stats(scenario: JsccScenario, point: int, batch: int, n: int):
    ss = np.random.SeedSequence([scenario.seed, point, batch])
    rng = np.random.Generator(np.random.Philox(ss))
    x = scenario.density.sample(rng, n)
    z_sum = rng.standard_normal((n, scenario.m)).sum(axis=1) * math.sqrt(scenario.obs_noise_var)
    w = rng.standard_normal(n) * math.sqrt(scenario.channel_noise_var)
    mu = scenario.density.mean
    g = scenario.encoder_gain
    received = g * (scenario.m * (x - mu) + z_sum) + w
    err = (x - mu - scenario.decoder_coefficient * received) ** 2
    mean = float(err.mean())
    return n, mean, float(((err - mean) ** 2).sum())


def _merge(a, b):
    """Chan et al. pairwise update of (count, mean, sum of squared deviations)."""
    na, ma, qa = a
    nb, mb, qb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, qa + qb + delta * delta * na * nb / n


def _pairwise(stats):
    while len(stats) > 1:
        nxt = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            nxt.append(stats[-1])
        stats = nxt
    return stats[0]


def simulate_analog(
    scenario: JsccScenario, *, point: int = 0, workers: int = 1, batch: int = BATCH
) -> MonteCarloEstimate:
    """Empirical mean squared error of amplify-and-forward.

    ``point`` selects the stream family; sweeps pass the grid index.
    """
    sizes = [batch] * (scenario.samples // batch)
    if scenario.samples % batch:
        sizes.append(scenario.samples % batch)
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            stats = list(pool.map(lambda j: _batch_stats(scenario, point, *j), jobs))
    else:
        stats = [_batch_stats(scenario, point, b, n) for b, n in jobs]
    n, mean, m2 = _pairwise(stats)
    stderr = math.sqrt(m2 / (n - 1) / n) if n > 1 else math.nan
    return MonteCarloEstimate(mean, stderr, n)


@dataclass(frozen=True)
class SweepRow:
    m: int
    digital_floor: float
    analog_closed: float
    analog_sim_mean: float
    analog_sim_stderr: float
    samples: int
    seed: int

    def as_tuple(self):
        return tuple(getattr(self, c) for c in CSV_HEADER)


def scaling_sweep(
    template: JsccScenario,
    m_values: Sequence[int],
    *,
    simulate: bool = True,
    workers: int = 1,
    kappa_value: float | None = None,
) -> list[SweepRow]:
    ms = [int(m) for m in m_values]
    if not ms:
        raise ValueError("m_values must be nonempty")
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError(f"m_values must be strictly increasing, got {ms}")
    rows = []
    for point, m in enumerate(ms):
        sc = replace(template, m=m)
        if simulate:
            est = simulate_analog(sc, point=point, workers=workers)
        else:
            est = MonteCarloEstimate(math.nan, math.nan, 0)
        rows.append(
            SweepRow(
                m,
                digital_distortion_floor(sc, kappa_value=kappa_value),
                analog_distortion_closed_form(sc),
                est.mean,
                est.stderr,
                est.n,
                sc.seed,
            )
        )
    return rows


@dataclass(frozen=True)
class ScalingFit:
    digital_coef: float
    analog_coef: float


def fit_scaling(rows: Iterable[SweepRow]) -> ScalingFit:
    """Least-squares c in digital ~ c / ln M and c' in analog ~ c' / M (rows with M >= 2)."""
    rows = [r for r in rows if r.m >= 2]
    if not rows:
        raise ValueError("need at least one row with M >= 2")
    inv_log = np.array([1.0 / math.log(r.m) for r in rows])
    inv_m = np.array([1.0 / r.m for r in rows])
    dig = np.array([r.digital_floor for r in rows])
    ana = np.array([r.analog_closed for r in rows])
    return ScalingFit(float(inv_log @ dig / (inv_log @ inv_log)), float(inv_m @ ana / (inv_m @ inv_m)))


def _smallest_m(f, target, limit):
    """Smallest integer M >= 1 with f(M) <= target for nonincreasing f."""
    if f(1) <= target:
        return 1
    hi = 2
    while f(hi) > target:
        hi *= 2
        if hi > limit:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class AgentsRequired:
    target: float
    digital: int | None
    analog: int | None

    @property
    def ratio(self) -> float:
        if self.digital is None:
            return math.inf
        if self.analog is None:
            return math.nan
        return self.digital / self.analog


def agents_required(
    template: JsccScenario, target_d: float, *, limit: int = 1 << 62, kappa_value: float | None = None
) -> AgentsRequired:
    """Smallest agent count at which each architecture's formula reaches ``target_d``.

    ``None`` means the target is not reached below ``limit`` agents.
    """
    if not target_d > 0:
        raise ValueError(f"target distortion must be positive, got {target_d}")
    k = require_kappa(template.density, kappa_value)

    def dig(m):
        return digital_distortion_floor(replace(template, m=m), kappa_value=k)

    def ana(m):
        return analog_distortion_closed_form(replace(template, m=m))

    return AgentsRequired(target_d, _smallest_m(dig, target_d, limit), _smallest_m(ana, target_d, limit))
