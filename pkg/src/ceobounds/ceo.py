"""Multi-agent (CEO) sum-rate bounds under additive Gaussian observation noise.

Agent ``i`` observes ``Y_i = X + Z_i`` with ``Z_i ~ N(0, noise_vars[i])``.
Subsets of agents are 0-based index sets. For a subset ``A`` the combined
observation ``Y(A) = X + N(0, h_A / |A|)`` uses the harmonic mean ``h_A`` of
the member noise variances.

Both the outer (converse) and inner (achievable) regions share one
constraint shape, indexed by subsets ``A`` including the empty set::

    sum_{i in A} R_i >= base - 1/2 log arg(A^c, r) + sum_{i in A} r_i
    arg(B, r) = S_B * (P(Y(B)) - P_X * T_B(r) / S_B),   arg(empty) = 1
    S_B = sum_{i in B} 1/noise_i,   T_B(r) = sum_{i in B} exp(-2 r_i)/noise_i

The outer region uses entropy powers for ``P`` and ``R_X(D)`` as ``base``;
the inner region (MSE only) uses variances and ``1/2 log+(var_X / D)``.
Every constraint is convex in ``(R, r)``, so the sum-rate programs below
have no spurious local minima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.stats import linregress

from .density import SourceDensity
from .errors import (
    AlphaOutOfRange,
    DistortionUnreachable,
    EmptySubset,
    Infeasible,
    LogDomain,
)
from .information import entropy_power, gaussian_smoothed_entropy_power, require_kappa
from .remote import BoundResult, RdfHook, _result, _thr_note, default_rdf, log_plus

MAX_ENUMERATED_AGENTS = 12
LOG_ARG_TOL = 1e-9
BOUNDARY_TOL = 1e-9
GRID_STARTS = 16
RANDOM_STARTS = 8


@dataclass(frozen=True)
class CeoProblem:
    density: SourceDensity
    m: int
    noise_vars: tuple[float, ...]
    distortion: float
    rdf: RdfHook | None = None
    numeric: bool = False

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        nv = tuple(float(v) for v in self.noise_vars)
        if len(nv) != self.m:
            raise ValueError(f"expected {self.m} noise variances, got {len(nv)}")
        if not all(v > 0 and math.isfinite(v) for v in nv):
            raise ValueError(f"noise variances must be finite and positive, got {nv}")
        if not self.distortion > 0:
            raise ValueError(f"distortion must be positive, got {self.distortion}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "noise_vars", nv)
        if self.rdf is None:
            object.__setattr__(self, "rdf", default_rdf(self.density, numeric=self.numeric))

    @classmethod
    def equal(cls, density, m, noise_var, distortion, rdf=None, numeric=False) -> "CeoProblem":
        return cls(density, m, (float(noise_var),) * int(m), distortion, rdf, numeric)

    @property
    def equal_variance(self) -> bool:
        return max(self.noise_vars) == min(self.noise_vars)

    @property
    def rate_distortion(self) -> float:
        return self.rdf(self.distortion)

    def with_distortion(self, d: float) -> "CeoProblem":
        return CeoProblem(self.density, self.m, self.noise_vars, d, self.rdf, self.numeric)


@dataclass(frozen=True)
class SubsetStats:
    subset: frozenset[int]
    harmonic_var: float
    size: int
    entropy_power_ya: float

    @property
    def combined_noise_var(self) -> float:
        return self.harmonic_var / self.size


def _check_subset(problem: CeoProblem, subset: Iterable[int]) -> frozenset[int]:
    a = frozenset(int(i) for i in subset)
    bad = [i for i in a if not 0 <= i < problem.m]
    if bad:
        raise ValueError(f"subset indices must lie in 0..{problem.m - 1}, got {sorted(bad)}")
    return a


def subset_stats(problem: CeoProblem, subset: Iterable[int]) -> SubsetStats:
    a = _check_subset(problem, subset)
    if not a:
        raise EmptySubset("subset statistics need at least one agent")
    inv = sum(1.0 / problem.noise_vars[i] for i in a)
    size = len(a)
    n_ya = gaussian_smoothed_entropy_power(problem.density, 1.0 / inv, numeric=problem.numeric)
    return SubsetStats(a, size / inv, size, n_ya)


class _Region:
    """Vectorised constraint family over all 2^m subsets (bitmask order)."""

    def __init__(self, problem: CeoProblem, *, achievable: bool):
        if problem.m > MAX_ENUMERATED_AGENTS:
            raise ValueError(
                f"subset enumeration is limited to m <= {MAX_ENUMERATED_AGENTS}, got {problem.m}"
            )
        self.problem = problem
        self.achievable = achievable
        m = problem.m
        dens = problem.density
        inv = 1.0 / np.asarray(problem.noise_vars)
        self.inv = inv
        masks = np.arange(2**m)
        # member[k, i]: agent i belongs to subset k
        self.member = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
        comp = ~self.member
        self.comp = comp.astype(float)
        s_comp = self.comp @ inv
        self.s_comp = s_comp
        if achievable:
            self.base = 0.5 * log_plus(dens.variance / problem.distortion)
            self.px = dens.variance
            p_y = {v: dens.variance + 1.0 / v for v in np.unique(s_comp[s_comp > 0])}
        else:
            self.base = problem.rate_distortion
            self.px = entropy_power(dens, numeric=problem.numeric)
            p_y = {
                v: gaussian_smoothed_entropy_power(dens, 1.0 / v, numeric=problem.numeric)
                for v in np.unique(s_comp[s_comp > 0])
            }
        self.p_comp = np.array([p_y[v] if v > 0 else 0.0 for v in s_comp])
        self.full = 2**m - 1

    def log_args(self, r):
        t = self.comp @ (np.exp(-2.0 * np.asarray(r)) * self.inv)
        arg = self.s_comp * self.p_comp - self.px * t
        arg[self.full] = 1.0
        return arg

    def values(self, r):
        r = np.maximum(np.asarray(r, dtype=float), 0.0)
        arg = self.log_args(r)
        if np.any(arg < 1.0 - LOG_ARG_TOL):
            k = int(np.argmin(arg))
            raise LogDomain(f"log argument {arg[k]:.12g} < 1 for subset mask {k}")
        return self.base - 0.5 * np.log(arg) + self.member @ r, arg

    def jacobian_r(self, r, arg):
        r = np.maximum(np.asarray(r, dtype=float), 0.0)
        e = np.exp(-2.0 * r) * self.inv
        return self.member.astype(float) - self.comp * (self.px * e)[None, :] / arg[:, None]

    def empty_set_limit(self):
        """Supremum of arg(all agents) over r, reached as r -> infinity."""
        return self.s_comp[0] * self.p_comp[0]

    def lp_sum_rate(self, r):
        """Inner LP: min sum R s.t. R(A) >= f(A, r) for nonempty A, R >= 0."""
        f, _ = self.values(r)
        a_ub = -self.member[1:].astype(float)
        res = linprog(
            np.ones(self.problem.m), A_ub=a_ub, b_ub=-f[1:], bounds=(0, None), method="highs"
        )
        if res.status != 0:
            raise Infeasible(f"rate LP failed: {res.message}")
        return float(res.fun), np.asarray(res.x)

    def min_sum_rate(self, *, seed=0, grid_starts=GRID_STARTS, random_starts=RANDOM_STARTS):
        if self.base > 0 and 0.5 * math.log(self.empty_set_limit()) <= self.base:
            raise Infeasible(
                f"no auxiliary rates reach D={self.problem.distortion:.6g}: base rate "
                f"{self.base:.6g} >= {0.5 * math.log(self.empty_set_limit()):.6g}"
            )
        m = self.problem.m
        if self.base == 0.0:
            return 0.0, np.zeros(m), np.zeros(m)
        hi = 4.0 * self.base / m
        rng = np.random.default_rng(seed)
        starts = [np.full(m, c) for c in np.linspace(0.0, hi, grid_starts)]
        starts += [rng.uniform(0.0, hi, m) for _ in range(random_starts)]
        member = self.member.astype(float)

        def cons(z):
            f, _ = self.values(z[m:])
            return member @ z[:m] - f

        def cons_jac(z):
            _, arg = self.values(z[m:])
            return np.hstack([member, -self.jacobian_r(z[m:], arg)])

        obj_grad = np.concatenate([np.ones(m), np.zeros(m)])
        best = None
        for r0 in starts:
            r0 = self._feasible_start(r0)
            _, big_r0 = self.lp_sum_rate(r0)
            res = minimize(
                lambda z: float(z[:m].sum()),
                np.concatenate([big_r0, r0]),
                jac=lambda z: obj_grad,
                method="SLSQP",
                bounds=[(0.0, None)] * (2 * m),
                constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                options={"ftol": 1e-12, "maxiter": 500},
            )
            r = np.maximum(res.x[m:], 0.0)
            f, _ = self.values(r)
            if f[0] > 1e-8:
                continue
            # polish: the exact LP optimum at the found auxiliary rates
            value, rates = self.lp_sum_rate(r)
            if best is None or value < best[0]:
                best = (value, rates, r)
        if best is None:
            raise Infeasible("sum-rate search found no feasible auxiliary rates")
        return best

    def _feasible_start(self, r0):
        """Raise a start uniformly until the empty-set constraint holds."""
        r0 = np.asarray(r0, dtype=float)
        for _ in range(200):
            if self.values(r0)[0][0] <= 0.0:
                return r0
            r0 = r0 + max(0.25, 0.5 * r0.max())
        return r0

    def minimax_violation(self, rates, *, seed=0, starts=6):
        """min over r >= 0 of max_A [f(A, r) - R(A)]; <= 0 iff rates are in the region."""
        m = self.problem.m
        rates = np.asarray(rates, dtype=float)
        rate_sums = self.member.astype(float) @ rates
        rng = np.random.default_rng(seed)
        hi = max(4.0 * self.base / m, 1.0)
        inits = [np.full(m, c) for c in np.linspace(0.0, hi, starts)]
        inits += [rng.uniform(0.0, hi, m) for _ in range(2)]
        best = None
        for r0 in inits:
            t0 = float(np.max(self.values(r0)[0] - rate_sums))
            res = minimize(
                lambda z: z[m],
                np.concatenate([r0, [t0]]),
                jac=lambda z: np.eye(m + 1)[m],
                method="SLSQP",
                bounds=[(0.0, None)] * m + [(None, None)],
                constraints=[
                    {
                        "type": "ineq",
                        "fun": lambda z: z[m] - (self.values(z[:m])[0] - rate_sums),
                        "jac": lambda z: np.hstack(
                            [-self.jacobian_r(z[:m], self.values(z[:m])[1]), np.ones((2**m, 1))]
                        ),
                    }
                ],
                options={"ftol": 1e-14, "maxiter": 500},
            )
            r = np.maximum(res.x[:m], 0.0)
            t = float(np.max(self.values(r)[0] - rate_sums))
            if best is None or t < best[0]:
                best = (t, r)
        return best


def _mask(problem: CeoProblem, subset: frozenset[int]) -> int:
    return sum(1 << i for i in subset)


def outer_constraint(problem: CeoProblem, subset: Iterable[int], r: Sequence[float]) -> float:
    """Right-hand side of the outer-bound constraint for subset ``A`` at auxiliary rates ``r``.

    The empty subset gives the pure constraint, which must be <= 0 for
    admissible ``r``; the full set gives ``R_X(D) + sum(r)``.
    """
    a = _check_subset(problem, subset)
    r = np.asarray(r, dtype=float)
    if r.shape != (problem.m,) or np.any(r < 0):
        raise ValueError("r must hold m nonnegative auxiliary rates")
    comp = [i for i in range(problem.m) if i not in a]
    base = problem.rate_distortion
    own = float(sum(r[i] for i in a))
    if not comp:
        return base + own
    return base - 0.5 * math.log(outer_log_argument(problem, a, r)) + own


def outer_log_argument(problem: CeoProblem, subset: Iterable[int], r: Sequence[float]) -> float:
    """Argument of the logarithm in :func:`outer_constraint` (complement of ``subset``)."""
    a = _check_subset(problem, subset)
    comp = [i for i in range(problem.m) if i not in a]
    if not comp:
        return 1.0
    n_x = entropy_power(problem.density, numeric=problem.numeric)
    st = subset_stats(problem, comp)
    weighted = sum(math.exp(-2.0 * r[i]) / problem.noise_vars[i] for i in comp)
    arg = st.entropy_power_ya / st.combined_noise_var - n_x * weighted
    if arg < 1.0 - LOG_ARG_TOL:
        raise LogDomain(f"log argument {arg:.12g} < 1 for complement {sorted(comp)}")
    return arg


@dataclass(frozen=True)
class SumRateSolution:
    value: float
    rates: tuple[float, ...]
    witness_r: tuple[float, ...]


def outer_min_sum_rate_solution(problem: CeoProblem, *, seed: int = 0) -> SumRateSolution:
    value, rates, r = _Region(problem, achievable=False).min_sum_rate(seed=seed)
    return SumRateSolution(value, tuple(map(float, rates)), tuple(map(float, r)))


def outer_min_sum_rate(problem: CeoProblem, *, seed: int = 0) -> float:
    """Smallest sum rate allowed by the outer region (a lower bound on the CEO sum rate)."""
    return outer_min_sum_rate_solution(problem, seed=seed).value


def centralized_mmse(problem: CeoProblem) -> float:
    """LMMSE distortion of X from all observations jointly."""
    s = sum(1.0 / v for v in problem.noise_vars)
    return 1.0 / (1.0 / problem.density.variance + s)


def inner_sum_rate_solution(problem: CeoProblem, *, seed: int = 0) -> SumRateSolution:
    floor = centralized_mmse(problem)
    if problem.distortion <= floor:
        raise DistortionUnreachable(
            f"D={problem.distortion:.6g} is at or below the joint LMMSE floor {floor:.6g}"
        )
    region = _Region(problem, achievable=True)
    if region.base == 0.0:
        return SumRateSolution(0.0, (0.0,) * problem.m, (0.0,) * problem.m)
    value, rates, r = region.min_sum_rate(seed=seed)
    return SumRateSolution(value, tuple(map(float, rates)), tuple(map(float, r)))


def inner_sum_rate(problem: CeoProblem, *, seed: int = 0) -> float:
    """Achievable MSE sum rate; closed form for equal noise variances."""
    if problem.equal_variance:
        floor = centralized_mmse(problem)
        if problem.distortion <= floor:
            raise DistortionUnreachable(
                f"D={problem.distortion:.6g} is at or below the joint LMMSE floor {floor:.6g}"
            )
        return ceo_sum_rate_upper_mse(problem).value
    return inner_sum_rate_solution(problem, seed=seed).value


def _equal_noise(problem: CeoProblem) -> float:
    if not problem.equal_variance:
        raise ValueError("closed-form sum-rate bounds need equal noise variances")
    return problem.noise_vars[0]


def ceo_sum_rate_lower(problem: CeoProblem) -> BoundResult:
    """R_X(D) + M/2 log+ M N(X) / (M N(Y(M)) - var_Z exp(2 R_X(D)))."""
    nz = _equal_noise(problem)
    m = problem.m
    r = problem.rate_distortion
    n_x = entropy_power(problem.density, numeric=problem.numeric)
    n_ym = gaussian_smoothed_entropy_power(problem.density, nz / m, numeric=problem.numeric)
    denom = m * n_ym - nz * math.exp(2.0 * r)
    ok = denom > 0
    value = r + 0.5 * m * log_plus(m * n_x / denom) if ok else math.nan
    note = f"var_Z e^(2R)={nz * math.exp(2 * r):.6g} {'<' if ok else '>='} M N(Y(M))={m * n_ym:.6g}"
    return _result(value, "lower", "ceo-sum-lower-general", note, ok)


def _mse_closed_form(p_x, p_ym, nz, m, d, kind, formula, label):
    thr = p_x * nz / (m * p_ym)
    ok = d > thr
    value = math.nan
    if ok:
        value = 0.5 * log_plus(p_x / d) + 0.5 * m * log_plus(m * p_x / (m * p_ym - p_x * nz / d))
    return _result(value, kind, formula, _thr_note(d, thr, label), ok)


def ceo_sum_rate_lower_mse(problem: CeoProblem) -> BoundResult:
    """1/2 log+ N(X)/D + M/2 log+ M N(X) / (M N(Y(M)) - N(X) var_Z / D)."""
    nz = _equal_noise(problem)
    m = problem.m
    n_x = entropy_power(problem.density, numeric=problem.numeric)
    n_ym = gaussian_smoothed_entropy_power(problem.density, nz / m, numeric=problem.numeric)
    return _mse_closed_form(
        n_x, n_ym, nz, m, problem.distortion, "lower", "ceo-sum-lower-mse", "N(X)var_Z/(M N(Y(M)))"
    )


def ceo_sum_rate_upper_mse(problem: CeoProblem) -> BoundResult:
    """Same shape as the MSE lower bound with variances in place of entropy powers."""
    nz = _equal_noise(problem)
    m = problem.m
    v = problem.density.variance
    return _mse_closed_form(
        v, v + nz / m, nz, m, problem.distortion, "upper", "ceo-sum-upper-mse", "var_X var_Z/(M var_Y(M))"
    )


@dataclass(frozen=True)
class GapBounds:
    constant_d: float
    scaled_d: float

    def __iter__(self):
        return iter((self.constant_d, self.scaled_d))


def gap_bounds(
    density: SourceDensity,
    noise_var: float,
    m: int,
    d_const: float,
    d_scaled: float,
    *,
    kappa_value: float | None = None,
) -> GapBounds:
    """Large-M bounds on (upper - lower) MSE sum rate.

    ``constant_d`` holds for fixed D; ``scaled_d`` holds for D = d_scaled / M
    at every admissible M and does not depend on M.
    """
    v = density.variance
    if not 0 < d_const < v:
        raise ValueError(f"constant distortion must lie in (0, var_X={v:.6g}), got {d_const}")
    if not d_scaled > noise_var:
        raise ValueError(f"scaled distortion d must exceed var_Z={noise_var:.6g}, got {d_scaled}")
    if not m > d_scaled / v:
        raise ValueError(f"need M > d/var_X = {d_scaled / v:.6g}, got M={m}")
    k = require_kappa(density, kappa_value)
    n = entropy_power(density)
    shape = 0.5 * math.log(v / n)
    excess = (k * v - n) * noise_var / (2.0 * v * n)
    return GapBounds(shape + excess, shape + excess / (1.0 - noise_var / d_scaled))


@dataclass(frozen=True)
class GapRow:
    m: int
    distortion: float
    upper: float
    lower: float
    gap: float
    bound: float


def gap_sweep(
    density: SourceDensity,
    noise_var: float,
    d: float,
    m_values: Iterable[int],
    *,
    kappa_value: float | None = None,
) -> list[GapRow]:
    """Closed-form upper minus lower sum rate at D = d / M against the scaled gap bound."""
    rows = []
    for m in m_values:
        bound = gap_bounds(density, noise_var, m, min(d, density.variance) / 2, d, kappa_value=kappa_value)
        prob = CeoProblem.equal(density, m, noise_var, d / m, RdfHook.shannon_lower(density))
        up = ceo_sum_rate_upper_mse(prob).value
        lo = ceo_sum_rate_lower_mse(prob).value
        rows.append(GapRow(int(m), d / m, up, lo, up - lo, bound.scaled_d))
    return rows


def _rate_loss_limits(density, noise_var, m):
    v = density.variance
    n = entropy_power(density)
    n_ym = gaussian_smoothed_entropy_power(density, noise_var / m)
    return m * v / noise_var + 1.0, m * n * n_ym / (noise_var * v)


def rate_loss_lower(
    density: SourceDensity,
    noise_var: float,
    m: int,
    alpha: float,
    *,
    kappa_value: float | None = None,
) -> BoundResult:
    """Lower bound on distributed-minus-centralized sum rate, clamped at 0."""
    limits = _rate_loss_limits(density, noise_var, m)
    if not (1.0 < alpha <= min(limits)):
        raise AlphaOutOfRange(alpha, limits)
    k = require_kappa(density, kappa_value)
    n = entropy_power(density)
    gamma = density.variance / n
    ag = alpha * gamma
    first = 0.5 * m * log_plus(ag / ((ag - 1.0) * (1.0 + k * noise_var / (m * n))))
    second = 0.5 * math.log(gamma**2 * alpha / (alpha - 1.0))
    note = f"1 < alpha={alpha:.6g} <= {min(limits):.6g}"
    return _result(max(0.0, first - second), "lower", "rate-loss-lower", note)


def rate_loss_growth(density, noise_var, alpha, m_values, *, kappa_value=None):
    """Least-squares line through the rate-loss bound over ``m_values``."""
    ms = np.asarray(list(m_values), dtype=float)
    vals = [rate_loss_lower(density, noise_var, int(m), alpha, kappa_value=kappa_value).value for m in ms]
    return linregress(ms, vals)


class Verdict(str, Enum):
    OUTSIDE_OUTER_BOUND = "OutsideOuterBound"
    CONSISTENT_WITH_OUTER_BOUND = "ConsistentWithOuterBound"
    INSIDE_INNER_BOUND = "InsideInnerBound"


@dataclass(frozen=True)
class RegionQuery:
    rates: tuple[float, ...]
    witness_r: tuple[float, ...] | None
    verdict: Verdict
    outer_violation: float = math.nan
    inner_violation: float = math.nan
    notes: tuple[str, ...] = field(default=())


def region_check(problem: CeoProblem, rates: Sequence[float], *, seed: int = 0) -> RegionQuery:
    """Classify a rate vector against the outer and (MSE) inner regions.

    Violations are min over r of the largest constraint excess, in nats.
    Anything within ``BOUNDARY_TOL`` of a boundary counts as consistent with
    the outer bound.
    """
    rates = tuple(float(x) for x in rates)
    if len(rates) != problem.m or any(x < 0 for x in rates):
        raise ValueError(f"expected {problem.m} nonnegative rates, got {rates}")
    outer = _Region(problem, achievable=False)
    t_out, r_out = outer.minimax_violation(rates, seed=seed)
    if t_out > BOUNDARY_TOL:
        return RegionQuery(rates, None, Verdict.OUTSIDE_OUTER_BOUND, t_out)
    notes = ()
    t_in = math.nan
    if problem.distortion > centralized_mmse(problem):
        inner = _Region(problem, achievable=True)
        t_in, r_in = inner.minimax_violation(rates, seed=seed)
        if t_in < -BOUNDARY_TOL:
            return RegionQuery(rates, tuple(map(float, r_in)), Verdict.INSIDE_INNER_BOUND, t_out, t_in)
    else:
        notes = ("D at or below the joint LMMSE floor; inner region empty",)
    return RegionQuery(
        rates, tuple(map(float, r_out)), Verdict.CONSISTENT_WITH_OUTER_BOUND, t_out, t_in, notes
    )
