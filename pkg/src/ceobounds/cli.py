"""Command-line front end.

Options come from an INI file (``--config``, section ``[run]``) and from
flags; flags win. Every command writes a table (CSV by default, or JSON
records) in deterministic grid order. Rates are computed in nats and
``--bits`` converts them on output.

Exit codes: 0 success, 2 configuration error, 3 every row outside its
formula's domain, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import ceo, information, jscc, remote
from .density import parse_density
from .errors import (
    AlphaOutOfRange,
    ConfigError,
    DerivativeUnstable,
    DistortionUnreachable,
    Infeasible,
    KappaUnavailable,
    NumericalError,
)
from .remote import FormulaId

COMMANDS = ("entropy", "remote-bounds", "ceo-bounds", "region-check", "rate-loss", "gap-sweep", "jscc-sweep")
EXIT_OK, EXIT_CONFIG, EXIT_ALL_INVALID, EXIT_NUMERICAL = 0, 2, 3, 4
NATS_PER_BIT = math.log(2.0)

# option name -> (parser, default); shared by the INI reader and argparse
_OPTIONS: dict[str, tuple[Callable[[str], object], object]] = {}


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in _expand(text))


def _int_list(text: str) -> tuple[int, ...]:
    out = []
    for v in _expand(text, integer=True):
        if float(v) != int(float(v)):
            raise ConfigError(f"expected an integer, got {v!r}")
        out.append(int(float(v)))
    return tuple(out)


def _expand(text: str, integer: bool = False) -> list:
    """Comma list whose items may be ranges ``start:stop[:step]`` (stop inclusive)."""
    items = []
    for tok in (t.strip() for t in str(text).split(",")):
        if not tok:
            continue
        if ":" in tok:
            parts = [float(p) for p in tok.split(":")]
            if len(parts) not in (2, 3):
                raise ConfigError(f"bad range {tok!r}")
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0:
                raise ConfigError(f"range step must be positive in {tok!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            items += [round(start + k * step, 12) for k in range(max(n, 0))]
        else:
            items.append(float(tok))
    return items


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _u64(text) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


_OPTIONS.update(
    {
        "command": (str, None),
        "source": (str, "gaussian:variance=1"),
        "noise_var": (float, 1.0),
        "noise_vars": (_float_list, None),
        "m": (_int_list, ()),
        "d": (_float_list, ()),
        "alpha": (_float_list, ()),
        "rates": (_float_list, ()),
        "s": (_float_list, (0.0,)),
        "power": (float, 1.0),
        "channel_noise_var": (float, 1.0),
        "target_d": (float, None),
        "samples": (int, 100_000),
        "seed": (_u64, 0),
        "out": (str, None),
        "format": (str, "csv"),
        "bits": (_bool, False),
        "explain": (_bool, False),
        "numeric": (_bool, False),
        "workers": (int, 1),
    }
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    source: str
    noise_var: float
    noise_vars: tuple[float, ...] | None
    m: tuple[int, ...]
    d: tuple[float, ...]
    alpha: tuple[float, ...]
    rates: tuple[float, ...]
    s: tuple[float, ...]
    power: float
    channel_noise_var: float
    target_d: float | None
    samples: int
    seed: int
    out: str | None
    format: str
    bits: bool
    explain: bool
    numeric: bool
    workers: int

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if not self.noise_var > 0:
            raise ConfigError("noise-var must be positive")
        if self.noise_vars is not None and not all(v > 0 for v in self.noise_vars):
            raise ConfigError("noise-vars must all be positive")

    @property
    def rate_scale(self) -> float:
        return 1.0 / NATS_PER_BIT if self.bits else 1.0

    @property
    def unit(self) -> str:
        return "bits" if self.bits else "nats"


def load_config(path: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not parser.has_section("run"):
        raise ConfigError(f"config {path} has no [run] section")
    values = {}
    for key, raw in parser.items("run"):
        key = key.replace("-", "_")
        if key not in _OPTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = raw
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ceobounds",
        description="Evaluate remote and CEO rate-distortion bounds and analog/digital scaling laws.",
    )
    p.add_argument("command", nargs="?", choices=COMMANDS, help="what to compute (may come from --config)")
    p.add_argument("--config", help="INI file with a [run] section of key = value options")
    p.add_argument("--source", help="density, e.g. gaussian:variance=1, laplace:b=1, uniform:low=0,high=1")
    p.add_argument("--noise-var", help="observation noise variance shared by all agents")
    p.add_argument("--noise-vars", help="per-agent noise variances (ceo-bounds, region-check)")
    p.add_argument("--m", help="agent counts, list or start:stop[:step]")
    p.add_argument("--d", help="distortions, list or start:stop:step")
    p.add_argument("--alpha", help="rate-loss parameters")
    p.add_argument("--rates", help="rate vector in nats for region-check")
    p.add_argument("--s", help="smoothing variances for the entropy command")
    p.add_argument("--power", help="per-agent transmit power (jscc-sweep)")
    p.add_argument("--channel-noise-var", help="channel noise variance (jscc-sweep)")
    p.add_argument("--target-d", help="report agents needed to reach this distortion (jscc-sweep)")
    p.add_argument("--samples", help="Monte Carlo samples per sweep point")
    p.add_argument("--seed", help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--bits", action="store_const", const="true", help="report rates in bits")
    p.add_argument("--explain", action="store_const", const="true", help="print formula and domain check per row to stderr")
    p.add_argument("--numeric", action="store_const", const="true", help="force quadrature for parametric sources")
    p.add_argument("--workers", help="worker threads for sweep points")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    if args.config:
        merged.update(load_config(args.config))
    for key in _OPTIONS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    values = {}
    for key, (conv, default) in _OPTIONS.items():
        if key in merged:
            try:
                values[key] = conv(merged[key])
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {merged[key]!r} ({exc})") from exc
        else:
            values[key] = default
    if values["command"] is None:
        raise ConfigError("no command given")
    return RunConfig(**values)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)
    has_validity: bool = True

    def add(self, row: dict, note: str = ""):
        self.rows.append(row)
        self.notes.append(note)


def _pool_map(cfg: RunConfig, fn, items):
    items = list(items)
    if cfg.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _require(grid, name):
    if not grid:
        raise ConfigError(f"the {name} grid is empty")
    return grid


def _bound_row_value(res, scale):
    return res.value * scale if res.valid else math.nan


def _cmd_entropy(cfg, dens):
    sc = cfg.rate_scale
    t = Table(("source", "s", "formula_id", "value", "valid"))
    desc = dens.describe()
    for s in cfg.s:
        st = information.smoothed_entropy_power(dens, s, numeric=cfg.numeric)
        for fid, val, scale in (
            (FormulaId.ENTROPY, st.entropy_s, sc),
            (FormulaId.ENTROPY_POWER, st.entropy_power_s, 1.0),
            (FormulaId.FISHER_INFORMATION, st.fisher_s, 1.0),
        ):
            ok = not math.isnan(val)
            t.add({"source": desc, "s": s, "formula_id": fid.value, "value": val * scale, "valid": ok}, f"s={s:g}")
    est = information.kappa_routes(dens, numeric=cfg.numeric)
    agree = est.agree
    t.add(
        {"source": desc, "s": 0.0, "formula_id": FormulaId.KAPPA_FINITE_DIFFERENCE.value,
         "value": est.finite_difference, "valid": agree},
        f"ladder {est.ladder} x var; {'agrees' if agree else 'disagrees'} with N(X) J(X)",
    )
    t.add(
        {"source": desc, "s": 0.0, "formula_id": FormulaId.KAPPA_DE_BRUIJN.value,
         "value": est.de_bruijn, "valid": math.isfinite(est.de_bruijn)},
        "N(X) J(X)",
    )
    return t


def _cmd_remote(cfg, dens):
    grid = _require(cfg.d, "D")
    stats = information.remote_stats(dens, cfg.noise_var, numeric=cfg.numeric, mc_samples=0)
    t = Table(("d", "noise_var", "formula_id", "kind", "value", "valid"))
    results = _pool_map(
        cfg, lambda d: remote.remote_bounds_table(dens, cfg.noise_var, d, numeric=cfg.numeric, stats=stats), grid
    )
    for d, res in zip(grid, results):
        for b in res:
            t.add(
                {"d": d, "noise_var": cfg.noise_var, "formula_id": b.formula_id.value, "kind": b.kind.value,
                 "value": _bound_row_value(b, cfg.rate_scale), "valid": b.valid},
                b.domain_note,
            )
    t.summary.append(f"D0={stats.d0:.10g} var(V)={stats.var_v:.10g} N(V)={stats.entropy_power_v:.10g}")
    return t


def _problem(cfg, dens, m, d):
    if cfg.noise_vars is not None:
        if len(cfg.noise_vars) != m:
            raise ConfigError(f"noise-vars has {len(cfg.noise_vars)} entries but m={m}")
        return ceo.CeoProblem(dens, m, cfg.noise_vars, d, numeric=cfg.numeric)
    return ceo.CeoProblem.equal(dens, m, cfg.noise_var, d, numeric=cfg.numeric)


def _join(r, scale):
    return "" if r is None else ";".join(repr(float(x) * scale) for x in r)


def _ceo_point(cfg, dens, m, d):
    prob = _problem(cfg, dens, m, d)
    sc = cfg.rate_scale
    out = []
    if prob.equal_variance:
        for b in (ceo.ceo_sum_rate_lower_mse(prob), ceo.ceo_sum_rate_upper_mse(prob), ceo.ceo_sum_rate_lower(prob)):
            out.append((b.formula_id.value, _bound_row_value(b, sc), b.valid, None, b.domain_note))
    if m <= ceo.MAX_ENUMERATED_AGENTS:
        for fid, solve in (
            (FormulaId.CEO_OUTER_LP, ceo.outer_min_sum_rate_solution),
            (FormulaId.CEO_INNER_LP, ceo.inner_sum_rate_solution),
        ):
            try:
                s = solve(prob, seed=cfg.seed)
                out.append((fid.value, s.value * sc, True, s.witness_r, "optimised over auxiliary rates"))
            except (Infeasible, DistortionUnreachable) as exc:
                out.append((fid.value, math.nan, False, None, str(exc)))
    return out


def _cmd_ceo(cfg, dens):
    ms, ds = _require(cfg.m, "M"), _require(cfg.d, "D")
    value_col = f"value_{cfg.unit}"
    t = Table(("m", "d", "bound_id", value_col, "valid", "witness_r"))
    points = [(m, d) for m in ms for d in ds]
    results = _pool_map(cfg, lambda p: _ceo_point(cfg, dens, *p), points)
    for (m, d), rows in zip(points, results):
        for fid, val, ok, wit, note in rows:
            t.add({"m": m, "d": d, "bound_id": fid, value_col: val, "valid": ok,
                   "witness_r": _join(wit, cfg.rate_scale)}, note)
    return t


def _cmd_region(cfg, dens):
    rates = _require(cfg.rates, "rates")
    ds = _require(cfg.d, "D")
    m = len(rates)
    if cfg.m and tuple(cfg.m) != (m,):
        raise ConfigError(f"--m {cfg.m} does not match {m} rates")
    # rates are given in the output unit
    nat_rates = tuple(r / cfg.rate_scale for r in rates)
    t = Table(("m", "d", "rates", "verdict", "witness_r", "outer_violation", "inner_violation", "formula_id", "valid"))
    results = _pool_map(cfg, lambda d: ceo.region_check(_problem(cfg, dens, m, d), nat_rates, seed=cfg.seed), ds)
    for d, q in zip(ds, results):
        t.add(
            {"m": m, "d": d, "rates": _join(rates, 1.0), "verdict": q.verdict.value,
             "witness_r": _join(q.witness_r, cfg.rate_scale), "outer_violation": q.outer_violation * cfg.rate_scale,
             "inner_violation": q.inner_violation * cfg.rate_scale, "formula_id": FormulaId.CEO_OUTER_LP.value,
             "valid": True},
            f"max constraint excess outer={q.outer_violation:.3g} inner={q.inner_violation:.3g} nats"
            + ("; " + "; ".join(q.notes) if q.notes else ""),
        )
    return t


def _cmd_rate_loss(cfg, dens):
    ms, alphas = _require(cfg.m, "M"), _require(cfg.alpha, "alpha")
    t = Table(("m", "alpha", "formula_id", "value", "valid"))
    for m in ms:
        for a in alphas:
            try:
                b = ceo.rate_loss_lower(dens, cfg.noise_var, m, a)
                t.add({"m": m, "alpha": a, "formula_id": b.formula_id.value, "value": b.value * cfg.rate_scale,
                       "valid": True}, b.domain_note)
            except AlphaOutOfRange as exc:
                t.add({"m": m, "alpha": a, "formula_id": FormulaId.RATE_LOSS_LOWER.value, "value": math.nan,
                       "valid": False}, str(exc))
    return t


def _cmd_gap(cfg, dens):
    ms, ds = _require(cfg.m, "M"), _require(cfg.d, "D")
    d = ds[0]
    if len(ds) > 1:
        raise ConfigError("gap-sweep takes a single d (distortion is d/M)")
    sc = cfg.rate_scale
    t = Table(("m", "d", "upper", "lower", "gap", "bound", "dominated", "formula_id", "valid"))
    for m in ms:
        try:
            (row,) = ceo.gap_sweep(dens, cfg.noise_var, d, [m])
        except ValueError as exc:
            t.add({"m": m, "d": d / m, "upper": math.nan, "lower": math.nan, "gap": math.nan, "bound": math.nan,
                   "dominated": False, "formula_id": FormulaId.GAP_SCALED_D.value, "valid": False}, str(exc))
            continue
        ok = math.isfinite(row.gap)
        t.add(
            {"m": m, "d": row.distortion, "upper": row.upper * sc, "lower": row.lower * sc, "gap": row.gap * sc,
             "bound": row.bound * sc, "dominated": bool(ok and row.gap <= row.bound),
             "formula_id": FormulaId.GAP_SCALED_D.value, "valid": ok},
            f"D=d/M with d={d:g} > var_Z={cfg.noise_var:g} and M > d/var_X",
        )
    return t


def _cmd_jscc(cfg, dens):
    ms = _require(cfg.m, "M")
    template = jscc.JsccScenario(dens, ms[0], cfg.noise_var, cfg.power, cfg.channel_noise_var, cfg.samples, cfg.seed)
    t = Table(jscc.CSV_HEADER, has_validity=False)
    for r in jscc.scaling_sweep(template, ms, workers=cfg.workers):
        t.add(dict(zip(jscc.CSV_HEADER, r.as_tuple())),
              "jscc-digital-floor, jscc-analog closed form, amplify-and-forward simulation")
    if len(ms) > 1:
        fit = jscc.fit_scaling(jscc.scaling_sweep(template, ms, simulate=False))
        t.summary.append(f"fit digital ~ {fit.digital_coef:.6g}/ln M, analog ~ {fit.analog_coef:.6g}/M")
    if cfg.target_d is not None:
        need = jscc.agents_required(template, cfg.target_d)
        t.summary.append(f"target D={cfg.target_d:g}: digital M={need.digital}, analog M={need.analog}, ratio={need.ratio:.6g}")
    return t


_DISPATCH = {
    "entropy": _cmd_entropy,
    "remote-bounds": _cmd_remote,
    "ceo-bounds": _cmd_ceo,
    "region-check": _cmd_region,
    "rate-loss": _cmd_rate_loss,
    "gap-sweep": _cmd_gap,
    "jscc-sweep": _cmd_jscc,
}


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        recs = [{c: _json_cell(r[c]) for c in table.columns} for r in table.rows]
        return json.dumps(recs, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(r[c]) for c in table.columns])
    return buf.getvalue()


def execute(cfg: RunConfig) -> tuple[int, Table]:
    """Compute the table for ``cfg``; returns (exit status, table)."""
    dens = parse_density(cfg.source)
    table = _DISPATCH[cfg.command](cfg, dens)
    if table.has_validity and table.rows and not any(r["valid"] for r in table.rows):
        return EXIT_ALL_INVALID, table
    return EXIT_OK, table


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        status, table = execute(cfg)
    except (KappaUnavailable, DerivativeUnstable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(table, cfg.format)
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"config error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    if cfg.explain:
        for i, (row, note) in enumerate(zip(table.rows, table.notes)):
            fid = row.get("formula_id", row.get("bound_id", cfg.command))
            flag = "" if not table.has_validity else (" valid" if row["valid"] else " INVALID")
            print(f"row {i}: {fid}{flag}: {note}", file=sys.stderr)
    for line in table.summary:
        print(line, file=sys.stderr)
    if status == EXIT_ALL_INVALID:
        print("every row lies outside its formula's domain", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
