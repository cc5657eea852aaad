"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 statistical failure (degenerate sample, too many failed replicates).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, fields
from datetime import datetime

import numpy as np

from . import __version__
from .blocks import BlockScheme, block_series, compress
from .boot import BootstrapSpec, Correction, Estimator, anchor_sample, bootstrap_ci
from .errors import BootstrapFailure, EstimationError
from .fit import fit_frechet, fit_gev
from .mc import ExperimentSpec, run_experiment
from .rng import derive_seed
from .sim import ArmaxGpdConfig, ArmaxParetoConfig, simulate_armax_gpd, simulate_armax_pareto

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_STAT = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def rounded(v: float) -> float:
    """The value shown in every report: 10 significant digits."""
    return float(f"{v:.10g}")


def fmt17(v: float) -> str:
    return f"{v:.17g}"


# ---------------------------------------------------------------- data files


@dataclass(frozen=True)
class DataFile:
    path: str
    values: np.ndarray
    dates: list[str] | None = None


def _parse_date(text: str):
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise CliError(f"unparseable date {text!r}") from None


def read_series(path: str) -> DataFile:
    """Read a ``value`` or ``date,value`` CSV with a header row."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()  # trailing blank lines
    if not rows:
        raise CliError(f"{path}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    if header not in (["value"], ["date", "value"]):
        raise CliError(f"{path}: header must be 'value' or 'date,value', got {','.join(rows[0])!r}")
    has_dates = len(header) == 2
    values, dates = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) == 0:
            row = [""] * len(header)
        if len(row) != len(header):
            raise CliError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        cell = row[-1].strip()
        if not cell:
            raise CliError(f"{path}:{lineno}: missing value (missing data is not imputed)")
        try:
            v = float(cell)
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {cell!r}") from None
        if not math.isfinite(v):
            raise CliError(f"{path}:{lineno}: non-finite value {cell!r}")
        values.append(v)
        if has_dates:
            dates.append(row[0].strip())
    if not values:
        raise CliError(f"{path}: no data rows")
    if has_dates:
        parsed = [_parse_date(d) for d in dates]
        for i in range(1, len(parsed)):
            try:
                ok = parsed[i] > parsed[i - 1]
            except TypeError:
                raise CliError(f"{path}: mixed date formats") from None
            if not ok:
                raise CliError(f"{path}:{i + 2}: dates must be strictly increasing")
    return DataFile(path, np.array(values), dates if has_dates else None)


def write_text(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def values_csv(values) -> str:
    return "value\n" + "".join(fmt17(v) + "\n" for v in values)


# ---------------------------------------------------------------- commands


def cmd_simulate(a) -> int:
    try:
        if a.model == "armax-gpd":
            x = simulate_armax_gpd(ArmaxGpdConfig(a.gamma, a.beta, a.n, a.seed))
        else:
            x = simulate_armax_pareto(ArmaxParetoConfig(a.alpha, a.beta, a.n, a.seed))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    write_text(a.out, values_csv(x))
    return EXIT_OK


def _scheme(method: str, r: int, k: int) -> BlockScheme:
    try:
        return BlockScheme(method, r, 1 if method.startswith("disjoint") else k)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_blocks(a) -> int:
    x = read_series(a.data).values
    try:
        b = block_series(x, _scheme(a.method, a.r, a.k))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if not a.compress:
        write_text(a.out, values_csv(b.values))
        return EXIT_OK
    if a.method not in ("circular", "disjoint-repeated"):
        raise CliError("--compress applies to circular and disjoint-repeated series")
    cb = compress(b)
    buf = io.StringIO()
    buf.write("block,value,count\n")
    for i, blk in enumerate(cb.blocks):
        for v, c in blk:
            buf.write(f"{i},{fmt17(v)},{c}\n")
    write_text(a.out, buf.getvalue())
    return EXIT_OK


def cmd_fit(a) -> int:
    x = read_series(a.data).values
    try:
        s = anchor_sample(x, a.method, a.r, a.k)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if a.family == "gev":
        res = fit_gev(s)
        p = res.params
        out = {"family": "gev", "loc": p.loc, "scale": p.scale, "shape": p.shape}
    else:
        res = fit_frechet(s, a.c_trunc)
        out = {"family": "frechet", "shape": res.params.shape, "scale": res.params.scale}
    out.update(loglik=res.loglik, converged=res.converged, iterations=res.iterations, n_maxima=int(s.total))
    out = {k: rounded(v) if isinstance(v, float) else v for k, v in out.items()}
    _report(out, a.json)
    return EXIT_OK


def _report(out: dict, as_json: bool):
    if as_json:
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
        return
    width = max(len(k) for k in out)
    for k, v in out.items():
        text = repr(v) if isinstance(v, float) else str(v)
        sys.stdout.write(f"{k:<{width}}  {text}\n")


def _correction(a) -> Correction:
    if a.correction == "factor":
        if a.factor is None:
            raise CliError("--correction factor needs --factor")
        return Correction("factor", a.factor)
    if a.correction == "auto":
        return Correction("auto")
    return Correction()


def _boot_spec(a, method: str, estimator: Estimator, seed: int) -> BootstrapSpec:
    k = 1 if method == "disjoint" else a.k
    try:
        return BootstrapSpec(
            BlockScheme(method, a.r, k),
            a.B,
            a.level,
            seed,
            estimator,
            _correction(a),
            allow_inconsistent=getattr(a, "allow_inconsistent", False),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _estimator(text: str) -> Estimator:
    try:
        return Estimator.parse(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _run_ci(x, spec: BootstrapSpec, threads: int):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            res = bootstrap_ci(x, spec, threads=threads)
        except ValueError as exc:
            if isinstance(exc, EstimationError):
                raise
            raise CliError(str(exc)) from None
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    return res


def cmd_bootstrap_ci(a) -> int:
    if a.method == "naive-sliding" and not a.allow_inconsistent:
        raise CliError(
            "the naive sliding bootstrap is inconsistent: it underestimates the variance of the "
            "sliding estimator. Pass --allow-inconsistent to run it for comparison."
        )
    x = read_series(a.data).values
    est = _estimator(a.target)
    spec = _boot_spec(a, a.method, est, a.seed)
    res = _run_ci(x, spec, a.threads)
    ci = res.interval
    out = {
        "method": a.method,
        "anchor": ci.anchor,
        "target": est.label,
        "r": a.r,
        "k": spec.scheme.k,
        "m": res.m,
        "B": spec.B,
        "failures": res.replicates.failures,
        "level": rounded(ci.level),
        "point": rounded(ci.point),
        "lower": rounded(ci.lower),
        "upper": rounded(ci.upper),
        "width": rounded(ci.width),
        "correction": spec.correction.kind,
        "factor": rounded(ci.factor),
        "shape_hat": None if res.gamma_hat is None else rounded(res.gamma_hat),
        "boot_variance": rounded(res.variance),
        "seed": a.seed,
    }
    _report(out, a.json)
    return EXIT_OK


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


WINDOW_COLUMNS = ["window_end_index", "target", "method", "estimate", "lower", "upper", "width"]


def cmd_window_scan(a) -> int:
    x = read_series(a.data).values
    if a.window_blocks < 1 or a.step_blocks < 1 or a.r < 1:
        raise CliError("--window-blocks, --step-blocks and --r must be >= 1")
    if a.smoothing < 1:
        raise CliError("--smoothing must be >= 1")
    m_total = len(x) // a.r
    if a.window_blocks > m_total:
        raise CliError(
            f"window of {a.window_blocks} blocks of size {a.r} exceeds the data "
            f"({len(x)} observations, {m_total} blocks)"
        )
    targets = [_estimator(t) for t in _split(a.targets)]
    methods = _split(a.methods)
    for meth in methods:
        if meth not in ("circular", "disjoint"):
            raise CliError(f"window-scan method must be circular or disjoint, got {meth!r}")
    starts = range(0, m_total - a.window_blocks + 1, a.step_blocks)
    rows = []
    for w, start in enumerate(starts):
        lo, hi = start * a.r, (start + a.window_blocks) * a.r
        seg = x[lo:hi]
        for ti, est in enumerate(targets):
            for mi, meth in enumerate(methods):
                spec = _boot_spec(a, meth, est, derive_seed(a.seed, w, ti, mi))
                ci = _run_ci(seg, spec, a.threads).interval
                rows.append([hi - 1, est.label, meth, ci.point, ci.lower, ci.upper, ci.width])
    header = list(WINDOW_COLUMNS)
    if a.smoothing > 1:
        header += [f"{c}_smooth{a.smoothing}" for c in ("estimate", "lower", "upper", "width")]
        _append_smoothed(rows, a.smoothing)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([v if isinstance(v, (int, str)) else repr(rounded(v)) for v in row])
    write_text(a.out, buf.getvalue())
    return EXIT_OK


def _append_smoothed(rows: list, width: int):
    """Trailing moving average over successive windows of each (target, method) curve."""
    curves: dict[tuple[str, str], list[list]] = {}
    for row in rows:
        curves.setdefault((row[1], row[2]), []).append(row)
    for curve in curves.values():
        vals = np.array([r[3:7] for r in curve], dtype=float)
        for i, row in enumerate(curve):
            row.extend(vals[max(0, i - width + 1) : i + 1].mean(axis=0).tolist())


_SPEC_FIELDS = {f.name: f for f in fields(ExperimentSpec)}


def parse_spec_text(text: str) -> ExperimentSpec:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"spec line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SPEC_FIELDS:
            raise CliError(f"spec line {lineno}: unknown key {key!r}")
        if key in kw:
            raise CliError(f"spec line {lineno}: duplicate key {key!r}")
        kw[key] = _coerce(key, value)
    try:
        return ExperimentSpec(**kw)
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid experiment spec: {exc}") from None


def _coerce(key: str, value: str):
    try:
        if key == "m_grid":
            return tuple(int(v) for v in _split(value))
        if key == "methods":
            return tuple(_split(value))
        default = _SPEC_FIELDS[key].default
        if isinstance(default, bool):
            return value.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        return value
    except ValueError:
        raise CliError(f"bad value for {key!r}: {value!r}") from None


def cmd_experiment(a) -> int:
    try:
        with open(a.spec) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {a.spec}: {exc.strerror or exc}", EXIT_IO) from None
    spec = parse_spec_text(text)
    table = run_experiment(spec, threads=a.threads)
    write_text(a.out, table.to_csv())
    if a.summary:
        write_text(a.summary, json.dumps(table.summary(), indent=2, default=float) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_boot_flags(p: argparse.ArgumentParser):
    p.add_argument("--r", type=int, required=True, help="block size")
    p.add_argument("--k", type=int, default=2, help="circmax parameter (circular scheme)")
    p.add_argument("--B", type=int, default=1000, help="bootstrap replicates")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--correction", choices=("none", "auto", "factor"), default="none")
    p.add_argument("--factor", type=float, help="enlargement factor for --correction factor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circmax", description="Block-maxima inference with circular block maxima.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate an ARMAX series")
    p.add_argument("--model", choices=("armax-gpd", "armax-pareto"), default="armax-gpd")
    p.add_argument("--gamma", type=float, default=0.0, help="GPD shape (armax-gpd)")
    p.add_argument("--alpha", type=float, default=1.0, help="Pareto index (armax-pareto)")
    p.add_argument("--beta", type=float, default=0.0, help="serial dependence in [0, 1)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("blocks", help="extract a block-maxima series")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("disjoint", "disjoint-repeated", "sliding", "circular"), default="circular")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--compress", action="store_true", help="emit per-block (value, count) runs")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("fit", help="fit a GEV or Frechet model to block maxima")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("disjoint", "sliding", "circular"), default="sliding")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--family", choices=("gev", "frechet"), default="gev")
    p.add_argument("--c-trunc", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bootstrap-ci", help="bootstrap confidence interval")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("circular", "disjoint", "naive-sliding"), default="circular")
    p.add_argument("--target", default="mean", help="mean, rl<T>, gev_mle:<param>, frechet_mle:<param>")
    p.add_argument("--allow-inconsistent", action="store_true", help="permit the naive sliding bootstrap")
    p.add_argument("--json", action="store_true")
    _add_boot_flags(p)
    p.set_defaults(func=cmd_bootstrap_ci)

    p = sub.add_parser("window-scan", help="intervals on moving windows of blocks")
    p.add_argument("--data", required=True)
    p.add_argument("--window-blocks", type=int, default=40)
    p.add_argument("--step-blocks", type=int, default=1)
    p.add_argument("--targets", default="rl100")
    p.add_argument("--methods", default="circular,disjoint")
    p.add_argument("--smoothing", type=int, default=2, help="moving-average width of the smoothed columns")
    p.add_argument("--out", default="-")
    _add_boot_flags(p)
    p.set_defaults(func=cmd_window_scan)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a key = value spec file")
    p.add_argument("spec")
    p.add_argument("--out", default="-")
    p.add_argument("--summary", default=None, help="also write a JSON summary here")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"circmax: error: {exc}\n")
        return exc.code
    except (EstimationError, BootstrapFailure) as exc:
        sys.stderr.write(f"circmax: statistical failure: {exc}\n")
        return EXIT_STAT


if __name__ == "__main__":
    sys.exit(main())
