"""Monte Carlo harness and closed-form asymptotic variances.

``run_experiment`` simulates ARMAX series for every effective sample size
``m`` of a grid, computes the disjoint / sliding / circular estimates and
their bootstrap intervals, and aggregates MSE, bias, coverage and width
against the exact target from :mod:`circmax.sim`. All methods in a cell see
the same simulated series.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from . import __version__
from .blocks import BlockScheme
from .boot import (
    BootstrapSpec,
    Correction,
    Estimator,
    anchor_sample,
    bootstrap_ci,
    resampling_blocks,
)
from .errors import BootstrapFailure, EstimationError
from .fit import EULER_GAMMA
from .rng import derive_seed
from .sim import (
    ArmaxGpdConfig,
    ArmaxParetoConfig,
    simulate_armax_gpd,
    simulate_armax_pareto,
    true_block_mean,
    true_block_mean_pareto,
    true_return_level,
    true_return_level_pareto,
)

CSV_HEADER = ["method", "m", "mse", "variance", "bias_sq", "coverage", "avg_width", "rel_mse", "rel_width"]

# |gamma| below which the gamma = 0 closed forms are returned
_ZERO_SHAPE = 1e-7


# ---------------------------------------------------------------- asymptotic oracles


def _alpha_minus_one(w: float, c: float) -> float:
    """``alpha_c(w) - 1`` where ``alpha_c(w) = w^-1 int_0^w (1-z)^c dz``."""
    if w < 1e-4:
        return -c * w / 2 + c * (c - 1) * w**2 / 6 - c * (c - 1) * (c - 2) * w**3 / 24
    c1 = c + 1.0
    if abs(c1) < 1e-12:
        return -math.log1p(-w) / w - 1.0
    return -math.expm1(c1 * math.log1p(-w)) / (w * c1) - 1.0


def sliding_integral(gamma: float) -> float:
    """``I(gamma) = 2 int_0^1/2 (alpha_2g(w) - 1) w^(-g-1) (1-w)^(-g-1) dw``."""
    c = 2.0 * gamma
    eps = 1e-12

    def f(w):
        return _alpha_minus_one(w, c) * math.exp((-gamma - 1.0) * (math.log(w) + math.log1p(-w)))

    val, _ = integrate.quad(f, eps, 0.5, epsabs=1e-11, epsrel=1e-11, limit=400)
    # near 0 the integrand is -gamma * w^-gamma
    head = -gamma * eps ** (1.0 - gamma) / (1.0 - gamma)
    return 2.0 * (val + head)


def asy_var_mean(gamma: float, method: str) -> float:
    """Asymptotic variance of the disjoint or sliding block-maxima mean.

    Normalized by ``sqrt(n/r) / (r (1 - beta))^gamma``. The circular
    estimator shares the sliding value.
    """
    if gamma >= 0.5:
        raise ValueError("asymptotic variance of the mean needs gamma < 1/2")
    if method == "disjoint":
        if abs(gamma) < _ZERO_SHAPE:
            return math.pi**2 / 6.0
        g1, g2 = special.gamma(1 - gamma), special.gamma(1 - 2 * gamma)
        return float((g2 - g1**2) / gamma**2)
    if method in ("sliding", "circular"):
        if abs(gamma) < _ZERO_SHAPE:
            return 4.0 * (math.log(4.0) - 1.0)
        # one expression for both signs; equals 2 Gamma(-2 gamma) I(gamma)
        return float(-special.gamma(1 - 2 * gamma) / gamma * sliding_integral(gamma))
    raise ValueError(f"unknown method {method!r}")


def gamma_second_derivative_at_two() -> float:
    """``Gamma''(2) = Gamma(2) (psi(2)^2 + psi'(2))``."""
    psi = special.digamma(2.0)
    return float(special.gamma(2.0) * (psi**2 + special.polygamma(1, 2.0)))


def m_matrix(alpha0: float) -> np.ndarray:
    """2x3 linearization matrix of the Frechet pseudo-MLE."""
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    a, g = alpha0, EULER_GAMMA
    return (6.0 / math.pi**2) * np.array(
        [
            [a**2, a * (1 - g), -(a**2)],
            [g - 1, -(gamma_second_derivative_at_two() + 1) / a, 1 - g],
        ]
    )


def asy_cov_frechet_sliding(alpha0: float) -> np.ndarray:
    """Asymptotic covariance of the sliding Frechet pseudo-MLE (shape, relative scale)."""
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    return np.array([[0.4946 * alpha0**2, -0.3236], [-0.3236, 0.9578 / alpha0**2]])


# ---------------------------------------------------------------- experiments


@dataclass(frozen=True)
class ExperimentSpec:
    model: str = "armax-gpd"
    gamma: float = 0.0
    alpha: float = 1.0
    beta: float = 0.0
    target: str = "mean"
    r: int = 100
    m_grid: tuple[int, ...] = (50,)
    methods: tuple[str, ...] = ("disjoint", "sliding")
    k: int = 2
    N: int = 100
    B: int = 0
    level: float = 0.95
    seed: int = 0
    correction: str = "none"

    def __post_init__(self):
        if self.model not in ("armax-gpd", "armax-pareto"):
            raise ValueError(f"unknown model {self.model!r}")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.m_grid or not self.methods:
            raise ValueError("m_grid and methods must be non-empty")
        if self.r < 1 or self.k < 1 or min(self.m_grid) < 1:
            raise ValueError("r, k and every m must be >= 1")
        if self.B and self.B < 20:
            raise ValueError("B must be 0 (no intervals) or >= 20")
        for meth in self.methods:
            parse_method(meth, self.k)
        Estimator.parse(self.target)
        Correction.parse(self.correction)

    @property
    def estimator(self) -> Estimator:
        return Estimator.parse(self.target)

    def config(self, n: int, seed: int):
        if self.model == "armax-gpd":
            return ArmaxGpdConfig(self.gamma, self.beta, n, seed)
        return ArmaxParetoConfig(self.alpha, self.beta, n, seed)

    def simulate(self, n: int, seed: int, index: int) -> np.ndarray:
        cfg = self.config(n, seed)
        if self.model == "armax-gpd":
            return simulate_armax_gpd(cfg, index)
        return simulate_armax_pareto(cfg, index)


def parse_method(text: str, default_k: int = 2) -> tuple[str, int]:
    """``disjoint``, ``sliding``, ``circular``, ``circular(3)``, ``naive-sliding`` ..."""
    t = text.strip().lower()
    name, k = t, default_k
    if "(" in t and t.endswith(")"):
        name, arg = t[:-1].split("(", 1)
        k = int(arg)
    if name not in ("disjoint", "sliding", "circular", "naive-sliding"):
        raise ValueError(f"unknown method {text!r}")
    if name == "disjoint":
        k = 1
    elif k < 2:
        raise ValueError(f"method {text!r} needs k >= 2")
    return name, k


def true_target(spec: ExperimentSpec) -> "callable":
    """Map ``r`` to the exact value of the experiment's target."""
    est = spec.estimator
    gpd = spec.model == "armax-gpd"
    if est.kind == "mean":
        if gpd:
            return lambda r: true_block_mean(r, spec.gamma, spec.beta)
        return lambda r: true_block_mean_pareto(r, spec.alpha, spec.beta)
    if est.kind == "return_level":
        if gpd:
            return lambda r: true_return_level(est.T, r, spec.gamma, spec.beta)
        return lambda r: true_return_level_pareto(est.T, r, spec.alpha, spec.beta)
    if est.kind == "frechet_mle" and est.param == "shape":
        if gpd:
            if not spec.gamma > 0:
                raise ValueError("Frechet shape target needs a heavy tail (gamma > 0)")
            return lambda r: 1.0 / spec.gamma
        return lambda r: spec.alpha
    if est.kind == "gev_mle" and est.param == "shape":
        return lambda r: spec.gamma if gpd else 1.0 / spec.alpha
    raise ValueError(f"no exact value for target {spec.target!r}")


@dataclass
class MetricsRow:
    method: str
    m: int
    mse: float
    variance: float
    bias_sq: float
    coverage: float
    avg_width: float
    rel_mse: float = math.nan
    rel_width: float = math.nan
    truth: float = math.nan
    mean_boot_var: float = math.nan
    failures: int = 0

    def csv_fields(self) -> list[str]:
        def f(v):
            return repr(float(v))

        return [
            self.method,
            str(self.m),
            f(self.mse),
            f(self.variance),
            f(self.bias_sq),
            f(self.coverage),
            f(self.avg_width),
            f(self.rel_mse),
            f(self.rel_width),
        ]


@dataclass
class MetricsTable:
    spec: ExperimentSpec
    rows: list[MetricsRow] = field(default_factory=list)

    def row(self, method: str, m: int) -> MetricsRow:
        for r in self.rows:
            if r.method == method and r.m == m:
                return r
        raise KeyError((method, m))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# circmax {__version__}\n")
        for key, value in spec_items(self.spec):
            buf.write(f"# {key} = {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "version": __version__,
            "spec": dict(spec_items(self.spec)),
            "rows": [asdict(r) for r in self.rows],
        }


def spec_items(spec: ExperimentSpec) -> list[tuple[str, str]]:
    out = []
    for key, value in asdict(spec).items():
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        out.append((key, str(value)))
    return out


def _one_replication(spec: ExperimentSpec, est: Estimator, m: int, i: int, methods):
    """Estimates and intervals of every method on series ``i`` of cell ``m``."""
    n = m * spec.r
    x = spec.simulate(n, derive_seed(spec.seed, m), i)
    boot_seed = derive_seed(spec.seed, m, i)
    out = {}
    blocks_cache = {}
    for label, (name, k) in methods:
        try:
            if spec.B:
                if name == "disjoint":
                    scheme, anchor = BlockScheme("disjoint", spec.r, 1), "disjoint"
                elif name == "naive-sliding":
                    scheme, anchor = BlockScheme("naive-sliding", spec.r, k), "sliding"
                else:
                    scheme, anchor = BlockScheme("circular", spec.r, k), name
                key = (scheme.method, k)
                if key not in blocks_cache:
                    blocks_cache[key] = resampling_blocks(x, scheme)
                bspec = BootstrapSpec(
                    scheme,
                    spec.B,
                    spec.level,
                    boot_seed,
                    est,
                    Correction.parse(spec.correction),
                    allow_inconsistent=True,
                )
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    res = bootstrap_ci(x, bspec, anchor=anchor, blocks=blocks_cache[key])
                ci = res.interval
                out[label] = (ci.point, ci.lower, ci.upper, res.variance)
            else:
                s = anchor_sample(x, "sliding" if name == "naive-sliding" else name, spec.r, k)
                out[label] = (est.bind(s)(s), math.nan, math.nan, math.nan)
        except (EstimationError, BootstrapFailure):
            out[label] = None
    return out


def _fmean(v) -> float:
    return math.fsum(v) / len(v)


def _aggregate(label: str, m: int, truth: float, results: list, N: int) -> MetricsRow:
    ok = [r for r in results if r is not None]
    failures = N - len(ok)
    if not ok:
        raise BootstrapFailure(failures, N)
    est = np.array([r[0] for r in ok])
    mean = _fmean(est)
    variance = _fmean((est - mean) ** 2)
    mse = _fmean((est - truth) ** 2)
    lower = np.array([r[1] for r in ok])
    upper = np.array([r[2] for r in ok])
    if np.all(np.isnan(lower)):
        coverage = width = boot_var = math.nan
    else:
        coverage = float(np.mean((lower <= truth) & (truth <= upper)))
        width = _fmean(upper - lower)
        boot_var = _fmean(np.array([r[3] for r in ok]))
    return MetricsRow(
        label, m, mse, variance, (mean - truth) ** 2, coverage, width,
        truth=truth, mean_boot_var=boot_var, failures=failures,
    )


def run_experiment(spec: ExperimentSpec, *, threads: int = 1) -> MetricsTable:
    """Run every (method, m) cell of ``spec``; deterministic given ``spec.seed``.

    With ``spec.B == 0`` only point estimates are computed and the coverage,
    width and bootstrap-variance columns are NaN.
    """
    est = spec.estimator
    truth_of = true_target(spec)
    methods = [(meth, parse_method(meth, spec.k)) for meth in spec.methods]
    table = MetricsTable(spec)
    for m in spec.m_grid:
        truth = truth_of(spec.r)

        def job(i, m=m):
            return _one_replication(spec, est, m, i, methods)

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                reps = list(pool.map(job, range(spec.N)))
        else:
            reps = [job(i) for i in range(spec.N)]
        cell = []
        for label, _ in methods:
            results = [rep[label] for rep in reps]
            n_fail = sum(r is None for r in results)
            if n_fail > 0.05 * spec.N:
                raise BootstrapFailure(n_fail, spec.N)
            cell.append(_aggregate(label, m, truth, results, spec.N))
        ref = next((r for r in cell if r.method == "disjoint"), None)
        if ref is not None:
            for r in cell:
                r.rel_mse = r.mse / ref.mse if ref.mse > 0 else math.nan
                r.rel_width = r.avg_width / ref.avg_width if ref.avg_width > 0 else math.nan
        table.rows.extend(cell)
    return table


@dataclass(frozen=True)
class Presimulation:
    variance: float
    mean: float
    count: int


def presimulate_variance(
    spec: ExperimentSpec, method: str, m: int, count: int, *, seed: int | None = None
) -> Presimulation:
    """Variance of a point estimator over ``count`` fresh series (no bootstrap)."""
    name, k = parse_method(method, spec.k)
    est = spec.estimator
    seed = derive_seed(spec.seed if seed is None else seed, 0xB0B)
    vals = []
    for i in range(count):
        x = spec.simulate(m * spec.r, seed, i)
        s = anchor_sample(x, "sliding" if name == "naive-sliding" else name, spec.r, k)
        vals.append(est.bind(s)(s))
    v = np.array(vals)
    mean = _fmean(v)
    return Presimulation(_fmean((v - mean) ** 2) * count / (count - 1), mean, count)
