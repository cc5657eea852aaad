"""Exact ARMAX simulators and their analytic ground truth.

On the unit-Frechet scale both models follow the max-autoregression
``Y_t = max(beta * Y_{t-1}, (1 - beta) * W_t)`` with iid unit-Frechet
innovations. ``Y_0`` is drawn from the stationary unit-Frechet law, so the
output is stationary from the first observation and no burn-in is needed.
The observed series is the marginal transform of ``Y`` to GPD(0, 1, gamma)
or Pareto(alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dist import SHAPE_EPS, gpd_cdf, gpd_isf
from .rng import stream

# running-max offsets are kept below this many log units
_DRIFT_BUDGET = 256.0


def _check_beta(beta: float):
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")


@dataclass(frozen=True)
class ArmaxGpdConfig:
    gamma: float
    beta: float
    n: int
    seed: int = 0

    def __post_init__(self):
        _check_beta(self.beta)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")


@dataclass(frozen=True)
class ArmaxParetoConfig:
    alpha: float
    beta: float
    n: int
    seed: int = 0

    def __post_init__(self):
        _check_beta(self.beta)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


def armax_log_frechet(n: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Simulate ``log Y_1..log Y_n`` of the stationary ARMAX(1) recursion.

    In logs the recursion reads ``L_t = max(L_{t-1} + log(beta), e_t)`` with
    ``e_t = log((1 - beta) W_t)``. Subtracting ``t*log(beta)`` turns it into a
    running maximum, evaluated chunk-wise so the offset stays small.
    """
    _check_beta(beta)
    e = -np.log(rng.standard_exponential(n + 1))  # log of unit Frechet draws
    if beta == 0.0:
        return e[1:].copy()
    lb = math.log(beta)
    e[1:] += math.log1p(-beta)
    chunk = max(8, int(_DRIFT_BUDGET / -lb))
    out = np.empty(n)
    prev = e[0]  # stationary start
    for a in range(1, n + 1, chunk):
        seg = e[a : a + chunk]
        drift = lb * np.arange(1, len(seg) + 1)
        acc = np.maximum.accumulate(np.maximum(seg - drift, prev))
        vals = acc + drift
        out[a - 1 : a - 1 + len(seg)] = vals
        prev = vals[-1]
    return out


def _frechet_survival(log_y: np.ndarray) -> np.ndarray:
    # 1 - exp(-1/Y), accurate for large Y
    return -np.expm1(-np.exp(-log_y))


def simulate_armax_gpd(cfg: ArmaxGpdConfig, series_index: int = 0) -> np.ndarray:
    """ARMAX series with GPD(0, 1, gamma) margins."""
    rng = stream(cfg.seed, series_index)
    ly = armax_log_frechet(cfg.n, cfg.beta, rng)
    return gpd_isf(_frechet_survival(ly), cfg.gamma)


def simulate_armax_pareto(cfg: ArmaxParetoConfig, series_index: int = 0) -> np.ndarray:
    """ARMAX series with Pareto(alpha) margins on (1, inf)."""
    rng = stream(cfg.seed, series_index)
    ly = armax_log_frechet(cfg.n, cfg.beta, rng)
    s = _frechet_survival(ly)
    return np.exp(-np.log(s) / cfg.alpha)


def _extremal_exponent(r: int, beta: float) -> float:
    return beta + (1.0 - beta) * r


def block_max_survival_quantile(u, r: int, beta: float):
    """Upper-tail probability of one observation at the ``u``-quantile of ``M_r``.

    Since ``P(M_r <= x) = F(x)^e`` with ``e = beta + (1-beta) r``, the
    ``u``-quantile of ``M_r`` is ``F^{-1}(u^{1/e})``; this returns
    ``1 - u^{1/e}`` without cancellation.
    """
    e = _extremal_exponent(r, beta)
    with np.errstate(divide="ignore"):
        return -np.expm1(np.log(u) / e)


def true_return_level(T: float, r: int, gamma: float, beta: float) -> float:
    """Exact ``(1 - 1/T)``-quantile of the block maximum of an ARMAX-GPD series."""
    if not T > 1:
        raise ValueError("return period T must exceed 1")
    e = _extremal_exponent(r, beta)
    s = -math.expm1(math.log1p(-1.0 / T) / e)
    return float(gpd_isf(s, gamma))


def true_return_level_pareto(T: float, r: int, alpha: float, beta: float) -> float:
    if not T > 1:
        raise ValueError("return period T must exceed 1")
    e = _extremal_exponent(r, beta)
    s = -math.expm1(math.log1p(-1.0 / T) / e)
    return float(s ** (-1.0 / alpha))


def true_block_mean(r: int, gamma: float, beta: float) -> float:
    """``E[M_r]`` for an ARMAX-GPD series, by quadrature over the quantile function."""
    if gamma >= 1:
        raise ValueError("block-maximum mean is infinite for gamma >= 1")

    return _block_mean_quad(lambda s: gpd_isf(s, gamma), max(gamma, 0.0), r, beta)


def true_block_mean_pareto(r: int, alpha: float, beta: float) -> float:
    if alpha <= 1:
        raise ValueError("block-maximum mean is infinite for alpha <= 1")

    return _block_mean_quad(lambda s: s ** (-1.0 / alpha), 1.0 / alpha, r, beta)


def _block_mean_quad(isf, tail: float, r: int, beta: float) -> float:
    """``int_0^1 Q(u) du`` for the block-maximum quantile function ``Q``.

    ``Q(u)`` grows like ``(1-u)^-tail`` at ``u -> 1``; writing ``1 - u = t^p``
    with ``p = 1/(1 - tail)`` removes that endpoint singularity.
    """
    p = 1.0 / (1.0 - tail)
    e = _extremal_exponent(r, beta)

    def integrand(t):
        if t <= 0.0:
            return 0.0
        v = t**p
        s = -math.expm1(math.log1p(-v) / e) if v < 1.0 else 1.0
        return float(isf(s)) * p * t ** (p - 1.0)

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=500)
    return val


def norming_constants(r: int, gamma: float, beta: float) -> tuple[float, float]:
    """Scale ``a_r`` and location ``b_r`` standardizing ``M_r`` to GEV(gamma)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    eff = r * (1.0 - beta)
    if abs(gamma) < SHAPE_EPS:
        return 1.0, math.log(eff)
    return eff**gamma, math.expm1(gamma * math.log(eff)) / gamma


def block_max_cdf(x, r: int, gamma: float, beta: float):
    """Exact CDF of ``M_r`` for an ARMAX-GPD series."""
    return np.asarray(gpd_cdf(x, gamma)) ** _extremal_exponent(r, beta)
