"""Weighted pseudo-maximum-likelihood fits over block-maxima samples.

A sample of block maxima is fitted as if its entries were independent.
Circular and bootstrap samples are naturally weighted (run lengths times
bootstrap multiplicities), so every estimator here works on a
:class:`WeightedSample`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dist import SHAPE_EPS, FrechetParams, GevParams
from .errors import AllTied, Degenerate, NoConvergence

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class WeightedSample:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.shape != w.shape or v.ndim != 1:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        keep = w > 0
        if not keep.any():
            raise ValueError("total weight must be positive")
        object.__setattr__(self, "values", v[keep])
        object.__setattr__(self, "weights", w[keep])

    @classmethod
    def unweighted(cls, x) -> "WeightedSample":
        x = np.asarray(x, dtype=float)
        return cls(x, np.ones_like(x))

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def n_distinct(self) -> int:
        return len(np.unique(self.values))


@dataclass(frozen=True)
class FitResult:
    params: GevParams | FrechetParams
    loglik: float
    converged: bool
    iterations: int


def weighted_mean(s: WeightedSample) -> float:
    return float(np.dot(s.weights, s.values) / s.total)


def weighted_median(s: WeightedSample) -> float:
    order = np.argsort(s.values, kind="stable")
    cw = np.cumsum(s.weights[order])
    return float(s.values[order][np.searchsorted(cw, 0.5 * cw[-1])])


# ---------------------------------------------------------------- Frechet


def default_truncation(s: WeightedSample) -> float:
    med = weighted_median(s)
    if not med > 0:
        raise ValueError("default truncation needs a positive median; pass c_trunc explicitly")
    return 1e-6 * med


def frechet_weighted_loglik(theta: FrechetParams, s: WeightedSample, c_trunc: float) -> float:
    y = np.maximum(s.values, c_trunc)
    a, sig = theta.shape, theta.scale
    ly = np.log(y / sig)
    ll = math.log(a / sig) - np.exp(-a * ly) - (a + 1.0) * ly
    return float(np.dot(s.weights, ll))


def fit_frechet(
    s: WeightedSample,
    c_trunc: float | None = None,
    *,
    bracket: tuple[float, float] = (1e-4, 1e4),
    rtol: float = 1e-10,
) -> FitResult:
    """Maximize ``sum w_i l(x_i v c)`` over Frechet (shape, scale).

    The scale is profiled out: for fixed shape ``a`` the optimal scale
    satisfies ``sigma^a = sum(w) / sum(w y^-a)``. The remaining profile score

        g(a) = 1/a + sum(w y^-a log y) / sum(w y^-a) - sum(w log y) / sum(w)

    is strictly decreasing, so its root is found by bracketing.
    """
    if c_trunc is None:
        c_trunc = default_truncation(s)
    if not c_trunc > 0:
        raise ValueError("truncation constant must be positive")
    w = s.weights / s.total
    ly = np.log(np.maximum(s.values, c_trunc))
    centre = float(np.dot(w, ly))
    l = ly - centre
    if np.ptp(l) == 0.0:
        raise AllTied("all truncated observations are tied")

    def log_sum(a):
        # log sum w exp(-a l), shifted for stability
        e = -a * l
        mx = e.max()
        return mx + math.log(float(np.dot(w, np.exp(e - mx))))

    def score(a):
        e = -a * l
        p = w * np.exp(e - e.max())
        return 1.0 / a + float(np.dot(p, l)) / float(p.sum())

    lo, hi = 1.0, 1.0
    iters = 0
    while score(lo) <= 0:
        lo /= 2.0
        iters += 1
        if lo < bracket[0]:
            raise NoConvergence("Frechet shape below the search bracket")
    while score(hi) >= 0:
        hi *= 2.0
        iters += 1
        if hi > bracket[1]:
            raise NoConvergence("Frechet shape above the search bracket")
    a, res = optimize.brentq(score, lo, hi, xtol=1e-300, rtol=rtol, full_output=True)
    if not res.converged:
        raise NoConvergence("profile score root finding failed")
    sigma = math.exp(centre - log_sum(a) / a)
    theta = FrechetParams(a, sigma)
    return FitResult(theta, frechet_weighted_loglik(theta, s, c_trunc), True, iters + res.iterations)


# ---------------------------------------------------------------- GEV


def gev_weighted_loglik(theta: GevParams, s: WeightedSample) -> float:
    return _gev_ll(s.values, s.weights, theta.loc, theta.scale, theta.shape)


def _gev_ll(x, w, loc, scale, shape) -> float:
    z = (x - loc) / scale
    if abs(shape) < SHAPE_EPS:
        ll = -z - np.exp(-z)
    else:
        t = shape * z
        if t.min() <= -1.0:
            return -math.inf
        lt = np.log1p(t)
        ll = -(1.0 + 1.0 / shape) * lt - np.exp(-lt / shape)
    return float(np.dot(w, ll)) - float(w.sum()) * math.log(scale)


def gev_start(s: WeightedSample) -> GevParams:
    """Gumbel moment start: ``scale = sd*sqrt(6)/pi``, ``loc = mean - 0.5772*scale``."""
    mean = weighted_mean(s)
    sd = math.sqrt(float(np.dot(s.weights, (s.values - mean) ** 2)) / s.total)
    scale = sd * math.sqrt(6.0) / math.pi
    return GevParams(mean - EULER_GAMMA * scale, scale, 0.1)


def fit_gev(
    s: WeightedSample,
    *,
    start: GevParams | None = None,
    xatol: float = 1e-8,
    maxiter: int = 5000,
    step: float = 0.1,
    restarts: int = 3,
) -> FitResult:
    """Weighted GEV pseudo-MLE by Nelder-Mead.

    The search runs in the scaled coordinates
    ``((loc - loc0)/scale0, log(scale/scale0), shape)`` around the Gumbel
    moment start, which makes the fit exactly location-scale equivariant.
    Support violations score ``-inf``. The simplex is restarted at the
    optimum until a restart no longer moves it.
    """
    if s.n_distinct() < 3:
        raise Degenerate("GEV fit needs at least 3 distinct values")
    theta0 = gev_start(s) if start is None else start
    loc0, sc0 = theta0.loc, theta0.scale
    if not sc0 > 0:
        raise Degenerate("zero spread in sample")
    x = (s.values - loc0) / sc0
    w = s.weights

    def nll(u):
        if not np.all(np.isfinite(u)):
            return math.inf
        return -_gev_ll(x, w, u[0], math.exp(u[1]), u[2])

    u = np.array([0.0, 0.0, theta0.shape])
    if not math.isfinite(nll(u)):
        u[2] = 0.0
    total_iter = 0
    converged = False
    for _ in range(restarts + 1):
        simplex = np.vstack([u, u + step * np.eye(3)])
        res = optimize.minimize(
            nll,
            u,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": xatol,
                "fatol": math.inf,
                "maxiter": maxiter - total_iter,
                "maxfev": 10 * maxiter,
            },
        )
        total_iter += res.nit
        if not res.success:
            raise NoConvergence(f"Nelder-Mead stopped after {total_iter} iterations: {res.message}")
        moved = np.max(np.abs(res.x - u))
        u = res.x
        if moved <= 10 * xatol:
            converged = True
            break
    if not math.isfinite(res.fun):
        raise NoConvergence("GEV likelihood is -inf at the optimum")
    theta = GevParams(float(loc0 + sc0 * u[0]), float(sc0 * math.exp(u[1])), float(u[2]))
    return FitResult(theta, gev_weighted_loglik(theta, s), converged, total_iter)


def return_level_from_gev(theta: GevParams, T: float) -> float:
    """``(1 - 1/T)``-quantile of the fitted GEV: ``b + a (c_T^-g - 1)/g``, ``c_T = -log(1 - 1/T)``."""
    if not T > 1:
        raise ValueError("return period T must exceed 1")
    lc = math.log(-math.log1p(-1.0 / T))
    g = theta.shape
    if abs(g) < SHAPE_EPS:
        return theta.loc - theta.scale * lc
    return theta.loc + theta.scale * math.expm1(-g * lc) / g
