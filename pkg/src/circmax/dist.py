"""Closed-form GPD, GEV and Frechet distribution primitives.

All functions broadcast over numpy arrays and return Python floats for
scalar input. Log-likelihoods return ``-inf`` outside the support instead of
raising, so optimizers can treat support violations as a penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# below this |shape| the Gumbel / exponential limit is used
SHAPE_EPS = 1e-9


@dataclass(frozen=True)
class GevParams:
    """Location, scale and shape of a GEV distribution."""

    loc: float
    scale: float
    shape: float

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"GEV scale must be positive, got {self.scale}")
        if not (np.isfinite(self.loc) and np.isfinite(self.shape)):
            raise ValueError("GEV location and shape must be finite")

    def support(self) -> tuple[float, float]:
        if abs(self.shape) < SHAPE_EPS:
            return -np.inf, np.inf
        bound = self.loc - self.scale / self.shape
        return (bound, np.inf) if self.shape > 0 else (-np.inf, bound)


@dataclass(frozen=True)
class FrechetParams:
    """Shape ``alpha`` and scale ``sigma`` of a Frechet distribution on (0, inf)."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(
                f"Frechet shape and scale must be positive, got {self.shape}, {self.scale}"
            )

    def as_gev(self) -> GevParams:
        """The same law written as a GEV with positive shape."""
        return GevParams(loc=self.scale, scale=self.scale / self.shape, shape=1.0 / self.shape)


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


# ---------------------------------------------------------------- GPD(0, 1, gamma)


def gpd_cdf(x, gamma: float):
    """CDF of the standard generalized Pareto distribution."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if abs(gamma) < SHAPE_EPS:
            p = -np.expm1(-x)
        else:
            t = np.log1p(gamma * x)
            p = -np.expm1(-t / gamma)
            if gamma < 0:
                p = np.where(gamma * x <= -1.0, 1.0, p)
    p = np.where(x <= 0, 0.0, p)
    return _out(p)


def gpd_isf(s, gamma: float):
    """Quantile of the standard GPD at upper-tail probability ``s``.

    Working on the survival scale keeps full precision deep in the tail.
    """
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        ls = np.log(s)
        if abs(gamma) < SHAPE_EPS:
            x = -ls
        else:
            x = np.expm1(-gamma * ls) / gamma
    return _out(x)


def gpd_quantile(p, gamma: float):
    """Quantile of the standard GPD; ``p`` must lie in [0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0) & (p < 1))):
        raise ValueError("gpd_quantile requires 0 <= p < 1")
    with np.errstate(divide="ignore"):
        lq = np.log1p(-p)
        if abs(gamma) < SHAPE_EPS:
            x = -lq
        else:
            x = np.expm1(-gamma * lq) / gamma
    return _out(x)


# ---------------------------------------------------------------- GEV


def _gev_t(x, theta: GevParams):
    """Return (z, log(1 + shape*z)) with nan where outside the support."""
    z = (np.asarray(x, dtype=float) - theta.loc) / theta.scale
    g = theta.shape
    with np.errstate(invalid="ignore", divide="ignore"):
        lt = np.log1p(g * z)
    return z, lt


def gev_cdf(x, theta: GevParams):
    """CDF of GEV(loc, scale, shape); Gumbel for |shape| < 1e-9."""
    z, lt = _gev_t(x, theta)
    g = theta.shape
    if abs(g) < SHAPE_EPS:
        with np.errstate(over="ignore"):
            p = np.exp(-np.exp(-z))
        return _out(p)
    with np.errstate(over="ignore", invalid="ignore"):
        p = np.exp(-np.exp(-lt / g))
    below = 1.0 + g * z <= 0
    p = np.where(below, 0.0 if g > 0 else 1.0, p)
    return _out(p)


def gev_quantile(p, theta: GevParams):
    """Quantile of GEV(loc, scale, shape) for ``p`` in (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ValueError("gev_quantile requires 0 < p < 1")
    llp = np.log(-np.log(p))
    g = theta.shape
    if abs(g) < SHAPE_EPS:
        z = -llp
    else:
        z = np.expm1(-g * llp) / g
    return _out(theta.loc + theta.scale * z)


def gev_loglik(theta: GevParams, x):
    """Log density of GEV(loc, scale, shape) at ``x``; ``-inf`` off the support."""
    z, lt = _gev_t(x, theta)
    g = theta.shape
    ls = np.log(theta.scale)
    if abs(g) < SHAPE_EPS:
        with np.errstate(over="ignore"):
            ll = -ls - z - np.exp(-z)
        return _out(ll)
    with np.errstate(over="ignore", invalid="ignore"):
        ll = -ls - (1.0 + 1.0 / g) * lt - np.exp(-lt / g)
    ll = np.where(1.0 + g * z > 0, ll, -np.inf)
    return _out(ll)


# ---------------------------------------------------------------- Frechet


def frechet_cdf(x, theta: FrechetParams):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p = np.exp(-np.exp(-theta.shape * np.log(x / theta.scale)))
    return _out(np.where(x > 0, p, 0.0))


def frechet_loglik(theta: FrechetParams, x):
    """Frechet log density ``log(a/s) - (x/s)^-a - (a+1) log(x/s)`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("frechet_loglik requires x > 0")
    a = theta.shape
    lx = np.log(x / theta.scale)
    with np.errstate(over="ignore"):
        ll = np.log(a / theta.scale) - np.exp(-a * lx) - (a + 1.0) * lx
    return _out(ll)
