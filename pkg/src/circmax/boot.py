"""Block bootstrap for block-maxima estimators.

Maxima are computed once per series and stored as run-length encoded
``k*r``-blocks. A bootstrap replicate draws multinomial block multiplicities
and evaluates the estimator on the re-weighted runs, so no maxima are ever
recomputed. Disjoint blocks are the ``k = 1`` case. The naive sliding
bootstrap (resampling ``k*r``-blocks of the plain sliding series) is
available for comparison only: it underestimates the estimation variance.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .blocks import (
    BlockScheme,
    CompressedBlocks,
    circmax,
    compress,
    compress_sliding,
    disjoint_maxima,
    sliding_maxima,
)
from .errors import AllTied, BootstrapFailure, EstimationError
from .fit import (
    WeightedSample,
    default_truncation,
    fit_frechet,
    fit_gev,
    return_level_from_gev,
    weighted_mean,
)
from .rng import stream

Anchor = Literal["disjoint", "sliding", "circular"]

MAX_FAILURE_RATE = 0.05

# correction-factor regressions: intercept, per-block slope, shape slope
_CORRECTION = {
    "rl100": (2.48, -0.01, 0.68),
    "mean": (1.222, -0.001, 0.251),
}
CORRECTION_RANGE_M = (40, 100)
CORRECTION_RANGE_SHAPE = (-0.2, 0.2)


# ---------------------------------------------------------------- estimators


@dataclass(frozen=True)
class Estimator:
    """A scalar functional of a weighted block-maxima sample.

    ``kind`` is one of ``mean``, ``frechet_mle``, ``gev_mle`` or
    ``return_level``. ``param`` picks the reported component of a fit.
    """

    kind: Literal["mean", "frechet_mle", "gev_mle", "return_level"]
    param: str = ""
    T: float | None = None
    c_trunc: float | None = None

    def __post_init__(self):
        allowed = {
            "mean": ("",),
            "frechet_mle": ("shape", "scale"),
            "gev_mle": ("shape", "loc", "scale"),
            "return_level": ("",),
        }
        if self.kind not in allowed:
            raise ValueError(f"unknown estimator {self.kind!r}")
        if self.kind in ("frechet_mle", "gev_mle") and not self.param:
            object.__setattr__(self, "param", "shape")
        if self.param not in allowed[self.kind]:
            raise ValueError(f"estimator {self.kind!r} has no parameter {self.param!r}")
        if self.kind == "return_level" and not (self.T is not None and self.T > 1):
            raise ValueError("return_level needs a return period T > 1")

    @classmethod
    def parse(cls, text: str) -> "Estimator":
        """Parse ``mean``, ``rl100``, ``return_level:50``, ``gev_mle:loc``, ``frechet_mle`` ..."""
        t = text.strip().lower().replace("-", "_")
        if t.startswith("rl") and t[2:].replace(".", "", 1).isdigit():
            return cls("return_level", T=float(t[2:]))
        head, _, arg = t.partition(":")
        if head == "return_level":
            try:
                return cls("return_level", T=float(arg))
            except ValueError:
                raise ValueError(f"bad return period in {text!r}") from None
        if head == "frechet_shape":
            return cls("frechet_mle", "shape")
        return cls(head, arg)  # type: ignore[arg-type]

    @property
    def label(self) -> str:
        if self.kind == "return_level":
            return f"rl{self.T:g}"
        return f"{self.kind}:{self.param}" if self.param else self.kind

    @property
    def correction_target(self) -> str:
        return "mean" if self.kind == "mean" else "rl100"

    def bind(self, s: WeightedSample) -> "Estimator":
        """Fix data-dependent settings (the Frechet truncation) from the full sample."""
        if self.kind == "frechet_mle" and self.c_trunc is None:
            return replace(self, c_trunc=default_truncation(s))
        return self

    def __call__(self, s: WeightedSample) -> float:
        if self.kind == "mean":
            return weighted_mean(s)
        if self.kind == "frechet_mle":
            p = fit_frechet(s, self.c_trunc).params
            return p.shape if self.param == "shape" else p.scale
        theta = fit_gev(s).params
        if self.kind == "return_level":
            return return_level_from_gev(theta, self.T)
        return getattr(theta, self.param)

    def shape_estimate(self, s: WeightedSample) -> float:
        """GEV shape implied by the sample, feeding the size correction."""
        if self.kind == "frechet_mle":
            return 1.0 / fit_frechet(s, self.c_trunc).params.shape
        return fit_gev(s).params.shape


@dataclass(frozen=True)
class Correction:
    """Interval enlargement: ``none``, a fixed ``factor``, or ``auto`` from the regressions."""

    kind: Literal["none", "factor", "auto"] = "none"
    factor: float = 1.0
    target: str | None = None

    def __post_init__(self):
        if self.kind not in ("none", "factor", "auto"):
            raise ValueError(f"unknown correction {self.kind!r}")
        if self.kind == "factor" and not self.factor >= 1:
            raise ValueError("correction factor must be >= 1")
        if self.target is not None and self.target not in _CORRECTION:
            raise ValueError(f"no correction regression for target {self.target!r}")

    @classmethod
    def parse(cls, text: str) -> "Correction":
        t = text.strip().lower()
        head, _, arg = t.partition(":")
        if head == "none":
            return cls()
        if head == "auto":
            return cls("auto", target=arg or None)
        if head == "factor":
            return cls("factor", float(arg))
        try:
            return cls("factor", float(t))
        except ValueError:
            raise ValueError(f"bad correction {text!r}") from None


def correction_factor(target: str, m: int, gamma_hat: float) -> float:
    """Regression enlargement factor ``c(m, gamma)``, clamped below at 1."""
    try:
        a, b, c = _CORRECTION[target]
    except KeyError:
        raise ValueError(f"no correction regression for target {target!r}") from None
    return max(1.0, a + b * m + c * gamma_hat)


def correction_in_range(m: int, gamma_hat: float) -> bool:
    return (
        CORRECTION_RANGE_M[0] <= m <= CORRECTION_RANGE_M[1]
        and CORRECTION_RANGE_SHAPE[0] <= gamma_hat <= CORRECTION_RANGE_SHAPE[1]
    )


# ---------------------------------------------------------------- engine


@dataclass(frozen=True)
class BootstrapSpec:
    scheme: BlockScheme
    B: int = 1000
    level: float = 0.95
    seed: int = 0
    estimator: Estimator = field(default_factory=lambda: Estimator("mean"))
    correction: Correction = field(default_factory=Correction)
    allow_inconsistent: bool = False

    def __post_init__(self):
        if self.B < 20:
            raise ValueError("need at least B = 20 bootstrap replicates")
        if not 0 < self.level < 1:
            raise ValueError("confidence level must lie in (0, 1)")
        method = self.scheme.method
        if method == "disjoint" and self.scheme.k != 1:
            raise ValueError("the disjoint bootstrap is the k = 1 scheme")
        if method == "circular" and self.scheme.k < 2:
            raise ValueError("circular bootstrap needs k >= 2 (k = 1 is the disjoint scheme)")
        if method == "naive-sliding" and not self.allow_inconsistent:
            raise ValueError(
                "the naive sliding bootstrap is known to be inconsistent "
                "(it underestimates the variance); set allow_inconsistent to use it"
            )
        if method not in ("disjoint", "circular", "naive-sliding"):
            raise ValueError(f"cannot bootstrap with method {method!r}")


@dataclass(frozen=True)
class BootReplicates:
    estimates: np.ndarray
    failures: int
    center: float

    @property
    def B(self) -> int:
        return len(self.estimates) + self.failures

    @property
    def errors(self) -> np.ndarray:
        return self.estimates - self.center


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lower: float
    upper: float
    level: float
    anchor: str
    factor: float = 1.0

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def resample_weights(m: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial(m; 1/m, ..., 1/m) block multiplicities."""
    if m < 1:
        raise ValueError("need at least one block")
    return rng.multinomial(m, np.full(m, 1.0 / m))


def resampling_blocks(x, scheme: BlockScheme) -> CompressedBlocks:
    """The compressed ``k*r``-blocks a scheme resamples."""
    if scheme.method == "disjoint":
        return compress(circmax(x, scheme.r, 1))
    if scheme.method == "circular":
        return compress(circmax(x, scheme.r, scheme.k))
    if scheme.method == "naive-sliding":
        return compress_sliding(x, scheme.r, scheme.k)
    raise ValueError(f"cannot bootstrap with method {scheme.method!r}")


def weighted_blocks(cb: CompressedBlocks, w: np.ndarray | None = None) -> WeightedSample:
    """Runs of ``cb`` as a weighted sample, block ``i`` repeated ``w[i]`` times."""
    weights = cb.counts.astype(float)
    if w is not None:
        weights = weights * np.asarray(w, dtype=float)[cb.block_of_run]
    return WeightedSample(cb.values, weights)


def _replicate_estimate(cb, est, seed, b, sums, lengths):
    w = resample_weights(cb.n_blocks, stream(seed, b))
    if est.kind == "mean":
        return float(np.dot(w, sums) / np.dot(w, lengths))
    return est(weighted_blocks(cb, w))


def bootstrap_replicates(
    x,
    spec: BootstrapSpec,
    *,
    blocks: CompressedBlocks | None = None,
    threads: int = 1,
) -> BootReplicates:
    """Draw ``spec.B`` block-bootstrap replicates of ``spec.estimator``.

    Replicate ``b`` uses the random stream ``(spec.seed, b)``, so results do
    not depend on ``threads`` or on execution order. Estimator failures on
    individual replicates are counted; more than 5% aborts with
    :class:`BootstrapFailure`.
    """
    cb = resampling_blocks(x, spec.scheme) if blocks is None else blocks
    if np.ptp(cb.values) == 0.0:
        raise AllTied("every block maximum is identical; the bootstrap distribution is degenerate")
    full = weighted_blocks(cb)
    est = spec.estimator.bind(full)
    center = est(full)
    sums = cb.block_sums()
    lengths = cb.lengths.astype(float)

    def one(b):
        try:
            return _replicate_estimate(cb, est, spec.seed, b, sums, lengths), None
        except EstimationError as exc:
            return None, exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, range(spec.B)))
    else:
        results = [one(b) for b in range(spec.B)]
    values = [v for v, _ in results if v is not None]
    errors = [e for _, e in results if e is not None]
    if len(errors) > MAX_FAILURE_RATE * spec.B:
        raise BootstrapFailure(len(errors), spec.B, errors[-1])
    return BootReplicates(np.array(values), len(errors), center)


def bootstrap_variance(reps: BootReplicates) -> float:
    """Unbiased sample variance of the replicate estimates."""
    if len(reps.estimates) < 2:
        raise ValueError("need at least two replicate estimates")
    return float(np.var(reps.estimates, ddof=1))


def _order_index(q: float, B: int) -> int:
    # 1-based floor(q*B); the epsilon absorbs representation error in q*B
    return max(1, int(math.floor(q * B + 1e-9)))


def basic_ci(
    anchor_estimate: float,
    errors,
    level: float,
    factor: float = 1.0,
    anchor: str = "sliding",
) -> IntervalEstimate:
    """Basic bootstrap interval ``[anchor - c*e_(hi), anchor - c*e_(lo)]``.

    ``e_(j)`` are the sorted bootstrap errors with the 1-based order indices
    ``max(1, floor((1 - alpha/2) B))`` and ``max(1, floor(alpha/2 B))``.
    """
    e = np.sort(np.asarray(errors, dtype=float))
    B = len(e)
    if B < 20:
        raise ValueError("need at least 20 bootstrap errors")
    if not 0 < level < 1:
        raise ValueError("confidence level must lie in (0, 1)")
    if not factor >= 1:
        raise ValueError("enlargement factor must be >= 1")
    alpha = 1.0 - level
    hi = e[_order_index(1.0 - alpha / 2.0, B) - 1]
    lo = e[_order_index(alpha / 2.0, B) - 1]
    return IntervalEstimate(
        float(anchor_estimate),
        float(anchor_estimate - factor * hi),
        float(anchor_estimate - factor * lo),
        level,
        anchor,
        factor,
    )


def anchor_sample(x, anchor: Anchor, r: int, k: int = 2) -> WeightedSample:
    """The block-maxima sample a point estimate is computed on."""
    if anchor == "sliding":
        # consecutive repeats collapse into runs; the weighted likelihood is unchanged
        v = sliding_maxima(x, r).values
        start = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
        return WeightedSample(v[start], np.diff(np.r_[start, len(v)]).astype(float))
    if anchor == "disjoint":
        return WeightedSample.unweighted(disjoint_maxima(x, r).values)
    if anchor == "circular":
        return weighted_blocks(compress(circmax(x, r, k)))
    raise ValueError(f"unknown anchor {anchor!r}")


def point_estimate(x, anchor: Anchor, r: int, estimator: Estimator, k: int = 2) -> float:
    s = anchor_sample(x, anchor, r, k)
    return estimator.bind(s)(s)


@dataclass(frozen=True)
class BootstrapResult:
    interval: IntervalEstimate
    replicates: BootReplicates
    m: int
    gamma_hat: float | None = None

    @property
    def variance(self) -> float:
        return bootstrap_variance(self.replicates)


def _default_anchor(scheme: BlockScheme) -> Anchor:
    return "disjoint" if scheme.method == "disjoint" else "sliding"


def bootstrap_ci(
    x,
    spec: BootstrapSpec,
    *,
    anchor: Anchor | None = None,
    threads: int = 1,
    blocks: CompressedBlocks | None = None,
) -> BootstrapResult:
    """Basic bootstrap interval from ``spec``, with optional size correction.

    The default anchor is the disjoint estimate for the disjoint scheme and
    the sliding estimate otherwise. Bootstrap errors are replicate minus the
    estimate on the resampled scheme's own full sample.
    """
    x = np.asarray(x, dtype=float)
    sch = spec.scheme
    anchor = _default_anchor(sch) if anchor is None else anchor
    reps = bootstrap_replicates(x, spec, blocks=blocks, threads=threads)
    s = anchor_sample(x, anchor, sch.r, sch.k)
    est = spec.estimator.bind(s)
    point = est(s)
    m = len(x) // sch.r
    gamma_hat = None
    factor = 1.0
    if spec.correction.kind == "factor":
        factor = spec.correction.factor
    elif spec.correction.kind == "auto":
        gamma_hat = est.shape_estimate(s)
        target = spec.correction.target or spec.estimator.correction_target
        factor = correction_factor(target, m, gamma_hat)
        if not correction_in_range(m, gamma_hat):
            warnings.warn(
                f"correction factor applied outside its calibration range "
                f"(m={m}, shape={gamma_hat:.3g}; calibrated for m in [40, 100], shape in [-0.2, 0.2])",
                stacklevel=2,
            )
    ci = basic_ci(point, reps.errors, spec.level, factor, anchor)
    return BootstrapResult(ci, reps, m, gamma_hat)


def sliding_circular_ci(x, spec: BootstrapSpec, **kw) -> IntervalEstimate:
    """Interval anchored at the sliding estimate with circular bootstrap errors."""
    if spec.scheme.method != "circular":
        raise ValueError("sliding-circular interval needs the circular scheme with k >= 2")
    return bootstrap_ci(x, spec, anchor="sliding", **kw).interval


def disjoint_ci(x, spec: BootstrapSpec, **kw) -> IntervalEstimate:
    if spec.scheme.method != "disjoint":
        raise ValueError("disjoint interval needs the disjoint scheme")
    return bootstrap_ci(x, spec, anchor="disjoint", **kw).interval
