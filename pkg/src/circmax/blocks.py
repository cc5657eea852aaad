"""Disjoint, sliding and circular block maxima.

Block boundaries are index based. When the series length is not a multiple
of the block length (``r`` for disjoint maxima, ``k*r`` for circular maxima)
the trailing remainder is discarded and ``n_effective`` records how many
observations were used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Literal

import numpy as np

Method = Literal["disjoint", "disjoint-repeated", "sliding", "circular", "naive-sliding"]


@dataclass(frozen=True)
class BlockScheme:
    method: Method
    r: int
    k: int = 1

    def __post_init__(self):
        if self.r < 1 or self.k < 1:
            raise ValueError(f"block size r and circmax parameter k must be >= 1 (got r={self.r}, k={self.k})")

    @property
    def kr(self) -> int:
        return self.k * self.r


@dataclass(frozen=True)
class BlockMaxSeries:
    scheme: BlockScheme
    values: np.ndarray
    n_effective: int

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class CompressedBlocks:
    """Run-length encoding of a maxima series, one group of runs per block.

    ``values[offsets[i]:offsets[i+1]]`` and ``counts[...]`` are the runs of
    block ``i`` in order of appearance. ``lengths[i]`` is the number of flat
    entries in block ``i`` (always ``kr`` except for the trailing block of a
    naive sliding series).
    """

    kr: int
    values: np.ndarray
    counts: np.ndarray
    offsets: np.ndarray
    lengths: np.ndarray

    @property
    def n_blocks(self) -> int:
        return len(self.offsets) - 1

    @property
    def block_of_run(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_blocks), np.diff(self.offsets))

    @property
    def blocks(self) -> list[list[tuple[float, int]]]:
        return [
            [(float(v), int(c)) for v, c in zip(self.values[a:b], self.counts[a:b])]
            for a, b in zip(self.offsets[:-1], self.offsets[1:])
        ]

    def block_sums(self) -> np.ndarray:
        return np.bincount(self.block_of_run, weights=self.values * self.counts, minlength=self.n_blocks)

    def expand(self) -> np.ndarray:
        return np.repeat(self.values, self.counts)


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("time series must be one-dimensional")
    return x


def _check(n: int, size: int, what: str):
    if size < 1:
        raise ValueError(f"{what} must be >= 1")
    if size > n:
        raise ValueError(f"{what}={size} exceeds series length n={n}")


def _sliding_max_rows(a: np.ndarray, r: int) -> np.ndarray:
    """Window-``r`` maxima along the last axis (van Herk / Gil-Werman).

    Per row this does three passes over the data, so the cost is O(q)
    independent of ``r``.
    """
    q = a.shape[-1]
    if r == 1:
        return a.copy()
    nb = -(-q // r)
    pad = nb * r - q
    if pad:
        a = np.concatenate([a, np.full(a.shape[:-1] + (pad,), -np.inf)], axis=-1)
    seg = a.reshape(a.shape[:-1] + (nb, r))
    prefix = np.maximum.accumulate(seg, axis=-1).reshape(a.shape)
    suffix = np.maximum.accumulate(seg[..., ::-1], axis=-1)[..., ::-1].reshape(a.shape)
    return np.maximum(suffix[..., : q - r + 1], prefix[..., r - 1 : q])


def _sliding_max_deque(x: np.ndarray, r: int) -> np.ndarray:
    """Monotone-deque sliding maximum, O(n) amortized."""
    out = np.empty(len(x) - r + 1)
    dq: deque[int] = deque()
    for i, v in enumerate(x):
        while dq and x[dq[-1]] <= v:
            dq.pop()
        dq.append(i)
        if dq[0] <= i - r:
            dq.popleft()
        if i >= r - 1:
            out[i - r + 1] = x[dq[0]]
    return out


def disjoint_maxima(x, r: int) -> BlockMaxSeries:
    x = _as_series(x)
    _check(len(x), r, "block size r")
    m = len(x) // r
    vals = x[: m * r].reshape(m, r).max(axis=1)
    return BlockMaxSeries(BlockScheme("disjoint", r), vals, m * r)


def disjoint_repeated(x, r: int) -> BlockMaxSeries:
    """Disjoint block maxima with each maximum repeated ``r`` times."""
    d = disjoint_maxima(x, r)
    return BlockMaxSeries(BlockScheme("disjoint-repeated", r), np.repeat(d.values, r), d.n_effective)


def sliding_maxima(x, r: int, *, method: Literal["block", "deque"] = "block") -> BlockMaxSeries:
    """Maxima over all ``n - r + 1`` windows of length ``r``.

    ``method="block"`` is the vectorized van Herk / Gil-Werman scheme;
    ``"deque"`` is the classic monotone queue. Both are O(n) and give
    identical output.
    """
    x = _as_series(x)
    _check(len(x), r, "block size r")
    if method == "block":
        vals = _sliding_max_rows(x, r)
    elif method == "deque":
        vals = _sliding_max_deque(x, r)
    else:
        raise ValueError(f"unknown sliding maximum method {method!r}")
    return BlockMaxSeries(BlockScheme("sliding", r), vals, len(x))


def circmax(x, r: int, k: int) -> BlockMaxSeries:
    """Circular block maxima.

    The series is cut into ``m = n // (k*r)`` blocks of length ``k*r``. Each
    block is extended by its own first ``r - 1`` observations and the ``k*r``
    sliding maxima of window ``r`` over the extended block are taken; the
    blocks are concatenated in order.
    """
    x = _as_series(x)
    if k < 1:
        raise ValueError("circmax parameter k must be >= 1")
    kr = k * r
    _check(len(x), kr, "k*r")
    m = len(x) // kr
    blocks = x[: m * kr].reshape(m, kr)
    ext = np.concatenate([blocks, blocks[:, : r - 1]], axis=1)
    vals = _sliding_max_rows(ext, r).reshape(-1)
    return BlockMaxSeries(BlockScheme("circular", r, k), vals, m * kr)


def _rle_blocks(values: np.ndarray, kr: int, lengths: np.ndarray) -> CompressedBlocks:
    starts = np.concatenate([[0], np.cumsum(lengths)])
    new_run = np.ones(len(values), dtype=bool)
    new_run[1:] = values[1:] != values[:-1]
    new_run[starts[:-1]] = True
    run_starts = np.flatnonzero(new_run)
    counts = np.diff(np.append(run_starts, len(values)))
    offsets = np.searchsorted(run_starts, starts)
    return CompressedBlocks(kr, values[run_starts].copy(), counts, offsets, np.asarray(lengths))


def compress(b: BlockMaxSeries | np.ndarray, kr: int | None = None) -> CompressedBlocks:
    """Run-length encode a disjoint-repeated or circular series per ``kr``-block."""
    if isinstance(b, BlockMaxSeries):
        if b.scheme.method not in ("circular", "disjoint-repeated"):
            raise ValueError(f"cannot compress a {b.scheme.method!r} series by kr-blocks")
        kr = b.scheme.kr if kr is None else kr
        values = b.values
    else:
        if kr is None:
            raise ValueError("kr is required for a plain array")
        values = np.asarray(b, dtype=float)
    if kr < 1 or len(values) == 0 or len(values) % kr:
        raise ValueError(f"series length {len(values)} is not a positive multiple of kr={kr}")
    m = len(values) // kr
    return _rle_blocks(values, kr, np.full(m, kr))


def compress_sliding(x, r: int, k: int) -> CompressedBlocks:
    """Cut the vanilla sliding maxima series into ``k*r``-blocks.

    The series has ``n - r + 1`` entries, so the last block is shorter than
    ``k*r``. This is the resampling unit of the naive sliding bootstrap.
    """
    x = _as_series(x)
    kr = k * r
    _check(len(x), kr, "k*r")
    m = len(x) // kr
    s = sliding_maxima(x[: m * kr], r).values
    lengths = np.full(m, kr)
    lengths[-1] = len(s) - (m - 1) * kr
    return _rle_blocks(s, kr, lengths)


def block_series(x, scheme: BlockScheme) -> BlockMaxSeries:
    """Dispatch on ``scheme.method``."""
    if scheme.method == "disjoint":
        return disjoint_maxima(x, scheme.r)
    if scheme.method == "disjoint-repeated":
        return disjoint_repeated(x, scheme.r)
    if scheme.method == "sliding":
        return sliding_maxima(x, scheme.r)
    if scheme.method == "circular":
        return circmax(x, scheme.r, scheme.k)
    raise ValueError(f"no flat series for method {scheme.method!r}")
