"""Multiplier bootstrap for the break process.

For multipliers ``xi_1..xi_n`` (i.i.d., mean 0, variance 1) the bootstrap
sequential process and its bridge are

    G_hat(j, z) = k_n**-0.5 * sum_{i <= j} xi_i * (1{X_i >= z} - eta_n(z)),
    T_hat(j, z) = G_hat(j, z) - (j / n) * G_hat(n, z).

Computing ``max_j |T_hat(j, z)|`` naively costs ``O(n)`` per threshold and
draw.  Writing ``C_j`` for the partial sums of the multipliers, ``T_hat`` is,
between two consecutive exceedances of the smallest threshold, a constant minus
``eta(z) C_j + (K(z)/n) j``.  With ``eta >= 0`` the extremes of that linear
functional over a block are attained on the lower and upper convex hulls of
the points ``(j, C_j)``.  The hulls are built once per draw in ``O(n)`` and
scanned per threshold, so a draw costs ``O(n + |grid| * hull size)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numba
import numpy as np
from numpy.typing import ArrayLike, NDArray

from levybreak._io import atomic_write_text, fmt_float
from levybreak._rng import check_seed, stream
from levybreak.empirical import ZGrid
from levybreak.simulator import IncrementSeries, floor_index

__all__ = [
    "MultiplierLaw",
    "BootstrapConfig",
    "draw_multipliers",
    "bootstrap_t_process",
    "bootstrap_sup_samples",
    "bootstrap_column_max",
    "sample_quantile",
    "write_bootstrap_csv",
]

MultiplierLaw = Literal["standard-normal", "rademacher"]
_LAWS = ("standard-normal", "rademacher")


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 250
    law: MultiplierLaw = "standard-normal"
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.B) < 1:
            raise ValueError("B must be at least 1")
        if self.law not in _LAWS:
            raise ValueError(f"unknown multiplier law {self.law!r}; choose from {_LAWS}")
        check_seed(self.seed)

    def to_dict(self) -> dict:
        return {"B": self.B, "law": self.law, "seed": self.seed}


def draw_multipliers(n: int, law: MultiplierLaw, seed: int, b: int) -> NDArray[np.float64]:
    """Multipliers of replicate ``b`` (1-based), drawn from the stream ``(seed, b)``."""
    rng = stream(seed, b)
    if law == "standard-normal":
        return rng.standard_normal(n)
    if law == "rademacher":
        return rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0
    raise ValueError(f"unknown multiplier law {law!r}")


def bootstrap_t_process(
    series: IncrementSeries, multipliers: ArrayLike, theta: float, z: float
) -> float:
    """``T_hat(theta, z)`` for one given multiplier vector."""
    xi = np.asarray(multipliers, dtype=float)
    n = series.n
    if xi.shape != (n,):
        raise ValueError(f"expected {n} multipliers, got shape {xi.shape}")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    if not z > 0:
        raise ValueError("z must be positive")
    ind = (series.values >= z).astype(float)
    centred = xi * (ind - ind.mean())
    j = floor_index(n, theta)
    scale = 1.0 / math.sqrt(series.k_n)
    g_theta = centred[:j].sum() * scale
    g_one = centred.sum() * scale
    return float(g_theta - (j / n) * g_one)


# ------------------------------------------------------------------ kernel


@numba.njit(cache=True)
def _block_ranges(csum, pos, n):
    """First/last ``j`` and the positions of the extremes of ``csum`` on every block.

    Block 0 is ``j = 0..pos[0]``, block ``i`` is ``j = pos[i-1]+1 .. pos[i]``
    and the last block ends at ``n`` (``pos`` holds 0-based positions, so an
    exceedance at 0-based ``p`` enters the prefix sums from ``j = p + 1`` on).
    """
    m = pos.shape[0]
    j0 = np.empty(m + 1, dtype=np.int64)
    j1 = np.empty(m + 1, dtype=np.int64)
    jmin = np.empty(m + 1, dtype=np.int64)
    jmax = np.empty(m + 1, dtype=np.int64)
    start = 0
    for blk in range(m + 1):
        stop = pos[blk] if blk < m else n
        lo = start
        hi = start
        for j in range(start + 1, stop + 1):
            y = csum[j]
            if y < csum[lo]:
                lo = j
            elif y > csum[hi]:
                hi = j
        j0[blk] = start
        j1[blk] = stop
        jmin[blk] = lo
        jmax[blk] = hi
        start = stop + 1
    return j0, j1, jmin, jmax


@numba.njit(cache=True)
def _hull(csum, start, stop, out, lower):
    """Monotone-chain hull of ``(j, csum[j])``, ``j = start..stop``; returns the vertex count."""
    k = 0
    for j in range(start, stop + 1):
        y = csum[j]
        while k >= 2:
            a = out[k - 2]
            b = out[k - 1]
            cross = (b - a) * (y - csum[a]) - (csum[b] - csum[a]) * (j - a)
            if (lower and cross <= 0.0) or (not lower and cross >= 0.0):
                k -= 1
            else:
                break
        out[k] = j
        k += 1
    return k


@numba.njit(cache=True)
def _column_max(csum, pos, xi_pos, ind, eta, n):
    """``max_j |sqrt(k_n) T_hat(j, z)|`` for every threshold column of ``ind``.

    Blocks whose cheap envelope cannot beat the running maximum are skipped;
    hulls are built lazily for the blocks that survive and reused across
    thresholds.
    """
    m = pos.shape[0]
    nz = eta.shape[0]
    j0, j1, jmin, jmax = _block_ranges(csum, pos, n)
    lo_idx = np.empty(n + 1, dtype=np.int64)
    up_idx = np.empty(n + 1, dtype=np.int64)
    lo_cnt = np.full(m + 1, -1, dtype=np.int64)
    up_cnt = np.empty(m + 1, dtype=np.int64)
    out = np.zeros(nz)
    c_n = csum[n]
    for c in range(nz):
        e = eta[c]
        p_total = 0.0
        for i in range(m):
            if ind[i, c]:
                p_total += xi_pos[i]
        slope = (p_total - e * c_n) / n
        # Seed the running maximum with the block ends and the extremes of
        # csum, so that the envelope test below prunes most blocks.
        best = 0.0
        p = 0.0
        for blk in range(m + 1):
            if blk > 0 and ind[blk - 1, c]:
                p += xi_pos[blk - 1]
            for j in (j0[blk], j1[blk], jmin[blk], jmax[blk]):
                a = abs(p - e * csum[j] - slope * j)
                if a > best:
                    best = a
        p = 0.0
        for blk in range(m + 1):
            if blk > 0 and ind[blk - 1, c]:
                p += xi_pos[blk - 1]
            cmin = csum[jmin[blk]]
            cmax = csum[jmax[blk]]
            if slope >= 0.0:
                hlo = e * cmin + slope * j0[blk]
                hhi = e * cmax + slope * j1[blk]
            else:
                hlo = e * cmin + slope * j1[blk]
                hhi = e * cmax + slope * j0[blk]
            if abs(p - hlo) <= best and abs(p - hhi) <= best:
                continue
            s0 = j0[blk]
            if lo_cnt[blk] < 0:
                lo_cnt[blk] = _hull(csum, s0, j1[blk], lo_idx[s0:], True)
                up_cnt[blk] = _hull(csum, s0, j1[blk], up_idx[s0:], False)
            mn = np.inf
            for v in range(s0, s0 + lo_cnt[blk]):
                j = lo_idx[v]
                h = e * csum[j] + slope * j
                if h < mn:
                    mn = h
            mx = -np.inf
            for v in range(s0, s0 + up_cnt[blk]):
                j = up_idx[v]
                h = e * csum[j] + slope * j
                if h > mx:
                    mx = h
            a = abs(p - mn)
            if a > best:
                best = a
            a = abs(p - mx)
            if a > best:
                best = a
        out[c] = best
    return out


def bootstrap_column_max(
    series: IncrementSeries, zs: ArrayLike, cfg: BootstrapConfig
) -> NDArray[np.float64]:
    """``max_j |T_hat_b(j/n, z)|`` for every replicate ``b`` (rows) and threshold ``z`` (columns).

    Replicate ``b`` uses the multiplier stream ``(cfg.seed, b)``, so the
    result does not depend on the order replicates are computed in.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    if np.any(~(zs > 0)):
        raise ValueError("thresholds must be positive")
    n = series.n
    vals = series.values
    pos = np.flatnonzero(vals >= zs.min()).astype(np.int64)
    out = np.zeros((cfg.B, zs.size))
    if pos.size == 0:
        return out
    # Thresholds with no observation between them share an indicator pattern.
    ind, inverse = np.unique(vals[pos][:, None] >= zs[None, :], axis=1, return_inverse=True)
    ind = np.ascontiguousarray(ind)
    eta = ind.sum(axis=0) / n
    scale = 1.0 / math.sqrt(series.k_n)
    csum = np.empty(n + 1)
    csum[0] = 0.0
    for b in range(1, cfg.B + 1):
        xi = draw_multipliers(n, cfg.law, cfg.seed, b)
        np.cumsum(xi, out=csum[1:])
        out[b - 1] = _column_max(csum, pos, xi[pos], ind, eta, n)[inverse.ravel()] * scale
    return out


def bootstrap_sup_samples(
    series: IncrementSeries, target: float | ZGrid, cfg: BootstrapConfig
) -> NDArray[np.float64]:
    """Bootstrap replicates of the sup statistic, ordered by ``b = 1..B``.

    ``target`` is either a single threshold ``z0`` (replicates of
    ``sup_theta |T_hat(theta, z0)|``) or a grid (replicates of the supremum
    over ``theta`` and the grid).
    """
    if isinstance(target, ZGrid):
        zs = target.array
    else:
        z0 = float(target)
        if not z0 > 0:
            raise ValueError("z0 must be positive")
        zs = np.array([z0])
    return bootstrap_column_max(series, zs, cfg).max(axis=1)


def sample_quantile(samples: ArrayLike, level: float) -> float:
    """The ``ceil(B * level)``-th order statistic (1-based) of ``samples``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0 < level < 1:
        raise ValueError("level must lie strictly between 0 and 1")
    k = math.ceil(round(x.size * level, 9))
    return float(x[min(max(k, 1), x.size) - 1])


def write_bootstrap_csv(samples: ArrayLike, path: str | Path) -> None:
    lines = ["b,value"]
    lines.extend(f"{b},{fmt_float(v)}" for b, v in enumerate(np.asarray(samples, dtype=float), start=1))
    atomic_write_text(path, "\n".join(lines) + "\n")
