"""Empirical and sequential empirical tail integrals.

All indicators are closed at the threshold: an increment equal to ``z``
counts as exceeding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from levybreak.simulator import IncrementSeries, floor_index

__all__ = [
    "ZGrid",
    "pure_jump_grid",
    "brownian_grid",
    "coarse_pure_jump_grid",
    "coarse_brownian_grid",
    "empirical_tail",
    "sequential_tail",
    "sequential_tail_prefix",
    "eta",
    "tail_counts",
]


@dataclass(frozen=True)
class ZGrid:
    """Finite set of thresholds over which suprema in ``z`` are taken."""

    points: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("a z-grid must contain at least one point")
        if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
            raise ValueError("z-grid points must be positive and finite")
        pts = np.unique(pts)
        object.__setattr__(self, "points", tuple(pts.tolist()))

    @classmethod
    def of(cls, points: ArrayLike) -> ZGrid:
        return cls(tuple(np.atleast_1d(np.asarray(points, dtype=float)).tolist()))

    @property
    def eps(self) -> float:
        return self.points[0]

    @property
    def array(self) -> NDArray[np.float64]:
        return np.asarray(self.points)

    def __len__(self) -> int:
        return len(self.points)


def pure_jump_grid() -> ZGrid:
    """``{0.05 j : j = 1..200}``, used for pure-jump data."""
    return ZGrid.of(np.arange(1, 201) / 20)


def brownian_grid(delta_n: float) -> ZGrid:
    """``{(2 + 0.5 j) sqrt(delta_n) : j = 0..196}``; keeps ``eps = 2 sqrt(delta_n)`` clear of the Brownian part."""
    return ZGrid.of((2.0 + 0.5 * np.arange(197)) * math.sqrt(delta_n))


def coarse_pure_jump_grid() -> ZGrid:
    """``{0.2 j : j = 1..20}``, the cheaper grid used for power curves."""
    return ZGrid.of(np.arange(1, 21) / 5)


def coarse_brownian_grid(delta_n: float) -> ZGrid:
    """``{2.5 sqrt(delta_n) j : j = 1..20}``."""
    return ZGrid.of(2.5 * math.sqrt(delta_n) * np.arange(1, 21))


def _check_z(z: float) -> None:
    if not z > 0:
        raise ValueError("z must be positive")


def empirical_tail(series: IncrementSeries, l1: int, l2: int, z: float) -> float:
    """Tail integral estimated from increments ``l1..l2`` (1-based, inclusive)."""
    _check_z(z)
    if not 1 <= l1 <= l2 <= series.n:
        raise IndexError(f"need 1 <= l1 <= l2 <= n={series.n}, got l1={l1}, l2={l2}")
    count = np.count_nonzero(series.values[l1 - 1 : l2] >= z)
    return count / ((l2 - l1 + 1) * series.delta_n)


def sequential_tail_prefix(series: IncrementSeries, j: int, z: float) -> float:
    """``(1/k_n) * #{i <= j : increment_i >= z}`` for an integer prefix length ``j``."""
    _check_z(z)
    if not 0 <= j <= series.n:
        raise IndexError(f"prefix length must lie in [0, {series.n}]")
    return np.count_nonzero(series.values[:j] >= z) / series.k_n


def sequential_tail(series: IncrementSeries, theta: float, z: float) -> float:
    """``U_n(theta, z)``: the prefix of length ``floor(n theta)`` normalised by ``k_n``."""
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    return sequential_tail_prefix(series, floor_index(series.n, theta), z)


def eta(series: IncrementSeries, z: float) -> float:
    """Fraction of all increments that are ``>= z``."""
    _check_z(z)
    return np.count_nonzero(series.values >= z) / series.n


def tail_counts(series: IncrementSeries, zs: ArrayLike) -> NDArray[np.int64]:
    """``#{i : increment_i >= z}`` for each ``z``; one sort plus binary search."""
    zs = np.asarray(zs, dtype=float)
    sorted_vals = np.sort(series.values)
    return series.n - np.searchsorted(sorted_vals, zs, side="left")
