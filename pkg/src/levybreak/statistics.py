"""The standardised break process and the change-point statistics built on it.

For a prefix length ``j`` the break process is

    T_n(j/n, z) = sqrt(k_n) * lambda_n * (U_{1:j}(z) - U_{j+1:n}(z))
                = (N_j(z) - (j/n) N_n(z)) / sqrt(k_n),

with ``N_j(z)`` the number of the first ``j`` increments that are ``>= z``.
``T_n`` depends on ``theta`` only through ``floor(n theta)``, so suprema over
``theta`` are computed exactly over ``j = 0..n``.  For fixed ``z`` the process
is constant-minus-linear between exceedances, hence its extreme values are
attained at ``j in {0, n}`` or immediately before/at an exceedance.  Only those
candidate prefixes are evaluated.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from levybreak._io import atomic_write_text, fmt_float
from levybreak.empirical import ZGrid, empirical_tail, sequential_tail_prefix
from levybreak.jump_model import JumpModel
from levybreak.simulator import IncrementSeries, floor_index

__all__ = [
    "t_process",
    "t_process_identity",
    "t_surface",
    "candidate_surface",
    "sup_stat_cp",
    "v_stat",
    "w_stat",
    "ks_cdf",
    "ks_quantile",
    "theoretical_cov_T",
    "theoretical_cov_G",
    "write_surface_csv",
]


def _check_theta(theta: float) -> None:
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")


def t_process(series: IncrementSeries, theta: float, z: float) -> float:
    """``T_n(theta, z)`` computed from the two empirical tail integrals."""
    _check_theta(theta)
    if not z > 0:
        raise ValueError("z must be positive")
    n = series.n
    j = floor_index(n, theta)
    if j == 0 or j == n:
        return 0.0
    lam = (j / n) * ((n - j) / n)
    diff = empirical_tail(series, 1, j, z) - empirical_tail(series, j + 1, n, z)
    return math.sqrt(series.k_n) * lam * diff


def t_process_identity(series: IncrementSeries, theta: float, z: float) -> float:
    """``sqrt(k_n) * (U_n(theta, z) - floor(n theta)/n * U_n(1, z))``; equal to :func:`t_process`."""
    _check_theta(theta)
    n = series.n
    j = floor_index(n, theta)
    return math.sqrt(series.k_n) * (
        sequential_tail_prefix(series, j, z) - (j / n) * sequential_tail_prefix(series, n, z)
    )


def t_surface(series: IncrementSeries, zs: ArrayLike) -> NDArray[np.float64]:
    """``T_n(j/n, z)`` for every ``j = 0..n`` (rows) and every ``z`` in ``zs`` (columns)."""
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    ind = series.values[:, None] >= zs[None, :]
    counts = np.vstack([np.zeros((1, zs.size)), np.cumsum(ind, axis=0)])
    n = series.n
    frac = np.arange(n + 1)[:, None] / n
    return (counts - frac * counts[-1]) / math.sqrt(series.k_n)


def candidate_surface(
    series: IncrementSeries, zs: ArrayLike
) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """``T_n`` restricted to the prefixes where its extremes in ``j`` can occur.

    Returns ``(j, values)`` with ``j`` sorted increasing and ``values`` of
    shape ``(len(j), len(zs))``.  For every ``z`` in ``zs`` the maximum and
    minimum over all ``j = 0..n`` are attained on the returned rows.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    n = series.n
    vals = series.values
    pos = np.flatnonzero(vals >= zs.min())
    cand = np.unique(np.concatenate(([0, n], pos, pos + 1)))
    ind = vals[pos][:, None] >= zs[None, :]
    cum = np.vstack([np.zeros((1, zs.size)), np.cumsum(ind, axis=0)])
    counts = cum[np.searchsorted(pos, cand, side="left")]
    surface = (counts - (cand[:, None] / n) * cum[-1]) / math.sqrt(series.k_n)
    return cand, surface


def _zs_for(series: IncrementSeries, grid: ZGrid, exact: bool) -> NDArray[np.float64]:
    if not exact:
        return grid.array
    observed = np.unique(series.values[series.values >= grid.eps])
    return observed if observed.size else grid.array[:1]


def sup_stat_cp(series: IncrementSeries, grid: ZGrid, exact: bool = False) -> float:
    """Supremum of ``|T_n(theta, z)|`` over ``theta in [0, 1]`` and ``z`` in the grid.

    With ``exact=True`` the supremum over ``z >= grid.eps`` is taken over the
    observed increments above ``grid.eps``, where the step function in ``z``
    attains all of its values.
    """
    _, surface = candidate_surface(series, _zs_for(series, grid, exact))
    return float(np.max(np.abs(surface)))


def w_stat(series: IncrementSeries, z0: float) -> float:
    """``sup_theta |T_n(theta, z0)|``."""
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    _, surface = candidate_surface(series, [z0])
    return float(np.max(np.abs(surface)))


def v_stat(series: IncrementSeries, z0: float) -> float:
    """Self-normalised statistic ``W_n / sqrt(U_{1:n}(z0))``.

    Returns 0 when no increment reaches ``z0``; a test based on it can then
    never reject.
    """
    w = w_stat(series, z0)
    u_hat = empirical_tail(series, 1, series.n, z0)
    if u_hat <= 0:
        return 0.0
    return w / math.sqrt(u_hat)


# ------------------------------------------------------------ Kolmogorov law

_KS_TOL = 1e-12
_KS_SWITCH = 0.6


def ks_cdf(x: float) -> float:
    """CDF of ``sup |B(s)|`` for a standard Brownian bridge ``B``.

    Uses ``1 - 2 sum (-1)^(k-1) exp(-2 k^2 x^2)`` for ``x >= 0.6`` and the
    equivalent theta-function series ``sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))``
    below, where the alternating series converges slowly.  Terms are summed
    until the next one drops below 1e-12.
    """
    if x <= 0:
        return 0.0
    if x >= _KS_SWITCH:
        total = 0.0
        k = 1
        while True:
            term = math.exp(-2.0 * k * k * x * x)
            if term < _KS_TOL:
                break
            total += term if k % 2 else -term
            k += 1
        return min(1.0, max(0.0, 1.0 - 2.0 * total))
    total = 0.0
    k = 1
    pref = math.sqrt(2.0 * math.pi) / x
    while True:
        term = pref * math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * x * x))
        total += term
        if term < _KS_TOL:
            break
        k += 1
    return min(1.0, total)


def ks_quantile(p: float, tol: float = 1e-9) -> float:
    """Inverse of :func:`ks_cdf` by bisection."""
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    lo, hi = 0.0, 1.0
    while ks_cdf(hi) < p:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ks_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------- limit covariances


def theoretical_cov_G(theta1: float, z1: float, theta2: float, z2: float, model: JumpModel) -> float:
    """Covariance ``(theta1 ^ theta2) U(z1 v z2)`` of the limiting sequential tail process."""
    return min(theta1, theta2) * float(model.tail(max(z1, z2)))


def theoretical_cov_T(theta1: float, z1: float, theta2: float, z2: float, model: JumpModel) -> float:
    """Covariance ``((theta1 ^ theta2) - theta1 theta2) U(z1 v z2)`` of the limit of ``T_n``."""
    return (min(theta1, theta2) - theta1 * theta2) * float(model.tail(max(z1, z2)))


def write_surface_csv(series: IncrementSeries, zs: ArrayLike, path: str | Path) -> None:
    """Export the full surface as ``j,theta,z,value`` rows."""
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    surface = t_surface(series, zs)
    n = series.n
    lines = ["j,theta,z,value"]
    for j in range(n + 1):
        theta = fmt_float(j / n)
        for c, z in enumerate(zs):
            lines.append(f"{j},{theta},{fmt_float(z)},{fmt_float(surface[j, c])}")
    atomic_write_text(path, "\n".join(lines) + "\n")
