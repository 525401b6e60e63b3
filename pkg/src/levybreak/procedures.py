"""Change-point tests for the jump measure and break-location estimators.

* ``kscp_test1``: self-normalised statistic at one threshold, compared with a
  quantile of the Kolmogorov distribution.
* ``kscp_test2``: unnormalised statistic at one threshold, multiplier
  bootstrap critical value.
* ``cp_test``: supremum over a threshold grid, multiplier bootstrap critical
  value.

All tests reject when the statistic is at least the critical value and
positive.  A zero statistic (no increment reaches the threshold) carries no
evidence of a break; without that guard a bootstrap test on such data would
compare 0 with a critical value of 0 and reject.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from levybreak.bootstrap import BootstrapConfig, bootstrap_column_max, sample_quantile
from levybreak.empirical import ZGrid
from levybreak.simulator import IncrementSeries
from levybreak.statistics import candidate_surface, ks_cdf, ks_quantile, sup_stat_cp, v_stat, w_stat

__all__ = [
    "TestOutcome",
    "ChangePointEstimate",
    "kscp_test1",
    "kscp_test2",
    "cp_test",
    "run_tests",
    "estimate_changepoint",
    "DegenerateSeriesWarning",
]


class DegenerateSeriesWarning(UserWarning):
    """No increment reaches the smallest threshold, so there is nothing to locate."""


@dataclass
class TestOutcome:
    __test__ = False  # not a pytest class

    statistic: float
    critical_value: float
    alpha: float
    reject: bool
    method: Literal["kscp1", "kscp2", "cp"]
    B: int
    p_value: float | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class ChangePointEstimate:
    theta_hat: float
    mode: Literal["sup-over-grid", "fixed-z0"]
    achieved_value: float
    j_hat: int
    degenerate: bool = False
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")


def _check_z0(z0: float) -> None:
    if not z0 > 0:
        raise ValueError("z0 must be positive")


def _bootstrap_outcome(
    statistic: float, draws: np.ndarray, alpha: float, method: str, cfg: BootstrapConfig, extra: dict
) -> TestOutcome:
    crit = sample_quantile(draws, 1 - alpha)
    return TestOutcome(
        statistic=statistic,
        critical_value=crit,
        alpha=alpha,
        reject=bool(statistic >= crit and statistic > 0),
        method=method,
        B=cfg.B,
        p_value=float(np.mean(draws >= statistic)),
        config={**extra, **cfg.to_dict()},
    )


def kscp_test1(series: IncrementSeries, z0: float, alpha: float = 0.05) -> TestOutcome:
    """Pointwise test at ``z0`` with an asymptotically pivotal statistic.

    If no increment reaches ``z0`` the statistic is 0 and the test does not
    reject.
    """
    _check_z0(z0)
    _check_alpha(alpha)
    stat = v_stat(series, z0)
    crit = ks_quantile(1 - alpha)
    return TestOutcome(
        statistic=stat,
        critical_value=crit,
        alpha=alpha,
        reject=bool(stat >= crit),
        method="kscp1",
        B=0,
        p_value=1.0 - ks_cdf(stat),
        config={"z0": z0},
    )


def kscp_test2(
    series: IncrementSeries, z0: float, alpha: float = 0.05, cfg: BootstrapConfig | None = None
) -> TestOutcome:
    """Pointwise test at ``z0`` with a multiplier bootstrap critical value."""
    _check_z0(z0)
    _check_alpha(alpha)
    cfg = BootstrapConfig() if cfg is None else cfg
    draws = bootstrap_column_max(series, [z0], cfg)[:, 0]
    return _bootstrap_outcome(w_stat(series, z0), draws, alpha, "kscp2", cfg, {"z0": z0})


def cp_test(
    series: IncrementSeries,
    grid: ZGrid,
    alpha: float = 0.05,
    cfg: BootstrapConfig | None = None,
) -> TestOutcome:
    """Test for a change anywhere in the jump measure above ``grid.eps``."""
    if not isinstance(grid, ZGrid):
        raise TypeError("grid must be a ZGrid")
    _check_alpha(alpha)
    cfg = BootstrapConfig() if cfg is None else cfg
    draws = bootstrap_column_max(series, grid.array, cfg).max(axis=1)
    return _bootstrap_outcome(
        sup_stat_cp(series, grid), draws, alpha, "cp", cfg, {"grid": list(grid.points)}
    )


def run_tests(
    series: IncrementSeries,
    methods: Sequence[str],
    z0_list: Sequence[float],
    grid: ZGrid | None,
    alpha: float,
    cfg: BootstrapConfig,
) -> list[TestOutcome]:
    """Run several tests on one series, sharing the bootstrap multipliers.

    Equivalent to calling the individual tests with the same ``cfg``: each
    bootstrap test would draw identical multipliers from ``cfg.seed``, so they
    are drawn once here.  Outcomes are ordered as ``kscp1`` per ``z0``,
    ``kscp2`` per ``z0``, then ``cp``.
    """
    _check_alpha(alpha)
    unknown = set(methods) - {"kscp1", "kscp2", "cp"}
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    for z0 in z0_list:
        _check_z0(z0)
    if "cp" in methods and grid is None:
        raise ValueError("the cp test needs a grid")
    out: list[TestOutcome] = []
    if "kscp1" in methods:
        out.extend(kscp_test1(series, z0, alpha) for z0 in z0_list)
    zs: list[float] = []
    if "kscp2" in methods:
        zs.extend(z0_list)
    if "cp" in methods:
        zs.extend(grid.points)
    if not zs:
        return out
    cols = bootstrap_column_max(series, zs, cfg)
    if "kscp2" in methods:
        for c, z0 in enumerate(z0_list):
            out.append(
                _bootstrap_outcome(w_stat(series, z0), cols[:, c], alpha, "kscp2", cfg, {"z0": z0})
            )
    if "cp" in methods:
        draws = cols[:, len(zs) - len(grid) :].max(axis=1)
        out.append(
            _bootstrap_outcome(
                sup_stat_cp(series, grid), draws, alpha, "cp", cfg, {"grid": list(grid.points)}
            )
        )
    return out


def estimate_changepoint(
    series: IncrementSeries, target: float | ZGrid, warn: bool = True
) -> ChangePointEstimate:
    """Argmax estimator of the break fraction.

    ``target`` is a threshold ``z0`` (maximise ``|T_n(theta, z0)|``) or a grid
    (maximise ``max_z |T_n(theta, z)|``).  Ties go to the smallest prefix
    length.  A series without any increment at or above the threshold(s)
    yields ``theta_hat = 0`` flagged as degenerate.
    """
    if isinstance(target, ZGrid):
        zs = target.array
        mode = "sup-over-grid"
        cfg = {"grid": list(target.points)}
    else:
        z0 = float(target)
        _check_z0(z0)
        zs = np.array([z0])
        mode = "fixed-z0"
        cfg = {"z0": z0}
    cand, surface = candidate_surface(series, zs)
    profile = np.abs(surface).max(axis=1)
    best = int(np.argmax(profile))
    value = float(profile[best])
    degenerate = value == 0.0
    if degenerate:
        if warn:
            warnings.warn("no increment reaches the threshold; returning theta_hat=0", DegenerateSeriesWarning, stacklevel=2)
        j_hat = 0
    else:
        j_hat = int(cand[best])
    return ChangePointEstimate(
        theta_hat=j_hat / series.n,
        mode=mode,
        achieved_value=value,
        j_hat=j_hat,
        degenerate=degenerate,
        config=cfg,
    )
