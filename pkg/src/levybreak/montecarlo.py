"""Monte Carlo harness: rejection tables, estimator studies and validation oracles.

Replicate ``r`` of an experiment simulates its path from the stream
``(master_seed, r, 0)`` and draws its bootstrap multipliers from
``(master_seed, r, 1)``.  Tables are sums of per-replicate counts, so they are
identical whatever the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import stats
from scipy.optimize import isotonic_regression

from levybreak._io import atomic_write_text, dumps_json, fmt_float
from levybreak._rng import check_seed, derive_seed
from levybreak.bootstrap import BootstrapConfig
from levybreak.empirical import (
    ZGrid,
    brownian_grid,
    coarse_brownian_grid,
    coarse_pure_jump_grid,
    pure_jump_grid,
)
from levybreak.jump_model import JumpModel
from levybreak.procedures import ChangePointEstimate, estimate_changepoint, run_tests
from levybreak.simulator import (
    IncrementSeries,
    ProcessSpec,
    SamplerConfig,
    simulate_path,
    small_time_tail_probability,
)
from levybreak.statistics import t_process, theoretical_cov_T

__all__ = [
    "STANDARD_DESIGNS",
    "ExperimentConfig",
    "RejectionRow",
    "RejectionTable",
    "run_experiment",
    "EstimatorRecord",
    "run_estimator_study",
    "CovarianceEntry",
    "validate_covariance",
    "SmallTimeReport",
    "validate_small_time",
    "isotonic_violation",
    "beta_grid",
    "theta0_grid",
    "grid_preset",
]

#: Horizon ``k_n`` mapped to the inverse mesh; every design has ``n = 22500``.
STANDARD_DESIGNS: dict[int, int] = {50: 450, 75: 300, 100: 225, 150: 150, 250: 90}

_METHODS = ("kscp1", "kscp2", "cp")


def beta_grid() -> np.ndarray:
    """``1 + 2j/25`` for ``j = 0..50``."""
    return 1.0 + 2.0 * np.arange(51) / 25.0


def theta0_grid() -> np.ndarray:
    """Fifty break fractions ``0, 0.02, ..., 0.98``; 0 stands for no break."""
    return 0.02 * np.arange(50)


def grid_preset(name: str, delta_n: float) -> ZGrid:
    presets = {
        "pure-jump": lambda: pure_jump_grid(),
        "brownian": lambda: brownian_grid(delta_n),
        "coarse-pure-jump": lambda: coarse_pure_jump_grid(),
        "coarse-brownian": lambda: coarse_brownian_grid(delta_n),
    }
    if name not in presets:
        raise ValueError(f"unknown grid preset {name!r}; choose from {sorted(presets)}")
    return presets[name]()


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo design point."""

    k_n: float
    delta_n_inv: int
    b: float = 0.0
    sigma: float = 0.0
    beta_pre: float = 1.0
    beta_post: float | None = None
    theta0: float | None = None
    z_grid: ZGrid | None = None
    z0_list: tuple[float, ...] = ()
    alpha: float = 0.05
    B: int = 200
    replications: int = 500
    master_seed: int = 0
    methods: tuple[str, ...] = _METHODS
    law: str = "standard-normal"
    sampler: str = "truncated-cp"
    eps_sim: float | None = None
    compensate_small: bool | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "z0_list", tuple(float(z) for z in self.z0_list))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.k_n > 0 or int(self.delta_n_inv) < 1:
            raise ValueError("k_n and delta_n_inv must be positive")
        n = self.k_n * self.delta_n_inv
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"n = k_n * delta_n_inv = {n} is not an integer")
        if round(n) < 2:
            raise ValueError("the design needs at least two observations")
        if (self.beta_post is None) != (self.theta0 is None):
            raise ValueError("beta_post and theta0 must be given together")
        unknown = set(self.methods) - set(_METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if {"kscp1", "kscp2"} & set(self.methods) and not self.z0_list:
            raise ValueError("pointwise tests need at least one z0")
        if "cp" in self.methods and self.z_grid is None:
            raise ValueError("the cp test needs a z-grid")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.replications < 0 or self.B < 1:
            raise ValueError("replications must be >= 0 and B >= 1")
        check_seed(self.master_seed)

    @property
    def n(self) -> int:
        return int(round(self.k_n * self.delta_n_inv))

    @property
    def delta_n(self) -> float:
        return 1.0 / self.delta_n_inv

    @property
    def has_break(self) -> bool:
        return self.theta0 is not None

    def process_spec(self) -> ProcessSpec:
        post = None if self.beta_post is None else JumpModel.beta_family(self.beta_post)
        return ProcessSpec(
            b=self.b,
            sigma=self.sigma,
            jump_pre=JumpModel.beta_family(self.beta_pre),
            jump_post=post,
            theta0=self.theta0,
        )

    def resolved_eps_sim(self) -> float:
        """Explicit ``eps_sim``, else ``1e-4 * min(1, smallest analysed threshold)``."""
        if self.eps_sim is not None:
            return self.eps_sim
        candidates = [1.0, *self.z0_list]
        if self.z_grid is not None:
            candidates.append(self.z_grid.eps)
        return 1e-4 * min(candidates)

    def sampler_config(self, seed: int) -> SamplerConfig:
        return SamplerConfig(
            method=self.sampler,
            eps_sim=self.resolved_eps_sim(),
            compensate_small=self.compensate_small,
            seed=seed,
        )

    def simulate(self, replicate: int) -> IncrementSeries:
        cfg = self.sampler_config(derive_seed(self.master_seed, replicate, 0))
        return simulate_path(self.process_spec(), self.n, self.delta_n, cfg)

    def bootstrap_config(self, replicate: int) -> BootstrapConfig:
        return BootstrapConfig(B=self.B, law=self.law, seed=derive_seed(self.master_seed, replicate, 1))

    def full_scale(self) -> ExperimentConfig:
        """The same design with 1000 replications and B = 250."""
        return replace(self, replications=1000, B=250)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["z_grid"] = None if self.z_grid is None else list(self.z_grid.points)
        d["z0_list"] = list(self.z0_list)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExperimentConfig:
        """Build from a JSON-like mapping.

        ``z_grid`` may be a list of points or a preset name (``pure-jump``,
        ``brownian``, ``coarse-pure-jump``, ``coarse-brownian``).  ``z0_list``
        entries may be numbers or strings such as ``"2sqrt"``, meaning
        ``2 * sqrt(delta_n)``.
        """
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        delta_n = 1.0 / float(d["delta_n_inv"])
        grid = d.get("z_grid")
        if isinstance(grid, str):
            d["z_grid"] = grid_preset(grid, delta_n)
        elif grid is not None:
            d["z_grid"] = ZGrid.of(grid)
        d["z0_list"] = tuple(_parse_z0(z, delta_n) for z in d.get("z0_list", ()))
        if "methods" in d:
            d["methods"] = tuple(d["methods"])
        return cls(**d)


def _parse_z0(z: Any, delta_n: float) -> float:
    if isinstance(z, str) and z.endswith("sqrt"):
        return float(z[: -len("sqrt")]) * math.sqrt(delta_n)
    return float(z)


# ------------------------------------------------------------ rejection tables


@dataclass(frozen=True)
class RejectionRow:
    method: str
    k_n: float
    target: str
    rejections: int
    replications: int

    @property
    def rate(self) -> float:
        return self.rejections / self.replications if self.replications else float("nan")

    @property
    def se(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.replications) if self.replications else float("nan")


def _fmt_k(k: float) -> str:
    return str(int(k)) if float(k).is_integer() else fmt_float(k)


def _target_label(z0: float | None) -> str:
    return "grid" if z0 is None else f"z0={fmt_float(z0)}"


@dataclass
class RejectionTable:
    rows: list[RejectionRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def row(self, method: str, z0: float | None = None, k_n: float | None = None) -> RejectionRow:
        label = _target_label(z0)
        for r in self.rows:
            if r.method == method and r.target == label and (k_n is None or r.k_n == k_n):
                return r
        raise KeyError((method, label, k_n))

    def rate(self, method: str, z0: float | None = None, k_n: float | None = None) -> float:
        return self.row(method, z0, k_n).rate

    def extend(self, other: RejectionTable) -> RejectionTable:
        self.rows.extend(other.rows)
        return self

    def to_long_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "k_n", "target", "rate", "se", "rejections", "replications"])
        for r in self.rows:
            w.writerow(
                [r.method, _fmt_k(r.k_n), r.target, fmt_float(r.rate), fmt_float(r.se), r.rejections, r.replications]
            )
        return buf.getvalue()

    def to_csv(self) -> str:
        """Layout of the null-hypothesis tables: one line per ``k_n`` and pointwise test.

        Columns are ``k_n``, the CP rate, the pointwise test name, then one
        column per ``z0``.
        """
        targets = sorted({r.target for r in self.rows if r.target != "grid"}, key=lambda t: float(t[3:]))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k_n", "cp", "test", *targets])
        for k in sorted({r.k_n for r in self.rows}):
            rows_k = [r for r in self.rows if r.k_n == k]
            cp = next((fmt_float(r.rate) for r in rows_k if r.method == "cp"), "")
            tests = [m for m in ("kscp1", "kscp2") if any(r.method == m for r in rows_k)] or [""]
            for m in tests:
                cells = []
                for t in targets:
                    match = [r for r in rows_k if r.method == m and r.target == t]
                    cells.append(fmt_float(match[0].rate) if match else "")
                w.writerow([_fmt_k(k), cp, m, *cells])
        return buf.getvalue()

    def write_csv(self, path: str | Path, long: bool = False) -> None:
        atomic_write_text(path, self.to_long_csv() if long else self.to_csv())


def _replicate_rejections(config: ExperimentConfig, r: int) -> list[bool]:
    series = config.simulate(r)
    outcomes = run_tests(
        series,
        config.methods,
        config.z0_list,
        config.z_grid,
        config.alpha,
        config.bootstrap_config(r),
    )
    return [o.reject for o in outcomes]


def _outcome_keys(config: ExperimentConfig) -> list[tuple[str, float | None]]:
    keys: list[tuple[str, float | None]] = []
    if "kscp1" in config.methods:
        keys += [("kscp1", z) for z in config.z0_list]
    if "kscp2" in config.methods:
        keys += [("kscp2", z) for z in config.z0_list]
    if "cp" in config.methods:
        keys.append(("cp", None))
    return keys


def _map_replicates(fn, config: ExperimentConfig, workers: int) -> list:
    reps = range(config.replications)
    if workers <= 1 or config.replications < 2:
        return [fn(config, r) for r in reps]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, [config] * len(reps), reps, chunksize=max(1, len(reps) // (4 * workers))))


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RejectionTable:
    """Rejection counts of every requested test over ``config.replications`` paths."""
    keys = _outcome_keys(config)
    if config.replications == 0:
        return RejectionTable()
    results = _map_replicates(_replicate_rejections, config, workers)
    counts = np.sum(np.asarray(results, dtype=np.int64), axis=0)
    return RejectionTable(
        [
            RejectionRow(m, config.k_n, _target_label(z), int(c), config.replications)
            for (m, z), c in zip(keys, counts)
        ]
    )


# ------------------------------------------------------------ estimator study


@dataclass(frozen=True)
class EstimatorRecord:
    replicate: int
    mode: str
    target: str
    theta_hat: float
    degenerate: bool


def _replicate_estimates(config: ExperimentConfig, r: int) -> list[EstimatorRecord]:
    series = config.simulate(r)
    targets: list[float | ZGrid] = list(config.z0_list)
    if config.z_grid is not None:
        targets.append(config.z_grid)
    out = []
    for t in targets:
        est: ChangePointEstimate = estimate_changepoint(series, t, warn=False)
        label = "grid" if isinstance(t, ZGrid) else _target_label(t)
        out.append(EstimatorRecord(r, est.mode, label, est.theta_hat, est.degenerate))
    return out


def run_estimator_study(config: ExperimentConfig, workers: int = 1) -> list[EstimatorRecord]:
    """Break-fraction estimates per replicate, for every ``z0`` and the grid."""
    if not config.has_break:
        raise ValueError("an estimator study needs a design with a break (beta_post and theta0)")
    if not config.z0_list and config.z_grid is None:
        raise ValueError("an estimator study needs z0 values or a grid")
    per_rep = _map_replicates(_replicate_estimates, config, workers)
    return [rec for recs in per_rep for rec in recs]


def estimates_to_csv(records: Iterable[EstimatorRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["replicate", "theta_hat", "mode", "target", "degenerate"])
    for rec in records:
        w.writerow([rec.replicate, fmt_float(rec.theta_hat), rec.mode, rec.target, int(rec.degenerate)])
    return buf.getvalue()


# ------------------------------------------------------------ covariance oracle


@dataclass(frozen=True)
class CovarianceEntry:
    point1: tuple[float, float]
    point2: tuple[float, float]
    empirical: float
    theoretical: float
    se: float
    z_score: float


def _jackknife_cov(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample covariance and its jackknife standard error."""
    r = x.size
    cov = float(np.cov(x, y, ddof=1)[0, 1])
    sx, sy, sxy = x.sum(), y.sum(), (x * y).sum()
    loo = (sxy - x * y - (sx - x) * (sy - y) / (r - 1)) / (r - 2)
    se = math.sqrt((r - 1) / r * np.sum((loo - loo.mean()) ** 2))
    return cov, se


def _replicate_t_values(config: ExperimentConfig, r: int, points: Sequence[tuple[float, float]]) -> list[float]:
    series = config.simulate(r)
    return [t_process(series, th, z) for th, z in points]


def validate_covariance(
    config: ExperimentConfig, points: Sequence[tuple[float, float]]
) -> list[CovarianceEntry]:
    """Monte Carlo covariance of ``T_n`` at ``(theta, z)`` pairs against its limit.

    Returns one entry per unordered pair (including each point with itself).
    z-scores use jackknife standard errors; a zero standard error yields a
    z-score of 0 when empirical and theoretical values agree and ``inf``
    otherwise.
    """
    if config.has_break:
        raise ValueError("covariance validation is defined under the null hypothesis")
    if config.replications < 3:
        raise ValueError("need at least three replications")
    points = [(float(t), float(z)) for t, z in points]
    values = np.array([_replicate_t_values(config, r, points) for r in range(config.replications)])
    model = JumpModel.beta_family(config.beta_pre)
    out = []
    for a in range(len(points)):
        for c in range(a, len(points)):
            emp, se = _jackknife_cov(values[:, a], values[:, c])
            theo = theoretical_cov_T(points[a][0], points[a][1], points[c][0], points[c][1], model)
            if se > 0:
                z = (emp - theo) / se
            else:
                z = 0.0 if math.isclose(emp, theo, abs_tol=1e-12) else math.inf
            out.append(CovarianceEntry(points[a], points[c], emp, theo, se, z))
    return out


# ------------------------------------------------------------ small-time oracle


@dataclass(frozen=True)
class SmallTimeReport:
    z: float
    t: tuple[float, ...]
    p_hat: tuple[float, ...]
    se: tuple[float, ...]
    first_order: tuple[float, ...]
    remainder: tuple[float, ...]
    exponent: float
    exponent_se: float
    min_exponent: float = 1.7
    max_se: float = 0.15

    @property
    def passed(self) -> bool:
        return self.exponent >= self.min_exponent and self.exponent_se < self.max_se

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def validate_small_time(
    model: JumpModel,
    z_list: Sequence[float],
    t_list: Sequence[float],
    reps: int,
    seed: int = 0,
    b: float = 0.0,
    sigma: float = 0.0,
    sampler: SamplerConfig | None = None,
) -> list[SmallTimeReport]:
    """Fit the exponent of ``|P(X_t >= z) - t U(z)|`` in ``t`` by log-log regression.

    Each ``(z, t)`` cell uses an independent stream derived from ``seed``.
    Cells where the estimated remainder is exactly zero cannot enter the
    log-log fit and are dropped from it.
    """
    spec = ProcessSpec(b=b, sigma=sigma, jump_pre=model)
    reports = []
    for iz, z in enumerate(z_list):
        ps, ses, first, rem = [], [], [], []
        for it, t in enumerate(t_list):
            p, se = small_time_tail_probability(spec, t, z, reps, derive_seed(seed, iz, it), sampler)
            ps.append(p)
            ses.append(se)
            first.append(t * float(model.tail(z)))
            rem.append(abs(p - first[-1]))
        t_arr, rem_arr = np.asarray(t_list, dtype=float), np.asarray(rem)
        keep = rem_arr > 0
        if keep.sum() >= 3:
            fit = stats.linregress(np.log(t_arr[keep]), np.log(rem_arr[keep]))
            slope, slope_se = float(fit.slope), float(fit.stderr)
        else:
            slope, slope_se = float("nan"), float("nan")
        reports.append(
            SmallTimeReport(
                z=float(z),
                t=tuple(float(t) for t in t_list),
                p_hat=tuple(ps),
                se=tuple(ses),
                first_order=tuple(first),
                remainder=tuple(rem),
                exponent=slope,
                exponent_se=slope_se,
            )
        )
    return reports


# ------------------------------------------------------------ monotonicity


def isotonic_violation(values: Sequence[float], increasing: bool = True) -> float:
    """Largest gap between ``values`` and their isotonic (least-squares) fit."""
    y = np.asarray(values, dtype=float)
    fit = isotonic_regression(y, increasing=increasing).x
    return float(np.max(np.abs(y - fit)))


def report_json(obj: Any) -> str:
    """Serialise reports (dataclasses or lists of them) to JSON."""

    def conv(o: Any) -> Any:
        if hasattr(o, "to_dict"):
            return conv(o.to_dict())
        if hasattr(o, "__dataclass_fields__"):
            return conv(asdict(o))
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        if isinstance(o, float) and not math.isfinite(o):
            return str(o)
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        return o

    return dumps_json(conv(obj))
