"""Simulation of discretely observed Itô semimartingales with positive jumps.

Increments over a mesh ``delta_n`` are generated directly as

    b * delta_n + sigma * sqrt(delta_n) * Z_j + J_j,

where ``J_j`` is the sum of all jumps in the j-th observation interval.  Jump
arrival times inside an interval are not simulated because only increment sums
are observed.

Two jump samplers are available:

``truncated-cp``
    Jumps of size ``>= eps_sim`` form a compound Poisson process with rate
    ``U(eps_sim)``; jump sizes are drawn by inverting ``U(z) / U(eps_sim)``.
    Jumps below ``eps_sim`` are either dropped or replaced by their mean.
``exact-stable``
    Exact 1/2-stable increments ``(beta delta_n**2 / 2) / Z'**2`` for the
    parametric family.

Under a single-break alternative the increments before and after the break
come from independent streams and are concatenated.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from levybreak._io import atomic_write_text, fmt_float
from levybreak._rng import check_seed, stream
from levybreak.jump_model import JumpModel

__all__ = [
    "ProcessSpec",
    "IncrementSeries",
    "SamplerConfig",
    "simulate_path",
    "small_time_tail_probability",
    "floor_index",
    "write_increments_csv",
    "increments_csv_text",
    "read_increments_csv",
    "read_prices_csv",
]

SamplerMethod = Literal["truncated-cp", "exact-stable"]


def floor_index(n: int, theta: float) -> int:
    """``floor(n * theta)``, robust to representation error such as ``0.7 * 22500``."""
    return int(math.floor(round(n * theta, 9)))


@dataclass(frozen=True)
class ProcessSpec:
    """Constant drift and volatility plus a jump measure, with an optional single break."""

    b: float = 0.0
    sigma: float = 0.0
    jump_pre: JumpModel = field(default_factory=lambda: JumpModel.beta_family(1.0))
    jump_post: JumpModel | None = None
    theta0: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.b) and math.isfinite(self.sigma)):
            raise ValueError("drift and volatility must be finite")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if (self.jump_post is None) != (self.theta0 is None):
            raise ValueError("jump_post and theta0 must be given together")
        if self.theta0 is not None and not 0 < self.theta0 < 1:
            raise ValueError("theta0 must lie strictly inside (0, 1)")

    @property
    def has_break(self) -> bool:
        return self.theta0 is not None

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "sigma": self.sigma,
            "jump_pre": self.jump_pre.to_dict(),
            "jump_post": None if self.jump_post is None else self.jump_post.to_dict(),
            "theta0": self.theta0,
        }


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Observed increments ``X_{j delta_n} - X_{(j-1) delta_n}``, ``j = 1..n``."""

    delta_n: float
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True).ravel()
        if vals.size < 2:
            raise ValueError("an increment series needs at least two increments")
        if not np.all(np.isfinite(vals)):
            raise ValueError("increments must be finite")
        if not (self.delta_n > 0 and math.isfinite(self.delta_n)):
            raise ValueError("delta_n must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "delta_n", float(self.delta_n))

    @classmethod
    def from_values(cls, values: ArrayLike, delta_n: float) -> IncrementSeries:
        return cls(delta_n=delta_n, values=np.asarray(values, dtype=float))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def k_n(self) -> float:
        """Observation horizon ``n * delta_n``."""
        return self.n * self.delta_n

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IncrementSeries):
            return NotImplemented
        return self.delta_n == other.delta_n and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class SamplerConfig:
    """How jumps are generated.

    ``compensate_small=None`` resolves to ``True`` for the parametric family
    (whose small-jump mean is closed form) and ``False`` otherwise.
    """

    method: SamplerMethod = "truncated-cp"
    eps_sim: float = 1e-4
    compensate_small: bool | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.method not in ("truncated-cp", "exact-stable"):
            raise ValueError(f"unknown sampler method {self.method!r}")
        if self.method == "truncated-cp" and not self.eps_sim > 0:
            raise ValueError("eps_sim must be positive")
        check_seed(self.seed)

    def compensate_for(self, model: JumpModel) -> bool:
        if self.compensate_small is None:
            return model.is_beta
        return self.compensate_small

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "eps_sim": self.eps_sim,
            "compensate_small": self.compensate_small,
            "seed": self.seed,
        }


def _jump_sums(
    model: JumpModel, size: int, delta_n: float, cfg: SamplerConfig, rng: np.random.Generator
) -> NDArray[np.float64]:
    if cfg.method == "exact-stable":
        if not model.is_beta:
            raise ValueError("exact-stable sampling requires a parametric (beta) jump model")
        z = rng.standard_normal(size)
        return (model.beta * delta_n**2 / 2.0) / z**2
    eps = cfg.eps_sim
    rate = model.tail(eps) * delta_n
    counts = rng.poisson(rate, size)
    total = int(counts.sum())
    jumps = np.zeros(size)
    if total:
        u = 1.0 - rng.random(total)  # (0, 1]
        sizes = model.conditional_quantile(eps, u)
        owner = np.repeat(np.arange(size), counts)
        jumps = np.bincount(owner, weights=sizes, minlength=size)
    if cfg.compensate_for(model):
        jumps = jumps + model.small_jump_mean(eps) * delta_n
    return jumps


def _segment(
    spec: ProcessSpec,
    model: JumpModel,
    size: int,
    delta_n: float,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    gauss = rng.standard_normal(size)
    cont = spec.b * delta_n + spec.sigma * math.sqrt(delta_n) * gauss
    return cont + _jump_sums(model, size, delta_n, cfg, rng)


def simulate_path(
    spec: ProcessSpec, n: int, delta_n: float, cfg: SamplerConfig | None = None
) -> IncrementSeries:
    """Simulate ``n`` increments at mesh ``delta_n``.

    Under a break, increments ``j <= floor(n theta0)`` use ``spec.jump_pre``
    and the rest use ``spec.jump_post``; the two pieces come from independent
    streams derived from ``cfg.seed``.  Output is bit-identical for identical
    inputs.
    """
    cfg = SamplerConfig() if cfg is None else cfg
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    if not delta_n > 0:
        raise ValueError("delta_n must be positive")
    if cfg.method == "exact-stable":
        for m in (spec.jump_pre, spec.jump_post):
            if m is not None and not m.is_beta:
                raise ValueError("exact-stable sampling requires a parametric (beta) jump model")

    if not spec.has_break:
        values = _segment(spec, spec.jump_pre, n, delta_n, cfg, stream(cfg.seed, 0))
    else:
        split = floor_index(n, spec.theta0)
        pieces = []
        for key, (model, size) in enumerate(((spec.jump_pre, split), (spec.jump_post, n - split))):
            if size:
                pieces.append(_segment(spec, model, size, delta_n, cfg, stream(cfg.seed, key)))
        values = np.concatenate(pieces)
    return IncrementSeries(delta_n=delta_n, values=values)


def small_time_tail_probability(
    spec: ProcessSpec,
    t: float,
    z: float,
    reps: int,
    seed: int,
    sampler: SamplerConfig | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate of ``P(X_t >= z)`` with its standard error.

    ``reps`` independent copies of ``X_t`` (started at zero) are simulated as
    the increments of one path with mesh ``t``.
    """
    if spec.has_break:
        raise ValueError("small-time probabilities are defined for a spec without a break")
    if not (t > 0 and z > 0):
        raise ValueError("t and z must be positive")
    base = SamplerConfig() if sampler is None else sampler
    cfg = SamplerConfig(
        method=base.method, eps_sim=base.eps_sim, compensate_small=base.compensate_small, seed=seed
    )
    x = simulate_path(spec, reps, t, cfg).values
    p = float(np.mean(x >= z))
    se = math.sqrt(p * (1.0 - p) / reps)
    return p, se


# --------------------------------------------------------------------------- CSV

_META = re.compile(r"(\w+)=(\S+)")


def increments_csv_text(series: IncrementSeries, seed: int | None = None) -> str:
    """``j,increment`` rows preceded by a ``# delta_n=... n=... seed=...`` comment."""
    lines = [f"# delta_n={fmt_float(series.delta_n)} n={series.n} seed={'' if seed is None else seed}"]
    lines.append("j,increment")
    lines.extend(f"{j},{fmt_float(v)}" for j, v in enumerate(series.values, start=1))
    return "\n".join(lines) + "\n"


def write_increments_csv(series: IncrementSeries, path: str | Path, seed: int | None = None) -> None:
    atomic_write_text(path, increments_csv_text(series, seed))


def read_increments_csv(path: str | Path) -> IncrementSeries:
    """Read a CSV written by :func:`write_increments_csv`.

    Raises ``ValueError`` naming the offending line for non-numeric or
    non-finite values, and when the ``delta_n`` metadata is missing.
    """
    path = Path(path)
    meta: dict[str, str] = {}
    values: list[float] = []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta.update(dict(_META.findall(line)))
                continue
            if not header_seen:
                if line.replace(" ", "") != "j,increment":
                    raise ValueError(f"{path}:{lineno}: expected header 'j,increment'")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            try:
                value = float(parts[1])
                int(parts[0])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
            if not math.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite increment")
            values.append(value)
    if "delta_n" not in meta:
        raise ValueError(f"{path}: missing '# delta_n=<value>' metadata line")
    try:
        delta_n = float(meta["delta_n"])
    except ValueError as exc:
        raise ValueError(f"{path}: invalid delta_n metadata") from exc
    if not (delta_n > 0 and math.isfinite(delta_n)):
        raise ValueError(f"{path}: delta_n must be positive")
    return IncrementSeries(delta_n=delta_n, values=np.asarray(values))


def read_prices_csv(path: str | Path, rtol: float = 1e-6) -> IncrementSeries:
    """Difference an equidistant ``t,price`` CSV into increments."""
    path = Path(path)
    ts: list[float] = []
    ps: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(row for row in fh if not row.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "price"]:
            raise ValueError(f"{path}: expected header 't,price'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, p = float(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
            if not (math.isfinite(t) and math.isfinite(p)):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            ts.append(t)
            ps.append(p)
    if len(ts) < 3:
        raise ValueError(f"{path}: need at least three prices")
    steps = np.diff(ts)
    delta_n = float(np.mean(steps))
    if delta_n <= 0 or np.max(np.abs(steps - delta_n)) > rtol * delta_n:
        raise ValueError(f"{path}: observation times must be equidistant and increasing")
    return IncrementSeries(delta_n=delta_n, values=np.diff(ps))
