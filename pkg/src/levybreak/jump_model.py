"""One-sided Lévy measures described by their tail integral.

A jump measure ``nu`` on ``(0, inf)`` is represented through
``U(z) = nu([z, inf))``.  Two kinds are supported:

* the parametric family ``U(z) = sqrt(beta / (pi z))``, the tail integral of a
  1/2-stable subordinator, and
* a tabulated tail integral, interpolated linearly in ``1 / sqrt(z)``.  The
  interpolation is exact for the parametric family, so a table sampled from it
  reproduces it without error.

For tabulated inputs the user is responsible for the smoothness of the
underlying Lévy density (bounded density and derivative away from zero); this
is not checked.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "JumpModel",
    "BreakAlternative",
    "tail_value",
    "conditional_jump_quantile",
    "drift_function",
    "load_tail_csv",
]


@dataclass(frozen=True)
class JumpModel:
    """Tail integral of a jump measure supported on the positive half-line.

    Use :meth:`beta_family` or :meth:`tabulated` rather than the constructor.
    """

    kind: Literal["beta", "tabulated"]
    beta: float | None = None
    z: tuple[float, ...] = field(default=(), repr=False)
    u: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.kind == "beta":
            if self.beta is None or not (self.beta > 0 and math.isfinite(self.beta)):
                raise ValueError(f"beta must be a positive finite number, got {self.beta!r}")
        elif self.kind == "tabulated":
            z = np.asarray(self.z, dtype=float)
            u = np.asarray(self.u, dtype=float)
            if z.ndim != 1 or z.shape != u.shape or z.size < 2:
                raise ValueError("a tabulated tail needs at least two (z, U) pairs")
            if not (np.all(np.isfinite(z)) and np.all(np.isfinite(u))):
                raise ValueError("tabulated tail contains non-finite values")
            if z[0] <= 0:
                raise ValueError("tabulated z values must be positive")
            if np.any(np.diff(z) <= 0):
                raise ValueError("tabulated z values must be strictly increasing")
            if np.any(np.diff(u) >= 0):
                raise ValueError("tabulated U values must be strictly decreasing")
            if u[-1] <= 0:
                raise ValueError("tabulated U values must be positive")
        else:
            raise ValueError(f"unknown jump model kind {self.kind!r}")

    @classmethod
    def beta_family(cls, beta: float) -> JumpModel:
        """1/2-stable subordinator with ``U(z) = sqrt(beta / (pi z))``."""
        return cls(kind="beta", beta=float(beta))

    @classmethod
    def tabulated(cls, z: ArrayLike, u: ArrayLike) -> JumpModel:
        z_arr = np.asarray(z, dtype=float).ravel()
        u_arr = np.asarray(u, dtype=float).ravel()
        return cls(kind="tabulated", z=tuple(z_arr.tolist()), u=tuple(u_arr.tolist()))

    @property
    def is_beta(self) -> bool:
        return self.kind == "beta"

    @property
    def z_range(self) -> tuple[float, float]:
        """Closed interval of ``z`` on which :meth:`tail` is defined."""
        if self.is_beta:
            return (0.0, math.inf)
        return (self.z[0], self.z[-1])

    def tail(self, z: ArrayLike) -> NDArray[np.float64] | float:
        """Evaluate ``U(z)``; vectorised over ``z``."""
        z_arr = np.asarray(z, dtype=float)
        if np.any(~(z_arr > 0)):
            raise ValueError("tail integral is only defined for z > 0")
        if self.is_beta:
            out = np.sqrt(self.beta / (np.pi * z_arr))
        else:
            lo, hi = self.z_range
            if np.any(z_arr < lo) or np.any(z_arr > hi):
                raise ValueError(f"z outside the tabulated range [{lo}, {hi}]")
            # Interpolate in x = 1/sqrt(z); x is decreasing in z, so reverse.
            xs = 1.0 / np.sqrt(np.asarray(self.z)[::-1])
            us = np.asarray(self.u)[::-1]
            out = np.interp(1.0 / np.sqrt(z_arr), xs, us)
        return float(out) if out.ndim == 0 else out

    def conditional_quantile(self, eps: float, u: ArrayLike) -> NDArray[np.float64] | float:
        """Solve ``U(z) / U(eps) = u`` for ``z``; vectorised over ``u``.

        For ``u`` uniform on ``(0, 1]`` this samples the jump size conditioned
        on being at least ``eps``.  ``u = 1`` maps to ``eps`` itself.
        """
        u_arr = np.asarray(u, dtype=float)
        if np.any(~((u_arr > 0) & (u_arr <= 1))):
            raise ValueError("u must lie in (0, 1]")
        u_eps = self.tail(eps)
        if not u_eps > 0:
            raise ValueError("degenerate jump model: U(eps) = 0")
        if self.is_beta:
            out = eps / u_arr**2
        else:
            target = u_arr * u_eps
            u_min = self.u[-1]
            if np.any(target < u_min):
                raise ValueError("requested quantile lies beyond the tabulated range")
            xs = 1.0 / np.sqrt(np.asarray(self.z)[::-1])
            us = np.asarray(self.u)[::-1]
            x = np.interp(target, us, xs)
            out = 1.0 / x**2
            out = np.maximum(out, eps)
        return float(out) if np.ndim(out) == 0 else out

    def small_jump_mean(self, eps: float) -> float:
        """Mean rate of jumps smaller than ``eps``: the integral of ``u nu(du)`` over ``(0, eps)``.

        Only available in closed form for the parametric family, where it
        equals ``sqrt(beta eps / pi)``.
        """
        if not eps > 0:
            raise ValueError("eps must be positive")
        if not self.is_beta:
            raise ValueError("small-jump mean is not available for tabulated tails")
        return math.sqrt(self.beta * eps / math.pi)

    def to_dict(self) -> dict:
        if self.is_beta:
            return {"kind": "beta", "beta": self.beta}
        return {"kind": "tabulated", "z": list(self.z), "u": list(self.u)}


def tail_value(model: JumpModel, z: float) -> float:
    """``U(z) = nu([z, inf))`` for a single ``z > 0``."""
    return float(model.tail(z))


def conditional_jump_quantile(model: JumpModel, eps: float, u: float) -> float:
    """Upper-tail quantile of the jump law conditioned on jumps ``>= eps``.

    Returns the ``z >= eps`` with ``U(z) / U(eps) = u``.
    """
    if not 0 < u < 1:
        raise ValueError("u must lie strictly between 0 and 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return float(model.conditional_quantile(eps, u))


@dataclass(frozen=True)
class BreakAlternative:
    """A single break at ``theta0`` from ``nu1`` to ``nu2``."""

    theta0: float
    nu1: JumpModel
    nu2: JumpModel

    def __post_init__(self) -> None:
        if not 0 < self.theta0 < 1:
            raise ValueError("theta0 must lie strictly inside (0, 1)")


def drift_function(alt: BreakAlternative, theta: ArrayLike, z: float) -> NDArray[np.float64] | float:
    """Deterministic limit of ``T_n(theta, z) / sqrt(k_n)`` under a single break.

    Piecewise linear tent in ``theta`` with its peak at ``theta0``, scaled by
    ``nu1(z) - nu2(z)``.
    """
    th = np.asarray(theta, dtype=float)
    if np.any((th < 0) | (th > 1)):
        raise ValueError("theta must lie in [0, 1]")
    diff = alt.nu1.tail(z) - alt.nu2.tail(z)
    t0 = alt.theta0
    out = np.where(th <= t0, th * (1 - t0), t0 * (1 - th)) * diff
    return float(out) if out.ndim == 0 else out


def load_tail_csv(path: str | Path) -> JumpModel:
    """Read a tabulated tail integral from a two-column ``z,U`` CSV with one header line."""
    path = Path(path)
    zs: list[float] = []
    us: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            try:
                z, u = float(row[0]), float(row[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
            zs.append(z)
            us.append(u)
    return JumpModel.tabulated(zs, us)
