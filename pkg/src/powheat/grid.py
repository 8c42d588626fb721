"""Uniform space-time grids and residual reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on ``[t_min, t_max] x [x_min, x_max]``."""

    t_min: float
    t_max: float
    n_t: int
    x_min: float
    x_max: float
    n_x: int

    def __post_init__(self):
        vals = (self.t_min, self.t_max, self.x_min, self.x_max)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("grid bounds must be finite")
        if self.n_t < 1 or self.n_x < 1:
            raise ParameterError("grid needs at least one node per axis")
        if self.t_max < self.t_min or self.x_max < self.x_min:
            raise ParameterError("grid bounds must be ordered")
        if self.x_min <= 0:
            raise ParameterError("grid requires x_min > 0")
        if (self.n_t == 1) != (self.t_min == self.t_max) or (self.n_x == 1) != (
            self.x_min == self.x_max
        ):
            raise ParameterError("single-node axes need equal bounds, and vice versa")

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "GridSpec":
        return cls(lo, hi, n, lo, hi, n)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Row-major node arrays: t varies slowest, x fastest."""
        tt, xx = np.meshgrid(self.t, self.x, indexing="ij")
        return tt.ravel(), xx.ravel()

    def to_dict(self) -> dict:
        return {
            "t_min": self.t_min,
            "t_max": self.t_max,
            "n_t": self.n_t,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n_x": self.n_x,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(
            float(d["t_min"]),
            float(d["t_max"]),
            int(d["n_t"]),
            float(d["x_min"]),
            float(d["x_max"]),
            int(d["n_x"]),
        )


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of a pointwise residual check.

    ``rel_norm`` is ``max_abs`` divided by the largest reference magnitude
    seen on the sample (floored at 1e-300); ``passed`` is ``rel_norm <= tolerance``.
    """

    max_abs: float
    rel_norm: float
    tolerance: float
    residuals: np.ndarray = field(repr=False, compare=False)
    grid: GridSpec | None = None

    @property
    def passed(self) -> bool:
        return bool(self.rel_norm <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "grid": None if self.grid is None else self.grid.to_dict(),
            "max_abs": float(self.max_abs),
            "rel_norm": float(self.rel_norm),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


def make_report(residuals, scale, tolerance: float, grid: GridSpec | None = None) -> ResidualReport:
    residuals = np.asarray(residuals, dtype=float)
    max_abs = float(np.max(np.abs(residuals))) if residuals.size else 0.0
    scale = max(float(scale), 1e-300)
    return ResidualReport(max_abs, max_abs / scale, float(tolerance), residuals, grid)
