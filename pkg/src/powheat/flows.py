"""Finite group flows ``exp(eps X)`` acting on points ``(t, x, u)``.

For any generator ``X = k1 X1 + k2 X2 + k3 X3 + k4 X4`` the time flow is the
Moebius map of ``E = exp(eps M)`` with ``M = [[k2/2, k1], [-k3, -k2/2]]``.
Writing ``E = C I + S M`` (``C = cosh(lam eps)``, ``S = sinh(lam eps)/lam``,
``lam**2 = phi1/4``) and ``d = E21 t + E22``::

    t_hat = (E11 t + E12) / d
    x_hat = x * d**(-2 a)
    u_hat = u * exp(k4 eps + (1 - a)(ln d + k2 eps/2) - k3 a**2 x**(1/a) S/d)

The flow exists while ``d`` stays positive along the path.  For ``X3`` this
is ``1 - eps t > 0``, the summed geometric series ``t/(1 - eps t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ParameterError
from .lie_algebra import Generator, InfinitesimalCoefficients


@dataclass(frozen=True)
class FlowStep:
    """One-parameter flow ``exp(epsilon * generator)``."""

    generator: Generator
    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not math.isfinite(eps):
            raise ParameterError("flow parameter must be finite")
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def basis(cls, i: int, eps: float, param) -> "FlowStep":
        return cls(Generator.basis(i, param), eps)

    @property
    def inverse(self) -> "FlowStep":
        return FlowStep(self.generator, -self.epsilon)

    @property
    def basis_index(self) -> int | None:
        k = self.generator.k
        nz = [i for i, v in enumerate(k) if v != 0.0]
        if len(nz) == 1 and k[nz[0]] == 1.0:
            return nz[0] + 1
        return None

    def to_dict(self) -> dict:
        return {"k": list(self.generator.k), "eps": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict, param) -> "FlowStep":
        return cls(Generator(tuple(d["k"]), param), d["eps"])


def _cs(step: FlowStep):
    k1, k2, k3, _ = step.generator.k
    eps = step.epsilon
    phi1 = k2 * k2 - 4.0 * k1 * k3
    if phi1 > 0:
        lam = 0.5 * math.sqrt(phi1)
        return math.cosh(lam * eps), math.sinh(lam * eps) / lam, phi1
    if phi1 < 0:
        om = 0.5 * math.sqrt(-phi1)
        return math.cos(om * eps), math.sin(om * eps) / om, phi1
    return 1.0, eps, phi1


def mobius_matrix(step: FlowStep) -> np.ndarray:
    """``exp(eps M)`` whose Moebius action is the time flow."""
    k1, k2, k3, _ = step.generator.k
    C, S, _ = _cs(step)
    return np.array([[C + 0.5 * S * k2, S * k1], [-S * k3, C - 0.5 * S * k2]])


def reach_interval(step: FlowStep) -> tuple[float, float]:
    """Open interval of base times ``t`` for which the flow stays finite.

    Returns ``(nan, nan)`` if no time survives (elliptic flows of a half
    period or more).
    """
    k1, k2, k3, _ = step.generator.k
    eps = step.epsilon
    if k3 == 0.0 or eps == 0.0:
        return -math.inf, math.inf
    C, S, phi1 = _cs(step)
    if phi1 < 0 and abs(eps) * 0.5 * math.sqrt(-phi1) >= math.pi:
        return math.nan, math.nan
    p = (C - 0.5 * S * k2) / (S * k3)
    return (-math.inf, p) if S * k3 > 0 else (p, math.inf)


def in_reach(step: FlowStep, t) -> np.ndarray:
    lo, hi = reach_interval(step)
    t = np.asarray(t, dtype=float)
    if math.isnan(lo):
        return np.zeros(t.shape, dtype=bool)
    return (t > lo) & (t < hi)


def _reach_message(step: FlowStep, t) -> str:
    if step.basis_index == 3:
        et = step.epsilon * float(np.max(np.atleast_1d(t)))
        return f"X3 flow undefined: eps*t = {et:.17g} must be < 1 (time series diverges)"
    lo, hi = reach_interval(step)
    return f"flow leaves the finite time axis; base time must lie in ({lo}, {hi})"


def map_time_interval(step: FlowStep, lo: float, hi: float) -> tuple[float, float]:
    """Image of the open base interval ``(lo, hi)`` under the time flow."""
    rlo, rhi = reach_interval(step)
    if math.isnan(rlo):
        return math.nan, math.nan
    lo2, hi2 = max(lo, rlo), min(hi, rhi)
    if not lo2 < hi2:
        return math.nan, math.nan
    E = mobius_matrix(step)

    def image(t, at_reach_boundary, upper):
        if at_reach_boundary:
            return math.inf if upper else -math.inf
        if math.isinf(t):
            return t if E[1, 0] == 0.0 else E[0, 0] / E[1, 0]
        return (E[0, 0] * t + E[0, 1]) / (E[1, 0] * t + E[1, 1])

    new_lo = image(lo2, lo2 == rlo and math.isfinite(rlo), False)
    new_hi = image(hi2, hi2 == rhi and math.isfinite(rhi), True)
    return new_lo, new_hi


def point_map(step: FlowStep, t, x, check: bool = True):
    """Exact flow of ``(t, x)`` together with ``ln`` of the ``u``-multiplier."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("flows are defined for x > 0 only", bound="x>0")
    if check and not np.all(in_reach(step, t)):
        raise DomainError(_reach_message(step, t), bound="reach", point=t)
    a = step.generator.a
    k1, k2, k3, k4 = step.generator.k
    eps = step.epsilon
    i = step.basis_index
    if i == 1:
        return t + eps, x.copy(), np.zeros_like(t + x)
    if i == 2:
        return math.exp(eps) * t, math.exp(a * eps) * x, np.zeros_like(t + x)
    if i == 3:
        d = 1.0 - eps * t
        logm = (1.0 - a) * np.log(d) - eps * a * a * x ** (1.0 / a) / d
        return t / d, x * d ** (-2.0 * a), logm
    if i == 4:
        return t.copy(), x.copy(), np.full(np.broadcast(t, x).shape, eps)
    C, S, _ = _cs(step)
    num = (C + 0.5 * S * k2) * t + S * k1
    d = C - 0.5 * S * k2 - S * k3 * t
    logm = k4 * eps + (1.0 - a) * (np.log(d) + 0.5 * k2 * eps) - k3 * a * a * x ** (1.0 / a) * S / d
    return num / d, x * d ** (-2.0 * a), logm


def flow_point(step: FlowStep, t, x, u, method: str = "exact"):
    """Image ``(t_hat, x_hat, u_hat)`` of a point under ``exp(eps X)``.

    ``method="numeric"`` integrates the characteristic equations
    ``dt/de = tau``, ``dx/de = xi``, ``du/de = V u`` instead (scalars only).
    """
    if method == "numeric":
        return flow_point_numeric(step, t, x, u)
    if method != "exact":
        raise ParameterError(f"unknown flow method {method!r}")
    th, xh, logm = point_map(step, t, x)
    return th, xh, np.asarray(u, dtype=float) * np.exp(logm)


def flow_point_numeric(step: FlowStep, t: float, x: float, u: float, rtol: float = 1e-12):
    """Adaptive integration of the characteristics (independent of the closed forms)."""
    if not x > 0:
        raise DomainError("flows are defined for x > 0 only", bound="x>0")
    inf = InfinitesimalCoefficients(step.generator)
    eps = step.epsilon
    if eps == 0.0:
        return float(t), float(x), float(u)

    def rhs(_, z):
        tt, lx, _lm = z
        xx = math.exp(lx)
        return [inf.tau(tt), inf.xi(tt, xx) / xx, inf.V(tt, xx)]

    def blowup(_, z):
        return 1e8 - abs(z[0])

    blowup.terminal = True
    sol = solve_ivp(
        rhs,
        (0.0, eps),
        [float(t), math.log(x), 0.0],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        events=blowup,
    )
    if sol.status != 0:
        raise DomainError(_reach_message(step, t), bound="reach", point=t)
    tt, lx, lm = sol.y[:, -1]
    return float(tt), math.exp(lx), float(u) * math.exp(lm)
