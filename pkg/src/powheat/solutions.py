"""Exact solutions of ``u_t = x**(2 - 1/a) u_xx`` and their evaluation.

Families, with ``y`` a combination ``c_reg * y_reg + c_irr * y_irr`` of the
reduced ODE's basis pair:

* stationary   ``u = C1 x + C2``
* separable    ``u = exp(+-kappa**2 t) xi**a y(xi)``, ``xi = 2 kappa a x**(1/(2a))``,
  modified Bessel pair for ``+``, ordinary for ``-``
* scale-invariant ``u = t**mu xi**a exp(-xi) y(xi)``, ``xi = a**2 x**(1/a) / t``,
  Kummer pair with ``alpha = 1 + mu``, ``beta = 1 + a``
* projective   ``u = (a x**(1/(2a)))**(a-1) exp(mu atan(t) - xi t) y(xi)``,
  ``xi = a**2 x**(1/a) / (1 + t**2)``, Coulomb pair with ``l = (a-1)/2``, ``eta = mu/2``

plus weighted sums (the superposition symmetry) and images under group flows.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import special_functions as sf
from .errors import DomainError, ParameterError, ParameterMismatchError
from .flows import FlowStep, map_time_interval, point_map
from .grid import GridSpec
from .lie_algebra import PowerLawParameter, _as_param

EPS = sf.EPS


@dataclass(frozen=True)
class Domain:
    """Open time interval ``(t_min, t_max)``; space is always ``x > 0``."""

    t_min: float = -math.inf
    t_max: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))

    def intersect(self, other: "Domain") -> "Domain":
        return Domain(max(self.t_min, other.t_min), min(self.t_max, other.t_max))

    @property
    def empty(self) -> bool:
        return not self.t_min < self.t_max

    def check(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            bad = x[~(x > 0)].flat[0]
            raise DomainError(f"x must be > 0, got x={bad}", bound="x>0", point=bad)
        if np.any(~(t > self.t_min)):
            bad = t[~(t > self.t_min)].flat[0]
            raise DomainError(f"t={bad} violates t > {self.t_min}", bound="t_min", point=bad)
        if np.any(~(t < self.t_max)):
            bad = t[~(t < self.t_max)].flat[0]
            raise DomainError(f"t={bad} violates t < {self.t_max}", bound="t_max", point=bad)

    def to_dict(self) -> dict:
        def enc(v):
            return None if math.isinf(v) else v

        return {"t": [enc(self.t_min), enc(self.t_max)], "x": [0.0, None]}


def _guard_xi(xi, c_irr):
    if c_irr != 0.0 and np.any(xi < sf.XI_MIN):
        raise DomainError(
            f"irregular branch needs xi >= {sf.XI_MIN:g}", bound="xi_min", point=float(np.min(xi))
        )


def _check_coeffs(c_reg, c_irr):
    if not (math.isfinite(c_reg) and math.isfinite(c_irr)):
        raise ParameterError("basis coefficients must be finite")
    if c_reg == 0.0 and c_irr == 0.0:
        raise ParameterError(
            "c_reg and c_irr both zero: use make_stationary(param, 0, 0) for the trivial solution"
        )


class SolutionDescriptor:
    """Common interface of all solution variants (immutable dataclasses)."""

    param: PowerLawParameter
    variant = "abstract"

    @property
    def a(self) -> float:
        return self.param.a

    @property
    def domain(self) -> Domain:
        return Domain()

    @property
    def flows(self) -> tuple[FlowStep, ...]:
        return ()

    def _values(self, t, x):
        raise NotImplementedError

    def params_dict(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "variant": self.variant,
            "params": self.params_dict(),
            "flows": [s.to_dict() for s in self.flows],
            "domain": self.domain.to_dict(),
        }

    def __call__(self, t, x):
        return evaluate(self, t, x).value


@dataclass(frozen=True)
class Stationary(SolutionDescriptor):
    param: PowerLawParameter
    C1: float
    C2: float
    variant = "Stationary"

    def _values(self, t, x):
        u = self.C1 * x + self.C2 + 0.0 * t
        return u, 2 * EPS * (np.abs(self.C1 * x) + abs(self.C2))

    def params_dict(self):
        return {"C1": self.C1, "C2": self.C2}


@dataclass(frozen=True)
class Separable(SolutionDescriptor):
    param: PowerLawParameter
    sign: int
    kappa: float
    c_reg: float = 1.0
    c_irr: float = 0.0
    variant = "Separable"

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ParameterError("sign must be +1 or -1")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ParameterError("kappa must be > 0")
        _check_coeffs(self.c_reg, self.c_irr)

    @property
    def basis_spec(self) -> sf.OdeBasisSpec:
        return sf.OdeBasisSpec.bessel(self.a, modified=self.sign > 0)

    def similarity_variable(self, x):
        return 2.0 * self.kappa * self.a * np.asarray(x, dtype=float) ** (0.5 / self.a)

    def prefactor(self, t, x):
        xi = self.similarity_variable(x)
        return np.exp(self.sign * self.kappa**2 * np.asarray(t, dtype=float)) * xi**self.a

    def _values(self, t, x):
        xi = self.similarity_variable(x)
        _guard_xi(xi, self.c_irr)
        y, ey = _combine(self.basis_spec, xi, self.c_reg, self.c_irr)
        growth = self.kappa**2 * np.abs(t)
        pref = np.exp(self.sign * self.kappa**2 * t) * xi**self.a
        u = pref * y
        return u, np.abs(pref) * ey + EPS * (3.0 + growth + self.a * np.abs(np.log(xi))) * np.abs(u)

    def params_dict(self):
        return {
            "sign": "+" if self.sign > 0 else "-",
            "kappa": self.kappa,
            "c_reg": self.c_reg,
            "c_irr": self.c_irr,
        }


@dataclass(frozen=True)
class ScaleInvariant(SolutionDescriptor):
    param: PowerLawParameter
    mu: float
    c_reg: float = 1.0
    c_irr: float = 0.0
    variant = "ScaleInvariant"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ParameterError("mu must be finite")
        _check_coeffs(self.c_reg, self.c_irr)

    @property
    def domain(self) -> Domain:
        return Domain(0.0, math.inf)

    @property
    def basis_spec(self) -> sf.OdeBasisSpec:
        return sf.OdeBasisSpec.for_scale_invariant(self.a, self.mu)

    def similarity_variable(self, t, x):
        a = self.a
        return a * a * np.asarray(x, dtype=float) ** (1.0 / a) / np.asarray(t, dtype=float)

    def prefactor(self, t, x):
        xi = self.similarity_variable(t, x)
        return np.asarray(t, dtype=float) ** self.mu * xi**self.a * np.exp(-xi)

    def _values(self, t, x):
        xi = self.similarity_variable(t, x)
        _guard_xi(xi, self.c_irr)
        y, ey = _combine(self.basis_spec, xi, self.c_reg, self.c_irr)
        pref = t**self.mu * xi**self.a * np.exp(-xi)
        u = pref * y
        cond = 3.0 + xi + np.abs(self.mu * np.log(t)) + self.a * np.abs(np.log(xi))
        return u, np.abs(pref) * ey + EPS * cond * np.abs(u)

    def params_dict(self):
        return {"mu": self.mu, "c_reg": self.c_reg, "c_irr": self.c_irr}


@dataclass(frozen=True)
class Projective(SolutionDescriptor):
    param: PowerLawParameter
    mu: float
    c_reg: float = 1.0
    c_irr: float = 0.0
    variant = "Projective"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ParameterError("mu must be finite")
        _check_coeffs(self.c_reg, self.c_irr)

    @property
    def basis_spec(self) -> sf.OdeBasisSpec:
        return sf.OdeBasisSpec.for_projective(self.a, self.mu)

    def similarity_variable(self, t, x):
        a = self.a
        t = np.asarray(t, dtype=float)
        return a * a * np.asarray(x, dtype=float) ** (1.0 / a) / (1.0 + t * t)

    def prefactor(self, t, x):
        a = self.a
        t = np.asarray(t, dtype=float)
        xi = self.similarity_variable(t, x)
        return (a * np.asarray(x, dtype=float) ** (0.5 / a)) ** (a - 1.0) * np.exp(
            self.mu * np.arctan(t) - xi * t
        )

    def _values(self, t, x):
        xi = self.similarity_variable(t, x)
        _guard_xi(xi, self.c_irr)
        y, ey = _combine(self.basis_spec, xi, self.c_reg, self.c_irr)
        pref = self.prefactor(t, x)
        u = pref * y
        cond = 4.0 + np.abs(xi * t) + abs(self.mu) + abs(self.a - 1.0) * np.abs(np.log(x))
        return u, np.abs(pref) * ey + EPS * cond * np.abs(u)

    def params_dict(self):
        return {"mu": self.mu, "c_reg": self.c_reg, "c_irr": self.c_irr}


@dataclass(frozen=True)
class Polynomial(SolutionDescriptor):
    """``sum c t**i x**j`` over ``terms = ((c, i, j), ...)``.

    Not a solution in general; used to build perturbed fixtures for the
    verification tools.
    """

    param: PowerLawParameter
    terms: tuple[tuple[float, int, int], ...]
    variant = "Polynomial"

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((float(c), int(i), int(j)) for c, i, j in self.terms)
        )

    def _values(self, t, x):
        u = np.zeros(np.broadcast(t, x).shape)
        mag = np.zeros_like(u)
        for c, i, j in self.terms:
            term = c * t**i * x**j
            u = u + term
            mag = mag + np.abs(term)
        return u, 2 * EPS * mag

    def params_dict(self):
        return {"terms": [list(term) for term in self.terms]}


@dataclass(frozen=True)
class Superposition(SolutionDescriptor):
    param: PowerLawParameter
    parts: tuple[tuple[float, SolutionDescriptor], ...]
    variant = "Superposition"

    def __post_init__(self):
        parts = tuple((float(w), s) for w, s in self.parts)
        if not parts:
            raise ParameterError("superposition needs at least one part")
        for _, s in parts:
            if s.param != self.param:
                raise ParameterMismatchError("all superposed solutions must share the exponent a")
        object.__setattr__(self, "parts", parts)

    @property
    def domain(self) -> Domain:
        dom = Domain()
        for _, s in self.parts:
            dom = dom.intersect(s.domain)
        return dom

    def _values(self, t, x):
        u = np.zeros(np.broadcast(t, x).shape)
        err = np.zeros_like(u)
        mag = np.zeros_like(u)
        for w, s in self.parts:
            if w == 0.0:
                continue
            v, e = s._values(t, x)
            u = u + w * v
            err = err + abs(w) * e
            mag = mag + np.abs(w * v)
        return u, err + EPS * len(self.parts) * mag

    def params_dict(self):
        return {"parts": [{"weight": w, "solution": s.to_dict()} for w, s in self.parts]}


@dataclass(frozen=True)
class Transformed(SolutionDescriptor):
    """Image of ``base`` under the flows in ``steps``, applied left to right."""

    base: SolutionDescriptor
    steps: tuple[FlowStep, ...]
    _domain: Domain = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        steps = tuple(self.steps)
        for s in steps:
            if s.generator.param != self.base.param:
                raise ParameterMismatchError("flow generator built for a different exponent")
        object.__setattr__(self, "steps", steps)
        dom = self.base.domain
        for s in steps:
            lo, hi = map_time_interval(s, dom.t_min, dom.t_max)
            dom = Domain(lo, hi)
            if math.isnan(lo) or dom.empty:
                raise DomainError("flow maps the solution onto an empty domain", bound="reach")
        object.__setattr__(self, "_domain", dom)

    @property
    def param(self) -> PowerLawParameter:
        return self.base.param

    @property
    def variant(self) -> str:
        return self.base.variant

    @property
    def domain(self) -> Domain:
        return self._domain

    @property
    def flows(self) -> tuple[FlowStep, ...]:
        return self.steps

    def _values(self, t, x):
        # pull the point back through the flows in reverse, remembering multipliers
        logm = np.zeros(np.broadcast(t, x).shape)
        for s in reversed(self.steps):
            t, x, _ = point_map(s.inverse, t, x)
            logm = logm + point_map(s, t, x, check=False)[2]
        self.base.domain.check(t, x)
        v, e = self.base._values(t, x)
        m = np.exp(logm)
        u = m * v
        return u, m * e + EPS * (2.0 + np.abs(logm)) * np.abs(u)

    def params_dict(self):
        return self.base.params_dict()


def _combine(spec, xi, c_reg, c_irr):
    y = np.zeros_like(xi)
    err = np.zeros_like(xi)
    if c_reg != 0.0:
        v = sf.regular_solution(spec, xi)
        y = y + c_reg * v.value
        err = err + abs(c_reg) * v.abs_error
    if c_irr != 0.0:
        v = sf.second_solution(spec, xi)
        y = y + c_irr * v.value
        err = err + abs(c_irr) * v.abs_error
    return y, err + EPS * np.abs(y)


# --------------------------------------------------------------------------
# constructors


def make_stationary(param, C1: float, C2: float) -> Stationary:
    """``u = C1 x + C2``; ``(0, 0)`` is the trivial solution."""
    return Stationary(_as_param(param), float(C1), float(C2))


def make_separable(param, sign, kappa: float, c_reg: float = 1.0, c_irr: float = 0.0) -> Separable:
    if sign in ("+", "-"):
        sign = 1 if sign == "+" else -1
    return Separable(_as_param(param), int(sign), float(kappa), float(c_reg), float(c_irr))


def make_scale_invariant(param, mu: float, c_reg: float = 1.0, c_irr: float = 0.0) -> ScaleInvariant:
    return ScaleInvariant(_as_param(param), float(mu), float(c_reg), float(c_irr))


def make_projective(param, mu: float, c_reg: float = 1.0, c_irr: float = 0.0) -> Projective:
    return Projective(_as_param(param), float(mu), float(c_reg), float(c_irr))


def make_polynomial(param, terms) -> Polynomial:
    return Polynomial(_as_param(param), tuple(terms))


def superpose(parts: Iterable[tuple[float, SolutionDescriptor]]) -> Superposition:
    """Weighted sum of solutions sharing the same exponent."""
    parts = tuple(parts)
    if not parts:
        raise ParameterError("superposition needs at least one part")
    return Superposition(parts[0][1].param, parts)


# --------------------------------------------------------------------------
# evaluation


def evaluate(sol: SolutionDescriptor, t, x) -> sf.SpecialValue:
    """``u(t, x)`` with a propagated absolute error (scalars or arrays)."""
    scalar = np.ndim(t) == 0 and np.ndim(x) == 0
    tt, xx = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    tt, xx = np.atleast_1d(tt).astype(float), np.atleast_1d(xx).astype(float)
    sol.domain.check(tt, xx)
    u, err = sol._values(tt, xx)
    u = np.broadcast_to(u, tt.shape)
    err = np.broadcast_to(err, tt.shape)
    if scalar:
        return sf.SpecialValue(float(u[0]), float(err[0]))
    return sf.SpecialValue(np.array(u), np.array(err))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("POWHEAT_THREADS", "1")))
    except ValueError:
        return 1


def evaluate_grid(sol: SolutionDescriptor, grid: GridSpec) -> np.ndarray:
    """Rows ``(t, x, u, abs_error)`` in row-major order (t slow, x fast)."""
    t, x = grid.mesh()
    try:
        sol.domain.check(t, x)
    except DomainError as exc:
        raise DomainError(f"grid node outside the solution domain: {exc}", exc.bound, exc.point)
    nthreads = min(_threads(), grid.n_t)
    if nthreads > 1:
        chunks = np.array_split(np.arange(t.size), nthreads)
        with ThreadPoolExecutor(nthreads) as pool:
            vals = list(pool.map(lambda idx: evaluate(sol, t[idx], x[idx]), chunks))
        u = np.concatenate([v.value for v in vals])
        err = np.concatenate([v.abs_error for v in vals])
    else:
        v = evaluate(sol, t, x)
        u, err = v.value, v.abs_error
    return np.column_stack([t, x, u, err])


def format_csv(table: np.ndarray, header: str = "t,x,u,abs_error") -> str:
    """17 significant digits so values round-trip exactly; LF line endings."""
    lines = [header]
    for row in table:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> np.ndarray:
    rows = text.strip("\n").split("\n")[1:]
    return np.array([[float(v) for v in r.split(",")] for r in rows])


# --------------------------------------------------------------------------
# JSON


def _sign_from(value) -> int:
    if value in ("+", 1, "1", "+1"):
        return 1
    if value in ("-", -1, "-1"):
        return -1
    raise ParameterError(f"separable sign must be '+' or '-', got {value!r}")


def from_dict(d: dict, param: PowerLawParameter | None = None) -> SolutionDescriptor:
    """Inverse of ``to_dict``; the ``domain`` entry is recomputed, not trusted."""
    try:
        p = PowerLawParameter(d["a"]) if "a" in d else param
        if p is None:
            raise ParameterError("descriptor lacks the exponent 'a'")
        if param is not None and p != param:
            raise ParameterMismatchError("nested descriptor has a different exponent")
        variant = d["variant"]
        q = d.get("params", {})
        if variant == "Stationary":
            sol = make_stationary(p, q["C1"], q["C2"])
        elif variant == "Separable":
            sol = make_separable(p, _sign_from(q["sign"]), q["kappa"], q.get("c_reg", 1.0), q.get("c_irr", 0.0))
        elif variant == "ScaleInvariant":
            sol = make_scale_invariant(p, q["mu"], q.get("c_reg", 1.0), q.get("c_irr", 0.0))
        elif variant == "Projective":
            sol = make_projective(p, q["mu"], q.get("c_reg", 1.0), q.get("c_irr", 0.0))
        elif variant == "Polynomial":
            sol = make_polynomial(p, [tuple(term) for term in q["terms"]])
        elif variant == "Superposition":
            sol = superpose([(part["weight"], from_dict(part["solution"], p)) for part in q["parts"]])
        else:
            raise ParameterError(f"unknown solution variant {variant!r}")
        flows = tuple(FlowStep.from_dict(f, p) for f in d.get("flows", []))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed solution descriptor: {exc!r}") from exc
    return Transformed(sol, flows) if flows else sol
