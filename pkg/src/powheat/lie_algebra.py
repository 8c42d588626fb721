"""The four-dimensional symmetry algebra of ``u_t = x**(2 - 1/a) * u_xx``.

The basis is

    X1 = d/dt
    X2 = t d/dt + a x d/dx
    X3 = t**2 d/dt + 2 a t x d/dx - ((1 - a) t + a**2 x**(1/a)) u d/du
    X4 = u d/du

with the non-vanishing brackets ``[X1, X2] = X1``, ``[X1, X3] = 2 X2 + (a - 1) X4``
and ``[X2, X3] = X3``.  A generator is stored as its coefficient vector
``k = (k1, k2, k3, k4)`` over this basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError, ParameterMismatchError
from .grid import ResidualReport, make_report

TRANSLATION = "Translation"
SCALING = "Scaling"
PROJECTIVE = "Projective"
VERTICAL = "Vertical"
ZERO = "Zero"

# Ad(exp(X1)) Ad(exp(X3)) Ad(exp(X1)) maps (k1, k2, k3) -> (k3, -k2, k1).
_WEYL_STEPS = ((1, 1.0), (3, 1.0), (1, 1.0))


@dataclass(frozen=True)
class PowerLawParameter:
    """Exponent ``a`` of the diffusivity ``x**(2 - 1/a)``.

    Only ``a > 0`` with ``a != 1/2`` is accepted: negative exponents map to
    positive ones by the reflection ``x -> 1/x``, and ``a = 1/2`` is the
    constant-coefficient heat equation whose symmetry algebra is larger.
    """

    a: float

    def __post_init__(self):
        a = float(self.a)
        object.__setattr__(self, "a", a)
        if not math.isfinite(a) or a <= 0:
            raise ParameterError(f"exponent parameter must be finite and positive, got a={a!r}")
        if a == 0.5:
            raise ParameterError(
                "a = 1/2 is excluded: the constant-diffusivity heat equation has a larger algebra"
            )

    @property
    def is_unit(self) -> bool:
        return self.a == 1.0

    @property
    def diffusivity_exponent(self) -> float:
        return 2.0 - 1.0 / self.a


def _as_param(param) -> PowerLawParameter:
    return param if isinstance(param, PowerLawParameter) else PowerLawParameter(param)


@dataclass(frozen=True)
class Generator:
    """``X = k1 X1 + k2 X2 + k3 X3 + k4 X4`` for a fixed exponent."""

    k: tuple[float, float, float, float]
    param: PowerLawParameter

    def __post_init__(self):
        k = tuple(float(v) for v in self.k)
        if len(k) != 4:
            raise ParameterError("a generator needs exactly four coefficients")
        if not all(math.isfinite(v) for v in k):
            raise ParameterError(f"generator coefficients must be finite, got {k}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "param", _as_param(self.param))

    @classmethod
    def basis(cls, i: int, param) -> "Generator":
        _check_index(i)
        k = [0.0] * 4
        k[i - 1] = 1.0
        return cls(tuple(k), param)

    @classmethod
    def zero(cls, param) -> "Generator":
        return cls((0.0, 0.0, 0.0, 0.0), param)

    @property
    def a(self) -> float:
        return self.param.a

    def as_array(self) -> np.ndarray:
        return np.array(self.k)

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.k))

    def is_zero(self) -> bool:
        return not any(self.k)

    def _same(self, other: "Generator"):
        if self.param != other.param:
            raise ParameterMismatchError(
                f"generators built for different exponents: a={self.a} vs a={other.a}"
            )

    def __add__(self, other: "Generator") -> "Generator":
        self._same(other)
        return Generator(tuple(p + q for p, q in zip(self.k, other.k)), self.param)

    def __sub__(self, other: "Generator") -> "Generator":
        self._same(other)
        return Generator(tuple(p - q for p, q in zip(self.k, other.k)), self.param)

    def __mul__(self, scalar: float) -> "Generator":
        return Generator(tuple(scalar * v for v in self.k), self.param)

    __rmul__ = __mul__

    def __neg__(self) -> "Generator":
        return self * -1.0

    def to_dict(self) -> dict:
        return {"a": self.a, "k": list(self.k)}

    @classmethod
    def from_dict(cls, d: dict) -> "Generator":
        return cls(tuple(d["k"]), PowerLawParameter(d["a"]))


def _check_index(i: int):
    if i not in (1, 2, 3, 4):
        raise ParameterError(f"basis index must be one of 1..4, got {i!r}")


def structure_constants(a: float) -> np.ndarray:
    """Array ``c[i, j, k]`` with ``[X_{i+1}, X_{j+1}] = sum_k c[i, j, k] X_{k+1}``."""
    c = np.zeros((4, 4, 4))
    c[0, 1, 0] = 1.0
    c[0, 2, 1] = 2.0
    c[0, 2, 3] = a - 1.0
    c[1, 2, 2] = 1.0
    return c - c.transpose(1, 0, 2)


def commutator(X: Generator, Y: Generator) -> Generator:
    """Lie bracket ``[X, Y]`` computed from the structure constants."""
    X._same(Y)
    k, l = X.k, Y.k
    b12 = k[0] * l[1] - k[1] * l[0]
    b13 = k[0] * l[2] - k[2] * l[0]
    b23 = k[1] * l[2] - k[2] * l[1]
    return Generator((b12, 2.0 * b13, b23, (X.a - 1.0) * b13), X.param)


def ad_matrix(i: int, a: float) -> np.ndarray:
    """Matrix of ``ad(X_i)``: column j holds the coefficients of ``[X_i, X_j]``."""
    _check_index(i)
    return structure_constants(a)[i - 1].T.copy()


def adjoint_coefficients(i: int, eps: float, X: Generator) -> Generator:
    """``Ad(exp(eps X_i)) X = X - eps [X_i, X] + eps**2/2 [X_i, [X_i, X]] - ...``

    The series terminates after the quadratic term for ``X1`` and ``X3``,
    sums to exponentials for ``X2`` and is the identity for the central ``X4``.
    """
    _check_index(i)
    eps = float(eps)
    if not math.isfinite(eps):
        raise ParameterError("flow parameter must be finite")
    k1, k2, k3, k4 = X.k
    am1 = X.a - 1.0
    if i == 1:
        k = (k1 - eps * k2 + eps * eps * k3, k2 - 2.0 * eps * k3, k3, k4 - eps * am1 * k3)
    elif i == 2:
        k = (k1 * math.exp(eps), k2, k3 * math.exp(-eps), k4)
    elif i == 3:
        k = (k1, k2 + 2.0 * eps * k1, k3 + eps * k2 + eps * eps * k1, k4 + eps * am1 * k1)
    else:
        k = X.k
    return Generator(k, X.param)


def adjoint_series(i: int, eps: float, X: Generator, terms: int = 20) -> Generator:
    """Reference path: sum ``exp(-eps ad(X_i))`` applied to ``X`` term by term.

    Stops early once a term vanishes relative to the running sum; the
    nilpotent cases ``X1``/``X3`` terminate after three terms.
    """
    _check_index(i)
    ad = ad_matrix(i, X.a)
    term = X.as_array()
    total = term.copy()
    for n in range(1, terms):
        term = -eps * (ad @ term) / n
        total = total + term
        if not np.any(term) or np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(total)):
            break
    return Generator(tuple(total), X.param)


@dataclass(frozen=True)
class AdjointMap:
    """Successive adjoint flows ``(i, eps)`` followed by a scalar rescale."""

    steps: tuple[tuple[int, float], ...] = ()
    rescale: float = 1.0

    def __post_init__(self):
        steps = tuple((int(i), float(e)) for i, e in self.steps)
        for i, e in steps:
            _check_index(i)
            if not math.isfinite(e):
                raise ParameterError("adjoint step parameters must be finite")
        object.__setattr__(self, "steps", steps)
        r = float(self.rescale)
        if r == 0.0 or not math.isfinite(r):
            raise ParameterError("rescale must be finite and nonzero")
        object.__setattr__(self, "rescale", r)

    @property
    def is_identity(self) -> bool:
        return not self.steps and self.rescale == 1.0

    def apply(self, X: Generator) -> Generator:
        for i, eps in self.steps:
            X = adjoint_coefficients(i, eps, X)
        return X * self.rescale

    def to_dict(self) -> dict:
        return {"steps": [{"i": i, "eps": e} for i, e in self.steps], "rescale": self.rescale}

    @classmethod
    def from_dict(cls, d: dict) -> "AdjointMap":
        return cls(tuple((s["i"], s["eps"]) for s in d["steps"]), d["rescale"])


@dataclass(frozen=True)
class AdjointInvariants:
    phi1: float
    phi2: float


def invariants(X: Generator) -> AdjointInvariants:
    """``phi1 = k2**2 - 4 k1 k3``; ``phi2 = k4`` if ``a == 1`` else ``k2 + 2 k4 / (1 - a)``."""
    k1, k2, k3, k4 = X.k
    phi1 = k2 * k2 - 4.0 * k1 * k3
    phi2 = k4 if X.param.is_unit else k2 + 2.0 * k4 / (1.0 - X.a)
    return AdjointInvariants(phi1, phi2)


def _shifted_center(k: Sequence[float], a: float) -> float:
    # k4 + (1 - a) k2 / 2: an invariant equal to (1 - a) phi2 / 2, or phi2 itself at a = 1
    return k[3] + 0.5 * (1.0 - a) * k[1]


@dataclass(frozen=True)
class OptimalClass:
    """One entry of the optimal system: ``X1 + mu X4``, ``X2 + mu X4``,
    ``X1 + X3 + mu X4``, ``X4`` or the zero generator."""

    tag: str
    mu: float | None = None

    def __post_init__(self):
        if self.tag not in (TRANSLATION, SCALING, PROJECTIVE, VERTICAL, ZERO):
            raise ParameterError(f"unknown optimal class {self.tag!r}")
        if (self.tag in (VERTICAL, ZERO)) != (self.mu is None):
            raise ParameterError(f"class {self.tag} {'takes no' if self.mu is not None else 'needs a'} mu")

    def representative(self, param) -> Generator:
        mu = self.mu
        k = {
            TRANSLATION: (1.0, 0.0, 0.0, mu),
            SCALING: (0.0, 1.0, 0.0, mu),
            PROJECTIVE: (1.0, 0.0, 1.0, mu),
            VERTICAL: (0.0, 0.0, 0.0, 1.0),
            ZERO: (0.0, 0.0, 0.0, 0.0),
        }[self.tag]
        return Generator(k, param)


def classify(X: Generator, tol: float = 1e-12) -> tuple[OptimalClass, AdjointMap]:
    """Find the optimal-system representative equivalent to ``X``.

    Returns the class and an :class:`AdjointMap` that carries ``X`` onto the
    representative.  ``phi1`` is treated as zero when ``|phi1| <= tol*|k|**2``.
    The rescale is positive whenever the orbit allows it; otherwise it is
    chosen so that the leading coefficient of the representative is +1.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    a = X.a
    k = X.k
    nrm = X.norm()
    if nrm == 0.0:
        return OptimalClass(ZERO), AdjointMap()
    if max(abs(v) for v in k[:3]) <= tol * nrm:
        return OptimalClass(VERTICAL), AdjointMap((), 1.0 / k[3])

    steps: list[tuple[int, float]] = []
    cur = X

    def step(i, eps):
        nonlocal cur
        if eps != 0.0:
            cur = adjoint_coefficients(i, eps, cur)
            steps.append((i, eps))

    def weyl():
        for i, eps in _WEYL_STEPS:
            step(i, eps)

    phi1 = invariants(X).phi1
    center = _shifted_center(k, a)

    if phi1 > tol * nrm * nrm:
        root = math.sqrt(phi1)
        if k[1] < 0:
            weyl()
        k1, k2, _, _ = cur.k
        # stable root of k3 e**2 - k2 e + k1 = 0 leaving k2 -> +sqrt(phi1)
        step(1, 2.0 * k1 / (k2 + root))
        step(3, -cur.k[2] / cur.k[1])
        mu = center / root - 0.5 * (1.0 - a)
        return OptimalClass(SCALING, mu), AdjointMap(tuple(steps), 1.0 / cur.k[1])

    if phi1 < -tol * nrm * nrm:
        root = math.sqrt(-phi1)
        if abs(k[2]) < abs(k[0]):
            weyl()
        k1, k2, k3, _ = cur.k
        step(1, k2 / (2.0 * k3))
        step(2, 0.5 * math.log(cur.k[2] / cur.k[0]))
        sign = 1.0 if k[0] > 0 else -1.0
        mu = sign * 2.0 * center / root
        return OptimalClass(PROJECTIVE, mu), AdjointMap(tuple(steps), 1.0 / cur.k[0])

    if abs(k[2]) > abs(k[0]):
        weyl()
    k1, k2, _, _ = cur.k
    # double root: zeroes k2 and k3 together
    step(3, -k2 / (2.0 * k1))
    mu = center / cur.k[0]
    return OptimalClass(TRANSLATION, mu), AdjointMap(tuple(steps), 1.0 / cur.k[0])


@dataclass(frozen=True)
class InfinitesimalCoefficients:
    """Closed-form ``tau(t)``, ``xi(t, x)`` and ``V(t, x)`` (with ``eta = V u``) of a generator."""

    generator: Generator

    @property
    def _k(self):
        return self.generator.k

    @property
    def _a(self):
        return self.generator.a

    def tau(self, t):
        k1, k2, k3, _ = self._k
        return k1 + k2 * t + k3 * t * t

    def tau_t(self, t):
        _, k2, k3, _ = self._k
        return k2 + 2.0 * k3 * t

    def xi(self, t, x):
        _, k2, k3, _ = self._k
        return self._a * (k2 + 2.0 * k3 * t) * x

    def xi_t(self, t, x):
        return 2.0 * self._a * self._k[2] * x

    def xi_x(self, t, x):
        _, k2, k3, _ = self._k
        return self._a * (k2 + 2.0 * k3 * t) + 0.0 * x

    def xi_xx(self, t, x):
        return 0.0 * x + 0.0 * t

    def V(self, t, x):
        _, _, k3, k4 = self._k
        a = self._a
        return k4 - k3 * ((1.0 - a) * t + a * a * x ** (1.0 / a))

    def V_t(self, t, x):
        return -self._k[2] * (1.0 - self._a) + 0.0 * x + 0.0 * t

    def V_x(self, t, x):
        a = self._a
        return -self._k[2] * a * x ** (1.0 / a - 1.0) + 0.0 * t

    def V_xx(self, t, x):
        a = self._a
        return -self._k[2] * (1.0 - a) * x ** (1.0 / a - 2.0) + 0.0 * t


def check_determining_equations(
    X: Generator, sample_points: Iterable[tuple[float, float]], tol: float = 1e-10
) -> ResidualReport:
    """Evaluate the determining equations at ``(t, x)`` samples.

    Checked with ``eta = V u``:

    * ``V_t - x**(2-1/a) V_xx = 0``
    * ``xi_t - x**(2-1/a) xi_xx + 2 x**(2-1/a) V_x = 0``
    * ``2 x xi_x - (2 - 1/a) xi - x tau_t = 0``

    ``rel_norm`` divides by the largest individual term magnitude.
    """
    pts = np.asarray(list(sample_points), dtype=float).reshape(-1, 2)
    t, x = pts[:, 0], pts[:, 1]
    if np.any(~(x > 0)):
        raise ParameterError("determining equations are sampled on x > 0 only")
    inf = InfinitesimalCoefficients(X)
    p = X.param.diffusivity_exponent
    D = x**p
    terms = [
        (inf.V_t(t, x), -D * inf.V_xx(t, x)),
        (inf.xi_t(t, x), -D * inf.xi_xx(t, x), 2.0 * D * inf.V_x(t, x)),
        (2.0 * x * inf.xi_x(t, x), -p * inf.xi(t, x), -x * inf.tau_t(t)),
    ]
    res = np.concatenate([sum(group) for group in terms])
    scale = max(float(np.max(np.abs(term))) for group in terms for term in group)
    return make_report(res, scale, tol)
