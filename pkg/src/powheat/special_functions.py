"""Special functions for the reduced ODEs.

* Bessel ``J, Y`` and modified Bessel ``I, K`` of real order (separable solutions),
* Kummer's ``M(alpha, beta, x)`` and an irregular companion (scale-invariant solutions),
* Coulomb-wave type solutions of ``y'' + (1 - 2 eta/rho - l (l+1)/rho**2) y = 0``
  (projective solutions).

Regular solutions at the singular point 0 carry unit leading coefficient,
``y ~ rho**(l+1)`` for Coulomb and ``M(alpha, beta, 0) = 1`` for Kummer.
Irregular companions are normalized through the Wronskian,
``w(x) * (y_reg' y_irr - y_reg y_irr') = 1`` with the Abel weight ``w`` of the
equation (``x**beta e**-x`` for Kummer, ``1`` for Coulomb).  When the
exponent difference at 0 is an integer they carry a logarithmic term.

All routines accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import ParameterError, RangeError

EPS = np.finfo(float).eps
XI_MIN = 1e-8
RHO_SWITCH = 8.0

BESSEL_ORDINARY = "BesselOrdinary"
BESSEL_MODIFIED = "BesselModified"
KUMMER = "Kummer"
COULOMB = "Coulomb"


@dataclass(frozen=True)
class SpecialValue:
    """A function value with an absolute error estimate (scalars or arrays)."""

    value: float | np.ndarray
    abs_error: float | np.ndarray

    def __iter__(self):
        return iter((self.value, self.abs_error))


def _pack(value, err, scalar):
    if scalar:
        return SpecialValue(float(value[0]), float(err[0]))
    return SpecialValue(value, err)


def _positive(x, name="x"):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(arr > 0):
        raise ParameterError(f"{name} must be > 0")
    return arr, np.ndim(x) == 0


def log_gamma(x) -> SpecialValue:
    """``ln Gamma(x)`` for ``x > 0``."""
    arr, scalar = _positive(x)
    val = np.array([math.lgamma(v) for v in arr])
    err = 4 * EPS * np.maximum(np.abs(val), 1.0)
    return _pack(val, err, scalar)


_BESSEL = {
    "J": (sp.jv, sp.jvp),
    "Y": (sp.yv, sp.yvp),
    "I": (sp.iv, sp.ivp),
    "K": (sp.kv, sp.kvp),
}


def _check_bessel(kind, nu):
    if kind not in _BESSEL:
        raise ParameterError(f"Bessel kind must be one of J, Y, I, K; got {kind!r}")
    if not (math.isfinite(nu) and nu >= 0):
        raise ParameterError("Bessel order must be finite and >= 0")


def _bessel_error(kind, nu, x, val):
    # J/Y are accurate relative to the envelope sqrt(J**2 + Y**2), not near their zeros
    if kind in "JY":
        env = np.hypot(sp.jv(nu, x), sp.yv(nu, x))
        return (1e-13 if kind == "J" else 2e-14) * env + 2 * EPS * np.abs(val)
    return (4e-15 if kind == "I" else 1e-13) * np.abs(val)


def bessel(kind: str, nu: float, x) -> SpecialValue:
    """``J_nu``, ``Y_nu``, ``I_nu`` or ``K_nu`` at ``x > 0``."""
    _check_bessel(kind, nu)
    arr, scalar = _positive(x)
    val = _BESSEL[kind][0](nu, arr)
    if not np.all(np.isfinite(val)):
        raise RangeError(f"Bessel {kind}_{nu} overflows at x={arr[~np.isfinite(val)][0]}")
    return _pack(val, _bessel_error(kind, nu, arr, val), scalar)


def bessel_derivative(kind: str, nu: float, x) -> SpecialValue:
    """Derivative with respect to ``x`` of :func:`bessel`."""
    _check_bessel(kind, nu)
    arr, scalar = _positive(x)
    val = _BESSEL[kind][1](nu, arr)
    if not np.all(np.isfinite(val)):
        raise RangeError(f"Bessel {kind}'_{nu} overflows")
    # derivative error follows the neighbouring orders
    ref = np.abs(_BESSEL[kind][0](nu + 1, arr)) + np.abs(_BESSEL[kind][0](abs(nu - 1), arr))
    if kind in "JY":
        ref = ref + np.hypot(sp.jv(nu + 1, arr), sp.yv(nu + 1, arr))
    return _pack(val, 3e-14 * ref + 2 * EPS * np.abs(val), scalar)


# --------------------------------------------------------------------------
# Frobenius series at the regular singular point 0 of
#     x**2 y'' + x P(x) y' + Q(x) y = 0,   P, Q polynomials.


class FrobeniusBasis:
    """Regular and irregular Frobenius solutions with exponents ``r1 = r2 + n``.

    The regular solution is ``x**r1 * sum c_k x**k`` with ``c_0 = 1``.  The
    irregular one is ``x**r2 * sum d_k x**k / n`` plus, for integer ``n``,
    ``C * y_reg * ln(x) / n``; ``d_n`` is fixed to zero in that case.
    Coefficients are generated lazily and shared between threads.
    """

    def __init__(self, P, Q, r1, r2, n, integer_gap, size_hint=0.0):
        self.P = tuple(float(v) for v in P)
        self.Q = tuple(float(v) for v in Q)
        self.r1, self.r2, self.n = float(r1), float(r2), float(n)
        self.integer_gap = bool(integer_gap)
        self.size_hint = float(size_hint)
        self._c: list[float] = [1.0]
        self._d: list[float] = [1.0]
        self.log_coef = 0.0
        self._lock = threading.Lock()

    def _pj(self, j):
        return self.P[j] if j < len(self.P) else 0.0

    def _qj(self, j):
        return self.Q[j] if j < len(self.Q) else 0.0

    def _deg(self):
        return max(len(self.P), len(self.Q)) - 1

    def _coupling(self, coeffs, r, k):
        # sum over j >= 1 of ((r + k - j) p_j + q_j) coeffs[k - j]
        s = 0.0
        for j in range(1, min(k, self._deg()) + 1):
            s += ((r + k - j) * self._pj(j) + self._qj(j)) * coeffs[k - j]
        return s

    def _g(self, m):
        # coefficient of x**(m + r1) in 2 x y1' + (P - 1) y1
        c = self._c
        g = (2.0 * (m + self.r1) + self._pj(0) - 1.0) * c[m]
        for j in range(1, min(m, self._deg()) + 1):
            g += self._pj(j) * c[m - j]
        return g

    def _extend(self, count):
        with self._lock:
            c, d, n = self._c, self._d, self.n
            while len(c) < count:
                k = len(c)
                s = self._coupling(c, self.r1, k)
                c.append(-s / (k * (k + n)))
            ni = int(round(n)) if self.integer_gap else -1
            while len(d) < count:
                k = len(d)
                s = self._coupling(d, self.r2, k)
                if k == ni:
                    self.log_coef = -s / self._g(0)
                    d.append(0.0)
                    continue
                if self.integer_gap and k > ni:
                    s += self.log_coef * self._g(k - ni)
                d.append(-s / (k * (k - n)))
            return np.array(c[:count]), np.array(d[:count])

    def _terms_needed(self, xmax):
        xmax = max(xmax, 1.0)
        kmin = int(2.0 * xmax + 2.0 * self.size_hint + self.n + 10)
        count = max(32, kmin + 8)
        while True:
            c, d = self._extend(count)
            ok = True
            for arr in (c, d):
                # log-magnitudes of the terms; large xmax would overflow otherwise
                with np.errstate(divide="ignore"):
                    logmag = np.log(np.abs(arr)) + np.arange(count) * math.log(xmax)
                if np.any(logmag[-4:] > np.max(logmag) + math.log(1e-18)):
                    ok = False
            if ok or count >= 4000:
                return count
            count *= 2

    @staticmethod
    def _horner(coeffs, x, r):
        # S = sum c_k x**k, T = sum (k + r) c_k x**k, A = sum |c_k| x**k;
        # then y = x**r S and y' = x**(r-1) T
        S = np.zeros_like(x)
        T = np.zeros_like(x)
        A = np.zeros_like(x)
        ks = np.arange(len(coeffs)) + r
        for ck, kr in zip(coeffs[::-1], ks[::-1]):
            S = S * x + ck
            T = T * x + kr * ck
            A = A * x + abs(ck)
        return S, T, A

    def evaluate(self, x, branch):
        """Value, derivative and error estimate of ``branch`` ('regular'/'irregular').

        The series length depends only on the power of two bounding each
        point, so a value never depends on which other points share the call.
        """
        x = np.asarray(x, dtype=float)
        bucket = np.ceil(np.log2(np.maximum(x, 1.0)))
        keys = np.unique(bucket)
        if keys.size == 1:
            return self._evaluate_fixed(x, branch, self._terms_needed(2.0 ** keys[0]))
        y, dy, err = np.empty_like(x), np.empty_like(x), np.empty_like(x)
        for key in keys:
            m = bucket == key
            y[m], dy[m], err[m] = self._evaluate_fixed(x[m], branch, self._terms_needed(2.0**key))
        return y, dy, err

    def _evaluate_fixed(self, x, branch, count):
        c, d = self._extend(count)
        S, T, A = self._horner(c, x, self.r1)
        xr = x**self.r1
        y1 = xr * S
        # kummer_m may pass x = 0, where only the value is used
        with np.errstate(divide="ignore", invalid="ignore"):
            dy1 = xr / x * T
        e1 = (3.0 + math.sqrt(count)) * EPS * xr * A
        if branch == "regular":
            return y1, dy1, e1 + EPS * np.abs(y1)
        S2, T2, A2 = self._horner(d, x, self.r2)
        xr2 = x**self.r2
        y2 = xr2 * S2
        dy2 = xr2 / x * T2
        e2 = (3.0 + math.sqrt(count)) * EPS * xr2 * A2
        C = self.log_coef if self.integer_gap else 0.0
        if C:
            lx = np.log(x)
            y2 = y2 + C * y1 * lx
            dy2 = dy2 + C * (dy1 * lx + y1 / x)
            e2 = e2 + abs(C) * (e1 * np.abs(lx) + EPS * np.abs(y1 * lx))
        inv = 1.0 / self.n
        return y2 * inv, dy2 * inv, (e2 + EPS * np.abs(y2)) * abs(inv)


def _is_integer(v):
    return float(v).is_integer()


@lru_cache(maxsize=128)
def _kummer_basis(alpha, beta):
    # x**2 y'' + x (beta - x) y' - alpha x y = 0; exponents 0 and 1 - beta
    gap = beta - 1.0
    return FrobeniusBasis(
        (beta, -1.0), (0.0, -alpha), 0.0, 1.0 - beta, gap, _is_integer(gap), abs(alpha) + abs(beta)
    )


@lru_cache(maxsize=128)
def _coulomb_basis(l, eta, a):
    # x**2 y'' + (x**2 - 2 eta x - l (l+1)) y = 0; exponents l + 1 and -l, gap 2 l + 1 = a
    return FrobeniusBasis(
        (0.0,), (-l * (l + 1.0), -2.0 * eta, 1.0), l + 1.0, -l, a, _is_integer(a), abs(eta) + abs(l)
    )


def kummer_m(alpha: float, beta: float, x) -> SpecialValue:
    """Kummer's confluent hypergeometric function ``M(alpha, beta, x)``.

    Negative arguments use ``M(alpha, beta, x) = e**x M(beta - alpha, beta, -x)``
    unless ``alpha`` is a non-positive integer, where the series is a
    polynomial with terms of one sign.
    """
    if beta <= 0 and _is_integer(beta):
        raise ParameterError("beta must not be a non-positive integer")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    scalar = np.ndim(x) == 0
    val = np.empty_like(arr)
    err = np.empty_like(arr)
    pos = arr >= 0
    if alpha <= 0 and _is_integer(alpha):
        pos[:] = True
    for mask, alp, sgn in ((pos, alpha, 1.0), (~pos, beta - alpha, -1.0)):
        if not mask.any():
            continue
        xs = sgn * arr[mask]
        y, _, e = _kummer_series(alp, beta, xs)
        if sgn < 0:
            w = np.exp(arr[mask])
            y, e = y * w, e * w + EPS * np.abs(y * w)
        val[mask], err[mask] = y, e
    return _pack(val, err, scalar)


def _kummer_series(alpha, beta, x):
    return _kummer_regular(float(alpha), float(beta)).evaluate(x, "regular")


class _KummerOnly(FrobeniusBasis):
    """Regular Kummer series for ``beta <= 1`` (no companion needed)."""

    def __init__(self, alpha, beta):
        super().__init__((beta, -1.0), (0.0, -alpha), 0.0, 0.0, beta - 1.0, False,
                         abs(alpha) + abs(beta))

    def _extend(self, count):
        with self._lock:
            c = self._c
            while len(c) < count:
                k = len(c)
                s = self._coupling(c, 0.0, k)
                c.append(-s / (k * (k + self.n)))
            return np.array(c[:count]), np.array(c[:count])


@lru_cache(maxsize=128)
def _kummer_regular(alpha, beta):
    # plain power series; any beta that is not a non-positive integer
    return _kummer_basis(alpha, beta) if beta > 1 else _KummerOnly(alpha, beta)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OdeBasisSpec:
    """Identifies a reduced ODE and its pair of basis solutions.

    ``params`` is ``(nu,)`` for the Bessel families, ``(alpha, beta)`` for
    Kummer and ``(l, eta)`` for Coulomb.
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        nparams = {BESSEL_ORDINARY: 1, BESSEL_MODIFIED: 1, KUMMER: 2, COULOMB: 2}
        if self.family not in nparams:
            raise ParameterError(f"unknown ODE family {self.family!r}")
        if len(self.params) != nparams[self.family]:
            raise ParameterError(f"{self.family} takes {nparams[self.family]} parameters")
        if not all(math.isfinite(p) for p in self.params):
            raise ParameterError("ODE parameters must be finite")
        if self.family in (BESSEL_ORDINARY, BESSEL_MODIFIED) and self.params[0] < 0:
            raise ParameterError("Bessel order must be >= 0")
        if self.family == KUMMER and not self.params[1] > 1:
            raise ParameterError("Kummer basis pair requires beta > 1")
        if self.family == COULOMB and not 2 * self.params[0] + 1 > 0:
            raise ParameterError("Coulomb basis pair requires 2 l + 1 > 0")

    @classmethod
    def bessel(cls, nu: float, modified: bool) -> "OdeBasisSpec":
        return cls(BESSEL_MODIFIED if modified else BESSEL_ORDINARY, (nu,))

    @classmethod
    def kummer(cls, alpha: float, beta: float) -> "OdeBasisSpec":
        return cls(KUMMER, (alpha, beta))

    @classmethod
    def coulomb(cls, l: float, eta: float) -> "OdeBasisSpec":
        return cls(COULOMB, (l, eta))

    @classmethod
    def for_scale_invariant(cls, a: float, mu: float) -> "OdeBasisSpec":
        """``xi y'' + (1 + a - xi) y' - (1 + mu) y = 0``."""
        return cls.kummer(1.0 + mu, 1.0 + a)

    @classmethod
    def for_projective(cls, a: float, mu: float) -> "OdeBasisSpec":
        """``y'' + (1 - mu/xi - l(l+1)/xi**2) y = 0`` with ``l = (a-1)/2``, i.e. ``eta = mu/2``."""
        return cls.coulomb(0.5 * a - 0.5, 0.5 * mu)

    @property
    def gap(self) -> float:
        """Difference of the exponents at 0 (``2 nu`` for Bessel)."""
        if self.family == KUMMER:
            return self.params[1] - 1.0
        if self.family == COULOMB:
            return 2.0 * self.params[0] + 1.0
        return 2.0 * self.params[0]

    def weight(self, x):
        """Abel weight turning the Wronskian into a constant."""
        x = np.asarray(x, dtype=float)
        if self.family == KUMMER:
            return x ** self.params[1] * np.exp(-x)
        if self.family == COULOMB:
            return np.ones_like(x)
        return x

    def residual(self, x, y, dy, d2y):
        """Left-hand side of the ODE in a normalized form (leading coefficient 1)."""
        x = np.asarray(x, dtype=float)
        if self.family == KUMMER:
            alpha, beta = self.params
            return d2y + (beta - x) / x * dy - alpha / x * y
        if self.family == COULOMB:
            l, eta = self.params
            return d2y + (1.0 - 2.0 * eta / x - l * (l + 1.0) / x**2) * y
        nu = self.params[0]
        s = 1.0 if self.family == BESSEL_ORDINARY else -1.0
        return d2y + dy / x + (s - nu**2 / x**2) * y

    def _basis(self):
        if self.family == KUMMER:
            return _kummer_basis(*self.params)
        l, eta = self.params
        return _coulomb_basis(l, eta, 2.0 * l + 1.0)


def _coulomb_taylor(l, eta, center, y0, dy0, s, nterms=40):
    # Taylor expansion about `center` of rho**2 y'' + (rho**2 - 2 eta rho - l(l+1)) y = 0
    L = l * (l + 1.0)
    A0 = center * center - 2.0 * eta * center - L
    A1 = 2.0 * center - 2.0 * eta
    b = [y0, dy0]
    for m in range(nterms - 2):
        acc = 2.0 * center * (m + 1) * m * b[m + 1] + (m * (m - 1) + A0) * b[m]
        if m >= 1:
            acc += A1 * b[m - 1]
        if m >= 2:
            acc += b[m - 2]
        b.append(-acc / (center * center * (m + 2) * (m + 1)))
    b = np.array(b)
    S = np.zeros_like(s)
    T = np.zeros_like(s)
    for n in range(nterms - 1, -1, -1):
        S = S * s + b[n]
        if n >= 1:
            T = T * s + n * b[n]
    return S, T


@lru_cache(maxsize=256)
def _coulomb_nodes(l, eta, branch, start, last):
    """Values and derivatives at the unit-spaced nodes ``start, start + 1, ..., last``."""
    basis = _coulomb_basis(l, eta, 2.0 * l + 1.0)
    y0, dy0, e0 = basis.evaluate(np.array([start]), branch)
    nodes = [(float(y0[0]), float(dy0[0]))]
    for k in range(int(last - start)):
        y, dy = _coulomb_taylor(l, eta, start + k, *nodes[-1], np.array([1.0]))
        nodes.append((float(y[0]), float(dy[0])))
    return tuple(nodes), float(e0[0]) / max(abs(y0[0]) + abs(dy0[0]), 1e-300)


def _coulomb_continued(spec: OdeBasisSpec, rho, branch, start=RHO_SWITCH):
    """Continue the series solution beyond ``start`` by Taylor steps of unit length.

    Each point is expanded about the nearest node, so the result is a smooth
    (polynomial) function of ``rho`` between nodes.
    """
    l, eta = spec.params
    idx = np.maximum(np.rint(rho - start), 0).astype(int)
    nodes, rel0 = _coulomb_nodes(l, eta, branch, float(start), float(start + idx.max()))
    y = np.empty_like(rho)
    dy = np.empty_like(rho)
    for k in np.unique(idx):
        m = idx == k
        y[m], dy[m] = _coulomb_taylor(l, eta, start + k, *nodes[k], rho[m] - (start + k))
    amp = np.hypot(y, dy)
    err = (rel0 + 1e-15 * (1.0 + idx)) * amp + EPS * np.abs(y)
    return y, dy, err


def _frobenius_eval(spec: OdeBasisSpec, x, branch):
    x = np.asarray(x, dtype=float)
    basis = spec._basis()
    if spec.family != COULOMB or np.all(x <= RHO_SWITCH):
        return basis.evaluate(x, branch)
    y = np.empty_like(x)
    dy = np.empty_like(x)
    err = np.empty_like(x)
    near = x <= RHO_SWITCH
    if near.any():
        y[near], dy[near], err[near] = basis.evaluate(x[near], branch)
    y[~near], dy[~near], err[~near] = _coulomb_continued(spec, x[~near], branch)
    return y, dy, err


def _evaluate(spec: OdeBasisSpec, x, branch):
    arr, scalar = _positive(x)
    if branch == "irregular" and np.any(arr < XI_MIN):
        raise RangeError(f"irregular solution requested below xi_min={XI_MIN:g}")
    if spec.family in (BESSEL_ORDINARY, BESSEL_MODIFIED):
        nu = spec.params[0]
        kind = {
            (BESSEL_ORDINARY, "regular"): "J",
            (BESSEL_ORDINARY, "irregular"): "Y",
            (BESSEL_MODIFIED, "regular"): "I",
            (BESSEL_MODIFIED, "irregular"): "K",
        }[(spec.family, branch)]
        v = bessel(kind, nu, arr)
        dv = bessel_derivative(kind, nu, arr)
        return v.value, dv.value, v.abs_error, dv.abs_error, scalar
    y, dy, err = _frobenius_eval(spec, arr, branch)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(dy))):
        raise RangeError(f"{spec.family} {branch} solution overflows")
    # derivative error: same relative size as the value error
    derr = err * np.abs(dy) / np.maximum(np.abs(y), 1e-300) + EPS * np.abs(dy)
    return y, dy, err, np.minimum(derr, err * 1e8 + EPS * np.abs(dy)), scalar


def regular_solution(spec: OdeBasisSpec, x) -> SpecialValue:
    """Regular member of the basis pair (``J``/``I``, ``M``, Coulomb ``~rho**(l+1)``)."""
    y, _, e, _, scalar = _evaluate(spec, x, "regular")
    return _pack(np.atleast_1d(y), np.atleast_1d(e), scalar)


def regular_derivative(spec: OdeBasisSpec, x) -> SpecialValue:
    _, dy, _, de, scalar = _evaluate(spec, x, "regular")
    return _pack(np.atleast_1d(dy), np.atleast_1d(de), scalar)


def second_solution(spec: OdeBasisSpec, x) -> SpecialValue:
    """Irregular member of the basis pair.

    ``Y``/``K`` for the Bessel families.  For Kummer and Coulomb the
    Frobenius companion normalized to unit weighted Wronskian; raises
    :class:`RangeError` below ``XI_MIN``.
    """
    y, _, e, _, scalar = _evaluate(spec, x, "irregular")
    return _pack(np.atleast_1d(y), np.atleast_1d(e), scalar)


def irregular_derivative(spec: OdeBasisSpec, x) -> SpecialValue:
    """Derivative of :func:`second_solution`."""
    _, dy, _, de, scalar = _evaluate(spec, x, "irregular")
    return _pack(np.atleast_1d(dy), np.atleast_1d(de), scalar)


def wronskian(spec: OdeBasisSpec, x) -> np.ndarray:
    """Weighted Wronskian ``w(x) (y_reg' y_irr - y_reg y_irr')`` of the pair."""
    y1, d1, *_ = _evaluate(spec, x, "regular")
    y2, d2, *_ = _evaluate(spec, x, "irregular")
    return spec.weight(x) * (d1 * y2 - y1 * d2)


def coulomb_regular(l: float, eta: float, rho) -> SpecialValue:
    """Regular Coulomb-type solution with leading behaviour ``rho**(l+1)``.

    Power series up to ``RHO_SWITCH``, Taylor continuation beyond.
    """
    return regular_solution(OdeBasisSpec.coulomb(l, eta), rho)


def coulomb_irregular(l: float, eta: float, rho) -> SpecialValue:
    return second_solution(OdeBasisSpec.coulomb(l, eta), rho)
