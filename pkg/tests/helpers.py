"""Shared test helpers."""

import numpy as np

from powheat import make_projective, make_scale_invariant, make_separable, make_stationary
from powheat import special_functions as sf

from conftest import KAPPA_VALUES, MU_VALUES


def ode_residual(spec, x, branch="regular"):
    """ODE residual from the analytic derivative and a 5-point difference of it.

    Normalized by the largest term magnitude over the sample, since all terms
    vanish together at turning points and for polynomial solutions.
    """
    if branch == "regular":
        y, dy = sf.regular_solution, sf.regular_derivative
    else:
        y, dy = sf.second_solution, sf.irregular_derivative
    v, d = y(spec, x).value, dy(spec, x).value
    h = 2e-3 * np.minimum(x, 1.0)
    f = [dy(spec, x + j * h).value for j in (-2, -1, 1, 2)]
    d2 = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    res = spec.residual(x, v, d, d2)
    scale = np.abs(d2) + np.abs(spec.residual(x, 0 * v, d, 0 * d2)) + np.abs(spec.residual(x, v, 0 * d, 0 * d2))
    return np.abs(res) / max(float(np.max(scale)), np.finfo(float).tiny)


def family_members(p):
    """Every constructor with each basis branch, over the parameter matrix."""
    out = [make_stationary(p, 1, 0), make_stationary(p, 0, 1)]
    for mu in MU_VALUES:
        for cr, ci in ((1, 0), (0, 1)):
            out.append(make_scale_invariant(p, mu, cr, ci))
            out.append(make_projective(p, mu, cr, ci))
    for k in KAPPA_VALUES:
        for sign in "+-":
            for cr, ci in ((1, 0), (0, 1)):
                out.append(make_separable(p, sign, k, cr, ci))
    return out
