"""Closed-form statistics of the stationary field, with the series they sum.

Every function takes a :class:`~switchheat.params.Params`. Series forms accept
an explicit term count and report a tail bound so the two representations can
check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .params import Params

__all__ = [
    "Params",
    "dn_slope",
    "dn_slope_series",
    "SeriesValue",
    "dd_mean",
    "beta_marginal",
    "beta_mean",
    "beta_second_moment",
    "dd_l2_variance",
    "dd_l2_variance_series",
    "dd_joint_second_moment",
    "sandwich_bounds",
    "regularity_envelope",
    "refined_envelope",
    "insect_flux",
    "dd_eigenvalue",
    "dd_ramp_coeff",
    "gamma_coth_minus_one",
]


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    terms: int


def dd_eigenvalue(params: Params, k) -> np.ndarray | float:
    return params.D * (np.asarray(k, dtype=float) * math.pi / params.L) ** 2


def dn_eigenvalue(params: Params, k):
    return params.D * ((2 * np.asarray(k, dtype=float) - 1) * math.pi / (2 * params.L)) ** 2


def dd_ramp_coeff(params: Params, k):
    k = np.asarray(k)
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    return sign * params.b * math.sqrt(2 * params.L) / (k * math.pi)


# --- Dirichlet / Neumann ------------------------------------------------------------


def dn_slope(params: Params) -> float:
    """Slope of the (affine) stationary mean; the intercept is zero."""
    g = params.gamma
    return params.b / params.L / (1 + params.rho / g * math.tanh(g))


def insect_flux(params: Params) -> float:
    """Expected flux ``D * d(mean)/dx`` through the domain."""
    return params.D * dn_slope(params)


def _dn_sum_terms(params: Params, k: np.ndarray) -> np.ndarray:
    p = params.p
    e = params.r1 / (params.r1 + dn_eigenvalue(params, k))
    w = 8 * params.L / (math.pi**2 * (2 * k - 1) ** 2)
    return e * w / (p * e + (1 - p))


def dn_slope_series(params: Params, K_terms: int) -> SeriesValue:
    """Partial sum of the pre-summation slope formula, plus a rigorous tail bound.

    Each omitted term is at most ``8L / ((1 - p) pi^2 (2k-1)^2)``, whose sum
    past ``K`` is a trigamma value; the bound propagates it through the
    quotient.
    """
    if K_terms < 1:
        raise ValueError("K_terms must be at least 1")
    p, L, b = params.p, params.L, params.b
    k = np.arange(1, K_terms + 1, dtype=float)
    partial = float(np.sum(_dn_sum_terms(params, k)[::-1]))
    denom = L - p * partial
    value = (1 - p) * b / denom
    tail = 8 * L / ((1 - p) * math.pi**2) * float(special.polygamma(1, K_terms + 0.5)) / 4
    lower = denom - p * tail
    bound = (1 - p) * b * p * tail / (lower * denom) if lower > 0 else math.inf
    return SeriesValue(value, bound, K_terms)


# --- Dirichlet / Dirichlet ----------------------------------------------------------


def dd_mean(params: Params, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > params.L):
        raise ValueError(f"x must lie in [0, {params.L}]")
    out = (1 - params.p) * params.b / params.L * x
    return float(out) if out.ndim == 0 else out


def beta_marginal(params: Params, k: int, which: str) -> tuple[float, float, float]:
    """Shape parameters of ``Y^k / c_k`` and the scale ``c_k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    beta = float(dd_eigenvalue(params, k))
    a0, a1 = params.r1 / beta, params.r0 / beta
    if which == "Y0":
        shape = (a0 + 1, a1)
    elif which == "Y1":
        shape = (a0, a1 + 1)
    else:
        raise ValueError(f"which must be 'Y0' or 'Y1', got {which!r}")
    return shape[0], shape[1], float(dd_ramp_coeff(params, k))


def beta_mean(params: Params, k: int, which: str) -> float:
    beta = float(dd_eigenvalue(params, k))
    num = params.r1 + beta if which == "Y0" else params.r1
    return num / (params.r0 + params.r1 + beta)


def beta_second_moment(params: Params, k: int, which: str) -> float:
    a, b, _ = beta_marginal(params, k, which)
    return a * (a + 1) / ((a + b) * (a + b + 1))


def gamma_coth_minus_one(g: float) -> float:
    if g < 1e-4:
        g2 = g * g
        return g2 / 3 - g2 * g2 / 45 + 2 * g2**3 / 945
    if g > 20:
        return g - 1 + 2 * g * math.exp(-2 * g) / (1 - math.exp(-2 * g))
    # coth g = 1 + 2 / expm1(2g)
    return g * (1 + 2 / math.expm1(2 * g)) - 1


def dd_l2_variance(params: Params) -> float:
    """``E ||u_bar - E u_bar||^2`` in closed form."""
    r0, r1 = params.r0, params.r1
    return params.b**2 * params.D * r1 * r0 * gamma_coth_minus_one(params.gamma) / (params.L * (r0 + r1) ** 3)


def dd_l2_variance_series(params: Params, K_terms: int, tail: bool = True) -> SeriesValue:
    """Mode sum of ``E u_bar_k^2`` minus the squared mean.

    With ``tail=True`` the large-``k`` limit of each omitted term,
    ``r1 / (r0 + r1) * c_k^2``, is added in closed form via the trigamma
    function; the reported bound covers what is left.
    """
    if K_terms < 1:
        raise ValueError("K_terms must be at least 1")
    r0, r1, b, L = params.r0, params.r1, params.b, params.L
    k = np.arange(1, K_terms + 1, dtype=float)
    beta = dd_eigenvalue(params, k)
    ck2 = 2 * b**2 * L / (k * math.pi) ** 2
    terms = r1 * (r1 + beta) / ((r0 + r1) * (r0 + r1 + beta)) * ck2
    mean_sq = L / 3 * b**2 * (1 - params.p) ** 2
    trig = float(special.polygamma(1, K_terms + 1))
    lead = r1 / (r0 + r1) * 2 * b**2 * L / math.pi**2 * trig
    total = float(np.sum(terms[::-1]))
    if tail:
        total += lead
        # omitted minus leading part is -r1 r0 c_k^2 / ((r0+r1)(r0+r1+beta_k)); bounded via beta_k >= D pi^2 k^2 / L^2
        resid = r1 * r0 / (r0 + r1) * 2 * b**2 * L / math.pi**2 * L**2 / (params.D * math.pi**2) * float(special.zeta(4, K_terms + 1))
        return SeriesValue(total - mean_sq, resid, K_terms)
    return SeriesValue(total - mean_sq, lead, K_terms)


def dd_joint_second_moment(params: Params, n: int, m: int) -> float:
    """``E <Y0, b_n> <Y0, b_m>`` as a rational function of the rates and eigenvalues."""
    if n < 1 or m < 1:
        raise ValueError("modes must be at least 1")
    r0, r1 = params.r0, params.r1
    bn, bm = float(dd_eigenvalue(params, n)), float(dd_eigenvalue(params, m))
    s = bm + bn
    num = (s + r1) * (s * (bm + r1) * (bn + r1) + (2 * bm * bn + s * r1) * r0)
    den = s * (bm + r1 + r0) * (bn + r1 + r0) * (s + r1 + r0)
    return num / den * float(dd_ramp_coeff(params, n) * dd_ramp_coeff(params, m))


def sandwich_bounds(k: int, n: int, xk: float) -> tuple[float, float]:
    """Admissible range of ``u_n / c_n`` given ``u_k / c_k = xk`` (``k < n``)."""
    if not k < n:
        raise ValueError(f"need k < n, got k={k}, n={n}")
    if not 0.0 <= xk <= 1.0:
        raise ValueError(f"xk must lie in [0, 1], got {xk}")
    e = (n / k) ** 2
    # log1p keeps the upper bound above the lower one when xk is tiny
    return xk**e, -math.expm1(e * math.log1p(-xk)) if xk < 1 else 1.0


def _check_r(r: float) -> None:
    if not 0 < r < 0.5:
        raise ValueError(f"r must lie in (0, 1/2), got {r}")


def regularity_envelope(params: Params, k: int, r: float, M: float, which: str) -> tuple[float, float]:
    """Interval for ``Y^k / c_k``: around 1 for ``Y0``, around 0 for ``Y1``, half-width ``M / k^r``."""
    _check_r(r)
    w = M / k**r
    if which == "Y0":
        return 1 - w, 1 + w
    if which == "Y1":
        return -w, w
    raise ValueError(f"which must be 'Y0' or 'Y1', got {which!r}")


def refined_envelope(params: Params, k: int, r: float, M: float, which: str, tau: float) -> tuple[float, float]:
    """Envelope driven by the first holding time (``tau0^1`` for ``Y0``, ``tau1^1`` for ``Y1``)."""
    _check_r(r)
    e = math.exp(-float(dd_eigenvalue(params, k)) * tau)
    w = M / k**r
    if which == "Y0":
        return 1 - e * (w + 1), 1 + e * (w - 1)
    if which == "Y1":
        return e * (1 - w), e * (1 + w)
    raise ValueError(f"which must be 'Y0' or 'Y1', got {which!r}")


def fit_envelope_constant(normalized: np.ndarray, k: np.ndarray, r: float, which: str) -> np.ndarray:
    """Smallest ``M`` per sample path so every listed mode sits inside the envelope.

    ``normalized`` has shape ``(N, len(k))`` holding ``Y^k / c_k``.
    """
    _check_r(r)
    centre = 1.0 if which == "Y0" else 0.0
    return np.max(np.abs(np.asarray(normalized) - centre) * np.asarray(k, dtype=float) ** r, axis=-1)
