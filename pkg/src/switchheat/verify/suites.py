"""Monte Carlo checks of the closed forms and distributional statements.

All estimators draw sample ``i`` from streams keyed by ``(seed, i)`` and reduce
fixed-size chunks in index order, so results do not depend on ``threads``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import closed_forms as cf
from ..engine import (
    FlowPair,
    invariance_pairs,
    process_batch,
    pullback_batch,
    pullback_sample,
    stationary_batch,
)
from ..params import Params
from ..spectral import (
    Basis,
    SpectralField,
    evaluate,
    interior_grid,
    make_flow_pair,
    truncation_eps,
)
from ..switching import (
    EnvironmentBatch,
    NumericalError,
    SwitchingLaws,
    environment_stream_id,
    locate_batch,
    occupancy_p,
    sample_environment,
    stationary_age_cdf,
)
from ..rng import derive_stream
from .oracles import fd_oracle, ode_oracle_orbit
from .stats import KSReport, Moments, StatReport, betainc, ks_one_sample, ks_two_sample

CHUNK = 10_000


class DataError(ValueError):
    """Samples fall outside the range the theory allows; points at a flow bug."""


def _chunks(n: int, chunk: int = CHUNK):
    return [(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def _map_chunks(fn, n: int, threads: int = 1, chunk: int = CHUNK) -> list:
    spans = _chunks(n, chunk)
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda s: fn(*s), spans))
    return [fn(*s) for s in spans]


def _reduce(parts) -> Moments:
    acc = Moments()
    for part in parts:
        acc = acc.merge(Moments.of(part))
    return acc


def stationary_values(pair: FlowPair, laws: SwitchingLaws, seed: int, n: int, fn, tol=1e-10, threads=1):
    """Moments of ``fn(field_batch)`` over ``n`` stationary draws."""

    def run(i0, i1):
        st = stationary_batch(pair, laws, seed, np.arange(i0, i1), tol=tol)
        return fn(st.values)

    return _reduce(_map_chunks(run, n, threads))


# --- mean field ----------------------------------------------------------------------


@dataclass
class MeanFieldResult:
    x: np.ndarray
    points: list[StatReport]
    slope: StatReport | None = None

    @property
    def all_within_3sigma(self) -> bool:
        return all(abs(r.z) <= 3 for r in self.points)

    @property
    def frac_within_2sigma(self) -> float:
        return float(np.mean([abs(r.z) <= 2 for r in self.points]))

    @property
    def passed(self) -> bool:
        ok = self.all_within_3sigma and self.frac_within_2sigma >= 0.95
        return ok if self.slope is None else ok and self.slope.passed


def estimate_mean_field(
    example: str,
    params: Params,
    n_samples: int,
    grid: int = 256,
    K: int = 64,
    seed: int = 0,
    tol: float = 1e-10,
    threads: int = 1,
    slope_rel_tol: float = 0.01,
) -> MeanFieldResult:
    """Stationary mean on the interior grid against the affine closed-form mean.

    For the DN example the least-squares slope through the origin is also
    compared with the closed-form slope, to ``slope_rel_tol`` relative.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    example = example.upper()
    pair = make_flow_pair(example, params, K)
    x = interior_grid(params.L, grid)
    slope_target = cf.dn_slope(params) if example == "DN" else (1 - params.p) * params.b / params.L

    def fn(fields):
        v = evaluate(fields, x)
        return np.column_stack([v, v @ x / (x @ x)])

    mom = stationary_values(pair, params.laws(), seed, n_samples, fn, tol, threads)
    mean, se = np.asarray(mom.mean), np.asarray(mom.stderr)
    target = slope_target * x
    points = [
        StatReport.from_estimate(mean[j], se[j], n_samples, target[j], suite="mean", test=f"x={x[j]:.6g}")
        for j in range(len(x))
    ]
    slope = None
    if example == "DN":
        est = float(mean[-1])
        rel = abs(est - slope_target) / slope_target
        slope = StatReport(est, float(se[-1]), n_samples, slope_target, (est - slope_target) / se[-1], rel <= slope_rel_tol,
                           suite="slope", test="dn-slope", extra={"relative_error": rel, "rel_tol": slope_rel_tol})
    return MeanFieldResult(x, points, slope)


# --- variance and joint moments ------------------------------------------------------


def estimate_l2_variance(params: Params, n_samples: int, K: int = 64, seed: int = 0, tol: float = 1e-10, threads: int = 1) -> StatReport:
    """Mean of ``||u_bar - E u_bar||^2`` with the exact mean field (norm via Parseval plus the linear term)."""
    pair = make_flow_pair("DD", params, K)
    basis = Basis("DD", params.L, params.D, K)
    centre = SpectralField(basis, np.zeros(K), (1 - params.p) * params.b)

    def fn(fields):
        return (fields - centre).norm() ** 2

    mom = stationary_values(pair, params.laws(), seed, n_samples, fn, tol, threads)
    return StatReport.from_estimate(float(mom.mean), float(mom.stderr), n_samples, cf.dd_l2_variance(params),
                                    suite="variance", test="dd-l2-variance")


def pullback_values(params: Params, target: str, n: int, seed: int, K: int = 64, example: str = "DD", tol: float = 1e-10, domain: int = 0):
    """Pullback draws of ``Y0`` or ``Y1`` plus their first holding-time pairs."""
    pair = make_flow_pair(example, params, K)
    ids = environment_stream_id(np.arange(n, dtype=np.uint64))
    if domain:
        ids = derive_stream(ids, domain)
    batch = EnvironmentBatch(params.laws(), seed, ids)
    pb = pullback_batch(pair, batch, pair.origin, tol, target=target)
    t0, t1 = batch.taus(1)
    return pb.values, t0[:, 0], t1[:, 0]


def estimate_joint_moment(params: Params, n: int, m: int, n_samples: int, K: int = 64, seed: int = 0) -> StatReport:
    values, _, _ = pullback_values(params, "Y0", n_samples, seed, K)
    prod = values.coeffs[:, n - 1] * values.coeffs[:, m - 1]
    mom = Moments.of(prod)
    return StatReport.from_estimate(float(mom.mean), float(mom.stderr), n_samples, cf.dd_joint_second_moment(params, n, m),
                                    suite="joint", test=f"E[Y0_{n} Y0_{m}]")


# --- marginals and invariance --------------------------------------------------------


def normalized_coefficients(values: SpectralField, params: Params, k: int, which: str, check: float = 1e-9) -> np.ndarray:
    """``Y^k / c_k`` for ``Y1``; ``1 - Y^k / c_k`` for ``Y0`` (computed from the remainder, no cancellation)."""
    ck = float(cf.dd_ramp_coeff(params, k))
    if which == "Y0":
        # Y0 ends on the ramp flow, so edge == b and coeff_k = c_k + remainder_k
        if not np.allclose(values.edge, params.b, rtol=0, atol=1e-12 * max(1.0, params.b)):
            raise DataError("Y0 samples should carry the boundary value exactly")
        out = -values.remainder[:, k - 1] / ck
    else:
        out = values.coeffs[:, k - 1] / ck
    if np.any(out < -check) or np.any(out > 1 + check):
        raise DataError(f"normalized mode {k} samples leave [0, 1] by more than {check}")
    return np.clip(out, 0.0, 1.0)


def ks_beta_marginal(
    params: Params,
    k: int,
    which: str,
    n_samples: int,
    alpha: float = 0.01,
    K: int = 64,
    seed: int = 0,
    shapes: tuple[float, float] | None = None,
) -> KSReport:
    """One-sample KS of the mode-``k`` marginal of ``Y0`` or ``Y1`` against its Beta law.

    ``shapes`` overrides the target (used for the negative control).
    """
    if alpha not in (0.01, 0.05):
        raise ValueError("alpha must be 0.01 or 0.05")
    if k > K:
        raise ValueError("k must not exceed the truncation K")
    values, _, _ = pullback_values(params, which, n_samples, seed, K)
    a, b, _ = cf.beta_marginal(params, k, which)
    if shapes is not None:
        a, b = shapes
    x = normalized_coefficients(values, params, k, which)
    if which == "Y0":
        # x holds 1 - Y/c, which is Beta(b, a)
        a, b = b, a
    return ks_one_sample(x, lambda v: betainc(a, b, v), alpha, suite="marginals",
                         test=f"{which} k={k}", extra={"shapes": [a, b]})


def invariance_two_sample(
    params: Params,
    k: int,
    n_samples: int,
    alpha: float = 0.01,
    example: str = "DD",
    K: int = 64,
    seed: int = 0,
    shift: float = 0.0,
    functional: str = "coeff",
) -> KSReport:
    """Two-sample KS between ``Y0`` and ``Phi0_tau0(Y1)`` on a scalar functional.

    ``functional='coeff'`` uses mode ``k``; ``'midpoint'`` uses the value at ``L/2``.
    """
    pair = make_flow_pair(example, params, K)
    direct, pushed = invariance_pairs(pair, params.laws(), seed, n_samples, "Y0")
    if functional == "coeff":
        a, b = direct.coeffs[:, k - 1], pushed.coeffs[:, k - 1]
    elif functional == "midpoint":
        a, b = evaluate(direct, params.L / 2), evaluate(pushed, params.L / 2)
    else:
        raise ValueError(f"unknown functional {functional!r}")
    return ks_two_sample(a, b + shift, alpha, suite="invariance", test=f"{example} {functional} k={k} shift={shift}")


# --- renewal ---------------------------------------------------------------------------


def age_distribution_test(laws: SwitchingLaws, t_large: float, n_samples: int, alpha: float = 0.01, seed: int = 0):
    """Conditional age KS for each state and the occupancy of state 1 at ``t_large``."""
    m = max(laws.law0.mean, laws.law1.mean)
    if t_large < 20 * m:
        raise ValueError(f"t_large must be at least 20 * max mean = {20 * m}")
    batch = EnvironmentBatch(laws, seed, environment_stream_id(np.arange(n_samples, dtype=np.uint64)))
    _, state, age, _ = locate_batch(batch, t_large)
    reports: list = []
    for s in (0, 1):
        a = age[state == s]
        reports.append(ks_one_sample(a, lambda x, s=s: np.array([stationary_age_cdf(laws, s, float(v)) for v in x]),
                                     alpha, suite="age", test=f"age | J={s}"))
    p = occupancy_p(laws)
    frac = float(np.mean(state))
    reports.append(StatReport.from_estimate(frac, math.sqrt(p * (1 - p) / n_samples), n_samples, p, suite="age", test="P(J=1)"))
    return reports


# --- weak form of the mean equation -------------------------------------------------


def bspline_bump(L: float, n: int = 4097):
    """Cubic B-spline supported on ``[L/4, 3L/4]`` and its second derivative on a grid."""
    x = np.linspace(0, L, n)
    h = L / 8
    s = (x - L / 4) / h  # knots at s = 0, 1, 2, 3, 4

    def piece(s):
        phi = np.zeros_like(s)
        d2 = np.zeros_like(s)
        m = (s >= 0) & (s < 1)
        phi[m], d2[m] = s[m] ** 3 / 6, s[m]
        m = (s >= 1) & (s < 2)
        u = s[m] - 1
        phi[m], d2[m] = (1 + 3 * u + 3 * u**2 - 3 * u**3) / 6, 1 - 3 * u
        m = (s >= 2) & (s < 3)
        u = 3 - s[m]
        phi[m], d2[m] = (1 + 3 * u + 3 * u**2 - 3 * u**3) / 6, 1 - 3 * u
        m = (s >= 3) & (s <= 4)
        u = 4 - s[m]
        phi[m], d2[m] = u**3 / 6, u
        return phi, d2

    phi, d2 = piece(s)
    return x, phi, d2 / h**2


def _pairing(basis: Basis, x, g) -> tuple[np.ndarray, float]:
    """Weights so that ``<g, f> = w_rem . remainder + w_edge * edge`` (Simpson quadrature)."""
    from scipy.integrate import simpson

    w_rem = simpson(g[:, None] * basis.functions(x), x=x, axis=0)
    w_edge = float(simpson(g * x / basis.L, x=x))
    return w_rem, w_edge


def weak_mean_pde_residual(
    example: str,
    params: Params,
    t: float,
    dt: float,
    n_samples: int,
    test_fn=None,
    K: int = 64,
    seed: int = 0,
    threads: int = 1,
) -> StatReport:
    """Central difference of ``<phi, E u(t)>`` minus ``<D phi'', E u(t)>``.

    All three times use the same environments (common random numbers), so
    the noise is that of the per-path residual. The deterministic budget
    adds the change of the estimate when ``dt`` doubles.
    """
    if not (t > 0 and 0 < dt < t):
        raise ValueError("need 0 < dt < t")
    pair = make_flow_pair(example, params, K)
    basis = Basis("DD", params.L, params.D, K)
    x, phi, phi2 = bspline_bump(params.L) if test_fn is None else test_fn
    wp, ep = _pairing(basis, x, phi)
    wa, ea = _pairing(basis, x, params.D * phi2)

    def pair_with(f, w, e):
        return f.remainder @ w + np.asarray(f.edge) * e

    def run(i0, i1):
        batch = EnvironmentBatch(params.laws(), seed, environment_stream_id(np.arange(i0, i1, dtype=np.uint64)))
        vals = {}
        for s in (-2, -1, 0, 1, 2):
            vals[s] = pair_with(process_batch(pair, batch, pair.origin, t + s * dt), wp, ep)
        gen = pair_with(process_batch(pair, batch, pair.origin, t), wa, ea)
        r1 = (vals[1] - vals[-1]) / (2 * dt) - gen
        r2 = (vals[2] - vals[-2]) / (4 * dt) - gen
        return np.column_stack([r1, r2])

    mom = _reduce(_map_chunks(run, n_samples, threads))
    est, est2 = np.asarray(mom.mean)
    se = float(np.asarray(mom.stderr)[0])
    slack = abs(est2 - est)
    return StatReport.from_estimate(float(est), se, n_samples, 0.0, slack=slack, suite="pde", test=f"weak residual t={t}",
                                    extra={"dt": dt, "discretization_slack": slack})


def stationary_generator_test(example: str, params: Params, n_samples: int, test_fn=None, K: int = 64, seed: int = 0, threads: int = 1) -> StatReport:
    """``<D phi'', E u_bar>`` against 0."""
    pair = make_flow_pair(example, params, K)
    basis = Basis("DD", params.L, params.D, K)
    x, _, phi2 = bspline_bump(params.L) if test_fn is None else test_fn
    wa, ea = _pairing(basis, x, params.D * phi2)
    mom = stationary_values(pair, params.laws(), seed, n_samples, lambda f: f.remainder @ wa + np.asarray(f.edge) * ea, threads=threads)
    return StatReport.from_estimate(float(mom.mean), float(mom.stderr), n_samples, 0.0, suite="pde", test="stationary generator")


# --- pathwise structure --------------------------------------------------------------


def sandwich_violations(normalized: np.ndarray, pairs, slack: float = 1e-12) -> np.ndarray:
    """Boolean ``(N,)``: True where some mode pair leaves the admissible region.

    ``normalized[:, j]`` holds ``u_{j+1} / c_{j+1}``.
    """
    bad = np.zeros(len(normalized), dtype=bool)
    for k, n in pairs:
        xk = np.clip(normalized[:, k - 1], 0.0, 1.0)
        xn = normalized[:, n - 1]
        e = (n / k) ** 2
        with np.errstate(divide="ignore"):
            lo, hi = xk**e, -np.expm1(e * np.log1p(-xk))
        bad |= (xn < lo - slack) | (xn > hi + slack)
        bad |= (normalized[:, k - 1] < -slack) | (normalized[:, k - 1] > 1 + slack)
    return bad


@dataclass
class PathwiseResult:
    sandwich_fraction: float
    box_fraction: float
    sup_fraction: float
    eps: float
    n: int
    worst_sup: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.sandwich_fraction == 1.0 and self.sup_fraction == 1.0


def sandwich_pathwise_check(
    params: Params,
    n_samples: int,
    mode_pairs=((1, 2), (1, 3), (2, 4)),
    K: int = 64,
    seed: int = 0,
    grid: int = 256,
    slack: float = 1e-12,
) -> PathwiseResult:
    """Fractions of stationary DD samples inside the sandwich region, the
    maximum-principle box ``[-eps, b x / L + eps]`` and the ball ``|u| <= b + eps``."""
    pair = make_flow_pair("DD", params, K)
    x = interior_grid(params.L, grid)
    eps = truncation_eps(params.b, K)
    modes = max(n for _, n in mode_pairs)
    ck = cf.dd_ramp_coeff(params, np.arange(1, modes + 1))
    bad = sand = box = 0
    worst = 0.0
    for i0, i1 in _chunks(n_samples):
        st = stationary_batch(pair, params.laws(), seed, np.arange(i0, i1))
        norm = st.values.coeffs[:, :modes] / ck
        sand += int(np.count_nonzero(~sandwich_violations(norm, mode_pairs, slack)))
        v = evaluate(st.values, x)
        box += int(np.count_nonzero(np.all((v >= -eps) & (v <= params.b * x / params.L + eps), axis=1)))
        sup = np.max(np.abs(v), axis=1)
        worst = max(worst, float(sup.max()))
        bad += int(np.count_nonzero(sup > params.b + eps))
    n = n_samples
    return PathwiseResult(sand / n, box / n, (n - bad) / n, eps, n, worst)


# --- contraction ---------------------------------------------------------------------


@dataclass
class ContractionResult:
    ratio: float
    stderr: float
    target: float
    n_ratios: int
    residual_ratio_geomean: float
    independence_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return 0.5 * self.target <= self.ratio <= 2 * self.target and self.independence_gap <= 2 * self.tol


SEPARATION = 1e150


def contraction_test(params: Params, n_paths: int = 100, steps: int = 10, seed: int = 0, tol: float = 1e-10, K: int = 64) -> ContractionResult:
    """Per-step shrink factor of the gap between two backward orbits, pooled over paths.

    The two starting fields differ along mode 1, the slowest mode, so the
    gap ratio estimates ``E K0 * E K1``. Successive ratios along a path are
    independent, so stopping once the gap reaches rounding level does not
    bias the pooled mean. Also checks that pullbacks from two different
    initial fields agree.
    """
    pair = make_flow_pair("DD", params, K)
    basis = Basis("DD", params.L, params.D, K)
    x1 = basis.zero()
    e1 = np.zeros(K)
    e1[0] = 1.0
    # the flows are affine, so the gap ratio does not depend on the starting
    # separation; a huge one keeps the gap far above rounding of the fields
    far = SpectralField(basis, SEPARATION * e1)
    ratios, res_ratios, gaps = [], [], []
    for i in range(n_paths):
        env = sample_environment(params.laws(), seed, 0, index=i)
        t0, t1 = env.tau0(steps + 1), env.tau1(steps + 1)
        prev = None
        # phi^{-n}(x) = G^1 o ... o G^n (x)
        for n in range(1, steps + 2):
            a = pair.phi1(t1[n - 1], pair.phi0(t0[n - 1], x1))
            b = pair.phi1(t1[n - 1], pair.phi0(t0[n - 1], far))
            for k in range(n - 2, -1, -1):
                a = pair.phi1(t1[k], pair.phi0(t0[k], a))
                b = pair.phi1(t1[k], pair.phi0(t0[k], b))
            d = float((a - b).norm())
            if d < 1e-9 * max(float(a.norm()), float(b.norm()), 1.0) or d < 1e-250:
                break
            if prev is not None:
                ratios.append(d / prev)
            prev = d
        ps = pullback_sample(pair, env, x1, tol)
        hist = np.asarray(ps.history)
        ok = hist[1:][(hist[:-1] > 0) & (hist[1:] > 0)] / hist[:-1][(hist[:-1] > 0) & (hist[1:] > 0)]
        res_ratios.extend(ok.tolist())
        other = pullback_sample(pair, env, SpectralField(basis, 3.0 * e1, 0.5), tol)
        gaps.append(float((ps.value - other.value).norm()))
    r = np.asarray(ratios)
    target = (params.r0 / (params.r0 + basis.eigenvalues[0])) * (params.r1 / (params.r1 + basis.eigenvalues[0]))
    geo = float(np.exp(np.mean(np.log(res_ratios)))) if res_ratios else math.nan
    return ContractionResult(float(r.mean()), float(r.std(ddof=1) / math.sqrt(len(r))), float(target), len(r), geo, max(gaps), tol)


# --- regularity ------------------------------------------------------------------------


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    n_points: int
    dropped: int
    passed: bool


def holding_time_regression(params: Params, n_samples: int = 1000, k_range=(16, 32), K: int = 64, seed: int = 0, tol_slope: float = 0.05) -> RegressionResult:
    """Least-squares slope of ``log |Y1^k / c_k|`` on ``-beta_k tau1^1`` pooled over modes and samples.

    Entries whose normalized coefficient underflows to 0 are dropped and counted.
    """
    values, _, tau1 = pullback_values(params, "Y1", n_samples, seed, K)
    ks = np.arange(k_range[0], k_range[1] + 1)
    ck = cf.dd_ramp_coeff(params, ks)
    y = np.abs(values.coeffs[:, ks - 1] / ck)
    xs = -np.outer(tau1, cf.dd_eigenvalue(params, ks))
    ok = np.isfinite(y) & (y > 0)
    ly = np.log(y[ok])
    xv = xs[ok]
    slope, intercept = np.polyfit(xv, ly, 1)
    dropped = int(y.size - ok.sum())
    return RegressionResult(float(slope), float(intercept), int(ok.sum()), dropped, abs(slope - 1) <= tol_slope)


def envelope_fit(params: Params, n_samples: int = 1000, modes=32, r: float = 0.4, K: int = 64, seed: int = 0):
    """Fitted ``M`` per path for both families, keyed ``Y0`` and ``Y1``."""
    ks = np.arange(1, modes + 1)
    ck = cf.dd_ramp_coeff(params, ks)
    out = {}
    for which in ("Y0", "Y1"):
        values, _, _ = pullback_values(params, which, n_samples, seed, K)
        out[which] = cf.fit_envelope_constant(values.coeffs[:, :modes] / ck, ks, r, which)
    return out


# --- oracle triangle -----------------------------------------------------------------


@dataclass
class OracleResult:
    rk4_gap: float
    fd_gap: float
    order: float
    fd_budget: float

    @property
    def passed(self) -> bool:
        return self.rk4_gap <= 1e-8 and self.fd_gap <= self.fd_budget and 1.7 <= self.order <= 2.3


def rk4_vs_spectral(params: Params, seed: int = 0, epochs: int = 3, modes=range(1, 9), dt: float = 1e-4, K: int = 64) -> float:
    env = sample_environment(params.laws(), seed, epochs)
    pair = make_flow_pair("DD", params, K)
    from ..engine import forward_orbit

    exact = forward_orbit(pair, env, pair.origin, epochs).coeffs
    modes = list(modes)
    rk = ode_oracle_orbit(params, modes, env, np.zeros(len(modes)), epochs, dt)
    return float(np.max(np.abs(rk - exact[np.asarray(modes) - 1])))


def fd_vs_spectral(params: Params, seed: int = 0, t: float = 1.0, dx: float | None = None, dt: float = 1e-4, K: int = 64, grid: int = 256):
    """Interior sup-norm gap between the DN spectral process and the FD oracle."""
    from ..engine import process_at

    dx = params.L / 512 if dx is None else dx
    env = sample_environment(params.laws(), seed, 0)
    n = round(params.L / dx)
    fd = fd_oracle("DN", params, np.zeros(n + 1), t, dx, dt, env)
    xs = np.linspace(0, params.L, n + 1)
    pair = make_flow_pair("DN", params, K)
    u = process_at(pair, env, pair.origin, t)
    x = interior_grid(params.L, grid)
    fd_on_grid = np.interp(x, xs, fd)
    return float(np.max(np.abs(evaluate(u, x) - fd_on_grid))), x, evaluate(u, x), fd_on_grid


def fd_convergence_order(params: Params, seed: int = 0, t: float = 1.0, dx0: float | None = None, dt0: float = 2e-3, example: str = "DN") -> float:
    """Observed order from three nested refinements of ``(dx, dt)``."""
    dx0 = params.L / 32 if dx0 is None else dx0
    env = sample_environment(params.laws(), seed, 0)
    sols = []
    for level in range(3):
        f = 2**level
        n = round(params.L / dx0) * f
        sols.append(fd_oracle(example, params, np.zeros(n + 1), t, dx0 / f, dt0 / f, env)[::f])
    e1 = np.max(np.abs(sols[0] - sols[1])[1:-1])
    e2 = np.max(np.abs(sols[1] - sols[2])[1:-1])
    return float(math.log2(e1 / e2))


def oracle_triangle(params: Params, seed: int = 0) -> OracleResult:
    gap, *_ = fd_vs_spectral(params, seed)
    return OracleResult(rk4_vs_spectral(params, seed), gap, fd_convergence_order(params, seed), 5e-3 * params.b)
