"""Generic engine for two alternating flows driven by a switching environment.

States are opaque: the engine only needs ``a - b`` and ``pair.norm``. Flows
must accept either a scalar duration with a single state, or an array of
durations with a batch of states (leading axis), and must treat a zero
duration as the exact identity. The batched paths below rely on the latter
to mask out steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .switching import (
    EnvironmentBatch,
    Environment,
    Exponential,
    NumericalError,
    SwitchingLaws,
    age_from_uniform,
    derive_stream,
    environment_stream_id,
    locate,
    locate_batch,
    occupancy_p,
)
from .rng import CounterStream, uniform_pairs

State = Any


@dataclass(frozen=True)
class Flow:
    """A semigroup-like dynamics ``t, x -> apply(t, x)`` with Lipschitz modulus ``K(t)``.

    ``decay_rate`` is set when ``K(t) = exp(-decay_rate * t)``; it enables the
    closed-form contraction certificate for exponential holding times.
    """

    apply: Callable[[Any, State], State]
    contraction_modulus: Callable[[float], float]
    decay_rate: float | None = None
    name: str = ""

    def __call__(self, t, x):
        return self.apply(t, x)


@dataclass(frozen=True)
class FlowPair:
    phi0: Flow
    phi1: Flow
    norm: Callable[[State], Any] = abs
    origin: State = 0.0

    def distance(self, a, b):
        return self.norm(a - b)

    def flow(self, state: int) -> Flow:
        return self.phi1 if state else self.phi0


def exponential_flow(rate: float, fixed_point: float = 0.0) -> Flow:
    """Scalar flow relaxing to ``fixed_point`` at ``rate``; handy for tests and ``ode1d``."""

    def apply(t, x):
        t = np.asarray(t, dtype=float)
        out = fixed_point + np.exp(-rate * t) * (np.asarray(x, dtype=float) - fixed_point)
        return float(out) if out.ndim == 0 else out

    return Flow(apply, lambda t: math.exp(-rate * t), decay_rate=rate, name=f"relax({rate},{fixed_point})")


@dataclass
class PullbackSample:
    value: State
    depth: int
    residual: float
    history: list[float] = field(default_factory=list, repr=False)


class PullbackDivergence(NumericalError):
    """Raised when a pullback iterate does not settle within ``max_depth``."""


# --- discrete orbits -------------------------------------------------------------


def _step(pair: FlowPair, variant: str, tau0, tau1, x):
    if variant == "phi":
        return pair.phi1(tau1, pair.phi0(tau0, x))
    if variant == "gamma":
        return pair.phi0(tau0, pair.phi1(tau1, x))
    raise ValueError(f"variant must be 'phi' or 'gamma', got {variant!r}")


def forward_orbit(pair: FlowPair, env: Environment, x: State, n: int, variant: str = "phi") -> State:
    """``G^n o ... o G^1 (x)`` (``variant='phi'``) or the ``F`` analogue (``'gamma'``)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    t0, t1 = env.tau0(n), env.tau1(n)
    for k in range(n):
        x = _step(pair, variant, t0[k], t1[k], x)
    return x


def backward_orbit(pair: FlowPair, env: Environment, x: State, n: int, variant: str = "phi") -> State:
    """``G^1 o ... o G^n (x)``: the same factors composed in reverse index order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    t0, t1 = env.tau0(n), env.tau1(n)
    for k in range(n - 1, -1, -1):
        x = _step(pair, variant, t0[k], t1[k], x)
    return x


def _variant(target: str) -> str:
    if target == "Y1":
        return "phi"
    if target == "Y0":
        return "gamma"
    raise ValueError(f"target must be 'Y0' or 'Y1', got {target!r}")


def pullback_sample(
    pair: FlowPair,
    env: Environment,
    x0: State,
    tol: float = 1e-10,
    max_depth: int = 10_000,
    target: str = "Y1",
) -> PullbackSample:
    """Approximate ``Y1 = lim phi^{-n}(x0)`` or ``Y0 = lim gamma^{-n}(x0)``.

    Stops at the first depth whose iterate is within ``tol`` of the previous one.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    variant = _variant(target)
    prev = x0
    history: list[float] = []
    for n in range(1, max_depth + 1):
        cur = backward_orbit(pair, env, x0, n, variant)
        residual = float(pair.distance(cur, prev))
        history.append(residual)
        if residual <= tol:
            return PullbackSample(cur, n, residual, history)
        prev = cur
    raise PullbackDivergence(
        f"pullback did not reach tol={tol} within {max_depth} steps",
        {"residuals": history, "last": history[-1] if history else None},
    )


def _backward_batch(pair, variant, tau0, tau1, x, n):
    for k in range(n - 1, -1, -1):
        x = _step(pair, variant, tau0[:, k], tau1[:, k], x)
    return x


def _take(x, mask):
    if hasattr(x, "take_rows"):
        return x.take_rows(mask)
    return np.asarray(x)[mask]


def _put(dest, mask, src):
    if hasattr(dest, "put_rows"):
        dest.put_rows(mask, src)
    else:
        dest[mask] = src


def _broadcast(x0, n):
    if hasattr(x0, "broadcast_to"):
        return x0.broadcast_to(n)
    return np.broadcast_to(np.asarray(x0, dtype=float), (n,) + np.shape(x0)).copy()


def _empty_batch(like, n):
    if hasattr(like, "empty_like_batch"):
        return like.empty_like_batch(n)
    return np.zeros((n,) + np.shape(like)[1:])


@dataclass
class PullbackBatch:
    values: State
    depth: np.ndarray
    residual: np.ndarray


def pullback_batch(
    pair: FlowPair,
    batch: EnvironmentBatch,
    x0: State,
    tol: float = 1e-10,
    max_depth: int = 10_000,
    target: str = "Y1",
    start_depth: int = 2,
) -> PullbackBatch:
    """Batched pullback with depth doubling.

    Each path is evaluated at depths ``start_depth, 2*start_depth, ...`` until
    its last-step residual ``|iterate_n - iterate_{n-1}|`` is within ``tol``.
    """
    variant = _variant(target)
    size = len(batch)
    values = None
    depth = np.zeros(size, dtype=int)
    residual = np.full(size, np.inf)
    active = np.arange(size)
    n = max(1, start_depth)
    x_all = _broadcast(x0, size)
    while active.size:
        if n > max_depth:
            raise PullbackDivergence(
                f"{active.size} pullback paths did not reach tol={tol} within {max_depth} steps",
                {"unconverged": int(active.size), "worst_residual": float(np.max(residual[active]))},
            )
        tau0, tau1 = batch.taus(n)
        t0, t1 = tau0[active], tau1[active]
        x = _take(x_all, active)
        # iterate_{n-1} is x pushed through factors 1..n-1; iterate_n starts from G^n(x)
        prev = _backward_batch(pair, variant, t0[:, : n - 1], t1[:, : n - 1], x, n - 1)
        cur = _backward_batch(pair, variant, t0[:, : n - 1], t1[:, : n - 1], _step(pair, variant, t0[:, n - 1], t1[:, n - 1], x), n - 1)
        res = np.asarray(pair.distance(cur, prev), dtype=float)
        if values is None:
            values = _empty_batch(cur, size)
        ok = res <= tol
        done = active[ok]
        _put(values, done, _take(cur, ok))
        depth[done] = n
        residual[active] = res
        active = active[~ok]
        n *= 2
    return PullbackBatch(values, depth, residual)


# --- continuous-time process -----------------------------------------------------


def process_at(pair: FlowPair, env: Environment, u0: State, t: float) -> State:
    """``u(t, omega)`` started from ``u0``."""
    pt = locate(env, t)
    x = forward_orbit(pair, env, u0, pt.n, "phi")
    if pt.state == 1:
        tau0_next = env.pair(pt.n + 1)[0]
        return pair.phi1(pt.age, pair.phi0(tau0_next, x))
    return pair.phi0(pt.age, x)


def process_batch(pair: FlowPair, batch: EnvironmentBatch, u0: State, t: float) -> State:
    """Vectorized ``process_at`` across a batch of environments."""
    n, state, age, tau0_next = locate_batch(batch, t)
    size = len(batch)
    x = _broadcast(u0, size)
    nmax = int(n.max()) if size else 0
    if nmax:
        tau0, tau1 = batch.taus(nmax)
        for k in range(nmax):
            live = k < n
            x = _step(pair, "phi", np.where(live, tau0[:, k], 0.0), np.where(live, tau1[:, k], 0.0), x)
    d0 = np.where(state == 1, tau0_next, age)
    d1 = np.where(state == 1, age, 0.0)
    return pair.phi1(d1, pair.phi0(d0, x))


# --- stationary law --------------------------------------------------------------

STATIONARY_DOMAIN = 0x535441
_XI, _AGE, _ENV_Y0, _ENV_Y1 = 1, 2, 3, 4


def stationary_stream(seed: int, index: int) -> CounterStream:
    return CounterStream(seed, int(derive_stream(np.uint64(index), STATIONARY_DOMAIN)))


def _child_uniform(seed, ids, tag):
    return uniform_pairs(seed, derive_stream(ids, tag), np.zeros_like(ids))[..., 0]


@dataclass
class StationaryBatch:
    values: State
    xi: np.ndarray
    depth: np.ndarray


def _stationary_core(pair, laws, seed, root, tol, x0, max_depth) -> StationaryBatch:
    x0 = pair.origin if x0 is None else x0
    p = occupancy_p(laws)
    xi = (_child_uniform(seed, root, _XI) < p).astype(int)
    size = len(root)
    values = None
    depth = np.zeros(size, dtype=int)
    for state in (0, 1):
        mask = xi == state
        if not mask.any():
            continue
        if laws.is_exponential:
            target, tag = ("Y1", _ENV_Y1) if state else ("Y0", _ENV_Y0)
        else:
            target, tag = ("Y0", _ENV_Y0) if state else ("Y1", _ENV_Y1)
        env = EnvironmentBatch(laws, seed, derive_stream(root[mask], tag))
        pb = pullback_batch(pair, env, x0, tol, max_depth, target)
        part = pb.values
        if not laws.is_exponential:
            age = age_from_uniform(laws, state, _child_uniform(seed, root[mask], _AGE))
            part = pair.flow(state)(age, part)
        if values is None:
            values = _empty_batch(part, size)
        _put(values, np.flatnonzero(mask), part)
        depth[mask] = pb.depth
    return StationaryBatch(values, xi, depth)


def stationary_sample(
    pair: FlowPair,
    laws: SwitchingLaws,
    rng: CounterStream,
    tol: float = 1e-10,
    x0: State = None,
    max_depth: int = 10_000,
):
    """One draw from the large-time law of ``u(t)``.

    Exponential holding times: ``xi * Y1 + (1 - xi) * Y0``. Otherwise
    ``xi * Phi1_{a1}(Y0) + (1 - xi) * Phi0_{a0}(Y1)`` with stationary ages.
    ``xi``, the age and the pullback environment come from independent
    children of ``rng``; the draw equals row ``i`` of ``stationary_batch``
    when ``rng = stationary_stream(seed, i)`` (bit for bit on diagonal
    flows, to BLAS rounding when a basis transfer is involved).
    """
    root = np.array([rng.stream_id], dtype=np.uint64)
    out = _stationary_core(pair, laws, rng.seed, root, tol, x0, max_depth)
    return _take(out.values, 0)


def stationary_batch(
    pair: FlowPair,
    laws: SwitchingLaws,
    seed: int,
    indices,
    tol: float = 1e-10,
    x0: State = None,
    max_depth: int = 10_000,
) -> StationaryBatch:
    """Vectorized ``stationary_sample`` keyed by sample index."""
    root = derive_stream(np.asarray(indices, dtype=np.uint64).reshape(-1), STATIONARY_DOMAIN)
    return _stationary_core(pair, laws, seed, root, tol, x0, max_depth)


def pullback_family(
    pair: FlowPair,
    laws: SwitchingLaws,
    seed: int,
    indices,
    target: str,
    tol: float = 1e-10,
    x0: State = None,
    domain: int = 0,
) -> PullbackBatch:
    """Independent pullback draws of ``target``, one environment per index."""
    x0 = pair.origin if x0 is None else x0
    ids = derive_stream(environment_stream_id(indices), domain) if domain else environment_stream_id(indices)
    return pullback_batch(pair, EnvironmentBatch(laws, seed, ids), x0, tol, target=target)


# --- contraction and invariance --------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    product: float
    stderr: float
    passed: bool

    @property
    def pass_(self) -> bool:
        return self.passed


def certify_contraction(pair: FlowPair, laws: SwitchingLaws, n_mc: int = 1000, seed: int = 0) -> Certificate:
    """Check ``E K0(tau0) * E K1(tau1) < 1`` with a 3-standard-error margin."""
    if n_mc < 100:
        raise ValueError("n_mc must be at least 100")
    means, variances = [], []
    stream = CounterStream(seed, 0xCE27)
    for state in (0, 1):
        flow, law = pair.flow(state), laws.law(state)
        if flow.decay_rate is not None and isinstance(law, Exponential):
            means.append(law.laplace(flow.decay_rate))
            variances.append(0.0)
            continue
        taus = law.inverse_cdf(stream.child(state).random(n_mc))
        ks = np.array([flow.contraction_modulus(float(t)) for t in np.ravel(taus)])
        means.append(float(ks.mean()))
        variances.append(float(ks.var(ddof=1)) / n_mc)
    product = means[0] * means[1]
    stderr = math.sqrt(means[1] ** 2 * variances[0] + means[0] ** 2 * variances[1])
    return Certificate(product, stderr, product + 3 * stderr < 1)


INVARIANCE_DOMAIN = 0x494E56


def invariance_pairs(pair: FlowPair, laws: SwitchingLaws, seed: int, n: int, target: str = "Y0", tol: float = 1e-10, x0: State = None):
    """Samples for the distributional identities of the pullbacks.

    ``target='Y0'`` returns ``({Y0}, {Phi0_{tau0}(Y1)})``; ``target='Y1'``
    returns ``({Y1}, {Phi1_{tau1}(Y0)})``. All draws are independent.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x0 = pair.origin if x0 is None else x0
    other = "Y1" if target == "Y0" else "Y0"
    state = 0 if target == "Y0" else 1
    idx = np.arange(n, dtype=np.uint64)
    direct = pullback_family(pair, laws, seed, idx, target, tol, x0, domain=INVARIANCE_DOMAIN + 1).values
    base = pullback_family(pair, laws, seed, idx, other, tol, x0, domain=INVARIANCE_DOMAIN + 2).values
    u = uniform_pairs(seed, derive_stream(idx, INVARIANCE_DOMAIN + 3), np.zeros(n, dtype=np.uint64))[:, state]
    taus = laws.law(state).inverse_cdf(u)
    pushed = pair.flow(state)(taus, base)
    return direct, pushed
