"""Switching environments and renewal-theoretic queries.

An environment is the i.i.d. sequence of holding-time pairs ``(tau0_k, tau1_k)``:
the boundary sits in state 0 for ``tau0_k`` and then in state 1 for ``tau1_k``.
Epochs are ``S_n = sum_{k<=n} (tau0_k + tau1_k)`` (switch 1 -> 0) and
``S'_{n+1} = S_n + tau0_{n+1}`` (switch 0 -> 1).
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .rng import CounterStream, derive_stream, uniform_pairs

BLOCK = 1024


class ConfigurationError(ValueError):
    """Invalid model parameters."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ConfigurationError(f"exponential rate must be positive and finite, got {self.rate}")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def inverse_cdf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def laplace(self, a: float) -> float:
        """E exp(-a tau)."""
        return self.rate / (self.rate + a)

    def expected_min(self, x: float) -> float:
        """E min(tau, x)."""
        return -math.expm1(-self.rate * x) / self.rate


@dataclass(frozen=True)
class GeneralLaw:
    """Continuous holding-time law given by its mean, CDF and inverse CDF.

    Lattice (arithmetic) or atomic laws are rejected: the round trip
    ``cdf(inverse_cdf(u)) == u`` is checked on a probe grid.
    """

    mean: float
    cdf_fn: Callable[[float], float]
    inverse_cdf_fn: Callable[[float], float]
    name: str = "general"

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ConfigurationError(f"mean must be positive and finite, got {self.mean}")
        if abs(float(self.cdf_fn(0.0))) > 1e-12:
            raise ConfigurationError("cdf(0) must be 0")
        probes = np.linspace(0.01, 0.99, 99)
        xs = np.array([float(self.inverse_cdf_fn(u)) for u in probes])
        if np.any(xs <= 0) or np.any(np.diff(xs) < 0):
            raise ConfigurationError("inverse_cdf must be positive and nondecreasing")
        back = np.array([float(self.cdf_fn(x)) for x in xs])
        if np.max(np.abs(back - probes)) > 1e-9:
            raise ConfigurationError("law has atoms or is arithmetic (cdf(inverse_cdf(u)) != u)")

    def cdf(self, x):
        return np.vectorize(lambda v: float(self.cdf_fn(v)) if v > 0 else 0.0)(np.asarray(x, dtype=float))

    def inverse_cdf(self, u):
        return np.vectorize(lambda v: float(self.inverse_cdf_fn(v)))(np.asarray(u, dtype=float))

    def expected_min(self, x: float) -> float:
        if x <= 0:
            return 0.0
        # quantiles as breakpoints keep quad accurate across kinks such as support ends
        pts = [p for p in self._quantile_points() if 0.0 < p < x]
        val, _ = integrate.quad(lambda s: 1.0 - float(self.cdf_fn(s)), 0.0, x, points=pts or None,
                                limit=400, epsabs=1e-14, epsrel=1e-13)
        return min(val, self.mean)

    def _quantile_points(self) -> list[float]:
        out = []
        for u in np.linspace(0.0, 1.0, 21):
            try:
                v = float(self.inverse_cdf_fn(float(u)))
            except (ValueError, ZeroDivisionError, OverflowError):
                continue
            if math.isfinite(v):
                out.append(v)
        return sorted(set(out))

    def laplace(self, a: float) -> float:
        val, _ = integrate.quad(lambda u: math.exp(-a * float(self.inverse_cdf_fn(u))), 0.0, 1.0, limit=200)
        return val


SwitchLaw = Exponential | GeneralLaw


@dataclass(frozen=True)
class SwitchingLaws:
    """Holding-time laws for state 0 (``law0``) and state 1 (``law1``)."""

    law0: SwitchLaw
    law1: SwitchLaw

    @classmethod
    def exponential(cls, r0: float, r1: float) -> "SwitchingLaws":
        return cls(Exponential(r0), Exponential(r1))

    def law(self, state: int) -> SwitchLaw:
        if state not in (0, 1):
            raise ValueError(f"state must be 0 or 1, got {state}")
        return self.law1 if state else self.law0

    @property
    def is_exponential(self) -> bool:
        return isinstance(self.law0, Exponential) and isinstance(self.law1, Exponential)

    def draw(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map uniforms of shape ``(..., 2)`` to holding times."""
        return self.law0.inverse_cdf(u[..., 0]), self.law1.inverse_cdf(u[..., 1])


ENV_DOMAIN = 0x454E56


def environment_stream_id(index) -> np.ndarray:
    return derive_stream(np.asarray(index, dtype=np.uint64), ENV_DOMAIN)


class Environment:
    """Lazily materialized switching environment.

    Pairs are generated in blocks of ``BLOCK`` from the counter stream
    ``(seed, stream_id)``; the k-th pair depends only on that key and ``k``.
    """

    def __init__(self, laws: SwitchingLaws, seed: int, stream_id, count: int = 0):
        self.laws = laws
        self.seed = int(seed)
        self.stream_id = np.uint64(int(stream_id) & 0xFFFFFFFFFFFFFFFF)
        self._lock = threading.Lock()
        self._tau0 = np.empty(0)
        self._tau1 = np.empty(0)
        self._length = 0
        self.ensure(count)

    @classmethod
    def from_pairs(cls, pairs, laws: SwitchingLaws | None = None) -> "Environment":
        """Fixed environment; asking for pairs beyond the given ones is an error."""
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        if np.any(arr <= 0):
            raise ConfigurationError("holding times must be positive")
        env = cls.__new__(cls)
        env.laws = laws
        env.seed = None
        env.stream_id = None
        env._lock = threading.Lock()
        env._tau0 = arr[:, 0].copy()
        env._tau1 = arr[:, 1].copy()
        env._length = len(arr)
        return env

    def __len__(self) -> int:
        return self._length

    def ensure(self, count: int) -> None:
        if count <= len(self._tau0):
            self._length = max(self._length, count)
            return
        if self.seed is None:
            raise IndexError(f"fixed environment has {len(self._tau0)} pairs, {count} requested")
        with self._lock:
            have = len(self._tau0)
            if count <= have:
                return
            n_blocks = -(-(count - have) // BLOCK)
            pos = np.arange(have, have + n_blocks * BLOCK, dtype=np.uint64)
            t0, t1 = self.laws.draw(uniform_pairs(self.seed, self.stream_id, pos))
            self._tau0 = np.concatenate([self._tau0, t0])
            self._tau1 = np.concatenate([self._tau1, t1])
            self._length = max(self._length, count)

    def pair(self, k: int) -> tuple[float, float]:
        """The k-th pair, 1-based as in ``omega_k``."""
        self.ensure(k)
        return float(self._tau0[k - 1]), float(self._tau1[k - 1])

    @property
    def pairs(self) -> np.ndarray:
        return np.stack([self._tau0[: self._length], self._tau1[: self._length]], axis=1)

    def tau0(self, count: int) -> np.ndarray:
        self.ensure(count)
        return self._tau0[:count]

    def tau1(self, count: int) -> np.ndarray:
        self.ensure(count)
        return self._tau1[:count]

    def epochs_until(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """``(S_0..S_n, S'_1..S'_{n+1})`` long enough that ``S_n > t``."""
        n = len(self._tau0) if self.seed is None else max(len(self), 8)
        while True:
            self.ensure(n)
            if self.seed is None and n and self._tau0.sum() + self._tau1.sum() <= t:
                raise IndexError(f"fixed environment ends before t={t}")
            cycle = self._tau0[:n] + self._tau1[:n]
            s = np.concatenate([[0.0], np.cumsum(cycle)])
            if s[-1] > t:
                return s, s[:-1] + self._tau0[:n]
            n *= 2

    def to_json(self, count: int | None = None) -> str:
        pairs = self.pairs if count is None else np.stack([self.tau0(count), self.tau1(count)], axis=1)
        return json.dumps(pairs.tolist())

    def __repr__(self) -> str:
        return f"Environment(seed={self.seed}, stream_id={self.stream_id}, materialized={self._length})"


def environment_from_json(text: str, laws: SwitchingLaws | None = None) -> Environment:
    return Environment.from_pairs(json.loads(text), laws)


class EnvironmentBatch:
    """Many environments at once, bit-identical to the corresponding ``Environment``s."""

    def __init__(self, laws: SwitchingLaws, seed: int, stream_ids):
        self.laws = laws
        self.seed = int(seed)
        self.stream_ids = np.asarray(stream_ids, dtype=np.uint64).reshape(-1)
        self._tau0 = np.empty((len(self.stream_ids), 0))
        self._tau1 = np.empty((len(self.stream_ids), 0))

    @classmethod
    def from_arrays(cls, tau0, tau1) -> "EnvironmentBatch":
        batch = cls.__new__(cls)
        batch.laws = None
        batch.seed = None
        batch._tau0 = np.atleast_2d(np.asarray(tau0, dtype=float))
        batch._tau1 = np.atleast_2d(np.asarray(tau1, dtype=float))
        batch.stream_ids = np.zeros(len(batch._tau0), dtype=np.uint64)
        return batch

    def __len__(self) -> int:
        return len(self._tau0)

    def subset(self, mask) -> "EnvironmentBatch":
        out = EnvironmentBatch.__new__(EnvironmentBatch)
        out.laws, out.seed = self.laws, self.seed
        out.stream_ids = self.stream_ids[mask]
        out._tau0, out._tau1 = self._tau0[mask], self._tau1[mask]
        return out

    def taus(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        have = self._tau0.shape[1]
        if count > have:
            if self.seed is None:
                raise IndexError(f"fixed batch has {have} pairs, {count} requested")
            new = max(count, 2 * have, 8)
            pos = np.arange(have, new, dtype=np.uint64)
            u = uniform_pairs(self.seed, self.stream_ids[:, None], pos[None, :])
            t0, t1 = self.laws.draw(u)
            self._tau0 = np.concatenate([self._tau0, t0], axis=1)
            self._tau1 = np.concatenate([self._tau1, t1], axis=1)
        return self._tau0[:, :count], self._tau1[:, :count]


def sample_environment(laws: SwitchingLaws, seed: int, count: int, index: int = 0) -> Environment:
    if count < 0:
        raise ValueError("count must be nonnegative")
    return Environment(laws, seed, environment_stream_id(index), count)


def sample_environment_batch(laws: SwitchingLaws, seed: int, indices) -> EnvironmentBatch:
    return EnvironmentBatch(laws, seed, environment_stream_id(indices))


@dataclass(frozen=True)
class TimelinePoint:
    n: int
    state: int
    age: float
    s_n: float
    s_prime: float


def locate(env: Environment, t: float) -> TimelinePoint:
    """Renewal coordinates ``(N_t, J_t, a_t, S_{N_t}, S'_{N_t+1})`` at time t.

    At ``t == S'_k`` the state is 1; at ``t == S_k`` it is 0.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    s, s_prime = env.epochs_until(t)
    n = int(np.searchsorted(s, t, side="right") - 1)
    sp = float(s_prime[n])
    if t >= sp:
        return TimelinePoint(n, 1, t - sp, float(s[n]), sp)
    return TimelinePoint(n, 0, t - float(s[n]), float(s[n]), sp)


def locate_batch(batch: EnvironmentBatch, t: float):
    """Vectorized ``locate`` returning arrays ``(n, state, age, tau0_next)``."""
    count = 8
    while True:
        t0, t1 = batch.taus(count)
        s = np.cumsum(t0 + t1, axis=1)
        if np.all(s[:, -1] > t):
            break
        count *= 2
    s = np.concatenate([np.zeros((len(batch), 1)), s], axis=1)
    n = np.sum(s[:, 1:] <= t, axis=1)
    rows = np.arange(len(batch))
    s_n = s[rows, n]
    tau0_next = t0[rows, n]
    sp = s_n + tau0_next
    state = (t >= sp).astype(int)
    age = np.where(state == 1, t - sp, t - s_n)
    return n, state, age, tau0_next


def switch_count(env: Environment, s: float, t: float) -> int:
    """Number of jump epochs of ``J`` in the open interval ``(s, t)``."""
    if s <= 0 or s > t:
        raise ValueError(f"need 0 < s <= t, got s={s}, t={t}")
    starts, primes = env.epochs_until(t)
    epochs = np.concatenate([starts[1:], primes])
    return int(np.count_nonzero((epochs > s) & (epochs < t)))


def occupancy_p(laws: SwitchingLaws) -> float:
    """Long-run probability of state 1."""
    m0, m1 = laws.law0.mean, laws.law1.mean
    return m1 / (m0 + m1)


def stationary_age_cdf(laws: SwitchingLaws, state: int, x: float) -> float:
    if x < 0:
        raise ValueError("x must be nonnegative")
    law = laws.law(state)
    if isinstance(law, Exponential):
        return float(-math.expm1(-law.rate * x))
    if math.isinf(x):
        return 1.0
    return min(1.0, law.expected_min(x) / law.mean)


def _invert_age_cdf(laws: SwitchingLaws, state: int, u: float, tol: float = 1e-12) -> float:
    if u <= 0.0:
        return 0.0
    law = laws.law(state)
    lo, hi = 0.0, law.mean
    grow = 0
    while stationary_age_cdf(laws, state, hi) < u:
        lo, hi = hi, 2.0 * hi
        grow += 1
        if grow > 200:
            raise NumericalError("could not bracket stationary age quantile", {"u": u, "hi": hi})
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if stationary_age_cdf(laws, state, mid) < u:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi)
    raise NumericalError("bisection for stationary age did not converge", {"u": u, "lo": lo, "hi": hi})


def sample_stationary_age(laws: SwitchingLaws, state: int, rng, size=None):
    """Draw from the stationary age law of ``state``."""
    law = laws.law(state)
    u = rng.random(size)
    if isinstance(law, Exponential):
        return -np.log1p(-np.asarray(u)) / law.rate if size is not None else -math.log1p(-u) / law.rate
    if size is None:
        return _invert_age_cdf(laws, state, float(u))
    return np.array([_invert_age_cdf(laws, state, float(v)) for v in np.ravel(u)]).reshape(np.shape(u))


def age_from_uniform(laws: SwitchingLaws, state: int, u):
    """Stationary age quantile function, vectorized."""
    law = laws.law(state)
    u = np.asarray(u, dtype=float)
    if isinstance(law, Exponential):
        return -np.log1p(-u) / law.rate
    return np.vectorize(lambda v: _invert_age_cdf(laws, state, float(v)))(u)


__all__ = [
    "BLOCK",
    "ConfigurationError",
    "CounterStream",
    "Environment",
    "EnvironmentBatch",
    "Exponential",
    "GeneralLaw",
    "NumericalError",
    "SwitchingLaws",
    "TimelinePoint",
    "environment_from_json",
    "locate",
    "locate_batch",
    "occupancy_p",
    "sample_environment",
    "sample_environment_batch",
    "sample_stationary_age",
    "stationary_age_cdf",
    "switch_count",
]
