"""Test statistics and report records for the verification suites."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special, stats

_TINY = 1e-300


def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 10_000) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x) -> np.ndarray | float:
    """Regularized incomplete beta ``I_x(a, b)`` via a continued fraction."""
    if not (a > 0 and b > 0):
        raise ValueError("shape parameters must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    log_norm = special.gammaln(a + b) - special.gammaln(a) - special.gammaln(b)
    for i, v in enumerate(xs):
        if v <= 0.0:
            out[i] = 0.0
        elif v >= 1.0:
            out[i] = 1.0
        else:
            front = math.exp(log_norm + a * math.log(v) + b * math.log1p(-v))
            # the fraction converges fast on the side of the mean it is evaluated on
            if v < (a + 1.0) / (a + b + 2.0):
                out[i] = front * _betacf(a, b, v) / a
            else:
                out[i] = 1.0 - front * _betacf(b, a, 1.0 - v) / b
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance to a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("need samples on both sides")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / len(a)
    fb = np.searchsorted(b, pts, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_critical(n: int, alpha: float) -> float:
    """Exact one-sample critical value (scipy's Kolmogorov distribution)."""
    return float(stats.kstwo.ppf(1 - alpha, n))


def ks_two_sample_critical(n: int, m: int, alpha: float) -> float:
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((n + m) / (n * m))


@dataclass
class StatReport:
    estimate: float
    stderr: float
    n: int
    target: float
    z: float
    passed: bool
    threshold: float = 3.0
    suite: str = ""
    test: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_estimate(cls, estimate, stderr, n, target, threshold=3.0, slack=0.0, **kw) -> "StatReport":
        gap = abs(estimate - target)
        if stderr > 0:
            z = (estimate - target) / stderr
            passed = gap <= threshold * stderr + slack
        else:
            z = 0.0 if gap <= slack else math.copysign(math.inf, estimate - target)
            passed = gap <= slack
        return cls(float(estimate), float(stderr), int(n), float(target), float(z), bool(passed), threshold, **kw)

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return json.dumps(d, default=float)


@dataclass
class KSReport:
    statistic: float
    n: int
    critical: float
    passed: bool
    alpha: float = 0.01
    suite: str = ""
    test: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["ks"] = d.pop("statistic")
        d["pass"] = d.pop("passed")
        return json.dumps(d, default=float)


def ks_one_sample(samples, cdf, alpha: float = 0.01, **kw) -> KSReport:
    d = ks_statistic(samples, cdf)
    n = len(np.asarray(samples))
    c = ks_critical(n, alpha)
    return KSReport(d, n, c, d <= c, alpha, **kw)


def ks_two_sample(a, b, alpha: float = 0.01, **kw) -> KSReport:
    d = ks_two_sample_statistic(a, b)
    c = ks_two_sample_critical(len(a), len(b), alpha)
    return KSReport(d, len(a) + len(b), c, d <= c, alpha, **kw)


@dataclass
class Moments:
    """Running count, mean and centred second moment; merges are associative."""

    n: int = 0
    mean: np.ndarray | float = 0.0
    m2: np.ndarray | float = 0.0

    @classmethod
    def of(cls, x) -> "Moments":
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        if n == 0:
            return cls()
        mu = x.mean(axis=0)
        return cls(n, mu, ((x - mu) ** 2).sum(axis=0))

    def merge(self, other: "Moments") -> "Moments":
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta**2 * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else np.full_like(np.asarray(self.mean, dtype=float), np.nan)

    @property
    def stderr(self):
        return np.sqrt(self.variance / self.n)
