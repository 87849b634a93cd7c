"""Truncated sine-series representation of the heat semigroups on [0, L].

A :class:`SpectralField` stores ``f(x) = edge * x / L + sum_k remainder_k e_k(x)``.
The linear term is kept exactly because every flow that imposes ``u(L) = b``
produces it; folding it into the sine coefficients would leave a slowly
decaying ``1/k`` tail and a Gibbs overshoot next to ``x = L``. The
``coeffs`` property gives the plain truncated coefficients when needed.

Arrays may carry leading batch axes: ``remainder`` has shape ``(..., K)`` and
``edge`` has shape ``(...)``. Flow durations broadcast against the batch axes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .engine import Flow, FlowPair
from .params import Params
from .switching import ConfigurationError

KINDS = ("DD", "DN")


@dataclass(frozen=True)
class Basis:
    """Dirichlet eigenbasis on [0, L]; ``kind='DN'`` has a Neumann end at ``x = L``."""

    kind: str
    L: float = 1.0
    D: float = 1.0
    K: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (self.L > 0 and self.D > 0):
            raise ConfigurationError("L and D must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigurationError(f"K must be a positive integer, got {self.K!r}")

    @cached_property
    def frequencies(self) -> np.ndarray:
        k = np.arange(1, self.K + 1, dtype=float)
        if self.kind == "DD":
            return k * math.pi / self.L
        return (2 * k - 1) * math.pi / (2 * self.L)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return self.D * self.frequencies**2

    @cached_property
    def ramp_unit(self) -> np.ndarray:
        """Coefficients of ``x / L`` in this basis."""
        k = np.arange(1, self.K + 1, dtype=float)
        sign = np.where(k % 2 == 1, 1.0, -1.0)
        if self.kind == "DD":
            return sign * math.sqrt(2 * self.L) / (k * math.pi)
        return sign * 4 * math.sqrt(2 * self.L) / (math.pi**2 * (2 * k - 1) ** 2)

    @cached_property
    def values_at_L(self) -> np.ndarray:
        if self.kind == "DD":
            return np.zeros(self.K)
        k = np.arange(1, self.K + 1)
        return math.sqrt(2 / self.L) * np.where(k % 2 == 1, 1.0, -1.0)

    def functions(self, x) -> np.ndarray:
        """Basis functions on ``x``; shape ``x.shape + (K,)``."""
        x = np.asarray(x, dtype=float)
        return math.sqrt(2 / self.L) * np.sin(x[..., None] * self.frequencies)

    def zero(self, n: int | None = None) -> "SpectralField":
        shape = (self.K,) if n is None else (n, self.K)
        return SpectralField(self, np.zeros(shape))

    def to_dict(self) -> dict:
        return {"basis": self.kind, "L": self.L, "D": self.D, "K": self.K}


@dataclass(frozen=True)
class RampData:
    """The steady ramp ``c(x) = b x / L`` projected onto a basis."""

    basis: Basis
    b: float
    coeffs: np.ndarray = field(repr=False)


def project_ramp(basis: Basis, b: float) -> RampData:
    return RampData(basis, float(b), float(b) * basis.ramp_unit)


@dataclass(frozen=True, eq=False)
class SpectralField:
    basis: Basis
    remainder: np.ndarray
    edge: np.ndarray | float = 0.0

    def __post_init__(self):
        rem = np.asarray(self.remainder, dtype=float)
        if rem.shape[-1:] != (self.basis.K,):
            raise ValueError(f"expected trailing dimension {self.basis.K}, got shape {rem.shape}")
        edge = np.broadcast_to(np.asarray(self.edge, dtype=float), rem.shape[:-1])
        object.__setattr__(self, "remainder", rem)
        object.__setattr__(self, "edge", edge.copy() if edge.ndim else float(edge))

    @classmethod
    def from_coeffs(cls, basis: Basis, coeffs) -> "SpectralField":
        """A plain truncated sine series (no exact linear part)."""
        return cls(basis, np.asarray(coeffs, dtype=float), 0.0)

    @classmethod
    def from_grid(cls, basis: Basis, x, values, edge: float = 0.0) -> "SpectralField":
        """Project grid samples of a function with ``f(L) = edge`` (trapezoid rule)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(values, dtype=float) - edge * x / basis.L
        rem = np.trapezoid(v[:, None] * basis.functions(x), x, axis=0)
        return cls(basis, rem, edge)

    @property
    def batch_shape(self) -> tuple:
        return self.remainder.shape[:-1]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("unbatched field has no length")
        return self.batch_shape[0]

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.edge)[..., None] * self.basis.ramp_unit + self.remainder

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_basis(other.basis, self.basis)
        return SpectralField(self.basis, self.remainder - other.remainder, np.asarray(self.edge) - other.edge)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_basis(other.basis, self.basis)
        return SpectralField(self.basis, self.remainder + other.remainder, np.asarray(self.edge) + other.edge)

    def scale(self, a) -> "SpectralField":
        a = np.asarray(a, dtype=float)
        return SpectralField(self.basis, a[..., None] * self.remainder, a * self.edge)

    def norm(self):
        """Exact L2 norm of the represented function (batched)."""
        e = np.asarray(self.edge)
        sq = (
            e**2 * self.basis.L / 3
            + 2 * e * (self.remainder @ self.basis.ramp_unit)
            + np.sum(self.remainder**2, axis=-1)
        )
        return np.sqrt(np.maximum(sq, 0.0))

    # batch plumbing used by the engine
    def take_rows(self, idx) -> "SpectralField":
        return SpectralField(self.basis, self.remainder[idx], np.asarray(self.edge)[idx])

    def put_rows(self, idx, src: "SpectralField") -> None:
        self.remainder[idx] = src.remainder
        self.edge[idx] = src.edge

    def broadcast_to(self, n: int) -> "SpectralField":
        rem = np.broadcast_to(self.remainder, (n, self.basis.K)).copy()
        return SpectralField(self.basis, rem, np.broadcast_to(self.edge, (n,)).copy())

    def empty_like_batch(self, n: int) -> "SpectralField":
        return SpectralField(self.basis, np.zeros((n, self.basis.K)), np.zeros(n))

    def __getitem__(self, idx) -> "SpectralField":
        return self.take_rows(idx)

    def to_dict(self) -> dict:
        return {
            **self.basis.to_dict(),
            "coeffs": np.asarray(self.coeffs).tolist(),
            "edge": np.asarray(self.edge).tolist(),
            "remainder": self.remainder.tolist(),
        }


def _check_basis(got: Basis, want: Basis) -> None:
    if got != want:
        raise ValueError(f"basis mismatch: {got} vs {want}")


def _durations(t, field: SpectralField) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("durations must be nonnegative")
    return t


def _keep_identity(t, new: SpectralField, old: SpectralField) -> SpectralField:
    # zero duration must be the exact identity, including the representation
    zero = t == 0
    if not np.any(zero):
        return new
    if t.ndim == 0:
        return old
    rem = np.where(zero[..., None], old.remainder, new.remainder)
    edge = np.where(zero, old.edge, new.edge)
    return SpectralField(new.basis, rem, edge)


def decay_flow(basis: Basis, t, f: SpectralField) -> SpectralField:
    """Heat semigroup with homogeneous conditions of ``basis``: ``f_k -> exp(-lambda_k t) f_k``."""
    _check_basis(f.basis, basis)
    t = _durations(t, f)
    rem = np.exp(-np.multiply.outer(t, basis.eigenvalues)) * f.coeffs
    return _keep_identity(t, SpectralField(basis, rem, np.zeros(t.shape) if t.ndim else 0.0), f)


def ramp_flow(basis: Basis, ramp: RampData, t, f: SpectralField) -> SpectralField:
    """Relaxation towards the ramp: ``f_k -> c_k + exp(-lambda_k t)(f_k - c_k)``."""
    _check_basis(f.basis, basis)
    _check_basis(ramp.basis, basis)
    t = _durations(t, f)
    decay = np.exp(-np.multiply.outer(t, basis.eigenvalues))
    # the ramp itself is carried by the exact linear term
    rem = decay * (f.coeffs - ramp.coeffs) + (ramp.coeffs - ramp.b * basis.ramp_unit)
    edge = np.full(np.broadcast_shapes(t.shape, f.batch_shape), ramp.b)
    return _keep_identity(t, SpectralField(basis, rem, edge if edge.ndim else ramp.b), f)


def basis_transfer(source: Basis, target: Basis) -> np.ndarray:
    """``T[m, k] = <target_m, source_k>`` in closed form."""
    if (source.L, source.D, source.K) != (target.L, target.D, target.K):
        raise ValueError("bases must share L, D and K")
    p = target.frequencies[:, None]
    q = source.frequencies[None, :]
    if source.kind == target.kind:
        return np.eye(source.K)
    L = source.L
    return (np.sin((p - q) * L) / (p - q) - np.sin((p + q) * L) / (p + q)) / L


def transfer(f: SpectralField, target: Basis, matrix: np.ndarray | None = None) -> SpectralField:
    """Re-express a field in another basis; the exact linear part is preserved."""
    T = basis_transfer(f.basis, target) if matrix is None else matrix
    return SpectralField(target, f.remainder @ T.T, f.edge)


def evaluate(f: SpectralField, x):
    """Point values; shape ``batch + x.shape``."""
    x = np.asarray(x, dtype=float)
    L = f.basis.L
    if np.any(x < 0) or np.any(x > L):
        raise ValueError(f"x must lie in [0, {L}]")
    phi = f.basis.functions(x.reshape(-1))
    vals = f.remainder @ phi.T + np.asarray(f.edge)[..., None] * (x.reshape(-1) / L)
    return vals.reshape(f.batch_shape + x.shape)


def interior_grid(L: float, G: int = 256) -> np.ndarray:
    return L * np.arange(1, G) / G


def truncation_eps(b: float, K: int) -> float:
    """Box-test allowance ``sum_{k>K} sqrt(2) b / (pi k^2)``."""
    return math.sqrt(2) * abs(b) / math.pi * float(special.polygamma(1, K + 1))


# --- flow pairs ----------------------------------------------------------------------


class _DNDecay:
    """Neumann-at-L decay applied to a DD-basis state through the transfer matrix."""

    def __init__(self, dd: Basis, dn: Basis):
        self.dd, self.dn = dd, dn
        self.to_dn = basis_transfer(dd, dn)
        self.to_dd = self.to_dn.T

    def __call__(self, t, f: SpectralField) -> SpectralField:
        _check_basis(f.basis, self.dd)
        t = _durations(t, f)
        g = np.asarray(f.edge)[..., None] * self.dn.ramp_unit + f.remainder @ self.to_dn.T
        h = np.exp(-np.multiply.outer(t, self.dn.eigenvalues)) * g
        edge = h @ self.dn.values_at_L
        rem = h @ self.to_dd.T - edge[..., None] * self.dd.ramp_unit
        return _keep_identity(t, SpectralField(self.dd, rem, edge), f)


def make_flow_pair(example: str, params: Params, K: int = 64) -> FlowPair:
    """Flows of the DD or DN example; the engine state always lives in the DD basis."""
    example = example.upper()
    if example not in KINDS:
        raise ConfigurationError(f"example must be one of {KINDS}, got {example!r}")
    dd = Basis("DD", params.L, params.D, K)
    ramp = project_ramp(dd, params.b)
    beta1 = float(dd.eigenvalues[0])
    phi0 = Flow(
        lambda t, f: ramp_flow(dd, ramp, t, f),
        lambda t: math.exp(-beta1 * t),
        decay_rate=beta1,
        name="ramp",
    )
    if example == "DD":
        phi1 = Flow(lambda t, f: decay_flow(dd, t, f), lambda t: math.exp(-beta1 * t), decay_rate=beta1, name="decay-DD")
    else:
        dn = Basis("DN", params.L, params.D, K)
        alpha1 = float(dn.eigenvalues[0])
        phi1 = Flow(_DNDecay(dd, dn), lambda t: math.exp(-alpha1 * t), decay_rate=alpha1, name="decay-DN")
    return FlowPair(phi0, phi1, norm=lambda f: f.norm(), origin=dd.zero())


# --- dumps ---------------------------------------------------------------------------


def grid_csv(x, values, header=("x", "value")) -> str:
    rows = [",".join(header)]
    cols = [np.asarray(x)] + [np.asarray(v) for v in (values if isinstance(values, (list, tuple)) else [values])]
    for row in zip(*cols):
        rows.append(",".join(repr(float(v)) for v in row))
    return "\n".join(rows) + "\n"


def field_json(f: SpectralField) -> str:
    return json.dumps(f.to_dict())
