"""Independent oracles: an RK4 integrator for a single Fourier mode and a
Crank-Nicolson finite-difference solver for the switching boundary problem.

Neither shares code with the spectral flows.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded

from ..params import Params
from ..switching import Environment


def _mode_constants(params: Params, k: int) -> tuple[float, float]:
    beta = params.D * (k * math.pi / params.L) ** 2
    ck = (1 if k % 2 else -1) * params.b * math.sqrt(2 * params.L) / (k * math.pi)
    return beta, ck


def ode_oracle_step(params: Params, k: int, j_state: int, u_k: float, dt: float) -> float:
    """One classical RK4 step of ``du/dt = -beta_k (u - (1 - J) c_k)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    beta, ck = _mode_constants(params, k)
    target = 0.0 if j_state else ck

    def rhs(u):
        return -beta * (u - target)

    k1 = rhs(u_k)
    k2 = rhs(u_k + 0.5 * dt * k1)
    k3 = rhs(u_k + 0.5 * dt * k2)
    k4 = rhs(u_k + dt * k3)
    return u_k + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def ode_oracle_orbit(params: Params, modes, env: Environment, u0, n_epochs: int, dt: float = 1e-4) -> np.ndarray:
    """Integrate the listed modes through ``n_epochs`` full (off, on) cycles.

    Each holding interval is split into equal steps no longer than ``dt`` so
    that no step straddles a switch.
    """
    u = np.array(u0, dtype=float)
    for n in range(1, n_epochs + 1):
        t0, t1 = env.pair(n)
        for state, span in ((0, t0), (1, t1)):
            steps = max(1, math.ceil(span / dt))
            h = span / steps
            for i, k in enumerate(modes):
                x = u[i]
                for _ in range(steps):
                    x = ode_oracle_step(params, int(k), state, x, h)
                u[i] = x
    return u


def _segments(env: Environment, t: float):
    """(state, duration) pieces of [0, t]."""
    out = []
    clock = 0.0
    k = 1
    while clock < t:
        t0, t1 = env.pair(k)
        for state, span in ((0, t0), (1, t1)):
            d = min(span, t - clock)
            if d > 0:
                out.append((state, d))
            clock += d
            if clock >= t:
                break
        k += 1
    return out


class _CNOperator:
    """Second-difference operator on interior nodes with a Dirichlet row at x=0
    and a switchable condition at x=L."""

    def __init__(self, example: str, params: Params, n: int):
        self.example = example
        self.params = params
        self.n = n
        self.dx = params.L / n
        self.lam = params.D / self.dx**2

    def diagonals(self, state: int):
        m = self.n - 1
        lower = np.full(m, self.lam)
        diag = np.full(m, -2 * self.lam)
        upper = np.full(m, self.lam)
        source = np.zeros(m)
        if state == 0:
            source[-1] = self.lam * self.params.b
        elif self.example == "DD":
            pass
        else:
            # u_N = (4 u_{N-1} - u_{N-2}) / 3 folded into the last row
            diag[-1] = -2 * self.lam / 3
            lower[-2] = 2 * self.lam / 3
        return lower, diag, upper, source

    def boundary_value(self, state: int, interior: np.ndarray) -> float:
        if state == 0:
            return self.params.b
        if self.example == "DD":
            return 0.0
        return (4 * interior[-1] - interior[-2]) / 3

    def step(self, u: np.ndarray, state: int, h: float, theta: float) -> np.ndarray:
        lower, diag, upper, source = self.diagonals(state)
        # explicit part: (I + (1-theta) h A) u + h f
        rhs = u + h * source
        if theta < 1:
            Au = diag * u
            Au[1:] += lower[:-1] * u[:-1]
            Au[:-1] += upper[1:] * u[1:]
            rhs = rhs + (1 - theta) * h * Au
        ab = np.zeros((3, len(u)))
        ab[0, 1:] = -theta * h * upper[1:]
        ab[1] = 1 - theta * h * diag
        ab[2, :-1] = -theta * h * lower[:-1]
        return solve_banded((1, 1), ab, rhs)


def fd_oracle(
    example: str,
    params: Params,
    u0_grid,
    t: float,
    dx: float,
    dt: float,
    env: Environment,
    smoothing_steps: int = 4,
) -> np.ndarray:
    """Crank-Nicolson solution on the nodes ``0, dx, ..., L`` at time ``t``.

    The step is shortened so every switch lands on a step boundary. After the
    start and after each switch the first ``smoothing_steps`` steps are
    backward Euler with half the step size (Rannacher start-up), which damps
    the jump in boundary data without losing second order.
    """
    example = example.upper()
    n = round(params.L / dx)
    if n < 3 or not math.isclose(n * dx, params.L, rel_tol=1e-9):
        raise ValueError("dx must divide L into at least 3 cells")
    u0 = np.asarray(u0_grid, dtype=float)
    if u0.shape != (n + 1,):
        raise ValueError(f"u0_grid must have {n + 1} nodes")
    op = _CNOperator(example, params, n)
    u = u0[1:-1].copy()
    state = 0
    for state, span in _segments(env, t):
        steps = max(1, math.ceil(span / dt))
        h = span / steps
        done = 0
        if smoothing_steps and steps >= smoothing_steps // 2 + 1:
            for _ in range(smoothing_steps):
                u = op.step(u, state, h / 2, theta=1.0)
            done = smoothing_steps // 2
        for _ in range(steps - done):
            u = op.step(u, state, h, theta=0.5)
    out = np.empty(n + 1)
    out[0] = 0.0
    out[1:-1] = u
    out[-1] = op.boundary_value(state, u) if t > 0 else u0[-1]
    return out
