"""Newmark-beta integration for linear second-order systems."""
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class NewmarkConfig:
    dt: float = 0.001
    gamma: float = 0.5
    beta: float = 0.25

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.gamma > 0 and self.beta > 0):
            raise ValueError("gamma and beta must be positive")


@dataclass(frozen=True)
class DynState:
    eta: np.ndarray
    eta_dot: np.ndarray
    eta_ddot: np.ndarray

    def __post_init__(self):
        n = np.shape(self.eta)
        if np.shape(self.eta_dot) != n or np.shape(self.eta_ddot) != n:
            raise ValueError("state vectors must have equal lengths")

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))


def effective_matrix(M, C, K, cfg):
    return M + cfg.gamma * cfg.dt * C + cfg.beta * cfg.dt**2 * K


def newmark_step(M, C, K, state, xi_next, cfg):
    """Advance ``state`` by one step under the load ``xi_next`` at t + dt.

    Solves ``A a_next = b`` with ``A = M + gamma dt C + beta dt^2 K`` and then
    updates velocity and displacement with the Newmark relations.
    """
    dt, g, b = cfg.dt, cfg.gamma, cfg.beta
    vp = state.eta_dot + dt * (1.0 - g) * state.eta_ddot
    xp = state.eta + dt * state.eta_dot + dt * dt * (0.5 - b) * state.eta_ddot
    rhs = np.asarray(xi_next, dtype=float) - C @ vp - K @ xp
    A = effective_matrix(M, C, K, cfg)
    try:
        a_next = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("Newmark effective matrix is singular") from exc
    return DynState(xp + b * dt * dt * a_next, vp + g * dt * a_next, a_next)


def integrate_history(M, C, K, loads, cfg, x0=None, v0=None):
    """Whole-run Newmark history; thin wrapper around the selected kernel.

    ``loads`` has one row per time step (row 0 at t = 0). Returns
    ``(x, v, a)`` each shaped like ``loads``.
    """
    loads = np.ascontiguousarray(loads, dtype=float)
    n = loads.shape[1]
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
    M, C, K = (np.ascontiguousarray(m, dtype=float) for m in (M, C, K))
    return kernels.newmark_linear(M, C, K, loads, cfg.dt, cfg.gamma, cfg.beta, x0, v0)


def integrate_accel(accel, cfg, v0=0.0, x0=0.0):
    """Velocity and displacement from a uniformly sampled acceleration record.

    Applies the Newmark update relations as a quadrature rule along axis 0.
    Zero initial conditions unless given; no detrending.
    """
    a = np.asarray(accel, dtype=float)
    dt, g, b = cfg.dt, cfg.gamma, cfg.beta
    dv = dt * ((1.0 - g) * a[:-1] + g * a[1:])
    v = np.empty_like(a)
    v[0] = v0
    v[1:] = v0 + np.cumsum(dv, axis=0)
    dx = dt * v[:-1] + dt * dt * ((0.5 - b) * a[:-1] + b * a[1:])
    x = np.empty_like(a)
    x[0] = x0
    x[1:] = x0 + np.cumsum(dx, axis=0)
    return v, x
