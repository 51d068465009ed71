"""Input-profile estimation with an augmented-state Kalman filter.

State order: (z_s1, z_s2, z_u1, z_u2, z'_s1, z'_s2, z'_u1, z'_u2, u_1, u_2, u'_1, u'_2).
Observations: (z''_s1, z''_s2, z_s1, z_s2), the displacements being integrated
from the measured accelerations.
"""
from dataclasses import dataclass, field

import numpy as np

from . import bridge as bfem
from . import kernels
from . import vehicle as veh
from .newmark import NewmarkConfig, integrate_accel, integrate_history

N_STATE = 12
N_OBS = 4

_Q_VEHICLE = {
    0.0: np.zeros(8),
    0.15: np.r_[np.full(4, 6.00), np.full(4, 4.50)] * 1e-7,
    0.35: np.r_[np.full(4, 60.0), np.full(4, 45.0)] * 1e-7,
}
_Q_INPUT = np.array([181.0, 178.0, 133000.0, 133000.0]) * 1e-7
_R = {
    0.0: np.full(4, 1.00e-9),
    0.15: np.array([6.00, 6.00, 7.50, 7.50]) * 1e-4,
    0.35: np.array([6.00, 6.00, 7.50, 7.50]) * 1e-3,
}
DEFAULT_P0 = np.r_[np.full(8, 1e-6), np.full(2, 1e-4), np.full(2, 1e-2)]


def noise_covariances(noise_pct):
    """Diagonals of Q and R for the tabulated noise case nearest ``noise_pct``."""
    level = min(_R, key=lambda k: abs(k - noise_pct))
    return np.r_[_Q_VEHICLE[level], _Q_INPUT], _R[level].copy()


@dataclass(frozen=True)
class FilterConfig:
    q_diag: np.ndarray
    r_diag: np.ndarray
    p0_diag: np.ndarray = field(default_factory=lambda: DEFAULT_P0.copy())
    dt: float = 0.001
    gamma: float = 0.5
    beta: float = 0.25
    dx_obj: float | None = None  # defaults to speed * dt

    @classmethod
    def for_noise(cls, noise_pct, **kw):
        q, r = noise_covariances(noise_pct)
        return cls(q, r, **kw)

    @property
    def newmark(self):
        return NewmarkConfig(self.dt, self.gamma, self.beta)


@dataclass(frozen=True)
class StateSpace:
    V: np.ndarray
    H: np.ndarray
    V_bar: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    dt: float


@dataclass
class FilterState:
    Z_hat: np.ndarray
    P: np.ndarray


def continuous_matrices(p):
    s = veh.build_system(p)
    Minv = np.diag(1.0 / np.diag(s.M))
    V = np.zeros((N_STATE, N_STATE))
    V[0:4, 4:8] = np.eye(4)
    V[4:8, 0:4] = -Minv @ s.K
    V[4:8, 4:8] = -Minv @ s.C
    V[4:8, 8:10] = Minv @ s.F
    V[8:10, 10:12] = np.eye(2)
    H = np.zeros((N_OBS, N_STATE))
    H[0:2] = V[4:6]
    H[2, 0] = 1.0
    H[3, 1] = 1.0
    return V, H


def build_state_space(p, q_diag, r_diag, dt):
    V, H = continuous_matrices(p)
    return StateSpace(V, H, discretize(V, dt), np.diag(q_diag), np.diag(r_diag), dt)


def _expm_taylor(A, tol=1e-18, max_terms=40):
    """Scaling-and-squaring with a truncated Taylor series."""
    norm = np.linalg.norm(A, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.25)))) if norm > 0 else 0
    B = A / 2.0**s
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, max_terms):
        term = term @ B / k
        E = E + term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(E, 1):
            break
    for _ in range(s):
        E = E @ E
    return E


def discretize(V, dt, cond_limit=1e12):
    """``exp(V dt)`` by eigendecomposition, or Taylor scaling-and-squaring
    when the eigenvector matrix is ill-conditioned."""
    A = np.asarray(V, dtype=float) * dt
    out = None
    try:
        lam, U = np.linalg.eig(A)
        if np.linalg.cond(U) <= cond_limit:
            out = (U * np.exp(lam)) @ np.linalg.inv(U)
            out = out.real if np.allclose(out.imag, 0.0, atol=1e-12) else None
    except np.linalg.LinAlgError:
        out = None
    if out is None:
        out = _expm_taylor(A)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("matrix exponential is not finite")
    return out


def observability_matrix(V, H):
    n = V.shape[0]
    blocks = [H]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ V)
    return np.vstack(blocks)


def observability_rank(V, H, rtol=1e-10):
    V = np.asarray(V, dtype=float)
    H = np.asarray(H, dtype=float)
    if not np.any(H):
        return 0
    # rank is unchanged by scaling V; keeps the powers bounded
    rho = np.max(np.abs(np.linalg.eigvals(V)))
    Vs = V / rho if rho > 0 else V
    O = observability_matrix(Vs, H)
    norms = np.linalg.norm(O, axis=1)
    O = O[norms > 0] / norms[norms > 0, None]
    sv = np.linalg.svd(O, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


def kalman_step(fs, s_k, model):
    """One predict/update cycle; returns a new :class:`FilterState`."""
    Vb, H = model.V_bar, model.H
    pred = Vb @ fs.Z_hat
    Sa = Vb @ fs.P @ Vb.T + model.Q
    S = H @ Sa @ H.T + model.R
    try:
        G = np.linalg.solve(S, H @ Sa).T
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("innovation covariance is singular") from exc
    I = np.eye(Vb.shape[0])
    Z = (I - G @ H) @ pred + G @ np.asarray(s_k, dtype=float)
    P = (I - G @ H) @ Sa
    return FilterState(Z, 0.5 * (P + P.T))


def observations(acc, cfg):
    """Stack measured accelerations with their integrated displacements."""
    acc = np.asarray(acc, dtype=float)
    _, disp = integrate_accel(acc, cfg.newmark)
    return np.ascontiguousarray(np.column_stack([acc, disp]))


def estimate_inputs(acc, model, cfg, obs=None):
    """Filtered state history ``(nt, 12)`` from the two acceleration channels."""
    if obs is None:
        obs = observations(acc, cfg)
    z0 = np.zeros(N_STATE)
    P0 = np.diag(cfg.p0_diag)
    Z, _ = kernels.kalman_filter(
        np.ascontiguousarray(model.V_bar), np.ascontiguousarray(model.H),
        np.ascontiguousarray(model.Q), np.ascontiguousarray(model.R), obs, z0, P0,
    )
    return Z


def estimate_bridge_response(Z, vehicle, bridge, stencil, nm, V=None):
    """Bridge nodal history driven by contact forces implied by ``Z``.

    ``stencil`` is the ``(idx, w)`` pair from :func:`bridge.load_stencil`.
    """
    if V is None:
        V, _ = continuous_matrices(vehicle)
    zdd = Z @ V[4:8].T
    forces = veh.inertial_contact_forces(zdd, vehicle)
    beam = bfem.assemble(bridge)
    idx, w = stencil
    loads = bfem.stencil_loads(idx, w, forces, beam.n_free)
    y, _, _ = integrate_history(beam.M, beam.C, beam.K, loads, nm)
    return y


@dataclass
class RoadEstimate:
    x: np.ndarray
    front: np.ndarray
    rear: np.ndarray


def overlap_grid(x, dx):
    lo = max(x[0, 0], x[0, 1])
    hi = min(x[-1, 0], x[-1, 1])
    if not hi > lo:
        raise ValueError("axle tracks do not overlap")
    n = int(np.floor((hi - lo) / dx + 1e-9)) + 1
    return lo + dx * np.arange(n)


def recover_road_profiles(u, ybar, x, dx):
    """Road profiles under each axle, resampled on the shared spatial grid.

    ``u`` and ``ybar`` are ``(nt, 2)`` input-profile and bridge-profile
    histories, ``x`` the matching axle positions.
    """
    r = np.asarray(u) - np.asarray(ybar)
    grid = overlap_grid(x, dx)
    return RoadEstimate(
        grid,
        np.interp(grid, x[:, 0], r[:, 0]),
        np.interp(grid, x[:, 1], r[:, 1]),
    )


def objective(R1, R2):
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    if R1.shape != R2.shape:
        raise ValueError(f"profile grids differ: {R1.shape} vs {R2.shape}")
    d = R1 - R2
    return float(d @ d)


class Problem:
    """Measured data plus everything about it that does not depend on the
    candidate parameters: observations, axle stencil and comparison grid."""

    def __init__(self, t, x, acc, speed, cfg, span=bfem.SPAN, elem_len=bfem.ELEM_LEN):
        self.t = np.asarray(t, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.acc = np.asarray(acc, dtype=float)
        self.speed = float(speed)
        self.cfg = cfg
        self.span = span
        self.elem_len = elem_len
        self.obs = observations(self.acc, cfg)
        n_elem = int(round(span / elem_len))
        ref = bfem.BridgeParams(ei=np.ones(n_elem), span=span, elem_len=elem_len)
        self.stencil = bfem.load_stencil(self.x, ref)
        self.dx = cfg.dx_obj if cfg.dx_obj else self.speed * cfg.dt

    @classmethod
    def from_record(cls, rec, cfg, speed, span=bfem.SPAN, elem_len=bfem.ELEM_LEN, noisy=True):
        acc = rec.acc_noisy if noisy else rec.acc
        return cls(rec.t, rec.x, acc, speed, cfg, span, elem_len)

    def evaluate(self, vehicle, bridge, full=False):
        """Objective for one candidate; with ``full`` also the intermediate results."""
        model = build_state_space(vehicle, self.cfg.q_diag, self.cfg.r_diag, self.cfg.dt)
        Z = estimate_inputs(None, model, self.cfg, obs=self.obs)
        y = estimate_bridge_response(Z, vehicle, bridge, self.stencil, self.cfg.newmark, V=model.V)
        ybar = bfem.stencil_profile(*self.stencil, y)
        est = recover_road_profiles(Z[:, 8:10], ybar, self.x, self.dx)
        J = objective(est.front, est.rear)
        if full:
            return J, {"Z": Z, "y": y, "ybar": ybar, "road": est}
        return J
