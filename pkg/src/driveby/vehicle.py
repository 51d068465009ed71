"""Half-car rigid-body-spring vehicle model."""
from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg

G = 9.81


@dataclass(frozen=True)
class VehicleParams:
    """Two-axle vehicle. Axle 1 is the front axle."""

    m_s: float = 8310.0
    c_s1: float = 24200.0
    c_s2: float = 29000.0
    k_s1: float = 456000.0
    k_s2: float = 410000.0
    d_1: float = 1.215
    d_2: float = 3.185
    m_u1: float = 469.0
    m_u2: float = 751.0
    k_u1: float = 4.79e6
    k_u2: float = 4.31e6
    speed: float = 10.0

    def __post_init__(self):
        positive = ("m_s", "k_s1", "k_s2", "d_1", "d_2", "m_u1", "m_u2", "k_u1", "k_u2")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("c_s1", "c_s2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total_mass(self):
        return self.m_s + self.m_u1 + self.m_u2

    @property
    def wheelbase(self):
        return self.d_1 + self.d_2

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class VehicleSystem:
    """Matrices of ``M z'' + C z' + K z = F u`` in DOF order (z_s1, z_s2, z_u1, z_u2)."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    F: np.ndarray


def apportion_sprung_mass(p):
    D = p.wheelbase
    return p.m_s * p.d_2 / D, p.m_s * p.d_1 / D


def build_system(p):
    m_s1, m_s2 = apportion_sprung_mass(p)
    M = np.diag([m_s1, m_s2, p.m_u1, p.m_u2])
    K = np.array([
        [p.k_s1, 0.0, -p.k_s1, 0.0],
        [0.0, p.k_s2, 0.0, -p.k_s2],
        [-p.k_s1, 0.0, p.k_s1 + p.k_u1, 0.0],
        [0.0, -p.k_s2, 0.0, p.k_s2 + p.k_u2],
    ])
    C = np.array([
        [p.c_s1, 0.0, -p.c_s1, 0.0],
        [0.0, p.c_s2, 0.0, -p.c_s2],
        [-p.c_s1, 0.0, p.c_s1, 0.0],
        [0.0, -p.c_s2, 0.0, p.c_s2],
    ])
    F = np.zeros((4, 2))
    F[2, 0] = p.k_u1
    F[3, 1] = p.k_u2
    return VehicleSystem(M, C, K, F)


def coupled_system(p):
    """Body bounce/pitch form in DOF order (z_G, theta_G, z_u1, z_u2).

    Written straight from the translational and rotational equations of the
    sprung body with ``I_s = m_s d_1 d_2``. Also returns the matrix ``T`` with
    ``(z_s1, z_s2, z_u1, z_u2) = T @ (z_G, theta_G, z_u1, z_u2)``.
    """
    d1, d2 = p.d_1, p.d_2
    I_s = p.m_s * d1 * d2
    M = np.diag([p.m_s, I_s, p.m_u1, p.m_u2])

    def spring_block(k1, k2, ku1, ku2):
        # suspension deflections: z_s1 - z_u1 = z_G + d1 th - z_u1, z_s2 - z_u2 = z_G - d2 th - z_u2
        return np.array([
            [k1 + k2, k1 * d1 - k2 * d2, -k1, -k2],
            [k1 * d1 - k2 * d2, k1 * d1**2 + k2 * d2**2, -k1 * d1, k2 * d2],
            [-k1, -k1 * d1, k1 + ku1, 0.0],
            [-k2, k2 * d2, 0.0, k2 + ku2],
        ])

    K = spring_block(p.k_s1, p.k_s2, p.k_u1, p.k_u2)
    C = spring_block(p.c_s1, p.c_s2, 0.0, 0.0)
    F = np.zeros((4, 2))
    F[2, 0] = p.k_u1
    F[3, 1] = p.k_u2
    T = np.array([
        [1.0, d1, 0.0, 0.0],
        [1.0, -d2, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    return VehicleSystem(M, C, K, F), T


def natural_frequencies(p):
    """Undamped natural frequencies in Hz, ascending."""
    s = build_system(p)
    w2 = scipy.linalg.eigh(s.K, s.M, eigvals_only=True)
    return [float(f) for f in np.sqrt(np.sort(w2)) / (2.0 * np.pi)]


def static_tire_preload(p, g=G):
    """``(k_u1 z0_u1, k_u2 z0_u2)``: tire spring forces at static equilibrium."""
    m_s1, m_s2 = apportion_sprung_mass(p)
    return -(m_s1 + p.m_u1) * g, -(m_s2 + p.m_u2) * g


def contact_forces(z, zdot, zddot, u, p, g=G):
    """Axle contact forces in two equivalent forms.

    ``z``, ``zdot``, ``zddot`` have shape ``(..., 4)``; ``u`` has shape
    ``(..., 2)``. Returns ``(stiffness_form, inertial_form)``, each
    ``(..., 2)``. Negative values push down on the bridge.
    """
    z = np.asarray(z, dtype=float)
    zddot = np.asarray(zddot, dtype=float)
    u = np.asarray(u, dtype=float)
    pre = np.array(static_tire_preload(p, g))
    ku = np.array([p.k_u1, p.k_u2])
    stiff = ku * (z[..., 2:4] - u) + pre
    return stiff, inertial_contact_forces(zddot, p, g)


def inertial_contact_forces(zddot, p, g=G):
    zddot = np.asarray(zddot, dtype=float)
    m_s1, m_s2 = apportion_sprung_mass(p)
    ms = np.array([m_s1, m_s2])
    mu = np.array([p.m_u1, p.m_u2])
    return -ms * (g + zddot[..., 0:2]) - mu * (g + zddot[..., 2:4])


def mechanical_energy(z, zdot, u, p):
    """Kinetic plus spring energy of the decoupled model for input ``u``."""
    s = build_system(p)
    z = np.asarray(z, dtype=float)
    zdot = np.asarray(zdot, dtype=float)
    u = np.asarray(u, dtype=float)
    kin = 0.5 * np.einsum("...i,ij,...j->...", zdot, s.M, zdot)
    ds = z[..., 0:2] - z[..., 2:4]
    dt = z[..., 2:4] - u
    pot = 0.5 * (p.k_s1 * ds[..., 0] ** 2 + p.k_s2 * ds[..., 1] ** 2
                 + p.k_u1 * dt[..., 0] ** 2 + p.k_u2 * dt[..., 1] ** 2)
    return kin + pot
