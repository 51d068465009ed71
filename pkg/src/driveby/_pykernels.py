"""Pure numpy implementations of the time-stepping kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop for loop.
"""
import numpy as np


def newmark_linear(M, C, K, loads, dt, gamma, beta, x0, v0):
    """Newmark-beta time history of ``M a + C v + K x = loads[k]``.

    Returns displacement, velocity and acceleration arrays of shape
    ``(n_steps, n_dof)``. Row 0 holds the initial state; the initial
    acceleration is solved from the equation of motion.
    """
    loads = np.asarray(loads, dtype=float)
    nt, n = loads.shape
    x = np.empty((nt, n))
    v = np.empty((nt, n))
    a = np.empty((nt, n))
    x[0] = x0
    v[0] = v0
    a[0] = np.linalg.solve(M, loads[0] - C @ v0 - K @ x0)
    A_inv = np.linalg.inv(M + gamma * dt * C + beta * dt * dt * K)
    c1 = dt * (1.0 - gamma)
    c2 = dt * dt * (0.5 - beta)
    for k in range(nt - 1):
        vp = v[k] + c1 * a[k]
        xp = x[k] + dt * v[k] + c2 * a[k]
        a[k + 1] = A_inv @ (loads[k + 1] - C @ vp - K @ xp)
        v[k + 1] = vp + gamma * dt * a[k + 1]
        x[k + 1] = xp + beta * dt * dt * a[k + 1]
    return x, v, a


def kalman_filter(Vbar, H, Q, R, obs, z0, P0):
    """Run the linear Kalman recursion over ``obs`` (shape ``(n_steps, n_obs)``).

    Row 0 of the output is ``z0``; the update for row k uses ``obs[k]``.
    Returns ``(states, final_P)``.
    """
    nt = obs.shape[0]
    n = Vbar.shape[0]
    out = np.empty((nt, n))
    z = np.array(z0, dtype=float)
    P = np.array(P0, dtype=float)
    out[0] = z
    Vt = Vbar.T
    Ht = H.T
    for k in range(1, nt):
        pred = Vbar @ z
        Sa = Vbar @ P @ Vt + Q
        HS = H @ Sa
        S = HS @ Ht + R
        # G^T = S^-1 (H Sa), S symmetric
        Gt = np.linalg.solve(S, HS)
        z = pred + Gt.T @ (obs[k] - H @ pred)
        P = Sa - Gt.T @ HS
        P = 0.5 * (P + P.T)
        out[k] = z
    return out, P
