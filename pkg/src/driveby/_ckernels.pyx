# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the loops in ``_pykernels``. Same signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline void matvec(const double[:, ::1] A, const double* x, double* out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * x[j]
        out[i] = acc


def newmark_linear(double[:, ::1] M, double[:, ::1] C, double[:, ::1] K,
                   double[:, ::1] loads, double dt, double gamma, double beta,
                   double[::1] x0, double[::1] v0):
    cdef Py_ssize_t nt = loads.shape[0], n = loads.shape[1]
    cdef Py_ssize_t k, i
    x_arr = np.empty((nt, n))
    v_arr = np.empty((nt, n))
    a_arr = np.empty((nt, n))
    cdef double[:, ::1] x = x_arr
    cdef double[:, ::1] v = v_arr
    cdef double[:, ::1] a = a_arr
    Mn = np.asarray(M)
    Cn = np.asarray(C)
    Kn = np.asarray(K)
    x0n = np.asarray(x0)
    v0n = np.asarray(v0)
    a_arr[0] = np.linalg.solve(Mn, np.asarray(loads[0]) - Cn @ v0n - Kn @ x0n)
    x_arr[0] = x0n
    v_arr[0] = v0n
    cdef double[:, ::1] Ainv = np.ascontiguousarray(
        np.linalg.inv(Mn + gamma * dt * Cn + beta * dt * dt * Kn))
    cdef double[::1] vp = np.empty(n)
    cdef double[::1] xp = np.empty(n)
    cdef double[::1] cv = np.empty(n)
    cdef double[::1] kx = np.empty(n)
    cdef double[::1] rhs = np.empty(n)
    cdef double c1 = dt * (1.0 - gamma)
    cdef double c2 = dt * dt * (0.5 - beta)
    cdef double gdt = gamma * dt
    cdef double bdt2 = beta * dt * dt
    with nogil:
        for k in range(nt - 1):
            for i in range(n):
                vp[i] = v[k, i] + c1 * a[k, i]
                xp[i] = x[k, i] + dt * v[k, i] + c2 * a[k, i]
            matvec(C, &vp[0], &cv[0], n)
            matvec(K, &xp[0], &kx[0], n)
            for i in range(n):
                rhs[i] = loads[k + 1, i] - cv[i] - kx[i]
            matvec(Ainv, &rhs[0], &a[k + 1, 0], n)
            for i in range(n):
                v[k + 1, i] = vp[i] + gdt * a[k + 1, i]
                x[k + 1, i] = xp[i] + bdt2 * a[k + 1, i]
    return x_arr, v_arr, a_arr


cdef int solve_spd_inplace(double* S, double* B, Py_ssize_t m, Py_ssize_t ncol) noexcept nogil:
    """Cholesky solve S X = B for m x m SPD S; B is m x ncol, overwritten with X."""
    cdef Py_ssize_t i, j, k, c
    cdef double s
    for j in range(m):
        s = S[j * m + j]
        for k in range(j):
            s -= S[j * m + k] * S[j * m + k]
        if s <= 0.0:
            return -1
        S[j * m + j] = sqrt(s)
        for i in range(j + 1, m):
            s = S[i * m + j]
            for k in range(j):
                s -= S[i * m + k] * S[j * m + k]
            S[i * m + j] = s / S[j * m + j]
    for c in range(ncol):
        for i in range(m):
            s = B[i * ncol + c]
            for k in range(i):
                s -= S[i * m + k] * B[k * ncol + c]
            B[i * ncol + c] = s / S[i * m + i]
        for i in range(m - 1, -1, -1):
            s = B[i * ncol + c]
            for k in range(i + 1, m):
                s -= S[k * m + i] * B[k * ncol + c]
            B[i * ncol + c] = s / S[i * m + i]
    return 0


def kalman_filter(double[:, ::1] Vbar, double[:, ::1] H, double[:, ::1] Q,
                  double[:, ::1] R, double[:, ::1] obs, double[::1] z0, double[:, ::1] P0):
    cdef Py_ssize_t nt = obs.shape[0], n = Vbar.shape[0], m = H.shape[0]
    cdef Py_ssize_t k, i, j, l
    cdef double acc
    out_arr = np.empty((nt, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] z = np.array(z0, dtype=np.float64)
    P_arr = np.array(P0, dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef double[::1] pred = np.empty(n)
    cdef double[:, ::1] T = np.empty((n, n))
    cdef double[:, ::1] Sa = np.empty((n, n))
    cdef double[:, ::1] HS = np.empty((m, n))
    cdef double[:, ::1] Gt = np.empty((m, n))
    cdef double[:, ::1] S = np.empty((m, m))
    cdef double[::1] innov = np.empty(m)
    cdef int info = 0
    for i in range(n):
        out[0, i] = z[i]
    with nogil:
        for k in range(1, nt):
            # pred = Vbar z
            matvec(Vbar, &z[0], &pred[0], n)
            # T = Vbar P ; Sa = T Vbar^T + Q
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += Vbar[i, l] * P[l, j]
                    T[i, j] = acc
            for i in range(n):
                for j in range(i, n):
                    acc = Q[i, j]
                    for l in range(n):
                        acc += T[i, l] * Vbar[j, l]
                    Sa[i, j] = acc
                    Sa[j, i] = acc
            # HS = H Sa ; S = HS H^T + R
            for i in range(m):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += H[i, l] * Sa[l, j]
                    HS[i, j] = acc
                    Gt[i, j] = acc
            for i in range(m):
                for j in range(m):
                    acc = R[i, j]
                    for l in range(n):
                        acc += HS[i, l] * H[j, l]
                    S[i, j] = acc
            # Gt = S^-1 HS
            info = solve_spd_inplace(&S[0, 0], &Gt[0, 0], m, n)
            if info != 0:
                break
            for i in range(m):
                acc = obs[k, i]
                for l in range(n):
                    acc -= H[i, l] * pred[l]
                innov[i] = acc
            for i in range(n):
                acc = pred[i]
                for l in range(m):
                    acc += Gt[l, i] * innov[l]
                z[i] = acc
                out[k, i] = acc
            # P = Sa - Gt^T HS, symmetrized
            for i in range(n):
                for j in range(i, n):
                    acc = Sa[i, j]
                    for l in range(m):
                        acc -= 0.5 * (Gt[l, i] * HS[l, j] + Gt[l, j] * HS[l, i])
                    P[i, j] = acc
                    P[j, i] = acc
    if info != 0:
        raise np.linalg.LinAlgError("innovation covariance is not positive definite")
    return out_arr, P_arr
