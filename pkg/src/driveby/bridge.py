"""Simply supported Euler-Bernoulli beam with cubic Hermite elements."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

#: Nominal intact bridge.
RHO_A = 4400.0
EI = 1.560e10
ALPHA_C = 0.7024
BETA_C = 0.005200
SPAN = 30.0
ELEM_LEN = 2.0

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class BridgeParams:
    rhoA: float = RHO_A
    ei: np.ndarray = field(default_factory=lambda: np.full(15, EI))
    alpha_c: float = ALPHA_C
    beta_c: float = BETA_C
    span: float = SPAN
    elem_len: float = ELEM_LEN

    def __post_init__(self):
        ei = np.atleast_1d(np.asarray(self.ei, dtype=float)).copy()
        ei.setflags(write=False)
        object.__setattr__(self, "ei", ei)
        if not self.rhoA > 0:
            raise ValueError("rhoA must be positive")
        if np.any(ei <= 0):
            raise ValueError("flexural rigidities must be positive")
        if not (self.span > 0 and self.elem_len > 0):
            raise ValueError("span and elem_len must be positive")
        if abs(ei.size * self.elem_len - self.span) > 1e-12 * self.span:
            raise ValueError(
                f"{ei.size} elements of {self.elem_len} m do not make a {self.span} m span"
            )

    @property
    def n_elem(self):
        return self.ei.size

    @classmethod
    def uniform(cls, ei=EI, n_elem=15, **kw):
        return cls(ei=np.full(n_elem, float(ei)), **kw)

    @classmethod
    def damaged(cls, element=7, factor=0.5, **kw):
        """Intact bridge with element ``element`` (0-based) weakened by ``factor``."""
        p = cls(**kw)
        ei = p.ei.copy()
        ei[element] *= factor
        return cls(p.rhoA, ei, p.alpha_c, p.beta_c, p.span, p.elem_len)


@dataclass(frozen=True)
class BeamSystem:
    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    dof_map: np.ndarray  # global DOF -> free index, -1 where restrained

    @property
    def n_free(self):
        return self.M.shape[0]


def hermite_basis(X):
    """Cubic Hermite functions and their second derivatives in local coordinate.

    ``X = -1`` is the first node of the element and ``X = +1`` the second.
    Returns ``(phi, d2phi)`` with shape ``(4,) + shape(X)``.
    """
    X = np.asarray(X, dtype=float)
    if np.any(np.abs(X) > 1.0 + 1e-12):
        raise ValueError("local coordinate must lie in [-1, 1]")
    phi = np.array([
        0.25 * (X - 1) ** 2 * (X + 2),
        0.25 * (X - 1) ** 2 * (X + 1),
        -0.25 * (X + 1) ** 2 * (X - 2),
        0.25 * (X + 1) ** 2 * (X - 1),
    ])
    d2phi = np.array([1.5 * X, 1.5 * X - 0.5, -1.5 * X, 1.5 * X + 0.5])
    return phi, d2phi


def _dof_scale(elem_len):
    # rotation DOFs carry the dx/2 factor of the global basis
    h = 0.5 * elem_len
    return np.array([1.0, h, 1.0, h])


def element_matrices(rhoA, ei, elem_len, n_gauss=4):
    """Consistent mass and bending stiffness of one element by Gauss quadrature."""
    if n_gauss == 4:
        gx, gw = _GAUSS_X, _GAUSS_W
    else:
        gx, gw = np.polynomial.legendre.leggauss(n_gauss)
    s = _dof_scale(elem_len)
    jac = 0.5 * elem_len
    phi, d2 = hermite_basis(gx)
    N = phi * s[:, None]
    B = d2 * s[:, None] / jac**2
    m = rhoA * jac * (N * gw) @ N.T
    k = ei * jac * (B * gw) @ B.T
    return m, k


def _free_dofs(n_elem):
    n_dof = 2 * (n_elem + 1)
    restrained = {0, 2 * n_elem}
    dof_map = -np.ones(n_dof, dtype=int)
    free = [d for d in range(n_dof) if d not in restrained]
    dof_map[free] = np.arange(len(free))
    return np.array(free), dof_map


def assemble(params):
    """Global M, C, K over the free DOFs of a pin-supported beam."""
    n = params.n_elem
    n_dof = 2 * (n + 1)
    M = np.zeros((n_dof, n_dof))
    K = np.zeros((n_dof, n_dof))
    for j in range(n):
        m, k = element_matrices(params.rhoA, params.ei[j], params.elem_len)
        sl = slice(2 * j, 2 * j + 4)
        M[sl, sl] += m
        K[sl, sl] += k
    free, dof_map = _free_dofs(n)
    M = M[np.ix_(free, free)]
    K = K[np.ix_(free, free)]
    M = 0.5 * (M + M.T)
    K = 0.5 * (K + K.T)
    C = params.alpha_c * M + params.beta_c * K
    return BeamSystem(M, C, K, dof_map)


def load_stencil(axle_positions, params):
    """Free-DOF indices and basis weights for each axle position.

    ``axle_positions`` has shape ``(..., n_axles)``. Returns ``(idx, w)`` of
    shape ``(..., n_axles, 4)``; off-bridge axles get index 0 and weight 0.
    Restrained DOFs also get weight 0.
    """
    x = np.asarray(axle_positions, dtype=float)
    n, h = params.n_elem, params.elem_len
    on = (x >= 0.0) & (x <= params.span)
    j = np.clip(np.floor(np.where(on, x, 0.0) / h).astype(int), 0, n - 1)
    X = np.clip(2.0 * (x - j * h) / h - 1.0, -1.0, 1.0)
    phi, _ = hermite_basis(np.where(on, X, 0.0))
    w = np.moveaxis(phi, 0, -1) * _dof_scale(h)
    _, dof_map = _free_dofs(n)
    gdof = 2 * j[..., None] + np.arange(4)
    idx = dof_map[gdof]
    w = np.where((idx >= 0) & on[..., None], w, 0.0)
    idx = np.where(idx >= 0, idx, 0)
    return idx, w


def load_distribution(axle_positions, params):
    """Dense load-distribution matrix L, shape ``(n_free, n_axles)``."""
    x = np.atleast_1d(np.asarray(axle_positions, dtype=float))
    idx, w = load_stencil(x, params)
    L = np.zeros((2 * params.n_elem, x.size))
    for i in range(x.size):
        np.add.at(L[:, i], idx[i], w[i])
    return L


def stencil_loads(idx, w, forces, n_free):
    """Nodal load history from a stencil and per-axle forces ``(nt, n_axles)``."""
    nt = forces.shape[0]
    out = np.zeros((nt, n_free))
    contrib = w * forces[..., None]
    rows = np.broadcast_to(np.arange(nt)[:, None, None], idx.shape)
    np.add.at(out, (rows, idx), contrib)
    return out


def stencil_profile(idx, w, y):
    """Deflection under each axle from a nodal history ``y`` ``(nt, n_free)``."""
    nt = y.shape[0]
    vals = y[np.arange(nt)[:, None, None], idx]
    return np.sum(vals * w, axis=-1)


def bridge_profile(y, axle_positions, params):
    """Deflection at the given axle positions for one nodal vector ``y``."""
    return load_distribution(axle_positions, params).T @ np.asarray(y, dtype=float)


def natural_frequencies(system, count=4):
    try:
        w2 = scipy.linalg.eigh(system.K, system.M, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    w2 = np.sort(np.clip(w2, 0.0, None))
    return [float(f) for f in np.sqrt(w2[:count]) / (2.0 * np.pi)]


def deflection_at(y, x, params):
    """Deflection history at a fixed position ``x`` from nodal history ``y``."""
    idx, w = load_stencil(np.array([x]), params)
    return np.asarray(y)[..., idx[0]] @ w[0]


def static_deflection(system, params, positions, forces):
    """Static nodal solution of ``K y = L P`` for point loads."""
    L = load_distribution(positions, params)
    return np.linalg.solve(system.K, L @ np.asarray(forces, dtype=float))
