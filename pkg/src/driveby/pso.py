"""Particle swarm identification of vehicle and bridge parameters."""
from dataclasses import dataclass, field, replace

import numpy as np

from . import bridge as bfem
from .vehicle import VehicleParams, apportion_sprung_mass

N_EI = 15
PARAM_NAMES = (
    ("d_1", "c_s1", "c_s2", "k_s1", "k_s2", "m_u1", "m_u2", "k_u1", "k_u2")
    + tuple(f"EI_{i}" for i in range(1, N_EI + 1))
    + ("rhoA", "alpha_c", "beta_c")
)
N_PARAMS = len(PARAM_NAMES)
_D1 = 0
_EI = slice(9, 9 + N_EI)
_RHOA, _ALPHA, _BETA = 9 + N_EI, 10 + N_EI, 11 + N_EI

#: Column order of normalized reports (sprung masses first, as in the
#: parameter vector of the method; d_1 appended).
REPORT_NAMES = (
    ("m_s1", "m_s2", "c_s1", "k_s1", "c_s2", "k_s2", "m_u1", "m_u2", "k_u1", "k_u2")
    + tuple(f"EI_{i}" for i in range(1, N_EI + 1))
    + ("rhoA", "alpha_c", "beta_c", "d_1")
)


class NonPhysicalCandidate(ValueError):
    pass


def candidate_vector(vehicle, bridge):
    return np.r_[
        vehicle.d_1, vehicle.c_s1, vehicle.c_s2, vehicle.k_s1, vehicle.k_s2,
        vehicle.m_u1, vehicle.m_u2, vehicle.k_u1, vehicle.k_u2,
        bridge.ei, bridge.rhoA, bridge.alpha_c, bridge.beta_c,
    ].astype(float)


def expand(x, M, D, speed, span=bfem.SPAN, elem_len=bfem.ELEM_LEN):
    """Turn a candidate vector into vehicle and bridge parameter objects.

    The sprung mass and rear distance follow from the known total mass ``M``
    and wheelbase ``D``.
    """
    x = np.asarray(x, dtype=float)
    m_s = M - x[5] - x[6]
    d_2 = D - x[_D1]
    if not (m_s > 0 and d_2 > 0 and x[_D1] > 0):
        raise NonPhysicalCandidate(f"m_s = {m_s:.3g}, d_2 = {d_2:.3g}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise NonPhysicalCandidate("all parameters must be positive and finite")
    try:
        vp = VehicleParams(
            m_s=m_s, c_s1=x[1], c_s2=x[2], k_s1=x[3], k_s2=x[4], d_1=x[_D1], d_2=d_2,
            m_u1=x[5], m_u2=x[6], k_u1=x[7], k_u2=x[8], speed=speed,
        )
        bp = bfem.BridgeParams(
            rhoA=x[_RHOA], ei=x[_EI], alpha_c=x[_ALPHA], beta_c=x[_BETA],
            span=span, elem_len=elem_len,
        )
    except ValueError as exc:
        raise NonPhysicalCandidate(str(exc)) from exc
    return vp, bp


def report_vector(x, M, D):
    """Parameters in report order, with the sprung masses expanded."""
    x = np.asarray(x, dtype=float)
    m_s = M - x[5] - x[6]
    d_1 = x[_D1]
    m_s1 = m_s * (D - d_1) / D
    m_s2 = m_s * d_1 / D
    return np.r_[m_s1, m_s2, x[1], x[3], x[2], x[4], x[5:9], x[_EI], x[_RHOA], x[_ALPHA], x[_BETA], d_1]


def normalized(x, truth, M, D):
    """Ratio of each reported parameter to its correct value."""
    return report_vector(x, M, D) / report_vector(truth, M, D)


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if np.any(self.upper < self.lower):
            raise ValueError("upper bound below lower bound")

    def clamp(self, X):
        return np.clip(X, self.lower, self.upper)

    def sample(self, rng, n):
        return self.lower + (self.upper - self.lower) * rng.random((n, self.lower.size))


def prior_bounds(reference, D, spread=0.2, d1_range=(0.1, 0.9)):
    """Uniform prior box: ``[1 - spread, 1 + spread]`` times the reference,
    except ``d_1`` which spans ``d1_range`` times the wheelbase."""
    ref = np.asarray(reference, dtype=float)
    lo = ref * (1.0 - spread)
    hi = ref * (1.0 + spread)
    lo[_D1], hi[_D1] = d1_range[0] * D, d1_range[1] * D
    return Bounds(lo, hi)


@dataclass
class Swarm:
    X: np.ndarray
    dX: np.ndarray
    L: np.ndarray
    LJ: np.ndarray
    G: np.ndarray
    GJ: float
    history: list = field(default_factory=list)

    @property
    def size(self):
        return self.X.shape[0]


def init_swarm(bounds, n, seed):
    if n < 2:
        raise ValueError("a swarm needs at least 2 particles")
    rng = np.random.default_rng(seed)
    X = bounds.sample(rng, n)
    return Swarm(
        X=X, dX=np.zeros_like(X), L=X.copy(), LJ=np.full(n, np.inf),
        G=X[0].copy(), GJ=np.inf,
    )


def update_bests(swarm, J):
    """Record objective values for the current positions (in place)."""
    J = np.where(np.isfinite(J), J, np.inf)
    better = J < swarm.LJ
    swarm.L[better] = swarm.X[better]
    swarm.LJ[better] = J[better]
    i0 = int(np.argmin(swarm.LJ))
    if swarm.LJ[i0] < swarm.GJ:
        swarm.G = swarm.L[i0].copy()
        swarm.GJ = float(swarm.LJ[i0])
    swarm.history.append(swarm.GJ)
    return swarm


def step(swarm, J, alphas=(0.6, 0.3, 0.1), rng=None, bounds=None):
    """Update bests with ``J`` (values at the current positions), then move.

    Returns a new :class:`Swarm`; the input is left untouched.
    """
    rng = np.random.default_rng(rng)
    s = replace(swarm, X=swarm.X.copy(), dX=swarm.dX.copy(), L=swarm.L.copy(),
                LJ=swarm.LJ.copy(), G=swarm.G.copy(), history=list(swarm.history))
    update_bests(s, np.asarray(J, dtype=float))
    a1, a2, a3 = alphas
    q = rng.random((3, s.size, 1))
    s.dX = a1 * q[0] * s.dX + a2 * q[1] * (s.L - s.X) + a3 * q[2] * (s.G - s.X)
    s.X = s.X + s.dX
    if bounds is not None:
        s.X = bounds.clamp(s.X)
    return s


@dataclass
class PSOConfig:
    samples: int = 60
    steps: int = 50
    alphas: tuple = (0.60, 0.30, 0.10)
    spread: float = 0.2
    d1_range: tuple = (0.1, 0.9)
    seed: int = 0


@dataclass
class IdentifyResult:
    best: np.ndarray
    best_J: float
    history: list
    prior: np.ndarray
    final: np.ndarray
    local_bests: np.ndarray
    local_J: np.ndarray


def minimize(fun, bounds, cfg, map_fn=map):
    """Run the swarm on an arbitrary objective ``fun(x) -> float``."""
    rng = np.random.default_rng(cfg.seed)
    swarm = init_swarm(bounds, cfg.samples, rng)
    prior = swarm.X.copy()

    def evaluate(X):
        return np.array([v if np.isfinite(v) else np.inf for v in map_fn(fun, list(X))], dtype=float)

    for _ in range(cfg.steps):
        J = evaluate(swarm.X)
        bad = ~np.isfinite(J)
        swarm = step(swarm, J, cfg.alphas, rng, bounds)
        if np.any(bad):
            swarm.X[bad] = bounds.sample(rng, int(bad.sum()))
            swarm.dX[bad] = 0.0
    update_bests(swarm, evaluate(swarm.X))
    return IdentifyResult(
        best=swarm.G.copy(), best_J=swarm.GJ, history=list(swarm.history),
        prior=prior, final=swarm.X.copy(), local_bests=swarm.L.copy(), local_J=swarm.LJ.copy(),
    )


class CandidateObjective:
    """Picklable ``x -> J`` for one measurement record."""

    def __init__(self, problem, M, D):
        self.problem = problem
        self.M = M
        self.D = D

    def __call__(self, x):
        try:
            vp, bp = expand(x, self.M, self.D, self.problem.speed,
                            self.problem.span, self.problem.elem_len)
            with np.errstate(all="ignore"):
                return self.problem.evaluate(vp, bp)
        except (NonPhysicalCandidate, np.linalg.LinAlgError, FloatingPointError):
            return np.inf


def identify(problem, M, D, reference, cfg=PSOConfig(), map_fn=map):
    """Estimate the parameter vector minimizing the front/rear road mismatch.

    ``reference`` is the vector the prior box is centred on.
    """
    bounds = prior_bounds(reference, D, cfg.spread, cfg.d1_range)
    return minimize(CandidateObjective(problem, M, D), bounds, cfg, map_fn)
