"""Road unevenness: ISO 8608 synthesis, interpolation and CSV I/O."""
import csv
from dataclasses import dataclass

import numpy as np

#: Displacement PSD G_d(n0) at n0 = 0.1 cycles/m, geometric class means [m^3].
ISO8608_GD0 = {c: 16e-6 * 4**i for i, c in enumerate("ABCDEFGH")}
N0 = 0.1


@dataclass(frozen=True)
class RoadUnevenness:
    """Elevation samples on a uniform grid starting at ``x0``."""

    x0: float
    dx: float
    elevations: np.ndarray

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        elev = np.asarray(self.elevations, dtype=float)
        if elev.ndim != 1 or elev.size < 2:
            raise ValueError("need at least 2 elevation samples")
        elev.setflags(write=False)
        object.__setattr__(self, "elevations", elev)

    @property
    def x_end(self):
        return self.x0 + self.dx * (self.elevations.size - 1)

    @property
    def positions(self):
        return self.x0 + self.dx * np.arange(self.elevations.size)

    def covers(self, lo, hi):
        tol = 1e-9 * self.dx
        return self.x0 - tol <= lo and hi <= self.x_end + tol


def generate_road(psd_class="A", seed=0, length=60.0, dx=0.01, x0=0.0, n_max=10.0):
    """Random road with ISO 8608 displacement PSD ``G0 (n/n0)^-2``.

    Sum of cosines at the harmonics ``k/(N dx)`` of the sample grid, with
    amplitudes ``sqrt(2 G(n) dn)`` and uniform random phases, evaluated by an
    inverse real FFT. Spatial frequencies above ``n_max`` cycles/m (or the
    Nyquist limit) are left out.
    """
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    try:
        gd0 = ISO8608_GD0[psd_class.upper()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown roughness class {psd_class!r}") from None

    n_samples = int(round(length / dx)) + 1
    rng = np.random.default_rng(seed)
    n_freq = n_samples // 2 + 1
    dn = 1.0 / (n_samples * dx)
    freqs = dn * np.arange(n_freq)
    phases = rng.uniform(0.0, 2.0 * np.pi, n_freq)

    amp = np.zeros(n_freq)
    band = (freqs > 0) & (freqs <= n_max)
    if n_samples % 2 == 0:
        band[-1] = False  # Nyquist bin has no phase freedom
    amp[band] = np.sqrt(2.0 * gd0 * (freqs[band] / N0) ** -2 * dn)

    spectrum = 0.5 * n_samples * amp * np.exp(1j * phases)
    elev = np.fft.irfft(spectrum, n=n_samples)
    elev -= elev.mean()
    return RoadUnevenness(float(x0), float(dx), elev)


def with_lead_in(road, flat_until, ramp_length=2.0):
    """Zero the road before ``flat_until`` and blend it in with a cosine ramp.

    Vehicles start at rest on the flat part, so their initial state is the
    static equilibrium with zero input.
    """
    x = road.positions
    w = np.clip((x - flat_until) / ramp_length, 0.0, 1.0) if ramp_length > 0 else (x >= flat_until) * 1.0
    w = 0.5 - 0.5 * np.cos(np.pi * w)
    return RoadUnevenness(road.x0, road.dx, road.elevations * w)


def sample_at(road, x):
    """Linearly interpolated elevation at ``x`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    lo, hi = xa.min(initial=np.inf), xa.max(initial=-np.inf)
    if xa.size and not road.covers(lo, hi):
        raise ValueError(
            f"position range [{lo}, {hi}] outside road [{road.x0}, {road.x_end}]"
        )
    s = (xa - road.x0) / road.dx
    i = np.clip(np.floor(s).astype(int), 0, road.elevations.size - 2)
    t = s - i
    e = road.elevations
    out = (1.0 - t) * e[i] + t * e[i + 1]
    return float(out) if np.ndim(x) == 0 else out


def axle_road_series(road, trajectory):
    """Road profile r_i(t): elevation under each axle at every time step."""
    return sample_at(road, np.asarray(trajectory, dtype=float))


def rms(a):
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.mean(a * a)))


def write_profile_csv(path, x, elevation, header=("x_m", "elevation_m")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for xi, ei in zip(np.asarray(x), np.asarray(elevation)):
            w.writerow([repr(float(xi)), repr(float(ei))])


def write_road_csv(path, road):
    write_profile_csv(path, road.positions, road.elevations)


def read_road_csv(path):
    """Read a two-column (x, elevation) CSV written by :func:`write_road_csv`.

    The x column must be uniformly spaced.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, e = data[:, 0], data[:, 1]
    if x.size < 2:
        raise ValueError("road CSV needs at least 2 rows")
    dx = (x[-1] - x[0]) / (x.size - 1)
    if not np.allclose(np.diff(x), dx, rtol=1e-6, atol=1e-9):
        raise ValueError("road CSV x column is not uniformly spaced")
    return RoadUnevenness(float(x[0]), float(dx), e)
