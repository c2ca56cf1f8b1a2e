"""Synthetic measurement data: AOA snapshots, Born point scatterers, noise.

Column order for planar arrays is row-major over ``(m_x, m_y)``: element
``(m_x, m_y)`` sits in column ``m_x * M_y + m_y`` at position
``(m_x * dx, m_y * dy)`` with 0-based indices.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .numeric import Prng, as_matrix
from .special import hankel1_0

NOISE_OFF = math.inf

PROVENANCES = ("aoa", "born", "external")


@dataclass(frozen=True)
class ArrayGeometry:
    spacing_x: float
    spacing_y: float
    count_x: int
    count_y: int
    wavenumber: float

    def __post_init__(self):
        if self.count_x < 1 or self.count_y < 1:
            raise ValueError("array counts must be >= 1")
        if self.spacing_x <= 0 or self.spacing_y <= 0:
            raise ValueError("array spacings must be positive")
        if self.wavenumber <= 0:
            raise ValueError("wavenumber must be positive")

    @property
    def size(self):
        return self.count_x * self.count_y

    def positions(self):
        """``(M, 2)`` element positions in column order."""
        mx, my = np.meshgrid(np.arange(self.count_x), np.arange(self.count_y), indexing="ij")
        return np.column_stack((mx.ravel() * self.spacing_x, my.ravel() * self.spacing_y))


@dataclass(frozen=True)
class SourceSet:
    """Far-field sources given by direction cosines ``(u, v)``.

    Source ``j`` carries the time signature ``exp(-i l dt u_j)`` at sample
    ``l = 0 .. time_samples - 1``.
    """

    directions: np.ndarray
    amplitudes: np.ndarray
    time_samples: int
    time_step: float

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if d.shape[1] == 1:
            d = np.column_stack((d[:, 0], np.zeros(d.shape[0])))
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if d.shape[1] != 2 or a.shape[0] != d.shape[0]:
            raise ValueError("need one (u, v) pair and one amplitude per source")
        if np.any(np.abs(d) > 1.0):
            raise ValueError("direction cosines must lie in [-1, 1]")
        if np.any(a == 0):
            raise ValueError("source amplitudes must be nonzero")
        if len({tuple(r) for r in d}) != d.shape[0]:
            raise ValueError("source directions must be pairwise distinct")
        if self.time_samples < 1 or self.time_step <= 0:
            raise ValueError("need >= 1 time sample and a positive time step")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "amplitudes", a)

    def __len__(self):
        return self.directions.shape[0]

    def __eq__(self, other):
        return (isinstance(other, SourceSet)
                and np.array_equal(self.directions, other.directions)
                and np.array_equal(self.amplitudes, other.amplitudes)
                and self.time_samples == other.time_samples
                and self.time_step == other.time_step)


@dataclass(frozen=True)
class MeasurementSurface:
    points: np.ndarray
    descriptor: str = "points"
    radius: float = None
    center: tuple = None

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        if p.shape[0] < 1 or p.shape[1] not in (2, 3):
            raise ValueError("surface needs >= 1 point in R^2 or R^3")
        if len({tuple(r) for r in p}) != p.shape[0]:
            raise ValueError("surface points must be pairwise distinct")
        object.__setattr__(self, "points", p)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        return (isinstance(other, MeasurementSurface)
                and np.array_equal(self.points, other.points)
                and self.descriptor == other.descriptor
                and self.radius == other.radius and self.center == other.center)

    @classmethod
    def arc(cls, count, radius, start, stop, descriptor, center=(0.0, 0.0), endpoint=True):
        theta = np.linspace(start, stop, count, endpoint=endpoint)
        c = np.asarray(center, dtype=float)
        pts = c + radius * np.column_stack((np.cos(theta), np.sin(theta)))
        return cls(pts, descriptor, float(radius), tuple(float(v) for v in center))

    @classmethod
    def circle(cls, count, radius, center=(0.0, 0.0)):
        """Uniform angles starting at 0."""
        return cls.arc(count, radius, 0.0, 2 * np.pi, "circle", center, endpoint=False)

    @classmethod
    def half_circle(cls, count, radius, center=(0.0, 0.0)):
        """Lower half, angles ``[pi, 2 pi]`` inclusive."""
        return cls.arc(count, radius, np.pi, 2 * np.pi, "half-circle", center)

    @classmethod
    def quarter_circle(cls, count, radius, center=(0.0, 0.0)):
        """Quarter arc whose midpoint is straight below the center, ``[5pi/4, 7pi/4]``."""
        return cls.arc(count, radius, 1.25 * np.pi, 1.75 * np.pi, "quarter-circle", center)


@dataclass(frozen=True)
class ScattererSet:
    positions: np.ndarray
    contrasts: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.positions, dtype=float))
        m = np.asarray(self.contrasts, dtype=complex).ravel()
        if m.shape[0] != p.shape[0]:
            raise ValueError("need one contrast per scatterer")
        if np.any(m == 0):
            raise ValueError("contrasts must be nonzero")
        if len({tuple(r) for r in p}) != p.shape[0]:
            raise ValueError("scatterer positions must be pairwise distinct")
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "contrasts", m)

    def __len__(self):
        return self.positions.shape[0]

    def __eq__(self, other):
        return (isinstance(other, ScattererSet)
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.contrasts, other.contrasts))

    def check_inside(self, surface):
        """Circular surfaces must enclose every scatterer (open arcs: the full disk)."""
        if surface.radius is None:
            return
        c = np.asarray(surface.center)
        r = np.linalg.norm(self.positions[:, :2] - c, axis=1)
        if np.any(r >= surface.radius):
            raise ValueError("scatterers must lie strictly inside the measurement circle")


@dataclass(frozen=True)
class DataMatrix:
    """Measurement matrix with axis metadata.

    Indicators act on the column index: probes have one entry per column.
    """

    matrix: np.ndarray
    row_label: str
    row_coords: np.ndarray
    col_label: str
    col_coords: np.ndarray
    provenance: str
    wavenumber: float = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.array(as_matrix(self.matrix, "data"), copy=True)
        m.flags.writeable = False
        rc = np.asarray(self.row_coords, dtype=float)
        cc = np.asarray(self.col_coords, dtype=float)
        if rc.shape[0] != m.shape[0] or cc.shape[0] != m.shape[1]:
            raise ValueError("coordinate lists must match the matrix dimensions")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_coords", rc)
        object.__setattr__(self, "col_coords", cc)

    @property
    def shape(self):
        return self.matrix.shape

    def replace_matrix(self, matrix):
        return DataMatrix(matrix, self.row_label, self.row_coords, self.col_label,
                          self.col_coords, self.provenance, self.wavenumber, dict(self.meta))

    def __eq__(self, other):
        return (isinstance(other, DataMatrix)
                and np.array_equal(self.matrix, other.matrix)
                and self.provenance == other.provenance
                and self.wavenumber == other.wavenumber)


def synth_aoa(geom, sources):
    """Noiseless ``L x (M_x M_y)`` AOA snapshot matrix (rows: time samples)."""
    pos = geom.positions()
    u, v = sources.directions[:, 0], sources.directions[:, 1]
    t = np.arange(sources.time_samples) * sources.time_step
    signature = np.exp(-1j * np.outer(t, u)) * sources.amplitudes  # (L, J)
    steer = np.exp(-1j * geom.wavenumber * (np.outer(u, pos[:, 0]) + np.outer(v, pos[:, 1])))
    return DataMatrix(signature @ steer, "time", t, "element", pos, "aoa", geom.wavenumber)


def fundamental_solution(x, z, wavenumber, d=2):
    """Outgoing Helmholtz fundamental solution ``Phi_k(x, z)``.

    ``(i/4) H_0^(1)(k r)`` in 2-D, ``exp(i k r) / (4 pi r)`` in 3-D. ``x`` may
    be a single point or an ``(n, d)`` array of points.
    """
    if d not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    if wavenumber <= 0:
        raise ValueError("wavenumber must be positive")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    r = np.linalg.norm(x - z, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("fundamental solution is singular at x = z")
    if d == 2:
        return 0.25j * hankel1_0(wavenumber * r)
    return np.exp(1j * wavenumber * r) / (4 * np.pi * r)


def synth_born(scatterers, surface, wavenumber):
    """Born point-scatterer near-field matrix; rows are receivers, columns sources."""
    d = surface.dimension
    if scatterers.positions.shape[1] != d:
        raise ValueError("scatterers and surface must share a dimension")
    phi = np.stack([fundamental_solution(surface.points, z, wavenumber, d)
                    for z in scatterers.positions], axis=1)  # (P, J)
    mat = -wavenumber ** 2 * (phi * scatterers.contrasts) @ phi.conj().T
    return DataMatrix(mat, "receiver", surface.points, "source", surface.points,
                      "born", wavenumber)


def noise_sigma(data, snr):
    f = data.matrix
    return np.linalg.norm(f) / math.sqrt(f.size * snr)


def add_noise(data, snr, rng):
    """Add ``sigma * (e_re + i e_im)`` to every entry, ``sigma = |f| / sqrt(N snr)``.

    ``snr = NOISE_OFF`` returns ``data`` unchanged. Entries take consecutive
    Gaussian pairs from ``rng`` in row-major order.
    """
    if snr == NOISE_OFF:
        return data
    if not snr > 0:
        raise ValueError("snr must be positive")
    f = data.matrix
    eps = rng.normals(f.size).reshape(f.size, 2)
    noise = (eps[:, 0] + 1j * eps[:, 1]).reshape(f.shape)
    return data.replace_matrix(f + noise_sigma(data, snr) * noise)


def random_points(rng, count, low, high, dim, min_separation=0.0, max_tries=100000):
    """Uniform points in ``[low, high]^dim`` with a minimum pairwise distance."""
    pts = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not place points with the requested separation")
        p = low + (high - low) * rng.uniform(dim)
        if all(np.linalg.norm(p - q) >= min_separation for q in pts):
            pts.append(p)
    return np.array(pts)


def random_sources(seed, count, time_samples, time_step, low=-1.0, high=1.0,
                   min_separation=0.0, planar=False):
    """Unit-amplitude sources at seeded random direction cosines."""
    rng = Prng(seed)
    pts = random_points(rng, count, low, high, 2 if planar else 1, min_separation)
    if not planar:
        pts = np.column_stack((pts[:, 0], np.zeros(count)))
    return SourceSet(pts, np.ones(count), time_samples, time_step)


def random_scatterers(seed, count, low, high, min_separation=0.0, contrast=1.0):
    rng = Prng(seed)
    pts = random_points(rng, count, low, high, 2, min_separation)
    return ScattererSet(pts, np.full(count, contrast, dtype=complex))
