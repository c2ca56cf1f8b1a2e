"""Probe (test) vectors evaluated on the measurement set.

AOA probes already carry the conjugation, ``exp(+i k (x u + y v))``, so every
indicator treats probes the same way. Scattering probes are ``Phi_k(x_m, z)``
unconjugated; inner products conjugate their second argument.
"""

from dataclasses import dataclass

import numpy as np

from .forward import fundamental_solution
from .special import hankel1_0


@dataclass(frozen=True)
class ProbeVector:
    vector: np.ndarray
    point: tuple
    normalized: bool = False

    def unit(self):
        if self.normalized:
            return self
        nrm = np.linalg.norm(self.vector)
        if nrm == 0.0:
            raise ValueError("probe vector is zero")
        return ProbeVector(self.vector / nrm, self.point, True)

    def __len__(self):
        return self.vector.shape[0]


def aoa_probe(geom, u, v=0.0):
    pos = geom.positions()
    vec = np.exp(1j * geom.wavenumber * (pos[:, 0] * u + pos[:, 1] * v))
    return ProbeVector(vec, (float(u), float(v)))


def scattering_probe(surface, z, wavenumber):
    z = np.asarray(z, dtype=float)
    if z.shape[0] < surface.dimension:
        z = np.concatenate((z, np.zeros(surface.dimension - z.shape[0])))
    vec = fundamental_solution(surface.points, z, wavenumber, surface.dimension)
    return ProbeVector(np.asarray(vec, dtype=complex), tuple(float(c) for c in z))


class AoaProbes:
    """Probe factory for AOA data; 1-D grids sweep ``u`` with ``v = 0``."""

    kind = "aoa"
    accepts = ("aoa",)
    axis_names = ("u", "v")

    def __init__(self, geom):
        self.geom = geom
        self._pos = geom.positions()

    def block(self, points):
        """Rows are the unnormalized probes at each grid point."""
        pts = np.atleast_2d(points)
        u = pts[:, 0]
        v = pts[:, 1] if pts.shape[1] > 1 else np.zeros_like(u)
        phase = np.outer(u, self._pos[:, 0]) + np.outer(v, self._pos[:, 1])
        return np.exp(1j * self.geom.wavenumber * phase)

    def probe(self, point):
        pt = np.atleast_1d(point)
        return aoa_probe(self.geom, pt[0], pt[1] if pt.shape[0] > 1 else 0.0)


class ScatteringProbes:
    """Probe factory for near-field scattering data (Born or external)."""

    kind = "scattering"
    accepts = ("born", "external")
    axis_names = ("x", "y")

    def __init__(self, surface, wavenumber):
        self.surface = surface
        self.wavenumber = wavenumber

    def _lift(self, pts):
        d = self.surface.dimension
        if pts.shape[1] < d:
            pts = np.column_stack((pts, np.zeros((pts.shape[0], d - pts.shape[1]))))
        return pts

    def block(self, points):
        pts = self._lift(np.atleast_2d(np.asarray(points, dtype=float)))
        diff = self.surface.points[None, :, :] - pts[:, None, :]
        r = np.linalg.norm(diff, axis=-1)
        if np.any(r == 0.0):
            raise ValueError("sampling point lies on the measurement surface")
        kr = self.wavenumber * r
        if self.surface.dimension == 2:
            return 0.25j * hankel1_0(kr)
        return np.exp(1j * kr) / (4 * np.pi * r)

    def probe(self, point):
        return scattering_probe(self.surface, point, self.wavenumber)
