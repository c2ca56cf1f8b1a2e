import cmath
import math

import numpy as np
import pytest

from oracles import hankel1_0_series
from qinv.forward import ArrayGeometry, MeasurementSurface, SourceSet, synth_aoa
from qinv.grid import SamplingGrid, evaluate_field
from qinv.indicators import IndicatorSpec
from qinv.steering import AoaProbes, ScatteringProbes, aoa_probe, scattering_probe

GEOM = ArrayGeometry(0.6, 0.45, 5, 4, 3.0)


def test_aoa_probe_broadside_and_modulus():
    np.testing.assert_array_equal(aoa_probe(GEOM, 0.0, 0.0).vector, np.ones(20))
    p = aoa_probe(GEOM, 0.37, -0.81)
    np.testing.assert_allclose(np.abs(p.vector), 1.0, atol=1e-15)
    assert len(p) == GEOM.size


def test_aoa_probe_negation_is_conjugate():
    np.testing.assert_allclose(aoa_probe(GEOM, -0.2, 0.55).vector,
                               aoa_probe(GEOM, 0.2, -0.55).vector.conj(), atol=1e-15)


def test_aoa_block_matches_single_probes():
    pts = np.array([[0.1, 0.2], [-0.9, 0.4], [0.0, 1.0]])
    block = AoaProbes(GEOM).block(pts)
    for row, (u, v) in zip(block, pts):
        np.testing.assert_array_equal(row, aoa_probe(GEOM, u, v).vector)


def test_aoa_probe_conjugates_the_steering_column():
    # beamforming the noiseless single source data at its own direction aligns all phases
    data = synth_aoa(GEOM, SourceSet([[0.3, -0.4]], [1.0], 1, 1.0))
    p = aoa_probe(GEOM, 0.3, -0.4).vector
    assert abs(data.matrix[0] @ p) == pytest.approx(GEOM.size, rel=1e-12)


def test_unit_probe_norm():
    p = aoa_probe(GEOM, 0.5, 0.5).unit()
    assert np.linalg.norm(p.vector) == pytest.approx(1.0, abs=1e-12)
    assert p.unit() is p


def test_beamforming_argmax_at_source_on_101_grid():
    u0, v0 = 0.26, -0.44
    data = synth_aoa(GEOM, SourceSet([[u0, v0]], [1.0], 6, 0.7))
    grid = SamplingGrid((-1, -1), (1, 1), (101, 101))
    field = evaluate_field(data, grid, IndicatorSpec("dsm"), AoaProbes(GEOM))
    best = grid.points()[np.argmax(field.values)]
    np.testing.assert_allclose(best, [u0, v0], atol=1e-12)


def test_scattering_probe_equidistant_3d():
    pts = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [-1.0, 0, 0]])
    surf = MeasurementSurface(pts, "points")
    v = scattering_probe(surf, np.zeros(3), 1.0).vector
    np.testing.assert_allclose(v, np.full(4, cmath.exp(1j) / (4 * math.pi)), atol=1e-15)


def test_scattering_probe_translation_invariant():
    surf = MeasurementSurface.circle(7, 2.0)
    moved = MeasurementSurface(surf.points + np.array([0.3, -1.2]), "points")
    a = scattering_probe(surf, np.array([0.1, 0.5]), 4.0).vector
    b = scattering_probe(moved, np.array([0.4, -0.7]), 4.0).vector
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_scattering_probe_series_oracle():
    surf = MeasurementSurface.circle(25, 4.0)
    z = (0.0, 1.5)
    v = scattering_probe(surf, np.array(z), 8.0).vector
    for x, val in zip(surf.points, v):
        ref = 0.25j * hankel1_0_series(8.0 * math.hypot(x[0] - z[0], x[1] - z[1]))
        assert abs(val - ref) <= 1e-10 * abs(ref)


def test_scattering_block_and_singular_point():
    surf = MeasurementSurface.circle(9, 3.0)
    fac = ScatteringProbes(surf, 5.0)
    pts = np.array([[0.1, 0.2], [-1.0, 0.7]])
    for row, z in zip(fac.block(pts), pts):
        np.testing.assert_allclose(row, scattering_probe(surf, z, 5.0).vector, rtol=1e-14)
    with pytest.raises(ValueError):
        fac.block(np.array([[3.0, 0.0]]))
    with pytest.raises(ValueError):
        scattering_probe(surf, np.array([3.0, 0.0]), 5.0)


def test_scattering_block_lifts_planar_points_for_3d_surfaces():
    pts = np.array([[2.0, 0, 0.5], [0, 2.0, -0.5], [-2.0, 0, 0], [0, 0, 2.0]])
    fac = ScatteringProbes(MeasurementSurface(pts, "points"), 1.5)
    row = fac.block(np.array([[0.1, 0.1]]))[0]
    np.testing.assert_allclose(row, fac.probe((0.1, 0.1)).vector, rtol=1e-14)
