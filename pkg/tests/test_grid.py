import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qinv.forward import ArrayGeometry, DataMatrix, MeasurementSurface, SourceSet, synth_aoa
from qinv.grid import (BLOCK, IndicatorField, SamplingGrid, crop_field, evaluate_field,
                       find_peaks, matched_truths, timing_report)
from qinv.indicators import IndicatorSpec
from qinv.numeric import dirichlet_kernel
from qinv.steering import AoaProbes, ScatteringProbes

GEOM = ArrayGeometry(0.5, 0.5, 6, 5, np.pi)


def _field(values, grid):
    return IndicatorField(grid, np.asarray(values, dtype=float).ravel(), None, "f")


def test_grid_invariants_and_order():
    g = SamplingGrid((0, 10), (1, 12), (3, 2))
    assert g.size == 6 and g.shape == (3, 2) and g.dimension == 2
    np.testing.assert_allclose(g.points()[:3], [[0, 10], [0, 12], [0.5, 10]])
    for bad in [((0,), (1,), (1,)), ((1,), (0,), (3,)), ((0, 0, 0), (1, 1, 1), (2, 2, 2))]:
        with pytest.raises(ValueError):
            SamplingGrid(*bad)


def test_single_source_dsm_argmax_on_11x11():
    data = synth_aoa(GEOM, SourceSet([[0.4, -0.6]], [1.0], 4, 1.0))
    grid = SamplingGrid((-1, -1), (1, 1), (11, 11))
    f = evaluate_field(data, grid, IndicatorSpec("dsm"), AoaProbes(GEOM))
    np.testing.assert_allclose(grid.points()[np.argmax(f.values)], [0.4, -0.6], atol=1e-12)
    assert len(f.values) == grid.size and np.all(np.isfinite(f.values))


def test_parallel_results_identical():
    data = synth_aoa(GEOM, SourceSet([[0.1, 0.2], [-0.3, 0.5]], [1, 1j], 8, 0.5))
    grid = SamplingGrid((-1, -1), (1, 1), (23, 31))
    assert grid.size > 2 * BLOCK
    spec = IndicatorSpec("kdsm", sparsity=3)
    one = evaluate_field(data, grid, spec, AoaProbes(GEOM), parallelism=1)
    many = evaluate_field(data, grid, spec, AoaProbes(GEOM), parallelism=8)
    assert one.values.tobytes() == many.values.tobytes()
    assert one.flags == many.flags


def test_probe_provenance_mismatch():
    data = synth_aoa(GEOM, SourceSet([[0.1, 0.2]], [1], 3, 0.5))
    probes = ScatteringProbes(MeasurementSurface.circle(30, 4.0), 1.0)
    with pytest.raises(ValueError):
        evaluate_field(data, SamplingGrid((-1, -1), (1, 1), (3, 3)), IndicatorSpec("dsm"), probes)


def test_values_independent_of_grid_neighbours():
    data = synth_aoa(GEOM, SourceSet([[0.1, 0.2], [-0.3, 0.5]], [1, 1j], 8, 0.5))
    fine = SamplingGrid((-1, -1), (1, 1), (21, 21))
    coarse = SamplingGrid((-1, -1), (1, 1), (11, 11))
    for spec in [IndicatorSpec("dsm"), IndicatorSpec("kdsm", sparsity=2), IndicatorSpec("infcrit"),
                 IndicatorSpec("music", subspace_dim=2)]:
        a = evaluate_field(data, fine, spec, AoaProbes(GEOM)).values.reshape(21, 21)
        b = evaluate_field(data, coarse, spec, AoaProbes(GEOM)).values.reshape(11, 11)
        np.testing.assert_array_equal(a[::2, ::2], b)


def test_nonfinite_values_raise():
    data = DataMatrix(np.full((2, 30), 1e200, dtype=complex), "r", [0, 1], "c", np.arange(30), "aoa")
    with pytest.raises(FloatingPointError):
        evaluate_field(data, SamplingGrid((-1, -1), (1, 1), (2, 2)), IndicatorSpec("dsm"),
                       AoaProbes(GEOM))


def test_single_spike_peak():
    grid = SamplingGrid((0, 0), (1, 1), (5, 5))
    v = np.zeros((5, 5))
    v[2, 3] = 1.0
    peaks = find_peaks(_field(v, grid), 10)
    assert len(peaks) == 1 and peaks[0].point == (0.5, 0.75)


def test_constant_field_has_no_peaks():
    grid = SamplingGrid(0, 1, 7)
    assert find_peaks(_field(np.ones(7), grid), 3) == []


def test_plateau_is_not_a_strict_maximum():
    grid = SamplingGrid(0, 1, 6)
    peaks = find_peaks(_field([0, 1, 1, 0, 0.5, 0], grid), 5)
    assert [p.index for p in peaks] == [4]


def test_dirichlet_main_peak():
    grid = SamplingGrid(-np.pi, np.pi, 1001)
    f = _field(np.abs(dirichlet_kernel(50, grid.axes()[0])), grid)
    peaks = find_peaks(f, 50)
    assert peaks[0].point == (0.0,) and peaks[0].value == pytest.approx(50.0)
    assert len(peaks) > 1


def test_merged_sources_single_peak():
    grid = SamplingGrid(-np.pi, np.pi, 2001)
    x = grid.axes()[0]
    f = _field(np.abs(dirichlet_kernel(50, x) + dirichlet_kernel(50, x - 1 / 16)), grid)
    assert len(find_peaks(f, 10, 0.5)) == 1


def test_peak_arguments_validated():
    f = _field([0, 1, 0], SamplingGrid(0, 1, 3))
    with pytest.raises(ValueError):
        find_peaks(f, 0)
    with pytest.raises(ValueError):
        find_peaks(f, 1, 1.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(40,), (9, 11)]))
def test_peaks_of_negated_field_are_minima(seed, shape):
    gen = np.random.default_rng(seed)
    grid = SamplingGrid((0,) * len(shape), (1,) * len(shape), shape)
    v = gen.standard_normal(shape)
    f = _field(v, grid)
    neg = find_peaks(f, grid.size, values=-f.values)
    flat = v.ravel()
    padded = np.pad(v, 1, constant_values=np.inf)
    for p in neg:
        idx = np.unravel_index(p.index, shape)
        window = padded[tuple(slice(i, i + 3) for i in idx)].ravel()
        assert flat[p.index] == window.min() and np.sum(window == window.min()) == 1
    values = [p.value for p in neg]
    assert values == sorted(values, reverse=True)


def test_matched_truths_tolerance():
    grid = SamplingGrid(0, 1, 11)
    f = _field(np.eye(1, 11, 5).ravel(), grid)
    peaks = find_peaks(f, 1)
    assert matched_truths(peaks, [[0.55], [0.62]], grid) == [True, False]
    assert matched_truths(peaks, [[0.69]], grid, cells=2) == [True]


def test_crop_field():
    grid = SamplingGrid((-1, -1), (1, 1), (21, 21))
    v = grid.points().sum(axis=1)
    c = crop_field(_field(v, grid), [(-0.25, 0.25), (-0.25, 0.5)])
    assert c.grid.shape == (5, 8)
    np.testing.assert_allclose(c.values, c.grid.points().sum(axis=1), atol=1e-12)
    with pytest.raises(ValueError):
        crop_field(_field(v, grid), [(0.0, 0.01), (0, 1)])


def test_timing_report_rows():
    data = synth_aoa(GEOM, SourceSet([[0.1, 0.2]], [1], 30, 0.5))
    grid = SamplingGrid((-1, -1), (1, 1), (5, 5))
    rows = timing_report(data, grid, [IndicatorSpec("dsm"), IndicatorSpec("infcrit")], AoaProbes(GEOM))
    assert [r[0] for r in rows] == ["dsm", "infcrit"] and all(r[1] > 0 for r in rows)
    with pytest.raises(ValueError):
        timing_report(data, grid, [], AoaProbes(GEOM))
