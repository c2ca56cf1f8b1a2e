"""Sweep an indicator over a sampling grid, find peaks, time methods."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .indicators import Evaluator, to_db

# fixed block size so results never depend on the worker count
BLOCK = 256


@dataclass(frozen=True)
class SamplingGrid:
    """Rectilinear 1-D or 2-D grid; points are flattened row-major (last axis fastest)."""

    mins: tuple
    maxs: tuple
    counts: tuple
    names: tuple = None

    def __post_init__(self):
        mins = tuple(float(v) for v in np.atleast_1d(self.mins))
        maxs = tuple(float(v) for v in np.atleast_1d(self.maxs))
        counts = tuple(int(v) for v in np.atleast_1d(self.counts))
        if not (len(mins) == len(maxs) == len(counts)) or len(counts) not in (1, 2):
            raise ValueError("grid must be 1-D or 2-D with one (min, max, count) per axis")
        for lo, hi, c in zip(mins, maxs, counts):
            if c < 2:
                raise ValueError("each axis needs at least 2 points")
            if not lo < hi:
                raise ValueError("axis min must be below max")
        names = self.names or ("x", "y")[:len(counts)]
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "names", tuple(names)[:len(counts)])

    @property
    def dimension(self):
        return len(self.counts)

    @property
    def size(self):
        return int(np.prod(self.counts))

    @property
    def shape(self):
        return self.counts

    def axes(self):
        return [np.linspace(lo, hi, c) for lo, hi, c in zip(self.mins, self.maxs, self.counts)]

    @property
    def steps(self):
        return tuple((hi - lo) / (c - 1) for lo, hi, c in zip(self.mins, self.maxs, self.counts))

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])


@dataclass
class IndicatorField:
    grid: SamplingGrid
    values: np.ndarray
    spec: object
    label: str = ""
    flags: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def per_point_time(self):
        return self.wall_time / max(self.grid.size, 1)

    def db(self):
        return to_db(self.values)

    def flag_counts(self):
        counts = {}
        for fl in self.flags:
            for name in fl:
                counts[name] = counts.get(name, 0) + 1
        return counts


@dataclass(frozen=True)
class Peak:
    index: int
    point: tuple
    value: float


def evaluate_field(data, grid, spec, probes, parallelism=1, label=None):
    """Indicator values at every grid point.

    ``probes`` is a probe factory (:class:`~qinv.steering.AoaProbes` or
    :class:`~qinv.steering.ScatteringProbes`) and must match the data's
    provenance. Output is bit-identical for any ``parallelism``.
    """
    if data.provenance not in probes.accepts:
        raise ValueError(f"{probes.kind} probes cannot be used with {data.provenance} data")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    start = time.perf_counter()
    evaluator = Evaluator(data, spec)
    pts = grid.points()
    values = np.empty(grid.size)
    flags = [frozenset()] * grid.size

    def run(lo):
        hi = min(lo + BLOCK, grid.size)
        block = probes.block(pts[lo:hi])
        for i in range(hi - lo):
            res = evaluator(block[i])
            values[lo + i] = res.value
            flags[lo + i] = res.flags

    starts = range(0, grid.size, BLOCK)
    if parallelism == 1:
        for lo in starts:
            run(lo)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            list(pool.map(run, starts))
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("indicator produced non-finite values")
    return IndicatorField(grid, values, spec, label or spec.name, flags,
                          time.perf_counter() - start)


def _local_max_mask(vals):
    """Strict local maxima against every existing grid neighbour."""
    padded = np.pad(vals, 1, mode="constant", constant_values=-np.inf)
    mask = np.ones(vals.shape, dtype=bool)
    core = tuple(slice(1, 1 + s) for s in vals.shape)
    for off in np.ndindex(*(3,) * vals.ndim):
        shift = tuple(o - 1 for o in off)
        if not any(shift):
            continue
        view = tuple(slice(1 + d, 1 + d + s) for d, s in zip(shift, vals.shape))
        mask &= padded[core] > padded[view]
    return mask


def find_peaks(field, max_count, min_prominence=0.0, values=None):
    """Strict local maxima above ``min + min_prominence * (max - min)``.

    Returns at most ``max_count`` peaks, highest first. ``values`` overrides the
    field's own values (e.g. its dB transform).
    """
    if max_count < 1:
        raise ValueError("max_count must be >= 1")
    if not 0.0 <= min_prominence <= 1.0:
        raise ValueError("min_prominence must be in [0, 1]")
    vals = np.asarray(field.values if values is None else values, dtype=float)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        return []
    mask = _local_max_mask(vals.reshape(field.grid.shape)).ravel()
    mask &= vals > lo + min_prominence * (hi - lo)
    idx = np.flatnonzero(mask)
    # stable sort keeps grid order among equal values
    idx = idx[np.argsort(-vals[idx], kind="stable")][:max_count]
    pts = field.grid.points()
    return [Peak(int(i), tuple(float(c) for c in pts[i]), float(vals[i])) for i in idx]


def matched_truths(peaks, truths, grid, cells=1):
    """Truths with a peak within ``cells`` grid steps along every axis."""
    steps = np.asarray(grid.steps)
    tol = cells * steps * (1 + 1e-9)
    hits = []
    for t in np.atleast_2d(truths):
        t = np.asarray(t, dtype=float)[:grid.dimension]
        hits.append(any(np.all(np.abs(np.asarray(p.point) - t) <= tol) for p in peaks))
    return hits


def timing_report(data, grid, specs, probes, labels=None):
    """Single-threaded wall time of one sweep per spec: ``[(label, seconds), ...]``."""
    if not specs:
        raise ValueError("need at least one spec")
    rows = []
    for i, spec in enumerate(specs):
        start = time.perf_counter()
        evaluate_field(data, grid, spec, probes, parallelism=1)
        rows.append((labels[i] if labels else spec.name, time.perf_counter() - start))
    return rows


def crop_field(field, window):
    """Restrict a field to grid points inside ``window`` (one (lo, hi) per axis)."""
    window = [tuple(w) for w in window]
    if len(window) != field.grid.dimension:
        raise ValueError("crop window needs one (lo, hi) pair per grid axis")
    keep = []
    for ax, (lo, hi) in zip(field.grid.axes(), window):
        sel = np.flatnonzero((ax >= lo) & (ax <= hi))
        if sel.size < 2:
            raise ValueError("crop window keeps fewer than 2 points on an axis")
        keep.append(sel)
    axes = field.grid.axes()
    sub = SamplingGrid(tuple(a[k[0]] for a, k in zip(axes, keep)),
                       tuple(a[k[-1]] for a, k in zip(axes, keep)),
                       tuple(k.size for k in keep), field.grid.names)
    idx = np.ravel_multi_index(np.meshgrid(*keep, indexing="ij"), field.grid.shape).ravel()
    return IndicatorField(sub, field.values[idx], field.spec, field.label,
                          [field.flags[i] for i in idx] if field.flags else [],
                          field.wall_time)
