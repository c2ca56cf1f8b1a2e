"""Run a parsed experiment config end to end and write its outputs."""

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import __version__
from .config import (AoaSection, BornSection, load_config, resolve_output_dir, to_dict)
from .forward import (ArrayGeometry, MeasurementSurface, ScattererSet, SourceSet, add_noise,
                      random_scatterers, random_sources, synth_aoa, synth_born)
from .grid import IndicatorField, SamplingGrid, crop_field, evaluate_field, find_peaks
from .io import (atomic_write, read_data_csv, write_data_csv, write_field_csv,
                 write_heatmap_pgm, write_peaks)
from .numeric import Prng, dirichlet_kernel
from .steering import AoaProbes, ScatteringProbes

MANIFEST = "manifest.json"
DEMOS = ("fig3", "fig6", "fig2", "table1")

# resolution study: |D_N(x) + D_N(x - alpha)| on [-pi, pi]
DIRICHLET_N = 50
DIRICHLET_POINTS = 2001
DIRICHLET_ALPHAS = (0.5, 0.25, 0.125, 0.0625)
DIRICHLET_PROMINENCE = 0.3


@dataclass
class Experiment:
    data: object
    probes: object
    truths: np.ndarray  # (J, 2) true unknowns, or None when not known


def _geometry(arr):
    return ArrayGeometry(arr.spacing_x, arr.spacing_y, arr.count_x, arr.count_y, arr.wavenumber)


def build_surface(section):
    if section.kind == "points":
        return MeasurementSurface(np.array(section.points), "points")
    make = {"circle": MeasurementSurface.circle, "half-circle": MeasurementSurface.half_circle,
            "quarter-circle": MeasurementSurface.quarter_circle}[section.kind]
    return make(section.count, section.radius, section.center)


def _sources(fw):
    src = fw.sources
    if src.random is None:
        return SourceSet(np.array(src.directions), np.array(src.amplitudes),
                         fw.time_samples, fw.time_step)
    r = src.random
    return random_sources(r.seed, r.count, fw.time_samples, fw.time_step, r.low, r.high,
                          r.min_separation, r.planar)


def _scatterers(fw):
    sc = fw.scatterers
    if sc.random is None:
        return ScattererSet(np.array(sc.positions), np.array(sc.contrasts))
    r = sc.random
    return random_scatterers(r.seed, r.count, r.low, r.high, r.min_separation, r.contrast)


def build_experiment(cfg):
    """Synthesize (or load) the data, attach probes and the true unknowns."""
    fw = cfg.forward
    if isinstance(fw, AoaSection):
        geom = _geometry(fw.array)
        sources = _sources(fw)
        data, probes, truths = synth_aoa(geom, sources), AoaProbes(geom), sources.directions
    elif isinstance(fw, BornSection):
        surface = build_surface(fw.surface)
        scatterers = _scatterers(fw)
        scatterers.check_inside(surface)
        data = synth_born(scatterers, surface, fw.wavenumber)
        probes, truths = ScatteringProbes(surface, fw.wavenumber), scatterers.positions
    else:
        if not os.path.isfile(fw.path):
            raise FileNotFoundError(f"data file not found: {fw.path}")
        data = read_data_csv(fw.path)
        truths = None
        if fw.array is not None:
            if data.provenance != "aoa":
                raise ValueError(f"array geometry given but the file holds {data.provenance} data")
            geom = _geometry(fw.array)
            probes = AoaProbes(geom)
            width = geom.size
        else:
            k = fw.wavenumber if fw.wavenumber is not None else data.wavenumber
            if k is None:
                raise ValueError("scattering data needs a wavenumber (file header or config)")
            surface = build_surface(fw.surface)
            probes = ScatteringProbes(surface, k)
            width = len(surface)
        if data.shape[1] != width:
            raise ValueError(f"data has {data.shape[1]} columns but the geometry has {width} points")
    if cfg.noise.enabled:
        data = add_noise(data, cfg.noise.snr, Prng(cfg.noise.seed))
    return Experiment(data, probes, truths)


def build_grid(cfg, probes):
    lo, hi, counts = zip(*cfg.grid)
    return SamplingGrid(lo, hi, counts, probes.axis_names[:len(counts)])


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


class _Outputs:
    """Tracks files written by one run so a failure can remove them."""

    def __init__(self, directory):
        self.directory = directory
        self.created_dir = not os.path.isdir(directory)
        os.makedirs(directory, exist_ok=True)
        self.names = []

    def path(self, name):
        self.names.append(name)
        return os.path.join(self.directory, name)

    def manifest(self, payload):
        payload["files"] = [{"name": n, "bytes": os.path.getsize(os.path.join(self.directory, n)),
                             "sha256": _sha256(os.path.join(self.directory, n))}
                            for n in self.names]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        atomic_write(self.path(MANIFEST), text)

    def discard(self):
        for n in self.names:
            p = os.path.join(self.directory, n)
            if os.path.exists(p):
                os.unlink(p)
        if self.created_dir and not os.listdir(self.directory):
            os.rmdir(self.directory)


def run_experiment(cfg, out_dir=None, threads=1):
    """Evaluate every indicator of ``cfg`` and write the requested outputs.

    Outputs go to ``out_dir`` (or the config / ``$QINV_OUT`` default). The
    manifest is written last; on any failure every file this run wrote is
    removed and the exception propagates. Returns the manifest dict.
    """
    out = _Outputs(resolve_output_dir(cfg, out_dir))
    formats = cfg.output.formats
    stages = {}
    try:
        start = time.perf_counter()
        exp = build_experiment(cfg)
        grid = build_grid(cfg, exp.probes)
        stages["data"] = time.perf_counter() - start
        if "data" in formats:
            write_data_csv(exp.data, out.path("data.csv"))
        timings = []
        for entry in cfg.indicators:
            field = evaluate_field(exp.data, grid, entry.spec, exp.probes, threads, entry.label)
            stages[entry.label] = field.wall_time
            timings.append((entry.label, entry.spec.name, field.wall_time, field.per_point_time))
            _write_field(out, field, cfg.output)
        if "timing" in formats:
            lines = ["label,method,seconds,seconds_per_point"]
            lines += [f"{a},{b},{c:.6g},{d:.6g}" for a, b, c, d in timings]
            atomic_write(out.path("timing.csv"), "\n".join(lines) + "\n")
        manifest = {
            "name": cfg.name,
            "version": __version__,
            "seed": cfg.noise.seed,
            "threads": threads,
            "config": to_dict(cfg),
            "stage_seconds": stages,
            "truths": None if exp.truths is None else np.asarray(exp.truths).tolist(),
        }
        out.manifest(manifest)
    except BaseException:
        out.discard()
        raise
    return manifest


def _write_field(out, field, opts):
    view = crop_field(field, opts.crop) if opts.crop else field
    label = field.label
    if "csv" in opts.formats:
        write_field_csv(view, out.path(f"{label}.csv"), opts.log_scale)
    if "pgm" in opts.formats:
        write_heatmap_pgm(view, out.path(f"{label}.pgm"), opts.log_scale)
    if "peaks" in opts.formats:
        vals = view.db() if opts.peaks.scale == "db" else view.values
        peaks = find_peaks(view, opts.peaks.max_count, opts.peaks.min_prominence, values=vals)
        write_peaks(peaks, view.grid.names, out.path(f"{label}.peaks.csv"))


# -- resolution study ------------------------------------------------------------


def dirichlet_field(alpha, n=DIRICHLET_N, points=DIRICHLET_POINTS):
    """``|D_n(x) + D_n(x - alpha)|`` sampled on ``points`` points of ``[-pi, pi]``."""
    grid = SamplingGrid(-math.pi, math.pi, points, ("x",))
    x = grid.axes()[0]
    vals = np.abs(dirichlet_kernel(n, x) + dirichlet_kernel(n, x - alpha))
    return IndicatorField(grid, vals, None, f"alpha={alpha:g}")


def dirichlet_study(alphas=DIRICHLET_ALPHAS, prominence=DIRICHLET_PROMINENCE):
    """``[(alpha, field, peaks), ...]`` for each source offset ``alpha``."""
    out = []
    for a in alphas:
        f = dirichlet_field(a)
        out.append((a, f, find_peaks(f, DIRICHLET_POINTS, prominence)))
    return out


def run_dirichlet(out_dir):
    out = _Outputs(out_dir)
    try:
        start = time.perf_counter()
        study = dirichlet_study()
        cols = [study[0][1].grid.axes()[0]] + [f.values for _, f, _ in study]
        lines = [",".join(["x"] + [f"alpha_{a:g}" for a, _, _ in study])]
        lines += [",".join("%.17g" % v for v in row) for row in zip(*cols)]
        atomic_write(out.path("dirichlet.csv"), "\n".join(lines) + "\n")
        summary = ["alpha,peaks,locations"]
        for a, _, pk in study:
            summary.append(f"{a:g},{len(pk)},{' '.join('%.6f' % p.point[0] for p in pk)}")
        atomic_write(out.path("dirichlet_peaks.csv"), "\n".join(summary) + "\n")
        manifest = {"name": "fig2", "version": __version__, "seed": None,
                    "config": {"n": DIRICHLET_N, "points": DIRICHLET_POINTS,
                               "alphas": list(DIRICHLET_ALPHAS), "prominence": DIRICHLET_PROMINENCE},
                    "stage_seconds": {"study": time.perf_counter() - start}}
        out.manifest(manifest)
    except BaseException:
        out.discard()
        raise
    return manifest


# -- shipped configs ---------------------------------------------------------------


def shipped_config_path(name):
    """Path of a config file shipped with the package (``fig3``, ``fig6``, ...)."""
    ref = resources.files("qinv") / "configs" / f"{name}.yaml"
    if not ref.is_file():
        raise FileNotFoundError(f"no shipped config named {name!r}")
    return str(ref)


def shipped_config(name):
    return load_config(shipped_config_path(name))


def run_demo(name, out_dir, threads=1):
    """Run one shipped example into ``out_dir/name``."""
    if name not in DEMOS:
        raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    target = os.path.join(out_dir, name)
    if name == "fig2":
        return run_dirichlet(target)
    return run_experiment(shipped_config(name), target, threads)
