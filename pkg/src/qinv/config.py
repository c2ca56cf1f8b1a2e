"""Experiment configuration: YAML schema, validation with line numbers, defaults.

Every section is a frozen dataclass so two parsed configs compare by value.
:func:`parse_config` fills all defaults from :data:`DEFAULTS`, so
``parse_config(serialize(cfg)) == cfg`` for any valid ``cfg``.
"""

import os
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import yaml
from yaml.constructor import SafeConstructor

from .indicators import METHODS, TOLERANCE_MODES, IndicatorSpec

FORWARD_KINDS = ("aoa", "born", "load_csv")
SURFACE_KINDS = ("circle", "half-circle", "quarter-circle", "points")
FORMATS = ("csv", "pgm", "peaks", "timing", "data")
PEAK_SCALES = ("db", "linear")

# The single home of every default; the README table mirrors it.
DEFAULTS = {
    "array.spacing_y": 1.0,
    "array.count_y": 1,
    "array.wavenumber": 1.0,
    "sources.amplitude": 1.0,
    "random.seed": 0,
    "random.low": -1.0,
    "random.high": 1.0,
    "random.min_separation": 0.0,
    "random.planar": False,
    "random.contrast": 1.0,
    "surface.center": (0.0, 0.0),
    "scatterers.contrast": 1.0,
    "noise.enabled": False,
    "noise.seed": 0,
    "grid.aoa_1d": ((-1.0, 1.0, 400),),
    "grid.aoa_2d": ((-1.0, 1.0, 201), (-1.0, 1.0, 201)),
    "grid.scattering": ((-2.0, 2.0, 200), (-2.0, 2.0, 200)),
    "indicator.mode": 0,
    "output.directory": None,
    "output.formats": ("csv", "peaks", "timing"),
    "output.log_scale": False,
    "output.crop": None,
    "peaks.max_count": 10,
    "peaks.min_prominence": 0.1,
    "peaks.scale": "db",
}

OUT_ENV = "QINV_OUT"
FALLBACK_OUT = "qinv-out"


class ConfigError(ValueError):
    """All validation problems of one config, each prefixed by its line."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n  " + "\n  ".join(self.errors))


# -- config value types ------------------------------------------------------


@dataclass(frozen=True)
class ArraySection:
    spacing_x: float
    spacing_y: float
    count_x: int
    count_y: int
    wavenumber: float


@dataclass(frozen=True)
class RandomSection:
    count: int
    seed: int
    low: float
    high: float
    min_separation: float
    planar: bool = None
    contrast: float = None


@dataclass(frozen=True)
class SourcesSection:
    directions: tuple = None
    amplitudes: tuple = None
    random: RandomSection = None


@dataclass(frozen=True)
class AoaSection:
    array: ArraySection
    time_samples: int
    time_step: float
    sources: SourcesSection


@dataclass(frozen=True)
class SurfaceSection:
    kind: str
    count: int = None
    radius: float = None
    center: tuple = None
    points: tuple = None


@dataclass(frozen=True)
class ScatterersSection:
    positions: tuple = None
    contrasts: tuple = None
    random: RandomSection = None


@dataclass(frozen=True)
class BornSection:
    wavenumber: float
    surface: SurfaceSection
    scatterers: ScatterersSection


@dataclass(frozen=True)
class LoadSection:
    path: str
    array: ArraySection = None
    surface: SurfaceSection = None
    wavenumber: float = None


@dataclass(frozen=True)
class NoiseSection:
    enabled: bool
    seed: int
    snr: float = None


@dataclass(frozen=True)
class IndicatorEntry:
    label: str
    spec: IndicatorSpec


@dataclass(frozen=True)
class PeaksSection:
    max_count: int
    min_prominence: float
    scale: str


@dataclass(frozen=True)
class OutputSection:
    directory: str
    formats: tuple
    log_scale: bool
    crop: tuple
    peaks: PeaksSection


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    forward: object
    noise: NoiseSection
    grid: tuple
    indicators: tuple
    output: OutputSection

    @property
    def forward_kind(self):
        return {AoaSection: "aoa", BornSection: "born", LoadSection: "load_csv"}[type(self.forward)]

    def with_seed(self, seed):
        """Copy with the noise seed replaced."""
        noise = NoiseSection(self.noise.enabled, int(seed), self.noise.snr)
        return ExperimentConfig(self.name, self.forward, noise, self.grid,
                                self.indicators, self.output)


# -- validation machinery ----------------------------------------------------


class _Checker:
    def __init__(self):
        self.errors = []
        self._con = SafeConstructor()

    def error(self, node, path, msg):
        self.errors.append((node.start_mark.line + 1, f"line {node.start_mark.line + 1}: {path}: {msg}"))

    def value(self, node):
        return self._con.construct_object(node, deep=True)

    def mapping(self, node, path, required=(), optional=()):
        if not isinstance(node, yaml.MappingNode):
            self.error(node, path, "expected a mapping")
            return None
        out = {}
        for knode, vnode in node.value:
            key = self.value(knode) if isinstance(knode, yaml.ScalarNode) else None
            if not isinstance(key, str):
                self.error(knode, path, "keys must be strings")
            elif key in out:
                self.error(knode, f"{path}.{key}", "duplicate key")
            elif key not in required and key not in optional:
                self.error(knode, f"{path}.{key}", "unknown key")
            else:
                out[key] = vnode
        for key in required:
            if key not in out:
                self.error(node, path, f"missing required key {key!r}")
        return out

    def sequence(self, node, path, length=None):
        if not isinstance(node, yaml.SequenceNode):
            self.error(node, path, "expected a list")
            return None
        if length is not None and len(node.value) != length:
            self.error(node, path, f"expected {length} entries")
            return None
        return node.value

    def number(self, node, path, integer=False, minimum=None, positive=False):
        if not isinstance(node, yaml.ScalarNode):
            self.error(node, path, "expected a number")
            return None
        raw = self.value(node)
        if isinstance(raw, bool) or raw is None:
            self.error(node, path, "expected a number")
            return None
        if isinstance(raw, str):
            try:
                # accepts "3e5" and exact fractions such as "50/19"
                raw = Fraction(raw.strip())
            except (ValueError, ZeroDivisionError):
                self.error(node, path, f"cannot read {raw!r} as a number")
                return None
        if integer:
            if isinstance(raw, float) or (isinstance(raw, Fraction) and raw.denominator != 1):
                if float(raw) != int(float(raw)):
                    self.error(node, path, "expected an integer")
                    return None
            val = int(raw)
        else:
            val = float(raw)
            if val != val or val in (float("inf"), float("-inf")):
                self.error(node, path, "must be finite")
                return None
        if positive and not val > 0:
            self.error(node, path, "must be positive")
            return None
        if minimum is not None and val < minimum:
            self.error(node, path, f"must be >= {minimum}")
            return None
        return val

    def boolean(self, node, path):
        raw = self.value(node) if isinstance(node, yaml.ScalarNode) else None
        if not isinstance(raw, bool):
            self.error(node, path, "expected true or false")
            return None
        return raw

    def string(self, node, path, choices=None):
        raw = self.value(node) if isinstance(node, yaml.ScalarNode) else None
        if not isinstance(raw, str) or not raw:
            self.error(node, path, "expected a non-empty string")
            return None
        if choices is not None and raw not in choices:
            self.error(node, path, f"must be one of {', '.join(choices)}")
            return None
        return raw

    def numbers(self, node, path, length=None, **kw):
        items = self.sequence(node, path, length)
        if items is None:
            return None
        vals = [self.number(n, f"{path}[{i}]", **kw) for i, n in enumerate(items)]
        return None if any(v is None for v in vals) else tuple(vals)

    def rows(self, node, path, widths):
        """List of points; a bare number is a 1-entry point."""
        items = self.sequence(node, path)
        if items is None:
            return None
        if not items:
            self.error(node, path, "must not be empty")
            return None
        out = []
        for i, item in enumerate(items):
            p = f"{path}[{i}]"
            if isinstance(item, yaml.SequenceNode):
                if len(item.value) not in widths:
                    self.error(item, p, f"expected {' or '.join(map(str, widths))} coordinates")
                    return None
                row = self.numbers(item, p)
            elif 1 in widths:
                v = self.number(item, p)
                row = None if v is None else (v,)
            else:
                self.error(item, p, "expected a list of coordinates")
                return None
            if row is None:
                return None
            out.append(row)
        return tuple(out)


def _opt(ck, m, key, fn, default, path, **kw):
    if key in m:
        return fn(m[key], f"{path}.{key}", **kw)
    return default


def _array(ck, node, path):
    m = ck.mapping(node, path, ("spacing", "count"), ("wavenumber",))
    if m is None:
        return None
    spacing = _pair(ck, m.get("spacing"), f"{path}.spacing", DEFAULTS["array.spacing_y"], positive=True)
    count = _pair(ck, m.get("count"), f"{path}.count", DEFAULTS["array.count_y"],
                  integer=True, minimum=1)
    k = _opt(ck, m, "wavenumber", ck.number, DEFAULTS["array.wavenumber"], path, positive=True)
    if None in (spacing, count, k):
        return None
    return ArraySection(spacing[0], spacing[1], count[0], count[1], k)


def _pair(ck, node, path, second, **kw):
    """A number or a 1- or 2-entry list; the second entry defaults to ``second``."""
    if node is None:
        return None
    if isinstance(node, yaml.SequenceNode):
        if len(node.value) not in (1, 2):
            ck.error(node, path, "expected 1 or 2 entries")
            return None
        vals = ck.numbers(node, path, **kw)
    else:
        v = ck.number(node, path, **kw)
        vals = None if v is None else (v,)
    if vals is None:
        return None
    return vals if len(vals) == 2 else (vals[0], second)


def _random(ck, node, path, extra):
    m = ck.mapping(node, path, ("count",), ("seed", "low", "high", "min_separation", extra))
    if m is None:
        return None
    vals = {
        "count": ck.number(m["count"], f"{path}.count", integer=True, minimum=1) if "count" in m else None,
        "seed": _opt(ck, m, "seed", ck.number, DEFAULTS["random.seed"], path, integer=True, minimum=0),
        "low": _opt(ck, m, "low", ck.number, DEFAULTS["random.low"], path),
        "high": _opt(ck, m, "high", ck.number, DEFAULTS["random.high"], path),
        "min_separation": _opt(ck, m, "min_separation", ck.number,
                               DEFAULTS["random.min_separation"], path, minimum=0.0),
    }
    if extra == "planar":
        vals["planar"] = _opt(ck, m, "planar", ck.boolean, DEFAULTS["random.planar"], path)
    else:
        vals["contrast"] = _opt(ck, m, "contrast", ck.number, DEFAULTS["random.contrast"], path)
        if vals["contrast"] == 0:
            ck.error(m["contrast"], f"{path}.contrast", "must be nonzero")
            return None
    if any(v is None for v in vals.values()):
        return None
    if not vals["low"] < vals["high"]:
        ck.error(node, path, "low must be below high")
        return None
    return RandomSection(**vals)


def _explicit_or_random(ck, m, node, path, coords, weights, extra, widths):
    has_coords, has_random = coords in m, "random" in m
    if has_coords == has_random:
        ck.error(node, path, f"give exactly one of {coords!r} or 'random'")
        return None
    if has_random:
        if weights in m:
            ck.error(m[weights], f"{path}.{weights}", "not allowed with 'random'")
            return None
        rnd = _random(ck, m["random"], f"{path}.random", extra)
        return None if rnd is None else (None, None, rnd)
    pts = ck.rows(m[coords], f"{path}.{coords}", widths)
    if pts is None:
        return None
    if weights in m:
        w = ck.numbers(m[weights], f"{path}.{weights}", len(pts))
        if w is None:
            return None
        if any(v == 0 for v in w):
            ck.error(m[weights], f"{path}.{weights}", "entries must be nonzero")
            return None
    else:
        w = (DEFAULTS["sources.amplitude"],) * len(pts)
    return pts, w, None


def _aoa(ck, node, path):
    m = ck.mapping(node, path, ("array", "time_samples", "time_step", "sources"))
    if m is None:
        return None
    arr = _array(ck, m["array"], f"{path}.array") if "array" in m else None
    ts = _opt(ck, m, "time_samples", ck.number, None, path, integer=True, minimum=1)
    dt = _opt(ck, m, "time_step", ck.number, None, path, positive=True)
    src = None
    if "sources" in m:
        sp = f"{path}.sources"
        sm = ck.mapping(m["sources"], sp, (), ("directions", "amplitudes", "random"))
        if sm is not None:
            got = _explicit_or_random(ck, sm, m["sources"], sp, "directions", "amplitudes",
                                      "planar", (1, 2))
            if got is not None:
                dirs, amps, rnd = got
                if dirs is not None:
                    dirs = tuple(d if len(d) == 2 else (d[0], 0.0) for d in dirs)
                    if any(abs(c) > 1 for d in dirs for c in d):
                        ck.error(sm["directions"], f"{sp}.directions", "direction cosines must lie in [-1, 1]")
                        dirs = None
                if dirs is not None or rnd is not None:
                    src = SourcesSection(dirs, amps, rnd)
    if None in (arr, ts, dt, src):
        return None
    return AoaSection(arr, ts, dt, src)


def _surface(ck, node, path):
    m = ck.mapping(node, path, ("kind",), ("count", "radius", "center", "points"))
    if m is None:
        return None
    kind = ck.string(m["kind"], f"{path}.kind", SURFACE_KINDS) if "kind" in m else None
    if kind is None:
        return None
    if kind == "points":
        for key in ("count", "radius", "center"):
            if key in m:
                ck.error(m[key], f"{path}.{key}", "not used with kind 'points'")
        if "points" not in m:
            ck.error(node, path, "kind 'points' needs 'points'")
            return None
        pts = ck.rows(m["points"], f"{path}.points", (2, 3))
        if pts is not None and len({len(p) for p in pts}) != 1:
            ck.error(m["points"], f"{path}.points", "all points need the same dimension")
            return None
        return None if pts is None else SurfaceSection(kind, points=pts)
    if "points" in m:
        ck.error(m["points"], f"{path}.points", f"not used with kind {kind!r}")
    for key in ("count", "radius"):
        if key not in m:
            ck.error(node, path, f"kind {kind!r} needs {key!r}")
    count = _opt(ck, m, "count", ck.number, None, path, integer=True, minimum=1)
    radius = _opt(ck, m, "radius", ck.number, None, path, positive=True)
    center = _opt(ck, m, "center", ck.numbers, DEFAULTS["surface.center"], path, length=2)
    if None in (count, radius, center):
        return None
    return SurfaceSection(kind, count, radius, center)


def _born(ck, node, path):
    m = ck.mapping(node, path, ("wavenumber", "surface", "scatterers"))
    if m is None:
        return None
    k = _opt(ck, m, "wavenumber", ck.number, None, path, positive=True)
    surf = _surface(ck, m["surface"], f"{path}.surface") if "surface" in m else None
    sc = None
    if "scatterers" in m:
        sp = f"{path}.scatterers"
        sm = ck.mapping(m["scatterers"], sp, (), ("positions", "contrasts", "random"))
        if sm is not None:
            widths = (3,) if surf is not None and surf.points and len(surf.points[0]) == 3 else (2,)
            got = _explicit_or_random(ck, sm, m["scatterers"], sp, "positions", "contrasts",
                                      "contrast", widths)
            if got is not None:
                pos, con, rnd = got
                if rnd is not None and widths == (3,):
                    ck.error(sm["random"], f"{sp}.random", "random scatterers are planar only")
                else:
                    if con is not None and "contrasts" not in sm:
                        con = (DEFAULTS["scatterers.contrast"],) * len(pos)
                    sc = ScatterersSection(pos, con, rnd)
    if None in (k, surf, sc):
        return None
    return BornSection(k, surf, sc)


def _load(ck, node, path, base_dir):
    m = ck.mapping(node, path, ("path",), ("array", "surface", "wavenumber"))
    if m is None:
        return None
    p = ck.string(m["path"], f"{path}.path") if "path" in m else None
    if ("array" in m) == ("surface" in m):
        ck.error(node, path, "give exactly one of 'array' (aoa data) or 'surface' (scattering data)")
        return None
    arr = _array(ck, m["array"], f"{path}.array") if "array" in m else None
    surf = _surface(ck, m["surface"], f"{path}.surface") if "surface" in m else None
    k = _opt(ck, m, "wavenumber", ck.number, None, path, positive=True)
    if "array" in m and "wavenumber" in m:
        ck.error(m["wavenumber"], f"{path}.wavenumber", "set the wavenumber inside 'array'")
        return None
    if p is None or (arr is None and surf is None) or ("wavenumber" in m and k is None):
        return None
    if base_dir is not None and not os.path.isabs(p):
        p = os.path.normpath(os.path.join(base_dir, p))
    return LoadSection(p, arr, surf, k)


def _noise(ck, node, path):
    if node is None:
        return NoiseSection(DEFAULTS["noise.enabled"], DEFAULTS["noise.seed"])
    m = ck.mapping(node, path, (), ("enabled", "snr", "seed"))
    if m is None:
        return None
    enabled = _opt(ck, m, "enabled", ck.boolean, "snr" in m, path)
    snr = _opt(ck, m, "snr", ck.number, None, path, positive=True)
    seed = _opt(ck, m, "seed", ck.number, DEFAULTS["noise.seed"], path, integer=True, minimum=0)
    if enabled and "snr" not in m:
        ck.error(node, path, "enabled noise needs 'snr'")
        return None
    if enabled is None or seed is None or ("snr" in m and snr is None):
        return None
    return NoiseSection(enabled, seed, snr)


def _grid(ck, node, path, default):
    if node is None:
        return default
    m = ck.mapping(node, path, ("axes",))
    if m is None or "axes" not in m:
        return None
    items = ck.sequence(m["axes"], f"{path}.axes")
    if items is None:
        return None
    if len(items) not in (1, 2):
        ck.error(m["axes"], f"{path}.axes", "grid must have 1 or 2 axes")
        return None
    axes = []
    for i, item in enumerate(items):
        p = f"{path}.axes[{i}]"
        am = ck.mapping(item, p, ("min", "max", "count"))
        if am is None or len(am) < 3:
            return None
        lo = ck.number(am["min"], f"{p}.min")
        hi = ck.number(am["max"], f"{p}.max")
        c = ck.number(am["count"], f"{p}.count", integer=True, minimum=2)
        if None in (lo, hi, c):
            return None
        if not lo < hi:
            ck.error(item, p, "min must be below max")
            return None
        axes.append((lo, hi, c))
    return tuple(axes)


_SPEC_KEYS = ("mode", "sparsity", "tolerance", "tolerance_mode", "cap", "subspace_dim", "reg")


def _indicators(ck, node, path):
    items = ck.sequence(node, path)
    if items is None:
        return None
    if not items:
        ck.error(node, path, "need at least one indicator")
        return None
    out, seen, ok = [], {}, True
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        m = ck.mapping(item, p, ("method",), ("label",) + _SPEC_KEYS)
        if m is None or "method" not in m:
            ok = False
            continue
        method = ck.string(m["method"], f"{p}.method", METHODS)
        kw = {}
        for key in _SPEC_KEYS:
            if key not in m:
                continue
            q = f"{p}.{key}"
            if key == "tolerance_mode":
                kw[key] = ck.string(m[key], q, TOLERANCE_MODES)
            elif key in ("mode", "sparsity", "cap", "subspace_dim"):
                kw[key] = ck.number(m[key], q, integer=True, minimum=0)
            else:
                kw[key] = ck.number(m[key], q, minimum=0.0)
        if method is None or any(v is None for v in kw.values()):
            ok = False
            continue
        kw.setdefault("mode", DEFAULTS["indicator.mode"])
        try:
            spec = IndicatorSpec(method, **kw)
        except ValueError as exc:
            ck.error(item, p, str(exc))
            ok = False
            continue
        label = ck.string(m["label"], f"{p}.label") if "label" in m else spec.name
        if label is None:
            ok = False
            continue
        if label in seen:
            ck.error(item, f"{p}.label", f"duplicate label {label!r} (first on line {seen[label]})")
            ok = False
            continue
        if os.sep in label or label.startswith("."):
            ck.error(item, f"{p}.label", "labels become file names; no path separators")
            ok = False
            continue
        seen[label] = item.start_mark.line + 1
        out.append(IndicatorEntry(label, spec))
    return tuple(out) if ok else None


def _output(ck, node, path, grid_dim):
    m = {} if node is None else ck.mapping(node, path, (), ("directory", "formats", "log_scale",
                                                               "crop", "peaks"))
    if m is None:
        return None
    directory = _opt(ck, m, "directory", ck.string, DEFAULTS["output.directory"], path)
    formats = DEFAULTS["output.formats"]
    if "formats" in m:
        items = ck.sequence(m["formats"], f"{path}.formats")
        formats = None if items is None else tuple(
            ck.string(n, f"{path}.formats[{i}]", FORMATS) for i, n in enumerate(items))
        if formats is not None and (None in formats):
            formats = None
        elif formats is not None and len(set(formats)) != len(formats):
            ck.error(m["formats"], f"{path}.formats", "duplicate format")
            formats = None
        elif formats is not None and "pgm" in formats and grid_dim == 1:
            ck.error(m["formats"], f"{path}.formats", "pgm heatmaps need a 2-D grid; use csv")
            formats = None
    log_scale = _opt(ck, m, "log_scale", ck.boolean, DEFAULTS["output.log_scale"], path)
    crop = DEFAULTS["output.crop"]
    if "crop" in m and not (isinstance(m["crop"], yaml.ScalarNode) and ck.value(m["crop"]) is None):
        crop = ck.rows(m["crop"], f"{path}.crop", (2,))
        if crop is not None:
            if grid_dim is not None and len(crop) != grid_dim:
                ck.error(m["crop"], f"{path}.crop", "need one [lo, hi] pair per grid axis")
                crop = None
            elif any(not lo < hi for lo, hi in crop):
                ck.error(m["crop"], f"{path}.crop", "each window needs lo < hi")
                crop = None
        if crop is None:
            return None
    pk = PeaksSection(DEFAULTS["peaks.max_count"], DEFAULTS["peaks.min_prominence"],
                      DEFAULTS["peaks.scale"])
    if "peaks" in m:
        pp = f"{path}.peaks"
        pm = ck.mapping(m["peaks"], pp, (), ("max_count", "min_prominence", "scale"))
        if pm is None:
            return None
        mc = _opt(ck, pm, "max_count", ck.number, pk.max_count, pp, integer=True, minimum=1)
        mp = _opt(ck, pm, "min_prominence", ck.number, pk.min_prominence, pp, minimum=0.0)
        sc = _opt(ck, pm, "scale", ck.string, pk.scale, pp, choices=PEAK_SCALES)
        if mp is not None and mp > 1:
            ck.error(pm["min_prominence"], f"{pp}.min_prominence", "must be <= 1")
            mp = None
        if None in (mc, mp, sc):
            return None
        pk = PeaksSection(mc, mp, sc)
    if formats is None or log_scale is None or ("directory" in m and directory is None):
        return None
    return OutputSection(directory, formats, log_scale, crop, pk)


def _default_grid(forward):
    if isinstance(forward, AoaSection):
        planar = forward.array.count_y > 1 or (
            forward.sources.random is not None and forward.sources.random.planar)
        return DEFAULTS["grid.aoa_2d"] if planar else DEFAULTS["grid.aoa_1d"]
    if isinstance(forward, LoadSection) and forward.array is not None:
        return DEFAULTS["grid.aoa_2d"] if forward.array.count_y > 1 else DEFAULTS["grid.aoa_1d"]
    return DEFAULTS["grid.scattering"]


def parse_config(text, base_dir=None):
    """Validate YAML ``text`` into an :class:`ExperimentConfig`.

    Raises :class:`ConfigError` listing every problem found, each with its
    line number. Relative ``load_csv.path`` entries resolve against
    ``base_dir`` when given.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError([f"{where}malformed YAML: {getattr(exc, 'problem', exc)}"]) from None
    if root is None:
        raise ConfigError(["line 1: config is empty"])
    ck = _Checker()
    top = ck.mapping(root, "config", ("name", "indicators"),
                     FORWARD_KINDS + ("noise", "grid", "output"))
    if top is None:
        raise ConfigError([e for _, e in ck.errors])
    name = ck.string(top["name"], "name") if "name" in top else None
    kinds = [k for k in FORWARD_KINDS if k in top]
    forward = None
    if len(kinds) != 1:
        ck.error(root, "config", "need exactly one forward-model section: aoa, born or load_csv")
    elif kinds[0] == "aoa":
        forward = _aoa(ck, top["aoa"], "aoa")
    elif kinds[0] == "born":
        forward = _born(ck, top["born"], "born")
    else:
        forward = _load(ck, top["load_csv"], "load_csv", base_dir)
    noise = _noise(ck, top.get("noise"), "noise")
    grid = _grid(ck, top.get("grid"), "grid", _default_grid(forward) if forward else None)
    indicators = _indicators(ck, top["indicators"], "indicators") if "indicators" in top else None
    output = _output(ck, top.get("output"), "output", len(grid) if grid else None)
    if indicators is not None and forward is not None and output is not None:
        _cross_checks(ck, top, forward, indicators, grid)
    if ck.errors:
        raise ConfigError([e for _, e in sorted(ck.errors, key=lambda t: t[0])])
    return ExperimentConfig(name, forward, noise, grid, indicators, output)


def _cross_checks(ck, top, forward, indicators, grid):
    node = top["indicators"]
    scattering = isinstance(forward, BornSection) or (
        isinstance(forward, LoadSection) and forward.surface is not None)
    for entry in indicators:
        if entry.spec.mode == 1 and isinstance(forward, AoaSection) and (
                forward.time_samples != forward.array.count_x * forward.array.count_y):
            ck.error(node, "indicators", f"{entry.label}: mode 1 needs square data "
                     "(time_samples equal to the element count)")
    if grid is not None and scattering and len(grid) == 1:
        ck.error(top.get("grid", node), "grid", "scattering experiments need a 2-D grid")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


# -- serialization -------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (tuple, list)):
        return [_clean(v) for v in obj]
    return obj


def _spec_dict(entry):
    d = {"label": entry.label, "method": entry.spec.method, "mode": entry.spec.mode}
    for f in fields(entry.spec):
        if f.name not in ("method", "mode") and getattr(entry.spec, f.name) is not None:
            d[f.name] = getattr(entry.spec, f.name)
    return d


def _array_dict(a):
    return {"spacing": [a.spacing_x, a.spacing_y], "count": [a.count_x, a.count_y],
            "wavenumber": a.wavenumber}


def _points_dict(section, coords, weights):
    if section.random is not None:
        return {"random": asdict(section.random)}
    return {coords: getattr(section, coords), weights: getattr(section, weights)}


def to_dict(cfg):
    """Plain nested dict of ``cfg`` with every default spelled out."""
    fw = cfg.forward
    if isinstance(fw, AoaSection):
        fdict = {"array": _array_dict(fw.array), "time_samples": fw.time_samples,
                 "time_step": fw.time_step,
                 "sources": _points_dict(fw.sources, "directions", "amplitudes")}
    elif isinstance(fw, BornSection):
        fdict = {"wavenumber": fw.wavenumber, "surface": asdict(fw.surface),
                 "scatterers": _points_dict(fw.scatterers, "positions", "contrasts")}
    else:
        fdict = {"path": fw.path, "wavenumber": fw.wavenumber,
                 "array": _array_dict(fw.array) if fw.array else None,
                 "surface": asdict(fw.surface) if fw.surface else None}
    out = cfg.output
    return _clean({
        "name": cfg.name,
        cfg.forward_kind: fdict,
        "noise": asdict(cfg.noise),
        "grid": {"axes": [{"min": lo, "max": hi, "count": c} for lo, hi, c in cfg.grid]},
        "indicators": [_spec_dict(e) for e in cfg.indicators],
        "output": {"directory": out.directory, "formats": list(out.formats),
                   "log_scale": out.log_scale, "crop": out.crop, "peaks": asdict(out.peaks)},
    })


def serialize(cfg):
    """YAML text that :func:`parse_config` reads back to an equal config."""
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def resolve_output_dir(cfg, override=None):
    """``--out`` flag, then the config, then ``$QINV_OUT``, then ``./qinv-out``."""
    if override:
        return override
    if cfg.output.directory:
        return cfg.output.directory
    return os.environ.get(OUT_ENV) or FALLBACK_OUT
