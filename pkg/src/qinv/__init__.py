"""Qualitative inversion with sparse direct sampling indicators."""

__version__ = "0.1.0"

from .forward import (ArrayGeometry, DataMatrix, MeasurementSurface, ScattererSet, SourceSet,
                      add_noise, synth_aoa, synth_born)
from .grid import SamplingGrid, evaluate_field, find_peaks, timing_report
from .indicators import IndicatorSpec, evaluate
from .sparse import SparseProblem, brute_force_sparse, omp_err, omp_k
from .steering import AoaProbes, ScatteringProbes

__all__ = [
    "ArrayGeometry", "DataMatrix", "MeasurementSurface", "ScattererSet", "SourceSet",
    "add_noise", "synth_aoa", "synth_born", "SamplingGrid", "evaluate_field", "find_peaks",
    "timing_report", "IndicatorSpec", "evaluate", "SparseProblem", "brute_force_sparse",
    "omp_err", "omp_k", "AoaProbes", "ScatteringProbes",
]
