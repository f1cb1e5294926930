"""Experiment layer: signatures, sections, basins and parameter scans."""

from .basin import BasinCriteria, BasinGrid, Classification, Label, basin_scan, classify_start
from .poincare import (AperiodicityCheck, PoincarePlane, aperiodicity_check, converged_point,
                       crossings_array, poincare_map, write_crossings)
from .pool import default_threads, parallel_map
from .scans import (Column, OrbitDiagram, TwoParamResult, bifurcation_scan, branch_count,
                    mmo_flag, n_avg, scan_column, two_param_scan, write_navg, zero_hopf)
from .signature import MmoSignature, mmo_signature, signature_from_extrema

__all__ = [
    "AperiodicityCheck", "BasinCriteria", "BasinGrid", "Classification", "Column", "Label",
    "MmoSignature", "OrbitDiagram", "PoincarePlane", "TwoParamResult", "aperiodicity_check",
    "basin_scan", "bifurcation_scan", "branch_count", "classify_start", "converged_point",
    "crossings_array", "default_threads", "mmo_flag", "mmo_signature", "n_avg",
    "parallel_map", "poincare_map", "scan_column", "signature_from_extrema",
    "two_param_scan", "write_crossings", "write_navg", "zero_hopf",
]
