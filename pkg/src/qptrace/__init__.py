"""Trace the zeros of a(s) + b(s) exp(-h s) in Re(s) > sigma0 as the delay h grows."""

from .continuation import TraceConfig, TrajectorySample, advance, rhs
from .crossing import CrossingEvent, Region, default_omega_max, delay_of_omega, direction_test, find_crossings
from .oracle import ContourRectangle, count_zeros, refine_zero
from .poly import RealPolynomial, derivative, evaluate, find_roots, root_bound
from .quasipoly import QuasiPolynomial, eval_f, eval_fh, eval_fs, sensitivity_bound
from .stability import StabilityReport, stability_report
from .tracker import TraceResult, Trajectory, trace_all

__all__ = [
    "ContourRectangle", "CrossingEvent", "QuasiPolynomial", "RealPolynomial", "Region",
    "StabilityReport", "TraceConfig", "TraceResult", "Trajectory", "TrajectorySample",
    "advance", "count_zeros", "default_omega_max", "delay_of_omega", "derivative",
    "direction_test", "eval_f", "eval_fh", "eval_fs", "evaluate", "find_crossings",
    "find_roots", "refine_zero", "rhs", "root_bound", "sensitivity_bound",
    "stability_report", "trace_all",
]
