"""Numeric kernels in float, posit and quire arithmetic, plus error studies.

The native kernels here are bit-identical to what the emulator computes for
the same mode; they exist so that thousand-trial studies run in seconds.
"""

from .kernels import Audit, GivensUnsupported, quantize, xdot, xgemm, xgemv, xgivens
from .lk import lucas_kanade_velocity, read_pgm, write_pgm
from .modes import F32, F64, NumericMode, Tag, parse_mode
from .study import ErrorReport, run_error_study, write_reports

__all__ = [
    "Audit", "GivensUnsupported", "quantize", "xdot", "xgemm", "xgemv", "xgivens",
    "lucas_kanade_velocity", "read_pgm", "write_pgm",
    "F32", "F64", "NumericMode", "Tag", "parse_mode",
    "ErrorReport", "run_error_study", "write_reports",
]
