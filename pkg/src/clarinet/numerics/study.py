"""Monte Carlo error studies against the binary64 reference.

Inputs for trial ``t`` come from ``numpy.random.default_rng([seed, t])``
(PCG64), uniform over ``value_range``, so a trial's data do not depend on
how many trials run or in which order.  The same inputs feed every mode.

Error metrics (per trial, then averaged over trials):

* xdot: relative error ``|y_hat - y| / |y|``;
* xgemv / xgemm / xgivens: ``||Y_hat - Y|| / ||Y||`` (2-norm for vectors,
  Frobenius for matrices).

Accurate digits are ``-log10(mean relative error)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .kernels import Audit, xdot, xgemm, xgemv, xgivens
from .modes import F64, NumericMode

__all__ = ["ErrorReport", "KERNELS", "make_inputs", "run_error_study", "write_reports", "REPORT_HEADER", "digit_drop"]

KERNELS = ("xdot", "xgemv", "xgemm", "xgivens")

REPORT_HEADER = [
    "kernel", "size", "range_lo", "range_hi", "mode", "trials", "seed",
    "mean_relative_error", "accurate_digits", "rms_error", "max_error",
    "quire_reads", "accumulations_per_read",
]


@dataclass
class ErrorReport:
    kernel: str
    size: int
    range_lo: float
    range_hi: float
    mode: str
    trials: int
    seed: int
    mean_relative_error: float
    accurate_digits: float
    rms_error: float
    max_error: float
    quire_reads: int = 0
    accumulations_per_read: float = 0.0
    errors: np.ndarray | None = None  # per-trial relative errors

    def row(self) -> list:
        d = asdict(self)
        return [d[k] for k in REPORT_HEADER]


def accurate_digits(mean_rel: float) -> float:
    if mean_rel > 0:
        return -math.log10(mean_rel)
    return math.inf


def make_inputs(kernel: str, size: int, value_range, trials: int, seed: int):
    """Operands for every trial, stacked on a leading axis."""
    lo, hi = value_range
    shapes = {
        "xdot": [(size,), (size,)],
        "xgemv": [(size, size), (size,)],
        "xgemm": [(size, size), (size, size)],
        "xgivens": [(size, size)],
    }[kernel]
    per = [[] for _ in shapes]
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        for slot, shape in enumerate(shapes):
            per[slot].append(rng.uniform(lo, hi, size=shape))
    return [np.stack(p) for p in per]


def _run(kernel: str, args, mode: NumericMode, audit: Audit | None):
    fn = {"xdot": xdot, "xgemv": xgemv, "xgemm": xgemm, "xgivens": xgivens}[kernel]
    return fn(*args, mode, audit) if kernel != "xgivens" else fn(args[0], mode, audit)


def _rel_errors(kernel: str, got: np.ndarray, ref: np.ndarray) -> np.ndarray:
    if kernel == "xdot":
        return np.abs(got - ref) / np.abs(ref)
    axes = tuple(range(1, ref.ndim))
    return np.sqrt(np.sum((got - ref) ** 2, axis=axes)) / np.sqrt(np.sum(ref**2, axis=axes))


def run_error_study(kernel: str, sizes, value_range, trials: int, modes, seed: int = 0) -> list[ErrorReport]:
    """Accuracy of ``kernel`` per (size, mode) against the binary64 reference."""
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {', '.join(KERNELS)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    reports = []
    lo, hi = value_range
    for size in sizes:
        args = make_inputs(kernel, size, value_range, trials, seed)
        ref = _run(kernel, args, F64, None)
        for mode in modes:
            audit = Audit()
            got = _run(kernel, args, mode, audit)
            err = _rel_errors(kernel, got, ref)
            mean = float(np.mean(err))
            reports.append(
                ErrorReport(
                    kernel, size, lo, hi, mode.name, trials, seed, mean, accurate_digits(mean),
                    float(np.sqrt(np.mean(err**2))), float(np.max(err)),
                    audit.reads // trials, audit.accumulations_per_read, err,
                )
            )
    return reports


def digit_drop(reports: list[ErrorReport], mode: str, small: int, large: int) -> float:
    """Percentage drop in accurate digits from ``small`` to ``large`` size."""
    d = {r.size: r.accurate_digits for r in reports if r.mode == mode}
    return 100.0 * (d[small] - d[large]) / d[small]


def write_reports(path, reports: list[ErrorReport]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        for r in reports:
            w.writerow(r.row())
