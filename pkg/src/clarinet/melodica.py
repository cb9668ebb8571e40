"""Command-level model of the posit unit: functional results plus timing.

Each command maps onto posit/quire operations.  Timing is tracked
separately from values so a null latency model changes no result.

Timing rules (all cycle counts relative to the issue cycle):

* fused ops (FMA/FMS/FDA/FDS) and quire init respond at once with no
  register result and land in the quire ``fused_latency`` cycles later;
* ``FCVT_P_R`` waits for every outstanding quire update, then pays the
  conversion latency and the response path back to the register file;
* float/posit converters pay the conversion latency plus the response path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .posit import (
    PositBits,
    PositConfig,
    binary32_from_posit,
    extract,
    posit_from_binary32,
)
from .quire import FusedOp, Quire

__all__ = [
    "Opcode",
    "MelodicaCommand",
    "CommandError",
    "LatencyModel",
    "MelodicaResult",
    "Melodica",
    "QuireStats",
]


class Opcode(enum.Enum):
    FMA_P = "FMA_P"
    FMS_P = "FMS_P"
    FDA_P = "FDA_P"
    FDS_P = "FDS_P"
    FCVT_R_P = "FCVT_R_P"
    FCVT_P_R = "FCVT_P_R"
    FCVT_P_S = "FCVT_P_S"
    FCVT_S_P = "FCVT_S_P"

    @property
    def is_fused(self) -> bool:
        return self in _FUSED


_FUSED = {
    Opcode.FMA_P: FusedOp.MUL_ADD,
    Opcode.FMS_P: FusedOp.MUL_SUB,
    Opcode.FDA_P: FusedOp.DIV_ADD,
    Opcode.FDS_P: FusedOp.DIV_SUB,
}

#: number of operands each command takes
ARITY = {
    Opcode.FMA_P: 2,
    Opcode.FMS_P: 2,
    Opcode.FDA_P: 2,
    Opcode.FDS_P: 2,
    Opcode.FCVT_R_P: 1,
    Opcode.FCVT_P_R: 0,
    Opcode.FCVT_P_S: 1,
    Opcode.FCVT_S_P: 1,
}


class CommandError(ValueError):
    """A malformed command: an emulator bug, not a numeric condition."""


@dataclass(frozen=True)
class MelodicaCommand:
    opcode: Opcode
    operand1: int | None = None
    operand2: int | None = None

    def __post_init__(self):
        given = (self.operand1 is not None) + (self.operand2 is not None)
        want = ARITY[self.opcode]
        if given != want or (want == 1 and self.operand1 is None):
            raise CommandError(
                f"{self.opcode.value} takes {want} operand(s), got {given}"
            )


# published per-width figures: (fused latency, quire accumulate stages)
_PUBLISHED = {8: (12, 1), 16: (20, 4), 32: (36, 16)}


def _quire_stages(n: int, segment_bits: int = 32) -> int:
    return max(1, math.ceil((n * n / 2) / segment_bits))


def _front_latency(n: int) -> float:
    """Non-quire part of the fused pipeline, interpolated between published widths."""
    pts = sorted((w, lat - st) for w, (lat, st) in _PUBLISHED.items())
    if n <= pts[0][0]:
        (x0, y0), (x1, y1) = pts[0], pts[1]
    elif n >= pts[-1][0]:
        (x0, y0), (x1, y1) = pts[-2], pts[-1]
    else:
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x0 <= n <= x1:
                break
    return y0 + (y1 - y0) * (n - x0) / (x1 - x0)


@dataclass(frozen=True)
class LatencyModel:
    config: PositConfig
    fused_latency: int
    quire_stages: int
    convert_latency: int = 2
    #: cycles to route a result back into the CPU register files
    response_overhead: int = 4

    @classmethod
    def for_config(cls, config: PositConfig, **overrides) -> "LatencyModel":
        if config.n in _PUBLISHED:
            fused, stages = _PUBLISHED[config.n]
        else:
            stages = _quire_stages(config.n)
            fused = max(1, round(_front_latency(config.n))) + stages
        return cls(config, fused, stages, **overrides)

    @classmethod
    def null(cls, config: PositConfig) -> "LatencyModel":
        return cls(config, 0, 0, 0, 0)

    @property
    def response_latency(self) -> int:
        return self.convert_latency + self.response_overhead


@dataclass(frozen=True)
class MelodicaResult:
    value: int | None
    response_at: int
    completes_at: int


@dataclass
class QuireStats:
    """Counts quire sessions; used by the accumulation audits."""

    inits: int = 0
    reads: int = 0
    accumulations: int = 0
    depths: list = field(default_factory=list)
    _since_read: int = 0

    def on_init(self):
        self.inits += 1
        self._since_read = 0

    def on_accumulate(self):
        self.accumulations += 1
        self._since_read += 1

    def on_read(self):
        self.reads += 1
        self.depths.append(self._since_read)
        self._since_read = 0

    @property
    def accumulations_per_read(self) -> float:
        return self.accumulations / self.reads if self.reads else 0.0


class Melodica:
    def __init__(self, config: PositConfig, latency: LatencyModel | None = None):
        self.config = config
        self.latency = latency or LatencyModel.for_config(config)
        self.quire = Quire(config)
        self.stats = QuireStats()
        self._pending_until = 0  # cycle the last queued quire update lands
        self._barrier = 0  # no command issues before an outstanding read returns

    def reset_timing(self):
        self._pending_until = 0
        self._barrier = 0

    def execute(self, cmd: MelodicaCommand, now: int = 0) -> MelodicaResult:
        """Run one command issued at absolute cycle ``now``.

        The returned cycle offsets are relative to ``now``.
        """
        lat = self.latency
        cfg = self.config
        issue = max(now, self._barrier)
        wait = issue - now
        op = cmd.opcode
        value = None
        if op.is_fused:
            a = extract(PositBits(cmd.operand1 & cfg.mask, cfg))
            b = extract(PositBits(cmd.operand2 & cfg.mask, cfg))
            self.quire.accumulate(a, b, _FUSED[op])
            self.stats.on_accumulate()
            done = issue + lat.fused_latency
            self._pending_until = max(self._pending_until, done)
            return MelodicaResult(None, wait, done - now)
        if op is Opcode.FCVT_R_P:
            self.quire.init(PositBits(cmd.operand1 & cfg.mask, cfg))
            self.stats.on_init()
            done = issue + lat.fused_latency
            self._pending_until = max(self._pending_until, done)
            return MelodicaResult(None, wait, done - now)
        if op is Opcode.FCVT_P_R:
            value = self.quire.read_bits().pattern
            self.stats.on_read()
            start = max(issue, self._pending_until)
            resp = start + lat.response_latency
            self._barrier = resp
            return MelodicaResult(value, resp - now, resp - now)
        if op is Opcode.FCVT_P_S:
            value = posit_from_binary32(cmd.operand1, cfg).pattern
        elif op is Opcode.FCVT_S_P:
            value = binary32_from_posit(PositBits(cmd.operand1 & cfg.mask, cfg))
        resp = issue + lat.response_latency
        return MelodicaResult(value, resp - now, resp - now)
