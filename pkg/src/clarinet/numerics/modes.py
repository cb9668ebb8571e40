"""Numeric modes: which real-number type holds data and how sums accumulate.

=========  ==============================================================
tag        meaning
=========  ==============================================================
f64        binary64 reference
f32        binary32 data, fused multiply-add chain
pN         posit<N> data; every operation rounds (one accumulation per
           quire session)
qN         posit<N> data; whole reductions accumulate in the quire and
           round once
f32-qN     binary32 data converted to posit<N> for quire accumulation;
           results converted back to binary32
=========  ==============================================================
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..posit import PositConfig, config_for

__all__ = ["Tag", "NumericMode", "parse_mode", "F64", "F32"]


class Tag(enum.Enum):
    F64REF = "f64"
    F32 = "f32"
    PN = "p"
    QN = "q"
    F32_QN = "f32-q"


@dataclass(frozen=True)
class NumericMode:
    tag: Tag
    config: PositConfig | None = None

    def __post_init__(self):
        needs = self.tag in (Tag.PN, Tag.QN, Tag.F32_QN)
        if needs != (self.config is not None):
            raise ValueError(f"mode {self.tag.value} {'needs' if needs else 'takes no'} posit config")

    @property
    def name(self) -> str:
        if self.config is None:
            return self.tag.value
        return f"{self.tag.value}{self.config.n}"

    @property
    def uses_quire(self) -> bool:
        return self.tag in (Tag.QN, Tag.F32_QN)

    @property
    def is_posit(self) -> bool:
        return self.config is not None

    def __str__(self):
        return self.name


F64 = NumericMode(Tag.F64REF)
F32 = NumericMode(Tag.F32)

_RE = re.compile(r"^(f32-q|p|q)(\d+)(?:[,/:]es=?(\d))?$")


def parse_mode(text: str) -> NumericMode:
    """Parse 'f64', 'f32', 'p32', 'q16', 'f32-q32' (optionally ',es=1')."""
    t = text.strip().lower()
    if t in ("f64", "f64ref", "ref"):
        return F64
    if t == "f32":
        return F32
    m = _RE.match(t)
    if not m:
        raise ValueError(f"unknown numeric mode {text!r}")
    tag = {"p": Tag.PN, "q": Tag.QN, "f32-q": Tag.F32_QN}[m.group(1)]
    es = int(m.group(3)) if m.group(3) else None
    return NumericMode(tag, config_for(int(m.group(2)), es))
