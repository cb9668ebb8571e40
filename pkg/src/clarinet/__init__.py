"""Posit/quire arithmetic, a posit-extended RISC-V emulator, and numeric studies."""

from .posit import (
    PositBits,
    PositConfig,
    UnpackedPosit,
    binary32_from_posit,
    config_for,
    extract,
    normalize,
    posit_from_binary32,
    value_as_rational,
)
from .quire import FusedOp, Quire

__version__ = "0.1.0"

from .asm import assemble, disassemble
from .emulator import Machine
from .melodica import Melodica
