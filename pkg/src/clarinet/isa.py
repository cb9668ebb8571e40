"""Binary encoding of the RV32IMF subset plus the ten posit instructions.

Every supported mnemonic is described by one :class:`OpSpec` row in
:data:`TABLE`.  A row fixes the major opcode, the function fields and the
register file of each operand; encode and decode are both driven by it, so
the two stay inverse by construction.

Posit instructions (all R-format except the loads/stores):

=============  ======  =====  ===  =====================================
mnemonic       funct5  fmt    rs2  operands
=============  ======  =====  ===  =====================================
fma.p          01100   10     rs2  ``p_rs1, p_rs2`` (result to quire)
fms.p          01101   10     rs2  ``p_rs1, p_rs2``
fda.p          01110   10     rs2  ``p_rs1, p_rs2``
fds.p          01111   10     rs2  ``p_rs1, p_rs2``
fcvt.r.p       01000   10     0x10 ``p_rs1`` (quire <- posit)
fcvt.p.r       01000   10     0x11 ``p_rd`` (posit <- quire)
fcvt.p.s       01000   10     0x00 ``p_rd, f_rs1``
fcvt.s.p       01000   00     0x10 ``f_rd, p_rs1``
pmv.x.w        11100   10     0x10 ``x_rd, p_rs1``
pmv.w.x        11110   10     0x00 ``p_rd, x_rs1``
plw            LOAD-FP, width 110   ``p_rd, imm(x_rs1)``
psw            STORE-FP, width 110  ``p_rs2, imm(x_rs1)``
=============  ======  =====  ===  =====================================

The fused-op function codes are our own choice: the posit ``fmt`` value
already separates them from the single-precision space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "Instruction",
    "IllegalInstruction",
    "OpSpec",
    "TABLE",
    "EncodingError",
    "encode",
    "decode",
    "format_instruction",
    "encoding_table",
    "write_encoding_table",
    "POSIT_MNEMONICS",
    "FMT_S",
    "FMT_P",
    "RS2_POSIT",
    "RS2_QUIRE",
    "WIDTH_POSIT",
]

# major opcodes
OP_LOAD = 0x03
OP_LOAD_FP = 0x07
OP_IMM = 0x13
OP_AUIPC = 0x17
OP_STORE = 0x23
OP_STORE_FP = 0x27
OP = 0x33
OP_LUI = 0x37
OP_MADD = 0x43
OP_MSUB = 0x47
OP_NMSUB = 0x4B
OP_NMADD = 0x4F
OP_FP = 0x53
OP_BRANCH = 0x63
OP_JALR = 0x67
OP_JAL = 0x6F
OP_SYSTEM = 0x73

FMT_S = 0b00
FMT_P = 0b10
RS2_POSIT = 0x10
RS2_QUIRE = 0x11
WIDTH_POSIT = 0b110
RM_RNE = 0b000

CSR_NAMES = {"cycle": 0xC00, "time": 0xC01, "instret": 0xC02}


class EncodingError(ValueError):
    """Unsupported mnemonic or a field that does not fit."""


@dataclass(frozen=True)
class OpSpec:
    """One row of the encoding table.

    ``fmt`` is the assembler operand layout:

    ``R``      rd, rs1, rs2              ``R4``   rd, rs1, rs2, rs3
    ``R1``     rd, rs1 (rs2 fixed)       ``RS``   rs1, rs2 (no rd)
    ``RS1``    rs1 only                  ``RD``   rd only
    ``I``      rd, rs1, imm              ``SH``   rd, rs1, shamt
    ``L``      rd, imm(rs1)              ``S``    rs2, imm(rs1)
    ``B``      rs1, rs2, offset          ``U``    rd, imm20
    ``J``      rd, offset                ``CSR``  rd, csr, rs1
    ``SYS``    no operands
    """

    mnemonic: str
    fmt: str
    opcode: int
    funct3: int | None = None
    funct7: int | None = None
    rs2: int | None = None  # fixed rs2 field (type code), if any
    files: str = "xxx"  # register file of rd, rs1, rs2 (and rs3 for R4)
    word: int | None = None  # whole fixed word (ecall/ebreak)

    @property
    def format_tag(self) -> str:
        """Base RISC-V instruction format."""
        return {
            "R": "R", "R1": "R", "RS": "R", "RS1": "R", "RD": "R", "R4": "R4",
            "I": "I", "SH": "I", "L": "I", "CSR": "I", "SYS": "I",
            "S": "S", "B": "B", "U": "U", "J": "J",
        }[self.fmt]

    @property
    def is_posit(self) -> bool:
        return self.mnemonic in POSIT_MNEMONICS

    def mask_match(self) -> tuple[int, int]:
        mask, match = 0x7F, self.opcode
        if self.word is not None:
            return 0xFFFFFFFF, self.word
        if self.funct3 is not None:
            mask |= 0x7 << 12
            match |= self.funct3 << 12
        if self.funct7 is not None:
            if self.fmt == "R4":  # only the fmt bits of funct7 are fixed
                mask |= 0x3 << 25
                match |= (self.funct7 & 3) << 25
            else:
                mask |= 0x7F << 25
                match |= self.funct7 << 25
        if self.rs2 is not None:
            mask |= 0x1F << 20
            match |= self.rs2 << 20
        if self.fmt in ("RS", "RS1"):  # rd must be zero
            mask |= 0x1F << 7
        if self.fmt in ("RD",):  # rs1 must be zero
            mask |= 0x1F << 15
        return mask, match


def _fp(mn, funct5, fmt, files, form="R", funct3=RM_RNE, rs2=None):
    return OpSpec(mn, form, OP_FP, funct3, (funct5 << 2) | fmt, rs2, files)


def _build_table() -> list[OpSpec]:
    t: list[OpSpec] = []
    add = t.append
    # RV32I
    add(OpSpec("lui", "U", OP_LUI, files="x"))
    add(OpSpec("auipc", "U", OP_AUIPC, files="x"))
    add(OpSpec("jal", "J", OP_JAL, files="x"))
    add(OpSpec("jalr", "I", OP_JALR, 0, files="xx"))
    for f3, mn in enumerate(["beq", "bne", None, None, "blt", "bge", "bltu", "bgeu"]):
        if mn:
            add(OpSpec(mn, "B", OP_BRANCH, f3, files="-xx"))
    for f3, mn in [(0, "lb"), (1, "lh"), (2, "lw"), (4, "lbu"), (5, "lhu")]:
        add(OpSpec(mn, "L", OP_LOAD, f3, files="xx"))
    for f3, mn in [(0, "sb"), (1, "sh"), (2, "sw")]:
        add(OpSpec(mn, "S", OP_STORE, f3, files="-xx"))
    for f3, mn in [(0, "addi"), (2, "slti"), (3, "sltiu"), (4, "xori"), (6, "ori"), (7, "andi")]:
        add(OpSpec(mn, "I", OP_IMM, f3, files="xx"))
    add(OpSpec("slli", "SH", OP_IMM, 1, 0x00, files="xx"))
    add(OpSpec("srli", "SH", OP_IMM, 5, 0x00, files="xx"))
    add(OpSpec("srai", "SH", OP_IMM, 5, 0x20, files="xx"))
    alu = [
        ("add", 0, 0x00), ("sub", 0, 0x20), ("sll", 1, 0x00), ("slt", 2, 0x00),
        ("sltu", 3, 0x00), ("xor", 4, 0x00), ("srl", 5, 0x00), ("sra", 5, 0x20),
        ("or", 6, 0x00), ("and", 7, 0x00),
        # M extension
        ("mul", 0, 0x01), ("mulh", 1, 0x01), ("mulhsu", 2, 0x01), ("mulhu", 3, 0x01),
        ("div", 4, 0x01), ("divu", 5, 0x01), ("rem", 6, 0x01), ("remu", 7, 0x01),
    ]
    for mn, f3, f7 in alu:
        add(OpSpec(mn, "R", OP, f3, f7, files="xxx"))
    add(OpSpec("ecall", "SYS", OP_SYSTEM, word=0x00000073, files=""))
    add(OpSpec("ebreak", "SYS", OP_SYSTEM, word=0x00100073, files=""))
    add(OpSpec("csrrs", "CSR", OP_SYSTEM, 2, files="xx"))
    # F subset (single precision, static round-to-nearest-even)
    add(OpSpec("flw", "L", OP_LOAD_FP, 2, files="fx"))
    add(OpSpec("fsw", "S", OP_STORE_FP, 2, files="-xf"))
    for mn, op in [("fmadd.s", OP_MADD), ("fmsub.s", OP_MSUB),
                   ("fnmsub.s", OP_NMSUB), ("fnmadd.s", OP_NMADD)]:
        add(OpSpec(mn, "R4", op, RM_RNE, FMT_S, files="ffff"))
    for mn, f5 in [("fadd.s", 0b00000), ("fsub.s", 0b00001), ("fmul.s", 0b00010), ("fdiv.s", 0b00011)]:
        add(_fp(mn, f5, FMT_S, "fff"))
    add(_fp("fsqrt.s", 0b01011, FMT_S, "ff", "R1", rs2=0))
    for f3, mn in enumerate(["fsgnj.s", "fsgnjn.s", "fsgnjx.s"]):
        add(_fp(mn, 0b00100, FMT_S, "fff", funct3=f3))
    add(_fp("fmin.s", 0b00101, FMT_S, "fff", funct3=0))
    add(_fp("fmax.s", 0b00101, FMT_S, "fff", funct3=1))
    add(_fp("fle.s", 0b10100, FMT_S, "xff", funct3=0))
    add(_fp("flt.s", 0b10100, FMT_S, "xff", funct3=1))
    add(_fp("feq.s", 0b10100, FMT_S, "xff", funct3=2))
    add(_fp("fcvt.w.s", 0b11000, FMT_S, "xf", "R1", rs2=0))
    add(_fp("fcvt.wu.s", 0b11000, FMT_S, "xf", "R1", rs2=1))
    add(_fp("fcvt.s.w", 0b11010, FMT_S, "fx", "R1", rs2=0))
    add(_fp("fcvt.s.wu", 0b11010, FMT_S, "fx", "R1", rs2=1))
    add(_fp("fmv.x.w", 0b11100, FMT_S, "xf", "R1", funct3=0, rs2=0))
    add(_fp("fmv.w.x", 0b11110, FMT_S, "fx", "R1", funct3=0, rs2=0))
    # posit extension
    add(_fp("fma.p", 0b01100, FMT_P, "-pp", "RS"))
    add(_fp("fms.p", 0b01101, FMT_P, "-pp", "RS"))
    add(_fp("fda.p", 0b01110, FMT_P, "-pp", "RS"))
    add(_fp("fds.p", 0b01111, FMT_P, "-pp", "RS"))
    add(_fp("fcvt.r.p", 0b01000, FMT_P, "-p", "RS1", rs2=RS2_POSIT))
    add(_fp("fcvt.p.r", 0b01000, FMT_P, "p", "RD", rs2=RS2_QUIRE))
    add(_fp("fcvt.p.s", 0b01000, FMT_P, "pf", "R1", rs2=FMT_S))
    add(_fp("fcvt.s.p", 0b01000, FMT_S, "fp", "R1", rs2=RS2_POSIT))
    add(_fp("pmv.x.w", 0b11100, FMT_P, "xp", "R1", rs2=RS2_POSIT))
    add(_fp("pmv.w.x", 0b11110, FMT_P, "px", "R1", rs2=0))
    add(OpSpec("plw", "L", OP_LOAD_FP, WIDTH_POSIT, files="px"))
    add(OpSpec("psw", "S", OP_STORE_FP, WIDTH_POSIT, files="-xp"))
    return t


POSIT_MNEMONICS = frozenset(
    "fma.p fms.p fda.p fds.p fcvt.r.p fcvt.p.r fcvt.p.s fcvt.s.p pmv.x.w pmv.w.x"
    " plw psw".split()
)

TABLE: list[OpSpec] = _build_table()
SPECS: dict[str, OpSpec] = {s.mnemonic: s for s in TABLE}
_BY_OPCODE: dict[int, list[tuple[int, int, OpSpec]]] = {}
for _s in TABLE:
    _m, _v = _s.mask_match()
    _BY_OPCODE.setdefault(_s.opcode, []).append((_m, _v, _s))
# most specific patterns first so fixed-rs2 rows win over free ones
for _rows in _BY_OPCODE.values():
    _rows.sort(key=lambda r: -bin(r[0]).count("1"))


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction.

    Register fields hold indices; the register file of each is given by the
    mnemonic's table row (see :meth:`reg`).  ``imm`` is sign-extended where
    the format sign-extends (U-format keeps the raw 20-bit field, the CSR
    form holds the CSR number, shifts hold the shift amount).
    """

    mnemonic: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    rs3: int = 0
    imm: int = 0

    @property
    def spec(self) -> OpSpec:
        return SPECS[self.mnemonic]

    @property
    def format_tag(self) -> str:
        return self.spec.format_tag

    def reg(self, slot: str) -> tuple[str, int]:
        """(file, index) of ``slot`` in {'rd','rs1','rs2','rs3'}."""
        files = self.spec.files
        pos = ("rd", "rs1", "rs2", "rs3").index(slot)
        f = files[pos] if pos < len(files) else "-"
        return f, getattr(self, slot)

    def __str__(self) -> str:
        return format_instruction(self)


@dataclass(frozen=True)
class IllegalInstruction:
    """Marker returned by :func:`decode` for words outside the supported set."""

    word: int
    mnemonic: str = "illegal"

    def __str__(self) -> str:
        return f".word 0x{self.word:08x}"


def _check_reg(v: int, name: str):
    if not isinstance(v, int) or not 0 <= v < 32:
        raise EncodingError(f"register {name}={v!r} out of range 0..31")


def _check_imm(v: int, lo: int, hi: int, what: str, align: int = 1):
    if not lo <= v <= hi:
        raise EncodingError(f"{what} {v} out of range {lo}..{hi}")
    if v % align:
        raise EncodingError(f"{what} {v} not a multiple of {align}")


def encode(ins: Instruction) -> int:
    """Encode ``ins`` into a 32-bit word."""
    spec = SPECS.get(ins.mnemonic)
    if spec is None:
        raise EncodingError(f"unsupported mnemonic {ins.mnemonic!r}")
    for name in ("rd", "rs1", "rs2", "rs3"):
        _check_reg(getattr(ins, name), name)
    f = spec.fmt
    if spec.word is not None:
        return spec.word
    w = spec.opcode
    if spec.funct3 is not None:
        w |= spec.funct3 << 12
    imm = ins.imm
    if f in ("R", "R1", "RS", "RS1", "RD"):
        rd = 0 if f in ("RS", "RS1") else ins.rd
        rs1 = 0 if f == "RD" else ins.rs1
        rs2 = spec.rs2 if spec.rs2 is not None else ins.rs2
        w |= rd << 7 | rs1 << 15 | rs2 << 20 | spec.funct7 << 25
    elif f == "R4":
        w |= ins.rd << 7 | ins.rs1 << 15 | ins.rs2 << 20 | spec.funct7 << 25 | ins.rs3 << 27
    elif f in ("I", "L"):
        _check_imm(imm, -2048, 2047, "immediate")
        w |= ins.rd << 7 | ins.rs1 << 15 | (imm & 0xFFF) << 20
    elif f == "SH":
        _check_imm(imm, 0, 31, "shift amount")
        w |= ins.rd << 7 | ins.rs1 << 15 | imm << 20 | spec.funct7 << 25
    elif f == "CSR":
        _check_imm(imm, 0, 4095, "csr")
        w |= ins.rd << 7 | ins.rs1 << 15 | imm << 20
    elif f == "S":
        _check_imm(imm, -2048, 2047, "offset")
        u = imm & 0xFFF
        w |= (u & 0x1F) << 7 | ins.rs1 << 15 | ins.rs2 << 20 | (u >> 5) << 25
    elif f == "B":
        _check_imm(imm, -4096, 4094, "branch offset", 2)
        u = imm & 0x1FFF
        w |= ((u >> 11) & 1) << 7 | ((u >> 1) & 0xF) << 8
        w |= ins.rs1 << 15 | ins.rs2 << 20
        w |= ((u >> 5) & 0x3F) << 25 | ((u >> 12) & 1) << 31
    elif f == "U":
        _check_imm(imm, 0, 0xFFFFF, "upper immediate")
        w |= ins.rd << 7 | imm << 12
    elif f == "J":
        _check_imm(imm, -(1 << 20), (1 << 20) - 2, "jump offset", 2)
        u = imm & 0x1FFFFF
        w |= ins.rd << 7
        w |= ((u >> 12) & 0xFF) << 12 | ((u >> 11) & 1) << 20
        w |= ((u >> 1) & 0x3FF) << 21 | ((u >> 20) & 1) << 31
    else:  # pragma: no cover - table is closed
        raise AssertionError(f)
    return w


def _sext(v: int, bits: int) -> int:
    return v - (1 << bits) if v >> (bits - 1) & 1 else v


def decode(w: int) -> Instruction | IllegalInstruction:
    """Decode a word; anything outside the table yields IllegalInstruction."""
    w &= 0xFFFFFFFF
    for mask, match, spec in _BY_OPCODE.get(w & 0x7F, ()):
        if w & mask == match:
            break
    else:
        return IllegalInstruction(w)
    rd = (w >> 7) & 0x1F
    rs1 = (w >> 15) & 0x1F
    rs2 = (w >> 20) & 0x1F
    f = spec.fmt
    mn = spec.mnemonic
    if f == "SYS":
        return Instruction(mn)
    if f in ("R", "RS"):
        return Instruction(mn, rd=0 if f == "RS" else rd, rs1=rs1, rs2=rs2)
    if f == "R1":
        return Instruction(mn, rd=rd, rs1=rs1)
    if f == "RS1":
        return Instruction(mn, rs1=rs1)
    if f == "RD":
        return Instruction(mn, rd=rd)
    if f == "R4":
        return Instruction(mn, rd=rd, rs1=rs1, rs2=rs2, rs3=w >> 27)
    if f in ("I", "L"):
        return Instruction(mn, rd=rd, rs1=rs1, imm=_sext(w >> 20, 12))
    if f == "SH":
        return Instruction(mn, rd=rd, rs1=rs1, imm=rs2)
    if f == "CSR":
        return Instruction(mn, rd=rd, rs1=rs1, imm=w >> 20)
    if f == "S":
        imm = _sext(((w >> 25) << 5) | rd, 12)
        return Instruction(mn, rs1=rs1, rs2=rs2, imm=imm)
    if f == "B":
        u = ((w >> 31) & 1) << 12 | ((w >> 7) & 1) << 11
        u |= ((w >> 25) & 0x3F) << 5 | ((w >> 8) & 0xF) << 1
        return Instruction(mn, rs1=rs1, rs2=rs2, imm=_sext(u, 13))
    if f == "U":
        return Instruction(mn, rd=rd, imm=w >> 12)
    if f == "J":
        u = ((w >> 31) & 1) << 20 | ((w >> 12) & 0xFF) << 12
        u |= ((w >> 20) & 1) << 11 | ((w >> 21) & 0x3FF) << 1
        return Instruction(mn, rd=rd, imm=_sext(u, 21))
    raise AssertionError(f)  # pragma: no cover


def format_instruction(ins: Instruction | IllegalInstruction) -> str:
    """Canonical assembly text; reassembles to the same word."""
    if isinstance(ins, IllegalInstruction):
        return str(ins)
    spec = ins.spec
    files = spec.files
    f = spec.fmt

    def r(pos: int, idx: int) -> str:
        return f"{files[pos]}{idx}"

    mn = ins.mnemonic
    if f == "SYS":
        return mn
    if f == "R":
        ops = [r(0, ins.rd), r(1, ins.rs1), r(2, ins.rs2)]
    elif f == "R1":
        ops = [r(0, ins.rd), r(1, ins.rs1)]
    elif f == "RS":
        ops = [r(1, ins.rs1), r(2, ins.rs2)]
    elif f == "RS1":
        ops = [r(1, ins.rs1)]
    elif f == "RD":
        ops = [r(0, ins.rd)]
    elif f == "R4":
        ops = [r(0, ins.rd), r(1, ins.rs1), r(2, ins.rs2), r(3, ins.rs3)]
    elif f in ("I", "SH"):
        ops = [r(0, ins.rd), r(1, ins.rs1), str(ins.imm)]
    elif f == "CSR":
        ops = [r(0, ins.rd), f"0x{ins.imm:x}", r(1, ins.rs1)]
    elif f == "L":
        ops = [r(0, ins.rd), f"{ins.imm}({r(1, ins.rs1)})"]
    elif f == "S":
        ops = [r(2, ins.rs2), f"{ins.imm}({r(1, ins.rs1)})"]
    elif f == "B":
        ops = [r(1, ins.rs1), r(2, ins.rs2), f"{ins.imm:+d}"]
    elif f == "U":
        ops = [r(0, ins.rd), f"0x{ins.imm:x}"]
    elif f == "J":
        ops = [r(0, ins.rd), f"{ins.imm:+d}"]
    else:  # pragma: no cover
        raise AssertionError(f)
    return f"{mn} {', '.join(ops)}"


def encoding_table() -> list[dict]:
    """The encoding table as plain data (one dict per mnemonic)."""
    rows = []
    for s in TABLE:
        mask, match = s.mask_match()
        rows.append(
            {
                "mnemonic": s.mnemonic,
                "format": s.format_tag,
                "layout": s.fmt,
                "opcode": s.opcode,
                "funct3": s.funct3,
                "funct5": None if s.funct7 is None or s.opcode != OP_FP else s.funct7 >> 2,
                "fmt": None if s.funct7 is None or s.opcode not in (OP_FP, OP_MADD, OP_MSUB, OP_NMSUB, OP_NMADD)
                else s.funct7 & 3,
                "funct7": s.funct7,
                "rs2": s.rs2,
                "files": s.files,
                "posit": s.is_posit,
                "mask": f"0x{mask:08x}",
                "match": f"0x{match:08x}",
            }
        )
    return rows


DATA_FILE = Path(__file__).with_name("data") / "encodings.json"


def write_encoding_table(path: Path | str = DATA_FILE) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(encoding_table(), indent=1) + "\n")
    return path


if __name__ == "__main__":  # regenerate the shipped table
    print(write_encoding_table())
