"""Two-pass line assembler and a disassembler for the supported ISA.

Grammar (one statement per line; a label may precede it on the same line)::

    line      := [label ':'] [statement] [comment]
    comment   := ('#' | ';' | '//') anything
    statement := mnemonic [operand (',' operand)*]
    operand   := register | integer | label | integer '(' register ')'

Registers are ``x0``-``x31``, ``f0``-``f31``, ``p0``-``p31`` or the usual
ABI names (``zero``, ``ra``, ``sp``, ``a0``, ``t1``, ``fa0``, ...).  A branch
or jump target may be a label or a literal byte offset relative to the
instruction.  Directives ``.text``, ``.globl``, ``.align`` and ``.section``
are accepted and ignored; ``.word`` emits a raw word.

Pseudo-instructions: ``nop li mv not neg j jr ret call beqz bnez bltz bgez
blez bgtz bgt ble bgtu bleu fmv.s fneg.s fabs.s rdcycle halt``.  ``halt``
assembles to ``ebreak``, which stops the emulator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .isa import (
    CSR_NAMES,
    SPECS,
    EncodingError,
    Instruction,
    decode,
    encode,
    format_instruction,
)

__all__ = ["AsmError", "Program", "assemble", "disassemble", "parse_register"]


class AsmError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass
class Program:
    words: list[int]
    labels: dict[str, int]
    base: int = 0
    #: source line of each emitted word
    lines: list[int] | None = None


_ABI_X = (
    "zero ra sp gp tp t0 t1 t2 s0 s1 a0 a1 a2 a3 a4 a5 a6 a7 "
    "s2 s3 s4 s5 s6 s7 s8 s9 s10 s11 t3 t4 t5 t6"
).split()
_ABI_F = (
    "ft0 ft1 ft2 ft3 ft4 ft5 ft6 ft7 fs0 fs1 fa0 fa1 fa2 fa3 fa4 fa5 fa6 fa7 "
    "fs2 fs3 fs4 fs5 fs6 fs7 fs8 fs9 fs10 fs11 ft8 ft9 ft10 ft11"
).split()
_REGS: dict[str, tuple[str, int]] = {}
for _i in range(32):
    for _f in "xfp":
        _REGS[f"{_f}{_i}"] = (_f, _i)
    _REGS[_ABI_X[_i]] = ("x", _i)
    _REGS[_ABI_F[_i]] = ("f", _i)
_REGS["fp"] = ("x", 8)

_LABEL = re.compile(r"^[A-Za-z_.$][\w.$]*$")
_MEM = re.compile(r"^(.*)\(\s*([\w.]+)\s*\)$")


def parse_register(tok: str) -> tuple[str, int] | None:
    return _REGS.get(tok.strip().lower())


def _parse_int(tok: str) -> int | None:
    tok = tok.strip()
    try:
        return int(tok, 0)
    except ValueError:
        pass
    if len(tok) == 3 and tok[0] == tok[2] == "'":
        return ord(tok[1])
    return None


def _strip_comment(line: str) -> str:
    cut = len(line)
    for marker in ("#", ";", "//"):
        i = line.find(marker)
        if i >= 0:
            cut = min(cut, i)
    return line[:cut].strip()


def _split_operands(rest: str) -> list[str]:
    rest = rest.strip()
    return [t.strip() for t in rest.split(",")] if rest else []


@dataclass
class _Stmt:
    line: int
    addr: int
    mnemonic: str
    ops: list[str]


def _li_parts(value: int) -> tuple[int, int] | None:
    """Split a 32-bit constant into (upper20, low12) when addi alone won't do."""
    value &= 0xFFFFFFFF
    sv = value - (1 << 32) if value >> 31 else value
    if -2048 <= sv <= 2047:
        return None
    lo = ((value & 0xFFF) ^ 0x800) - 0x800
    hi = ((value - lo) >> 12) & 0xFFFFF
    return hi, lo


def _size(mn: str, ops: list[str], line: int) -> int:
    if mn == "li":
        if len(ops) != 2:
            raise AsmError(line, "li takes 2 operands")
        v = _parse_int(ops[1])
        if v is None:
            raise AsmError(line, f"bad immediate {ops[1]!r}")
        if not -(1 << 31) <= v < (1 << 32):
            raise AsmError(line, f"immediate {v} does not fit 32 bits")
        parts = _li_parts(v)
        return 1 if parts is None or parts[1] == 0 else 2
    return 1


_BRANCH_Z = {"beqz": ("beq", False), "bnez": ("bne", False), "bltz": ("blt", False),
             "bgez": ("bge", False), "blez": ("bge", True), "bgtz": ("blt", True)}
_BRANCH_SWAP = {"bgt": "blt", "ble": "bge", "bgtu": "bltu", "bleu": "bgeu"}


_PSEUDO_ARITY = {
    "nop": 0, "halt": 0, "ret": 0, "mv": 2, "not": 2, "neg": 2, "j": 1, "call": 1,
    "jr": 1, "fmv.s": 2, "fneg.s": 2, "fabs.s": 2, "rdcycle": 1, "li": 2,
}


def _expand(mn: str, ops: list[str], line: int) -> list[tuple[str, list[str]]]:
    """Rewrite pseudo-instructions into base ones (operands stay textual)."""
    want = _PSEUDO_ARITY.get(mn)
    if want is not None and len(ops) != want:
        raise AsmError(line, f"{mn} takes {want} operand(s), got {len(ops)}")
    if mn == "nop":
        return [("addi", ["x0", "x0", "0"])]
    if mn == "halt":
        return [("ebreak", [])]
    if mn == "mv":
        return [("addi", [ops[0], ops[1], "0"])]
    if mn == "not":
        return [("xori", [ops[0], ops[1], "-1"])]
    if mn == "neg":
        return [("sub", [ops[0], "x0", ops[1]])]
    if mn == "j":
        return [("jal", ["x0", *ops])]
    if mn == "call":
        return [("jal", ["x1", *ops])]
    if mn == "jal" and len(ops) == 1:
        return [("jal", ["x1", ops[0]])]
    if mn == "jr":
        return [("jalr", ["x0", ops[0], "0"])]
    if mn == "ret":
        return [("jalr", ["x0", "x1", "0"])]
    if mn == "jalr" and len(ops) == 1:
        return [("jalr", ["x1", ops[0], "0"])]
    if mn in _BRANCH_Z and len(ops) == 2:
        base, swap = _BRANCH_Z[mn]
        a, b = ("x0", ops[0]) if swap else (ops[0], "x0")
        return [(base, [a, b, ops[1]])]
    if mn in _BRANCH_SWAP and len(ops) == 3:
        return [(_BRANCH_SWAP[mn], [ops[1], ops[0], ops[2]])]
    if mn == "fmv.s":
        return [("fsgnj.s", [ops[0], ops[1], ops[1]])]
    if mn == "fneg.s":
        return [("fsgnjn.s", [ops[0], ops[1], ops[1]])]
    if mn == "fabs.s":
        return [("fsgnjx.s", [ops[0], ops[1], ops[1]])]
    if mn == "rdcycle":
        return [("csrrs", [ops[0], "cycle", "x0"])]
    if mn == "li":
        v = _parse_int(ops[1])
        parts = _li_parts(v)
        if parts is None:
            return [("addi", [ops[0], "x0", str(((v & 0xFFF) ^ 0x800) - 0x800)])]
        hi, lo = parts
        out = [("lui", [ops[0], str(hi)])]
        if lo:
            out.append(("addi", [ops[0], ops[0], str(lo)]))
        return out
    return [(mn, ops)]


class _Assembler:
    def __init__(self, base: int):
        self.base = base
        self.labels: dict[str, int] = {}

    def reg(self, tok: str, want: str, line: int) -> int:
        r = parse_register(tok)
        if r is None:
            raise AsmError(line, f"bad register {tok!r}")
        if r[0] != want:
            raise AsmError(line, f"expected a {want}-register, got {tok!r}")
        return r[1]

    def imm(self, tok: str, line: int) -> int:
        v = _parse_int(tok)
        if v is None:
            if tok in self.labels:
                return self.labels[tok]
            raise AsmError(line, f"bad immediate {tok!r}")
        return v

    def target(self, tok: str, addr: int, line: int) -> int:
        v = _parse_int(tok)
        if v is not None:
            return v
        if not _LABEL.match(tok):
            raise AsmError(line, f"bad branch target {tok!r}")
        if tok not in self.labels:
            raise AsmError(line, f"undefined label {tok!r}")
        return self.labels[tok] - addr

    def build(self, st: _Stmt) -> Instruction:
        mn, ops, line = st.mnemonic, st.ops, st.line
        spec = SPECS.get(mn)
        if spec is None:
            raise AsmError(line, f"unknown mnemonic {mn!r}")
        files = spec.files
        f = spec.fmt
        expected = {"R": 3, "R1": 2, "RS": 2, "RS1": 1, "RD": 1, "R4": 4, "I": 3,
                    "SH": 3, "CSR": 3, "L": 2, "S": 2, "B": 3, "U": 2, "J": 2, "SYS": 0}[f]
        if len(ops) != expected:
            raise AsmError(line, f"{mn} takes {expected} operand(s), got {len(ops)}")
        R = lambda i, pos: self.reg(ops[i], files[pos], line)  # noqa: E731
        if f == "SYS":
            return Instruction(mn)
        if f == "R":
            return Instruction(mn, rd=R(0, 0), rs1=R(1, 1), rs2=R(2, 2))
        if f == "R1":
            return Instruction(mn, rd=R(0, 0), rs1=R(1, 1))
        if f == "RS":
            return Instruction(mn, rs1=R(0, 1), rs2=R(1, 2))
        if f == "RS1":
            return Instruction(mn, rs1=R(0, 1))
        if f == "RD":
            return Instruction(mn, rd=R(0, 0))
        if f == "R4":
            return Instruction(mn, rd=R(0, 0), rs1=R(1, 1), rs2=R(2, 2), rs3=R(3, 3))
        if f in ("I", "SH"):
            return Instruction(mn, rd=R(0, 0), rs1=R(1, 1), imm=self.imm(ops[2], line))
        if f == "CSR":
            csr = CSR_NAMES.get(ops[1].lower())
            if csr is None:
                csr = self.imm(ops[1], line)
            return Instruction(mn, rd=R(0, 0), rs1=R(2, 1), imm=csr)
        if f in ("L", "S"):
            m = _MEM.match(ops[1])
            if not m:
                raise AsmError(line, f"expected offset(base), got {ops[1]!r}")
            off = self.imm(m.group(1), line) if m.group(1).strip() else 0
            base = self.reg(m.group(2), files[1], line)
            if f == "L":
                return Instruction(mn, rd=R(0, 0), rs1=base, imm=off)
            return Instruction(mn, rs2=R(0, 2), rs1=base, imm=off)
        if f == "B":
            return Instruction(mn, rs1=R(0, 1), rs2=R(1, 2), imm=self.target(ops[2], st.addr, line))
        if f == "U":
            return Instruction(mn, rd=R(0, 0), imm=self.imm(ops[1], line))
        if f == "J":
            return Instruction(mn, rd=R(0, 0), imm=self.target(ops[1], st.addr, line))
        raise AssertionError(f)  # pragma: no cover


def assemble(text: str, base: int = 0) -> Program:
    """Assemble ``text``; words are laid out from address ``base``."""
    asm = _Assembler(base)
    stmts: list[_Stmt | tuple[int, int, int]] = []
    addr = base
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        while line:
            m = re.match(r"^([A-Za-z_.$][\w.$]*)\s*:(.*)$", line)
            if not m:
                break
            name = m.group(1)
            if name in asm.labels:
                raise AsmError(lineno, f"duplicate label {name!r}")
            asm.labels[name] = addr
            line = m.group(2).strip()
        if not line:
            continue
        parts = line.split(None, 1)
        mn = parts[0].lower()
        ops = _split_operands(parts[1] if len(parts) > 1 else "")
        if mn.startswith("."):
            if mn == ".word":
                for tok in ops:
                    stmts.append((lineno, addr, tok))  # resolved in pass 2
                    addr += 4
            elif mn not in (".text", ".globl", ".global", ".align", ".section", ".p2align"):
                raise AsmError(lineno, f"unknown directive {mn!r}")
            continue
        if mn == "li":
            _size(mn, ops, lineno)  # validates the constant
        for emn, eops in _expand(mn, ops, lineno):
            stmts.append(_Stmt(lineno, addr, emn, eops))
            addr += 4
    words: list[int] = []
    lines: list[int] = []
    for st in stmts:
        if isinstance(st, tuple):
            lineno, _, tok = st
            v = asm.imm(tok, lineno)
            words.append(v & 0xFFFFFFFF)
            lines.append(lineno)
            continue
        ins = asm.build(st)
        try:
            words.append(encode(ins))
        except EncodingError as e:
            raise AsmError(st.line, str(e)) from None
        lines.append(st.line)
    return Program(words, asm.labels, base, lines)


def disassemble(words, base: int = 0, addresses: bool = False) -> str:
    """One canonical line per word; output reassembles to the same words."""
    out = []
    for i, w in enumerate(words):
        text = format_instruction(decode(w))
        out.append(f"{base + 4 * i:08x}:  {w:08x}  {text}" if addresses else text)
    return "\n".join(out) + ("\n" if out else "")
