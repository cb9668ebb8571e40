"""Instruction-level RV32IMF-subset machine with a posit unit.

The machine has the three register files (GPR ``x``, FPR ``f``, PRF ``p``),
a flat little-endian byte memory and a :class:`~clarinet.melodica.Melodica`
instance that owns the quire.  Values and timing are separate concerns:
instructions compute architectural results exactly, and a small scoreboard
charges cycles.

Cycle model
-----------
Each instruction has an *occupancy* (cycles before the next instruction may
issue) and a *result latency* (cycles before a consumer of its destination
register may issue).  An instruction whose sources are not yet ready stalls;
the stall is charged to the stalled instruction.  Posit commands take their
timing from Melodica: fused ops and quire initialisation cost one issue
cycle, a quire read blocks until the posit pipeline drains and the result
returns, converters block for the conversion plus the response path.  See
:data:`DEFAULT_COSTS` for the numbers.  There is no cache model: every memory
access costs the same.

Cycle categories
----------------
``float compute``        single-precision FPU instructions
``float ld/st``          flw, fsw
``posit compute``        fma.p fms.p fda.p fds.p fcvt.r.p fcvt.p.r
``float-posit interop``  fcvt.s.p fcvt.p.s pmv.x.w pmv.w.x
``posit ld/st``          plw, psw, and integer loads/stores that carry posit
                         data: a load whose result feeds ``pmv.w.x`` in the
                         same basic block, or a store of a value produced by
                         ``pmv.x.w`` in the same basic block
``others``               everything else
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import f32
from .asm import Program
from .isa import IllegalInstruction, Instruction, decode, format_instruction
from .melodica import LatencyModel, Melodica, MelodicaCommand, Opcode
from .posit import PositConfig, config_for

__all__ = [
    "Category",
    "CostModel",
    "DEFAULT_COSTS",
    "CycleLedger",
    "Machine",
    "MachineTrap",
    "RunResult",
    "TraceEntry",
    "category_of",
]

MASK32 = 0xFFFFFFFF


class Category(enum.Enum):
    FLOAT_COMPUTE = "float compute"
    FLOAT_LDST = "float ld/st"
    POSIT_COMPUTE = "posit compute"
    INTEROP = "float-posit interop"
    POSIT_LDST = "posit ld/st"
    OTHERS = "others"


_INT_LOADS = {"lb", "lh", "lw", "lbu", "lhu"}
_INT_STORES = {"sb", "sh", "sw"}
_BRANCHES = {"beq", "bne", "blt", "bge", "bltu", "bgeu"}
_POSIT_COMPUTE = {"fma.p", "fms.p", "fda.p", "fds.p", "fcvt.r.p", "fcvt.p.r"}
_INTEROP = {"fcvt.s.p", "fcvt.p.s", "pmv.x.w", "pmv.w.x"}


def category_of(mnemonic: str) -> Category:
    """Static category of a mnemonic (before posit ld/st re-attribution)."""
    if mnemonic in _POSIT_COMPUTE:
        return Category.POSIT_COMPUTE
    if mnemonic in _INTEROP:
        return Category.INTEROP
    if mnemonic in ("plw", "psw"):
        return Category.POSIT_LDST
    if mnemonic in ("flw", "fsw"):
        return Category.FLOAT_LDST
    if mnemonic.endswith(".s") or mnemonic.startswith(("fmv.", "fcvt.")):
        return Category.FLOAT_COMPUTE
    return Category.OTHERS


@dataclass(frozen=True)
class CostModel:
    """Per-instruction (occupancy, result latency) in cycles."""

    alu: tuple[int, int] = (1, 1)
    mul: tuple[int, int] = (1, 3)
    div: tuple[int, int] = (33, 33)
    load: tuple[int, int] = (2, 2)
    store: tuple[int, int] = (2, 0)
    branch_taken: int = 3
    branch_not_taken: int = 1
    jump: int = 3
    # FMADD.S-class arithmetic: occupies 12 cycles, result after 14
    fp_arith: tuple[int, int] = (12, 14)
    fp_divsqrt: tuple[int, int] = (30, 32)
    fp_misc: tuple[int, int] = (2, 2)  # sign injection, min/max, compares
    fp_move: tuple[int, int] = (2, 2)  # fmv / fcvt between x and f
    posit_move: tuple[int, int] = (2, 2)  # pmv between x and p
    system: int = 1

    def rows(self) -> list[tuple[str, str, str]]:
        """(instruction class, occupancy, latency) rows for documentation."""
        def pair(p):
            return str(p[0]), str(p[1])

        return [
            ("integer ALU, lui, auipc, csrrs", *pair(self.alu)),
            ("mul, mulh*", *pair(self.mul)),
            ("div*, rem*", *pair(self.div)),
            ("loads (lb..lw, flw, plw)", *pair(self.load)),
            ("stores (sb..sw, fsw, psw)", *pair(self.store)),
            ("branch taken / not taken", f"{self.branch_taken} / {self.branch_not_taken}", "-"),
            ("jal, jalr", str(self.jump), str(self.jump)),
            ("fadd/fsub/fmul/fmadd-family .s", *pair(self.fp_arith)),
            ("fdiv.s, fsqrt.s", *pair(self.fp_divsqrt)),
            ("fsgnj*, fmin/fmax, feq/flt/fle", *pair(self.fp_misc)),
            ("fmv.x.w, fmv.w.x, fcvt int<->float", *pair(self.fp_move)),
            ("pmv.x.w, pmv.w.x", *pair(self.posit_move)),
            ("fma.p, fms.p, fda.p, fds.p, fcvt.r.p", "1 (+ wait on a pending read)", "-"),
            ("fcvt.p.r", "drain + convert + response", "same"),
            ("fcvt.p.s, fcvt.s.p", "convert + response", "same"),
            ("ecall, ebreak", str(self.system), "-"),
        ]


DEFAULT_COSTS = CostModel()


@dataclass
class TraceEntry:
    pc: int
    text: str
    category: Category
    cost: int

    def __str__(self):
        return f"{self.pc:08x}  {self.text:<32s} {self.category.value:<20s} {self.cost}"


@dataclass
class CycleLedger:
    totals: dict = field(default_factory=lambda: {c: 0 for c in Category})
    counts: dict = field(default_factory=lambda: {c: 0 for c in Category})

    def charge(self, cat: Category, cycles: int, count: int = 1):
        self.totals[cat] += cycles
        self.counts[cat] += count

    def move(self, src: Category, dst: Category, cycles: int):
        self.totals[src] -= cycles
        self.totals[dst] += cycles
        self.counts[src] -= 1
        self.counts[dst] += 1

    @property
    def total(self) -> int:
        return sum(self.totals.values())

    def __getitem__(self, cat: Category | str) -> int:
        return self.totals[Category(cat)]

    def as_dict(self) -> dict[str, int]:
        return {c.value: self.totals[c] for c in Category}

    def table(self) -> str:
        tot = self.total or 1
        lines = [f"{'category':<22s}{'instrs':>10s}{'cycles':>12s}{'share':>8s}"]
        for c in Category:
            lines.append(
                f"{c.value:<22s}{self.counts[c]:>10d}{self.totals[c]:>12d}"
                f"{100 * self.totals[c] / tot:>7.1f}%"
            )
        lines.append(f"{'total':<22s}{sum(self.counts.values()):>10d}{self.total:>12d}")
        return "\n".join(lines)


class MachineTrap(Exception):
    """Raised by :meth:`Machine.step`; :meth:`Machine.run` records it and stops."""

    def __init__(self, kind: str, pc: int, message: str):
        super().__init__(f"{kind} at pc=0x{pc:08x}: {message}")
        self.kind = kind
        self.pc = pc
        self.message = message


@dataclass
class RunResult:
    ledger: CycleLedger
    retired: int
    halted: bool
    trap: MachineTrap | None = None

    @property
    def ok(self) -> bool:
        return self.halted and self.trap is None


_SOURCES = {
    "R": ("rs1", "rs2"), "R1": ("rs1",), "RS": ("rs1", "rs2"), "RS1": ("rs1",),
    "RD": (), "R4": ("rs1", "rs2", "rs3"), "I": ("rs1",), "SH": ("rs1",),
    "L": ("rs1",), "S": ("rs1", "rs2"), "B": ("rs1", "rs2"), "U": (), "J": (),
    "CSR": ("rs1",), "SYS": (),
}
_HAS_RD = {"R", "R1", "RD", "R4", "I", "SH", "L", "U", "J", "CSR"}
_SLOT_POS = {"rd": 0, "rs1": 1, "rs2": 2, "rs3": 3}


def _s32(v: int) -> int:
    return v - (1 << 32) if v & 0x80000000 else v


class Machine:
    """One hart plus its posit unit.

    ``timing=False`` swaps in a zero-latency posit unit and unit instruction
    costs; architectural results do not change (programs that read the cycle
    counter excepted).
    """

    def __init__(
        self,
        config: PositConfig | None = None,
        memory_size: int = 1 << 20,
        latency: LatencyModel | None = None,
        costs: CostModel = DEFAULT_COSTS,
        timing: bool = True,
        trace: bool = True,
    ):
        self.config = config or config_for(32)
        self.timing = timing
        if not timing:
            latency = LatencyModel.null(self.config)
        self.melodica = Melodica(self.config, latency)
        self.costs = costs
        self.mem = bytearray(memory_size)
        self.x = [0] * 32
        self.f = [0] * 32
        self.p = [0] * 32
        self.pc = 0
        self.cycles = 0
        self.retired = 0
        self.halted = False
        self.trap: MachineTrap | None = None
        self.ledger = CycleLedger()
        self.trace_enabled = trace
        self.trace: list[TraceEntry] = []
        self._ready: dict[tuple[str, int], int] = {}
        self._decoded: dict[int, Instruction | IllegalInstruction] = {}
        self._block = 0
        # x register -> (block, category, cost, trace index) of an integer load
        self._int_load: dict[int, tuple] = {}
        # x registers written by pmv.x.w in the current block
        self._from_prf: dict[int, int] = {}
        self._pstore = self.config.storage_bytes

    # -- loading --------------------------------------------------------------

    def load_program(self, program: Program | list[int], base: int | None = None):
        if isinstance(program, Program):
            words, base = program.words, program.base if base is None else base
        else:
            words, base = program, base or 0
        for i, w in enumerate(words):
            self._store(base + 4 * i, 4, w)
        self.pc = base
        self._decoded.clear()
        return self

    def load_data(self, addr: int, data: bytes):
        self._bounds(addr, len(data))
        self.mem[addr : addr + len(data)] = data

    def write_words(self, addr: int, words, width: int = 4):
        for i, w in enumerate(words):
            self._store(addr + width * i, width, w)

    def read_words(self, addr: int, count: int, width: int = 4) -> list[int]:
        return [self._load(addr + width * i, width) for i in range(count)]

    def write_posits(self, addr: int, patterns):
        self.write_words(addr, patterns, self._pstore)

    def read_posits(self, addr: int, count: int) -> list[int]:
        return [w & self.config.mask for w in self.read_words(addr, count, self._pstore)]

    # -- memory -----------------------------------------------------------------

    def _bounds(self, addr: int, size: int):
        if addr < 0 or addr + size > len(self.mem):
            raise MachineTrap("access-fault", self.pc, f"address 0x{addr:x} outside memory")

    def _load(self, addr: int, size: int) -> int:
        if addr % size and size in (2, 4):
            raise MachineTrap("misaligned", self.pc, f"{size}-byte access at 0x{addr:x}")
        self._bounds(addr, size)
        return int.from_bytes(self.mem[addr : addr + size], "little")

    def _store(self, addr: int, size: int, value: int):
        if addr % size and size in (2, 4):
            raise MachineTrap("misaligned", self.pc, f"{size}-byte access at 0x{addr:x}")
        self._bounds(addr, size)
        self.mem[addr : addr + size] = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")

    # -- execution --------------------------------------------------------------

    def fetch(self, pc: int) -> Instruction | IllegalInstruction:
        ins = self._decoded.get(pc)
        if ins is None:
            if pc % 4:
                raise MachineTrap("misaligned", pc, "instruction fetch")
            ins = decode(self._load(pc, 4))
            self._decoded[pc] = ins
        return ins

    def _src_ready(self, ins: Instruction) -> int:
        spec = ins.spec
        t = 0
        for slot in _SOURCES[spec.fmt]:
            fil = spec.files[_SLOT_POS[slot]]
            idx = getattr(ins, slot)
            if fil == "x" and idx == 0:
                continue
            r = self._ready.get((fil, idx), 0)
            if r > t:
                t = r
        return t

    def step(self):
        """Execute one instruction (raises MachineTrap)."""
        if self.halted:
            return
        pc = self.pc
        ins = self.fetch(pc)
        if isinstance(ins, IllegalInstruction):
            raise MachineTrap("illegal-instruction", pc, f"word 0x{ins.word:08x}")
        issue = max(self.cycles, self._src_ready(ins)) if self.timing else self.cycles
        stall = issue - self.cycles
        occ, lat, next_pc = self._execute(ins, pc, issue)
        if not self.timing:
            occ, lat = 1, 1
        cost = stall + occ
        spec = ins.spec
        if spec.fmt in _HAS_RD:
            fil = spec.files[0]
            if not (fil == "x" and ins.rd == 0):
                self._ready[(fil, ins.rd)] = issue + lat
        cat = category_of(ins.mnemonic)
        self.cycles += cost
        self.retired += 1
        self.ledger.charge(cat, cost)
        tindex = None
        if self.trace_enabled:
            tindex = len(self.trace)
            self.trace.append(TraceEntry(pc, format_instruction(ins), cat, cost))
        self._attribute(ins, cat, cost, tindex)
        if next_pc == pc and ins.mnemonic == "jal":
            self.halted = True  # jump-to-self idiom
        self.pc = next_pc & MASK32

    def _attribute(self, ins: Instruction, cat: Category, cost: int, tindex):
        """Re-attribute integer ld/st that carry posit data."""
        mn = ins.mnemonic
        if mn in _INT_LOADS:
            if ins.rd:
                self._int_load[ins.rd] = (self._block, cost, tindex)
            self._from_prf.pop(ins.rd, None)
            return
        if mn == "pmv.w.x":
            hit = self._int_load.pop(ins.rs1, None)
            if hit and hit[0] == self._block:
                self._reclass(hit[1], hit[2])
        elif mn == "pmv.x.w":
            if ins.rd:
                self._from_prf[ins.rd] = self._block
            self._int_load.pop(ins.rd, None)
            return
        elif mn in _INT_STORES:
            if self._from_prf.get(ins.rs2) == self._block:
                self._reclass(cost, tindex)
            return
        elif mn in _BRANCHES or mn in ("jal", "jalr"):
            self._block += 1
            self._int_load.clear()
            self._from_prf.clear()
            return
        # any other writer of an x register breaks the chain
        spec = ins.spec
        if spec.fmt in _HAS_RD and spec.files[0] == "x":
            self._int_load.pop(ins.rd, None)
            self._from_prf.pop(ins.rd, None)

    def _reclass(self, cost: int, tindex):
        self.ledger.move(Category.OTHERS, Category.POSIT_LDST, cost)
        if tindex is not None:
            self.trace[tindex].category = Category.POSIT_LDST

    def _posit(self, op: Opcode, a=None, b=None, now: int = 0):
        return self.melodica.execute(MelodicaCommand(op, a, b), now=now)

    def _execute(self, ins: Instruction, pc: int, now: int):
        """Apply ``ins``; return (occupancy, result latency, next pc)."""
        c = self.costs
        x, f, p = self.x, self.f, self.p
        mn = ins.mnemonic
        rd, rs1, rs2 = ins.rd, ins.rs1, ins.rs2
        imm = ins.imm
        nxt = pc + 4
        occ, lat = c.alu
        res = None  # value for x[rd]

        a = x[rs1]
        b = x[rs2]
        if mn == "addi":
            res = a + imm
        elif mn == "add":
            res = a + b
        elif mn == "sub":
            res = a - b
        elif mn == "lui":
            res = imm << 12
        elif mn == "auipc":
            res = pc + (imm << 12)
        elif mn in _BRANCHES:
            sa, sb = _s32(a), _s32(b)
            taken = {
                "beq": a == b, "bne": a != b, "blt": sa < sb, "bge": sa >= sb,
                "bltu": a < b, "bgeu": a >= b,
            }[mn]
            if taken:
                nxt = pc + imm
                occ = lat = c.branch_taken
            else:
                occ = lat = c.branch_not_taken
        elif mn == "jal":
            res, nxt = pc + 4, pc + imm
            occ = lat = c.jump
        elif mn == "jalr":
            res, nxt = pc + 4, (a + imm) & ~1
            occ = lat = c.jump
        elif mn in _INT_LOADS:
            size = {"lb": 1, "lbu": 1, "lh": 2, "lhu": 2, "lw": 4}[mn]
            v = self._load((a + imm) & MASK32, size)
            if mn in ("lb", "lh") and v >> (8 * size - 1):
                v -= 1 << (8 * size)
            res = v
            occ, lat = c.load
        elif mn in _INT_STORES:
            size = {"sb": 1, "sh": 2, "sw": 4}[mn]
            self._store((a + imm) & MASK32, size, b)
            occ, lat = c.store
        elif mn in ("slti", "sltiu", "xori", "ori", "andi"):
            ui = imm & MASK32
            res = {
                "slti": int(_s32(a) < imm), "sltiu": int(a < ui),
                "xori": a ^ ui, "ori": a | ui, "andi": a & ui,
            }[mn]
        elif mn in ("slli", "srli", "srai"):
            res = {"slli": a << imm, "srli": a >> imm, "srai": _s32(a) >> imm}[mn]
        elif mn in ("sll", "srl", "sra", "slt", "sltu", "xor", "or", "and"):
            sh = b & 31
            res = {
                "sll": a << sh, "srl": a >> sh, "sra": _s32(a) >> sh,
                "slt": int(_s32(a) < _s32(b)), "sltu": int(a < b),
                "xor": a ^ b, "or": a | b, "and": a & b,
            }[mn]
        elif mn in ("mul", "mulh", "mulhsu", "mulhu"):
            occ, lat = c.mul
            if mn == "mul":
                res = a * b
            elif mn == "mulh":
                res = (_s32(a) * _s32(b)) >> 32
            elif mn == "mulhsu":
                res = (_s32(a) * b) >> 32
            else:
                res = (a * b) >> 32
        elif mn in ("div", "divu", "rem", "remu"):
            occ, lat = c.div
            res = self._divide(mn, a, b)
        elif mn in ("ecall", "ebreak"):
            occ = lat = c.system
            self.halted = True
        elif mn == "csrrs":
            if imm == 0xC00:
                v = now
            elif imm == 0xC02:
                v = self.retired
            else:
                raise MachineTrap("illegal-instruction", pc, f"unsupported csr 0x{imm:x}")
            if rs1:
                raise MachineTrap("illegal-instruction", pc, "read-only csr")
            res = v
        # -- single precision -------------------------------------------------
        elif mn == "flw":
            f[rd] = self._load((a + imm) & MASK32, 4)
            occ, lat = c.load
        elif mn == "fsw":
            self._store((a + imm) & MASK32, 4, f[rs2])
            occ, lat = c.store
        elif mn in ("fadd.s", "fsub.s", "fmul.s"):
            op = {"fadd.s": f32.add, "fsub.s": f32.sub, "fmul.s": f32.mul}[mn]
            f[rd] = op(f[rs1], f[rs2])
            occ, lat = c.fp_arith
        elif mn in ("fmadd.s", "fmsub.s", "fnmsub.s", "fnmadd.s"):
            neg_p = mn in ("fnmsub.s", "fnmadd.s")
            neg_c = mn in ("fmsub.s", "fnmadd.s")
            f[rd] = f32.fma(f[rs1], f[rs2], f[ins.rs3], neg_p, neg_c)
            occ, lat = c.fp_arith
        elif mn == "fdiv.s":
            f[rd] = f32.div(f[rs1], f[rs2])
            occ, lat = c.fp_divsqrt
        elif mn == "fsqrt.s":
            f[rd] = f32.sqrt(f[rs1])
            occ, lat = c.fp_divsqrt
        elif mn in ("fsgnj.s", "fsgnjn.s", "fsgnjx.s"):
            s = f[rs2] & 0x80000000
            if mn == "fsgnjn.s":
                s ^= 0x80000000
            elif mn == "fsgnjx.s":
                s ^= f[rs1] & 0x80000000
            f[rd] = (f[rs1] & 0x7FFFFFFF) | s
            occ, lat = c.fp_misc
        elif mn in ("fmin.s", "fmax.s"):
            f[rd] = (f32.fmin if mn == "fmin.s" else f32.fmax)(f[rs1], f[rs2])
            occ, lat = c.fp_misc
        elif mn in ("feq.s", "flt.s", "fle.s"):
            u, v = f[rs1], f[rs2]
            if f32.is_nan(u) or f32.is_nan(v):
                res = 0
            else:
                fu, fv = f32.to_float(u), f32.to_float(v)
                res = int({"feq.s": fu == fv, "flt.s": fu < fv, "fle.s": fu <= fv}[mn])
            occ, lat = c.fp_misc
        elif mn in ("fcvt.w.s", "fcvt.wu.s"):
            res = f32.to_int32(f[rs1], unsigned=mn == "fcvt.wu.s")
            occ, lat = c.fp_move
        elif mn in ("fcvt.s.w", "fcvt.s.wu"):
            f[rd] = f32.from_int32(a, unsigned=mn == "fcvt.s.wu")
            occ, lat = c.fp_move
        elif mn == "fmv.x.w":
            res = f[rs1]
            occ, lat = c.fp_move
        elif mn == "fmv.w.x":
            f[rd] = a
            occ, lat = c.fp_move
        # -- posit ------------------------------------------------------------
        elif mn == "plw":
            p[rd] = self._load((a + imm) & MASK32, self._pstore) & self.config.mask
            occ, lat = c.load
        elif mn == "psw":
            self._store((a + imm) & MASK32, self._pstore, p[rs2])
            occ, lat = c.store
        elif mn == "pmv.w.x":
            p[rd] = a & self.config.mask
            occ, lat = c.posit_move
        elif mn == "pmv.x.w":
            res = p[rs1]
            occ, lat = c.posit_move
        elif mn in ("fma.p", "fms.p", "fda.p", "fds.p"):
            r = self._posit(Opcode[mn[:3].upper() + "_P"], p[rs1], p[rs2], now)
            occ, lat = 1 + r.response_at, 1 + r.response_at
        elif mn == "fcvt.r.p":
            r = self._posit(Opcode.FCVT_R_P, p[rs1], now=now)
            occ, lat = 1 + r.response_at, 1 + r.response_at
        elif mn == "fcvt.p.r":
            r = self._posit(Opcode.FCVT_P_R, now=now)
            p[rd] = r.value
            occ = lat = max(1, r.response_at)
        elif mn == "fcvt.p.s":
            r = self._posit(Opcode.FCVT_P_S, f[rs1], now=now)
            p[rd] = r.value
            occ = lat = max(1, r.response_at)
        elif mn == "fcvt.s.p":
            r = self._posit(Opcode.FCVT_S_P, p[rs1], now=now)
            f[rd] = r.value
            occ = lat = max(1, r.response_at)
        else:  # pragma: no cover - every table row is handled above
            raise MachineTrap("illegal-instruction", pc, f"no semantics for {mn}")
        if res is not None and rd:
            x[rd] = res & MASK32
        return occ, lat, nxt

    @staticmethod
    def _divide(mn: str, a: int, b: int) -> int:
        if mn in ("divu", "remu"):
            if b == 0:
                return MASK32 if mn == "divu" else a
            return a // b if mn == "divu" else a % b
        sa, sb = _s32(a), _s32(b)
        if sb == 0:
            return MASK32 if mn == "div" else a
        if sa == -(2**31) and sb == -1:
            return a if mn == "div" else 0
        q = abs(sa) // abs(sb)
        if (sa < 0) != (sb < 0):
            q = -q
        return q if mn == "div" else sa - q * sb

    def run(self, max_instructions: int = 50_000_000) -> RunResult:
        """Step until halt, trap or the instruction budget runs out."""
        budget = max_instructions
        try:
            while not self.halted and budget > 0:
                self.step()
                budget -= 1
        except MachineTrap as t:
            self.trap = t
        return RunResult(self.ledger, self.retired, self.halted and self.trap is None, self.trap)

    # -- reporting --------------------------------------------------------------

    def dump(self, memory_ranges: list[tuple[int, int]] = ()) -> str:
        """Registers (non-zero ones) and selected memory ranges as text."""
        lines = [f"pc      {self.pc:08x}", f"cycles  {self.cycles}", f"retired {self.retired}"]
        if self.trap:
            lines.append(f"trap    {self.trap}")
        for name, regs in (("x", self.x), ("f", self.f), ("p", self.p)):
            nz = [f"{name}{i}={v:08x}" for i, v in enumerate(regs) if v]
            lines.append(f"{name}: " + (" ".join(nz) if nz else "all zero"))
        lines.append("quire: " + self.melodica.quire.dump())
        for start, length in memory_ranges:
            for off in range(0, length, 16):
                chunk = self.mem[start + off : start + min(off + 16, length)]
                lines.append(f"{start + off:08x}: {chunk.hex(' ')}")
        return "\n".join(lines)

    def trace_text(self) -> str:
        return "\n".join(str(t) for t in self.trace)
