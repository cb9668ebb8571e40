"""Random instruction generator shared by the ISA tests."""

from clarinet.isa import TABLE, Instruction


def random_instruction(rng, spec=None):
    spec = spec or rng.choice(TABLE)
    f = spec.fmt
    r = lambda: rng.randrange(32)  # noqa: E731
    if f == "SYS":
        return Instruction(spec.mnemonic)
    if f == "R":
        return Instruction(spec.mnemonic, rd=r(), rs1=r(), rs2=r())
    if f == "R1":
        return Instruction(spec.mnemonic, rd=r(), rs1=r())
    if f == "RS":
        return Instruction(spec.mnemonic, rs1=r(), rs2=r())
    if f == "RS1":
        return Instruction(spec.mnemonic, rs1=r())
    if f == "RD":
        return Instruction(spec.mnemonic, rd=r())
    if f == "R4":
        return Instruction(spec.mnemonic, rd=r(), rs1=r(), rs2=r(), rs3=r())
    if f in ("I", "L"):
        return Instruction(spec.mnemonic, rd=r(), rs1=r(), imm=rng.randint(-2048, 2047))
    if f == "SH":
        return Instruction(spec.mnemonic, rd=r(), rs1=r(), imm=rng.randrange(32))
    if f == "CSR":
        return Instruction(spec.mnemonic, rd=r(), rs1=r(), imm=rng.randrange(4096))
    if f == "S":
        return Instruction(spec.mnemonic, rs1=r(), rs2=r(), imm=rng.randint(-2048, 2047))
    if f == "B":
        return Instruction(spec.mnemonic, rs1=r(), rs2=r(), imm=2 * rng.randint(-2048, 2047))
    if f == "U":
        return Instruction(spec.mnemonic, rd=r(), imm=rng.randrange(1 << 20))
    if f == "J":
        return Instruction(spec.mnemonic, rd=r(), imm=2 * rng.randint(-(1 << 19), (1 << 19) - 1))
    raise AssertionError(f)
