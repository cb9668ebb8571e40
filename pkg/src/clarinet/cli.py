"""Command-line entry point: ``clarinet {convert,asm,run,study}``.

Exit codes: 0 success, 1 usage error, 2 assembly error or machine trap,
3 study configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from .asm import AsmError, assemble, disassemble
from .emulator import Machine
from .posit import (
    PositBits,
    PositConfig,
    binary32_from_posit,
    config_for,
    extract,
    posit_from_fraction,
    posit_to_fraction,
)

EXIT_OK, EXIT_USAGE, EXIT_TRAP, EXIT_STUDY = 0, 1, 2, 3
STANDARD_WIDTHS = (8, 16, 24, 32)


class UsageError(Exception):
    pass


def _int(text: str) -> int:
    return int(text, 0)


def _config(args) -> PositConfig:
    if args.n not in STANDARD_WIDTHS and not args.allow_any_width:
        raise UsageError(
            f"posit width {args.n} is not one of {STANDARD_WIDTHS}; pass --allow-any-width to force it"
        )
    try:
        return config_for(args.n, args.es)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _add_posit_flags(p: argparse.ArgumentParser, default_n: int = 32):
    p.add_argument("--n", type=int, default=default_n, help=f"posit width in bits (default {default_n})")
    p.add_argument("--es", type=int, default=None, help="exponent field size (default: 0/1/1/2 for n=8/16/24/32)")
    p.add_argument("--allow-any-width", action="store_true", help="accept widths other than 8, 16, 24, 32")


# -- convert -------------------------------------------------------------------


def _describe(pattern: int, cfg: PositConfig) -> list[str]:
    width = (cfg.n + 3) // 4
    lines = [f"config   {cfg}", f"pattern  0x{pattern:0{width}x}", f"bits     {pattern:0{cfg.n}b}"]
    if pattern == cfg.nar:
        return lines + ["value    NaR"]
    if pattern == 0:
        return lines + ["value    0"]
    u = extract(PositBits(pattern, cfg))
    k, e = u.fields(cfg)
    v = posit_to_fraction(pattern, cfg)
    lines.append(f"fields   s={u.sign} k={k} exp={e} f={u.frac} (fraction bits: {u.frac_width})")
    lines.append(f"value    {float(v)!r}")
    lines.append(f"exact    {v}")
    if cfg.n <= 32 and cfg.es <= 2:
        lines.append(f"binary32 0x{binary32_from_posit(PositBits(pattern, cfg)):08x}")
    return lines


def cmd_convert(args) -> int:
    cfg = _config(args)
    if args.from_bits is not None:
        try:
            pattern = _int(args.from_bits)
        except ValueError:
            raise UsageError(f"cannot parse bit pattern {args.from_bits!r}") from None
        if pattern < 0 or pattern >> cfg.n:
            raise UsageError(f"pattern {args.from_bits} does not fit in {cfg.n} bits")
    else:
        text = args.from_real.strip()
        if text.lower() == "nar":
            pattern = cfg.nar
        else:
            try:
                v = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise UsageError(f"cannot parse real value {text!r}") from None
            pattern = posit_from_fraction(v, cfg)
    print("\n".join(_describe(pattern, cfg)))
    return EXIT_OK


# -- asm / run -----------------------------------------------------------------


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _read_hex_words(path: str) -> list[int]:
    words = []
    for tok in _read_source(path).split():
        if tok.startswith("#"):
            continue
        words.append(int(tok, 16) & 0xFFFFFFFF)
    return words


def cmd_asm(args) -> int:
    if args.disassemble:
        try:
            words = _read_hex_words(args.source)
        except ValueError as e:
            raise UsageError(f"bad hex word: {e}") from None
        print(disassemble(words, args.base, addresses=True))
        return EXIT_OK
    try:
        prog = assemble(_read_source(args.source), base=args.base)
    except AsmError as e:
        print(f"{args.source}: {e}", file=sys.stderr)
        return EXIT_TRAP
    text = "\n".join(f"{w:08x}" for w in prog.words)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + ("\n" if text else ""))
    else:
        if args.listing:
            print(disassemble(prog.words, prog.base, addresses=True))
        elif text:
            print(text)
    return EXIT_OK


def _parse_data(spec: str):
    """'ADDR=v1,v2,...' -> (addr, [values])."""
    if "=" not in spec:
        raise UsageError(f"data spec {spec!r} must look like ADDR=v1,v2,...")
    addr, vals = spec.split("=", 1)
    try:
        return _int(addr), [v for v in vals.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad address in {spec!r}") from None


def _parse_range(spec: str):
    try:
        addr, length = spec.split(":")
        return _int(addr), _int(length)
    except ValueError:
        raise UsageError(f"dump range {spec!r} must look like ADDR:LENGTH") from None


def cmd_run(args) -> int:
    cfg = _config(args)
    if args.dot:
        return _run_dot(args, cfg)
    try:
        if args.hex:
            words = _read_hex_words(args.program)
            prog = words
        else:
            prog = assemble(_read_source(args.program))
            words = prog.words
    except AsmError as e:
        print(f"{args.program}: {e}", file=sys.stderr)
        return EXIT_TRAP
    except ValueError as e:
        raise UsageError(f"bad hex word: {e}") from None
    m = Machine(cfg, memory_size=args.memory, trace=args.trace)
    try:
        for spec in args.posits:
            addr, vals = _parse_data(spec)
            m.write_posits(addr, [posit_from_fraction(Fraction(v), cfg) for v in vals])
        for spec in args.floats:
            addr, vals = _parse_data(spec)
            m.write_words(addr, np.array([float(v) for v in vals], dtype=np.float32).view(np.uint32).tolist())
        for spec in args.words:
            addr, vals = _parse_data(spec)
            m.write_words(addr, [_int(v) & 0xFFFFFFFF for v in vals])
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad data value: {e}") from None
    ranges = [_parse_range(r) for r in args.dump]
    if not words:
        print("empty program: nothing to run")
        print(m.ledger.table())
        return EXIT_OK
    m.load_program(prog)
    result = m.run(args.max_instructions)
    if args.trace:
        print(m.trace_text())
    print(m.dump(ranges))
    print()
    print(m.ledger.table())
    if result.trap is not None:
        print(f"trap: {result.trap}", file=sys.stderr)
        return EXIT_TRAP
    if not result.halted:
        print(f"stopped after {args.max_instructions} instructions without halting", file=sys.stderr)
        return EXIT_TRAP
    return EXIT_OK


def _run_dot(args, cfg: PositConfig) -> int:
    from .numerics.programs import dot_listing, native_dot, run_dot

    rng = np.random.default_rng(args.seed)
    a = rng.uniform(0.0, 1.0, args.length)
    b = rng.uniform(0.0, 1.0, args.length)
    if args.trace or args.show_listing:
        print(dot_listing(args.dot, cfg))
    value, m, result = run_dot(args.dot, a, b, cfg, trace=args.trace)
    if args.trace:
        print(m.trace_text())
    if result.trap is not None:
        print(f"trap: {result.trap}", file=sys.stderr)
        return EXIT_TRAP
    print(f"dot product ({args.dot}, {cfg}, length {args.length}, seed {args.seed})")
    print(f"emulated {value!r}")
    print(f"native   {native_dot(args.dot, a, b, cfg)!r}")
    print(f"cycles   {m.cycles}")
    print()
    print(m.ledger.table())
    return EXIT_OK


# -- study ---------------------------------------------------------------------


def _parse_value_range(text: str):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"range {text!r} must look like LO:HI") from None
    if not lo < hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def cmd_study(args) -> int:
    from .numerics import GivensUnsupported, parse_mode, run_error_study, write_reports
    from .numerics.modes import Tag
    from .numerics.study import KERNELS

    if args.kernel not in KERNELS:
        print(f"unknown kernel {args.kernel!r}; choose from {', '.join(KERNELS)}", file=sys.stderr)
        return EXIT_STUDY
    try:
        modes = [parse_mode(t) for t in args.modes.split(",") if t.strip()]
    except ValueError as e:
        print(f"bad mode list: {e}", file=sys.stderr)
        return EXIT_STUDY
    for mode in modes:
        if mode.config is not None and mode.config.n not in STANDARD_WIDTHS and not args.allow_any_width:
            print(f"mode {mode}: width {mode.config.n} needs --allow-any-width", file=sys.stderr)
            return EXIT_STUDY
        if args.kernel == "xgivens" and mode.tag is Tag.PN:
            print(
                f"refusing xgivens in mode {mode}: Givens rotations need a square root, and the "
                "posit unit has no square-root instruction; without a quire there is no way to "
                "refine a binary32 seed, so use a quire mode (qN or f32-qN) instead",
                file=sys.stderr,
            )
            return EXIT_STUDY
    ranges = [_parse_value_range(r) for r in args.ranges.split(",")]
    try:
        sizes = [int(s) for s in args.sizes.split(",")]
    except ValueError:
        raise UsageError(f"sizes {args.sizes!r} must be comma-separated integers") from None
    if any(s < 1 for s in sizes) or args.trials < 1:
        print("sizes and trials must be positive", file=sys.stderr)
        return EXIT_STUDY

    all_reports = []
    try:
        for rng in ranges:
            all_reports += run_error_study(args.kernel, sizes, rng, args.trials, modes, args.seed)
    except GivensUnsupported as e:  # defensive: checked above
        print(str(e), file=sys.stderr)
        return EXIT_STUDY

    print(f"{'mode':>8} {'range':>12} {'size':>7} {'digits':>7} {'mean rel err':>13} {'reads':>6} {'acc/read':>9}")
    for r in all_reports:
        print(
            f"{r.mode:>8} {f'[{r.range_lo:g},{r.range_hi:g})':>12} {r.size:>7} {r.accurate_digits:7.3f} "
            f"{r.mean_relative_error:13.4e} {r.quire_reads:6d} {r.accumulations_per_read:9.2f}"
        )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.kernel}_report.csv")
        write_reports(path, all_reports)
        written = [path]
        # heat maps: accurate digits, rows = value ranges, columns = sizes
        for mode in modes:
            hm = os.path.join(args.out, f"{args.kernel}_{mode.name}_digits.csv")
            with open(hm, "w") as fh:
                fh.write("range," + ",".join(str(s) for s in sizes) + "\n")
                for lo, hi in ranges:
                    row = {
                        r.size: r.accurate_digits
                        for r in all_reports
                        if r.mode == mode.name and (r.range_lo, r.range_hi) == (lo, hi)
                    }
                    fh.write(f"{lo:g}:{hi:g}," + ",".join(f"{row[s]:.6f}" for s in sizes) + "\n")
            written.append(hm)
        print("wrote " + ", ".join(written))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clarinet",
        description="Posit/quire arithmetic, a posit-extended RV32IMF emulator, and accuracy studies.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("convert", help="decode a posit pattern or round a real value to a posit")
    _add_posit_flags(p, default_n=8)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--from-bits", metavar="PATTERN", help="posit bit pattern, e.g. 0x40")
    g.add_argument("--from-real", metavar="VALUE", help="real value (decimal, fraction like 1/3, or 'nar')")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("asm", help="assemble a source file to hex words, or disassemble hex words")
    p.add_argument("source", help="assembly source (or hex words with --disassemble); '-' for stdin")
    p.add_argument("-o", "--output", help="write hex words here instead of stdout")
    p.add_argument("--base", type=_int, default=0, help="load address of the first word (default 0)")
    p.add_argument("--listing", action="store_true", help="print an address/word/instruction listing")
    p.add_argument("--disassemble", action="store_true", help="input is hex words; print assembly")
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="assemble and run a program, printing state and the cycle ledger")
    p.add_argument("program", nargs="?", help="assembly source (or hex words with --hex); '-' for stdin")
    _add_posit_flags(p)
    p.add_argument("--hex", action="store_true", help="program file holds hex words, not assembly")
    p.add_argument("--posits", action="append", default=[], metavar="ADDR=v,...",
                   help="store values rounded to posits at ADDR (repeatable)")
    p.add_argument("--floats", action="append", default=[], metavar="ADDR=v,...",
                   help="store values as binary32 at ADDR (repeatable)")
    p.add_argument("--words", action="append", default=[], metavar="ADDR=w,...",
                   help="store raw 32-bit words at ADDR (repeatable)")
    p.add_argument("--dump", action="append", default=[], metavar="ADDR:LEN",
                   help="print LEN bytes of memory from ADDR after the run (repeatable)")
    p.add_argument("--trace", action="store_true", help="print the instruction trace")
    p.add_argument("--max-instructions", type=int, default=10_000_000,
                   help="instruction budget (default 10,000,000)")
    p.add_argument("--memory", type=int, default=1 << 20, help="memory size in bytes (default 1 MiB)")
    p.add_argument("--dot", choices=("f32", "f32-p", "p", "p-int"),
                   help="run a built-in dot-product program on random [0,1) data instead of a file")
    p.add_argument("--length", type=int, default=16, help="vector length for --dot (default 16)")
    p.add_argument("--seed", type=int, default=0, help="data seed for --dot (default 0)")
    p.add_argument("--show-listing", action="store_true", help="print the built-in --dot program")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("study", help="Monte Carlo accuracy study of a kernel against binary64")
    p.add_argument("--kernel", default="xdot", help="xdot, xgemv, xgemm or xgivens (default xdot)")
    p.add_argument("--sizes", default="10,100,1000", help="comma-separated problem sizes")
    p.add_argument("--ranges", default="0:1", help="comma-separated LO:HI input ranges (default 0:1)")
    p.add_argument("--modes", default="f32,p32,q32", help="comma-separated modes: f32, pN, qN, f32-qN")
    p.add_argument("--trials", type=int, default=1000, help="trials per (size, range, mode) (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="base seed; trial t uses stream (seed, t)")
    p.add_argument("--out", help="directory for the CSV report and per-mode heat-map matrices")
    p.add_argument("--allow-any-width", action="store_true", help="accept posit widths outside 8/16/24/32")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse exits 2 on usage errors; we reserve 2 for traps
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "run" and not args.dot and not args.program:
        print("run: give a program file or --dot VARIANT", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
