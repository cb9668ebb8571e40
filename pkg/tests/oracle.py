"""Independent reference helpers for the test-suite.

Nothing here imports the package's encode/decode paths: posit fields are
parsed from bit strings and rounding is a binary search over patterns by
exact value.
"""

from fractions import Fraction


def parse_fields(pattern, n, es):
    """Brute-force field parse. Returns None for zero/NaR, else (s, k, exp, fbits)."""
    bits = format(pattern, f"0{n}b")
    if bits == "0" * n or bits == "1" + "0" * (n - 1):
        return None
    s = int(bits[0])
    if s:
        bits = format((1 << n) - pattern, f"0{n}b")
    body = bits[1:]
    lead = body[0]
    r = len(body) - len(body.lstrip(lead))
    k = r - 1 if lead == "1" else -r
    rest = body[r + 1 :]
    exp_bits = (rest[:es]).ljust(es, "0")
    exp = int(exp_bits, 2) if es else 0
    return s, k, exp, rest[es:]


def oracle_value(pattern, n, es):
    """Exact value by the textbook formula; None for NaR."""
    if pattern == 0:
        return Fraction(0)
    fields = parse_fields(pattern, n, es)
    if fields is None:
        return None
    s, k, exp, fbits = fields
    f = Fraction(int(fbits, 2), 2 ** len(fbits)) if fbits else Fraction(0)
    useed = Fraction(2) ** (2**es)
    v = useed**k * Fraction(2) ** exp * (1 + f)
    return -v if s else v


def oracle_round(v, n, es):
    """Nearest posit pattern to rational v, ties to even pattern, saturating."""
    v = Fraction(v)
    if v == 0:
        return 0
    mag = abs(v)
    maxpos = (1 << (n - 1)) - 1
    lo, hi = 1, maxpos
    if mag <= oracle_value(1, n, es):
        best = 1
    elif mag >= oracle_value(maxpos, n, es):
        best = maxpos
    else:
        # largest pattern with value <= mag
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if oracle_value(mid, n, es) <= mag:
                lo = mid
            else:
                hi = mid - 1
        below = lo
        vb = oracle_value(below, n, es)
        if vb == mag:
            best = below
        else:
            above = below + 1
            va = oracle_value(above, n, es)
            db, da = mag - vb, va - mag
            if da < db or (da == db and above % 2 == 0):
                best = above
            else:
                best = below
    return ((1 << n) - best) & ((1 << n) - 1) if v < 0 else best


def signed(pattern, n):
    return pattern - (1 << n) if pattern >> (n - 1) else pattern
