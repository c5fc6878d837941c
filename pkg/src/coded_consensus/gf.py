"""Arithmetic in GF(2^m) with elements as Python ints in polynomial basis.

Bit ``i`` of an element is the coefficient of ``x**i``.  Every field is built
over a fixed reduction polynomial (see ``REDUCTION_POLYS``) so that all nodes,
across runs, derive identical codewords.
"""

from __future__ import annotations

from functools import lru_cache

# Minimal-weight reduction polynomials, smallest integer value among those of
# that weight.  For m <= 32 the polynomial is additionally required to be
# primitive, so x generates the multiplicative group.  Regenerate any entry
# with ``find_reduction_poly(m)``.
REDUCTION_POLYS: dict[int, int] = {
    2: 0x7,
    3: 0xb,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11d,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201b,
    14: 0x402b,
    15: 0x8003,
    16: 0x1002d,
    17: 0x20009,
    18: 0x40081,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x100001b,
    25: 0x2000009,
    26: 0x4000047,
    27: 0x8000027,
    28: 0x10000009,
    29: 0x20000005,
    30: 0x40000053,
    31: 0x80000009,
    32: 0x1000000c5,
    48: (1 << 48) | 0x2d,
    64: (1 << 64) | 0x1b,
    128: (1 << 128) | 0x87,
    256: (1 << 256) | 0x425,
    512: (1 << 512) | 0x125,
    1024: (1 << 1024) | 0x80043,
}

_SPREAD = tuple(
    sum(((b >> i) & 1) << (2 * i) for i in range(8)) for b in range(256)
)


def _degree(a: int) -> int:
    return a.bit_length() - 1


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    if b.bit_length() <= 8:
        out = 0
        while b:
            if b & 1:
                out ^= a
            a <<= 1
            b >>= 1
        return out
    # 4-bit windows over the shorter operand
    table = [0] * 16
    for w in range(1, 16):
        low = w & -w
        table[w] = table[w ^ low] ^ (a << (low.bit_length() - 1))
    out = 0
    shift = 0
    while b:
        w = b & 0xF
        if w:
            out ^= table[w] << shift
        b >>= 4
        shift += 4
    return out


def clsquare(a: int) -> int:
    """Square in GF(2)[x]: interleave zero bits between the bits of ``a``."""
    if a < 256:
        return _SPREAD[a]
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    out = 0
    for i, byte in enumerate(raw):
        if byte:
            out |= _SPREAD[byte] << (16 * i)
    return out


def poly_mod(a: int, mod: int) -> int:
    dm = _degree(mod)
    if mod.bit_count() <= 7:
        # sparse modulus: fold the high part down in bulk
        tail = mod ^ (1 << dm)
        taps = [i for i in range(dm) if (tail >> i) & 1]
        mask = (1 << dm) - 1
        while a >> dm:
            hi = a >> dm
            a &= mask
            for tap in taps:
                a ^= hi << tap
        return a
    while a.bit_length() > dm:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        while a.bit_length() >= b.bit_length() and a:
            a ^= b << (a.bit_length() - b.bit_length())
        a, b = b, a
    return a


def _prime_factors(x: int) -> list[int]:
    out = []
    p = 2
    while p * p <= x:
        if x % p == 0:
            out.append(p)
            while x % p == 0:
                x //= p
        p += 1 if p == 2 else 2
    if x > 1:
        out.append(x)
    return out


def _x_pow2k_mod(k: int, mod: int) -> int:
    """x**(2**k) mod ``mod`` by repeated squaring."""
    r = 2
    for _ in range(k):
        r = poly_mod(clsquare(r), mod)
    return r


def is_irreducible(f: int) -> bool:
    """Rabin's irreducibility test over GF(2)."""
    m = _degree(f)
    if m < 1:
        return False
    if m == 1:
        return True
    if not f & 1:
        return False
    # cheap early exit on small factors: gcd(f, x^(2^d) - x) for small d
    r = 2
    for _ in range(min(16, m // 2)):
        r = poly_mod(clsquare(r), f)
        if poly_gcd(f, r ^ 2) != 1:
            return False
    if _x_pow2k_mod(m, f) != poly_mod(2, f):
        return False
    for p in _prime_factors(m):
        h = _x_pow2k_mod(m // p, f) ^ 2
        if poly_gcd(f, poly_mod(h, f)) != 1:
            return False
    return True


def _powmod(base: int, e: int, mod: int) -> int:
    result = 1
    base = poly_mod(base, mod)
    while e:
        if e & 1:
            result = poly_mod(clmul(result, base), mod)
        base = poly_mod(clsquare(base), mod)
        e >>= 1
    return result


def is_primitive(f: int) -> bool:
    """True iff ``f`` is irreducible and x has order 2**m - 1 modulo ``f``."""
    if not is_irreducible(f):
        return False
    order = (1 << _degree(f)) - 1
    return all(_powmod(2, order // p, f) != 1 for p in _prime_factors(order))


def _taps_ascending(count: int, below: int):
    """Tap sets from range(1, below), ordered by the integer they encode."""
    if count == 0:
        yield ()
        return
    for top in range(count, below):
        for rest in _taps_ascending(count - 1, top):
            yield rest + (top,)


def find_reduction_poly(m: int) -> int:
    """Search the table rule: lowest weight, then smallest value."""
    if m < 1:
        raise ValueError("m must be positive")
    if m == 1:
        return 0b11
    accept = is_primitive if m <= 32 else is_irreducible
    top = 1 << m
    for middle in range(1, m, 2):  # odd total weight, else x+1 divides f
        for taps in _taps_ascending(middle, m):
            f = top | 1
            for tap in taps:
                f |= 1 << tap
            if accept(f):
                return f
    raise ValueError(f"no reduction polynomial found for m={m}")


@lru_cache(maxsize=None)
def reduction_poly(m: int) -> int:
    if m in REDUCTION_POLYS:
        return REDUCTION_POLYS[m]
    return find_reduction_poly(m)


class GF2m:
    """The field GF(2^m); elements are ints in ``range(2**m)``."""

    def __init__(self, m: int, poly: int | None = None):
        if m < 1:
            raise ValueError("m must be positive")
        self.m = m
        self.poly = reduction_poly(m) if poly is None else poly
        if _degree(self.poly) != m:
            raise ValueError(f"reduction polynomial {self.poly:#x} is not of degree {m}")
        self.order = 1 << m

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2m) and (self.m, self.poly) == (other.m, other.poly)

    def __hash__(self) -> int:
        return hash((self.m, self.poly))

    def check(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.order:
            raise ValueError(f"{a!r} is not an element of GF(2^{self.m})")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        if a == 1:
            return b
        if b == 1:
            return a
        return poly_mod(clmul(a, b), self.poly)

    def square(self, a: int) -> int:
        return poly_mod(clsquare(a), self.poly)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        # extended Euclid in GF(2)[x]
        r0, r1 = self.poly, a
        s0, s1 = 0, 1
        while r1 != 1:
            shift = r0.bit_length() - r1.bit_length()
            if shift < 0:
                r0, r1, s0, s1 = r1, r0, s1, s0
                continue
            r0 ^= r1 << shift
            s0 ^= s1 << shift
            if r0.bit_length() < r1.bit_length():
                r0, r1, s0, s1 = r1, r0, s1, s0
        return poly_mod(s1, self.poly)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.square(a)
            e >>= 1
        return result
