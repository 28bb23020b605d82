"""Small finite fields used by the secret-sharing code.

Every field here has at most 256 elements, so one symbol always fits in one
byte. ``GF256`` is the production field; ``GF16`` and prime fields exist for
desk-scale exhaustive tests.
"""

from __future__ import annotations

from functools import lru_cache


class BinaryField:
    """GF(2^m) with a fixed reduction polynomial, via log/antilog tables."""

    def __init__(self, m: int, poly: int, tag: int):
        if not 1 <= m <= 8 or poly >> m != 1:
            raise ValueError("reduction polynomial must have degree m, with 1 <= m <= 8")
        self.m = m
        self.poly = poly
        self.tag = tag
        self.order = 1 << m
        self.symbol_bits = m
        self._exp, self._log = self._tables()

    def _slow_mul(self, a: int, b: int) -> int:
        result = 0
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & self.order:
                a ^= self.poly
        return result

    def _tables(self) -> tuple[list[int], list[int]]:
        n = self.order - 1
        for g in range(2, self.order):
            exp = [1] * (2 * n)
            x = 1
            for i in range(1, n):
                x = self._slow_mul(x, g)
                if x == 1:
                    break
                exp[i] = x
            else:
                for i in range(n, 2 * n):
                    exp[i] = exp[i - n]
                log = [0] * self.order
                for i in range(n):
                    log[exp[i]] = i
                return exp, log
        if self.order == 2:
            return [1, 1], [0, 0]
        raise ValueError(f"polynomial {self.poly:#x} is not irreducible")

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]

    def random_element(self, stream) -> int:
        return stream.draw_bits(self.m)

    def __repr__(self) -> str:
        return f"GF(2^{self.m})"


class PrimeField:
    """GF(p) for a prime p < 256."""

    def __init__(self, p: int):
        if p < 2 or p > 255 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not a prime below 256")
        self.order = p
        self.tag = p
        self.symbol_bits = (p - 1).bit_length()

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.order

    def mul(self, a: int, b: int) -> int:
        return a * b % self.order

    def inv(self, a: int) -> int:
        if a % self.order == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, self.order - 2, self.order)

    def random_element(self, stream) -> int:
        return stream.randbelow(self.order)

    def __repr__(self) -> str:
        return f"GF({self.order})"


Field = BinaryField | PrimeField

GF256 = BinaryField(8, 0x11B, tag=0x01)
GF16 = BinaryField(4, 0x13, tag=0x10)

_NAMED = {"gf256": GF256, "gf16": GF16}


@lru_cache(maxsize=None)
def prime_field(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_tag(tag: int) -> Field:
    if tag == GF256.tag:
        return GF256
    if tag == GF16.tag:
        return GF16
    try:
        return prime_field(tag)
    except ValueError:
        raise ValueError(f"unknown field tag {tag:#04x}") from None


def field_by_name(name: str) -> Field:
    """Resolve ``"gf256"``, ``"gf16"`` or ``"gf<p>"`` for a prime p."""
    key = name.lower()
    if key in _NAMED:
        return _NAMED[key]
    if key.startswith("gf") and key[2:].isdigit():
        return prime_field(int(key[2:]))
    raise ValueError(f"unknown field {name!r}")


def field_name(f: Field) -> str:
    if f is GF256:
        return "gf256"
    if f is GF16:
        return "gf16"
    return f"gf{f.order}"
