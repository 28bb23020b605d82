"""Key combination: bitwise XOR and threshold (Shamir) secret sharing.

Sharing works symbol by symbol over a small field; with the default GF(2^8)
a symbol is one byte of the secret, so each share is as long as the secret.
The symbol-level functions (``split_symbols``, ``shares_from_coefficients``,
``interpolate_at_zero``) are field-generic and are what the byte-level API
calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .fields import GF256, BinaryField, Field, field_from_tag
from .keystream import KeyStream, as_stream

SHARE_WIRE_VERSION = 1
SHARE_HEADER_BYTES = 5


@dataclass(frozen=True)
class KeyMaterial:
    """A bit string with a provenance tag.

    ``bits`` is big-endian and holds ``ceil(length_bits / 8)`` bytes; unused
    high bits of the first byte are zero. Byte-aligned keys are the norm,
    shorter keys exist for desk-scale enumeration.
    """

    bits: bytes
    origin: str
    length_bits: int = -1

    def __post_init__(self) -> None:
        if self.length_bits == -1:
            object.__setattr__(self, "length_bits", 8 * len(self.bits))
        if not self.origin:
            raise ValueError("key origin must be nonempty")
        if self.length_bits <= 0:
            raise ValueError("key length must be positive")
        if len(self.bits) != (self.length_bits + 7) // 8:
            raise ValueError(f"{len(self.bits)} bytes cannot hold exactly {self.length_bits} bits")
        if self.value >> self.length_bits:
            raise ValueError("bits set beyond length_bits")

    @classmethod
    def from_int(cls, value: int, length_bits: int, origin: str) -> KeyMaterial:
        return cls(value.to_bytes((length_bits + 7) // 8, "big"), origin, length_bits)

    @property
    def value(self) -> int:
        return int.from_bytes(self.bits, "big")

    def hex(self) -> str:
        return self.bits.hex()


def xor_combine(keys: Sequence[KeyMaterial]) -> KeyMaterial:
    """XOR equal-length keys; the origin lists every contributor."""
    if not keys:
        raise ValueError("xor_combine needs at least one key")
    length = keys[0].length_bits
    if any(k.length_bits != length for k in keys):
        raise ValueError(f"length mismatch: {[k.length_bits for k in keys]}")
    if len(keys) == 1:
        return keys[0]
    value = reduce(lambda acc, k: acc ^ k.value, keys, 0)
    origin = "xor(" + ",".join(sorted(k.origin for k in keys)) + ")"
    return KeyMaterial.from_int(value, length, origin)


# -- symbol packing -----------------------------------------------------------


def key_to_symbols(key: KeyMaterial, field: Field) -> list[int]:
    if isinstance(field, BinaryField):
        m = field.m
        if key.length_bits % m:
            raise ValueError(f"key length {key.length_bits} is not a multiple of {m} bits for {field!r}")
        mask = (1 << m) - 1
        count = key.length_bits // m
        v = key.value
        return [(v >> (m * (count - 1 - i))) & mask for i in range(count)]
    if key.length_bits % 8:
        raise ValueError(f"{field!r} shares byte-aligned keys only")
    symbols = list(key.bits)
    if any(s >= field.order for s in symbols):
        raise ValueError(f"every byte must be below {field.order} for {field!r}")
    return symbols


def symbols_to_key(symbols: Sequence[int], field: Field, origin: str) -> KeyMaterial:
    if isinstance(field, BinaryField):
        value = 0
        for s in symbols:
            value = (value << field.m) | s
        return KeyMaterial.from_int(value, field.m * len(symbols), origin)
    return KeyMaterial(bytes(symbols), origin)


# -- field-generic core -------------------------------------------------------


def eval_poly(coeffs: Sequence[int], x: int, field: Field) -> int:
    """Horner evaluation; ``coeffs[0]`` is the constant term."""
    acc = 0
    for c in reversed(coeffs):
        acc = field.add(field.mul(acc, x), c)
    return acc


def shares_from_coefficients(polys: Sequence[Sequence[int]], n: int, field: Field) -> list[list[int]]:
    """Evaluate one polynomial per secret symbol at x = 1..n.

    Returns ``n`` share vectors; share ``j`` (1-based) holds ``poly(j)`` for
    each polynomial.
    """
    return [[eval_poly(p, x, field) for p in polys] for x in range(1, n + 1)]


def split_symbols(
    symbols: Sequence[int], t: int, n: int, field: Field, randomness: int | KeyStream
) -> list[list[int]]:
    check_scheme(t, n, field)
    stream = as_stream(randomness, "shamir")
    polys = [[s] + [field.random_element(stream) for _ in range(t - 1)] for s in symbols]
    return shares_from_coefficients(polys, n, field)


def lagrange_weights_at_zero(xs: Sequence[int], field: Field) -> list[int]:
    weights = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i != j:
                num = field.mul(num, xj)
                den = field.mul(den, field.sub(xj, xi))
        weights.append(field.mul(num, field.inv(den)))
    return weights


def interpolate_at_zero(xs: Sequence[int], rows: Sequence[Sequence[int]], field: Field) -> list[int]:
    """Recover every constant term from share vectors ``rows`` taken at ``xs``."""
    weights = lagrange_weights_at_zero(xs, field)
    out = []
    for column in zip(*rows):
        acc = 0
        for w, y in zip(weights, column):
            acc = field.add(acc, field.mul(w, y))
        out.append(acc)
    return out


def check_scheme(t: int, n: int, field: Field) -> None:
    if not 1 <= t <= n <= field.order - 1:
        raise ValueError(f"need 1 <= t <= n <= {field.order - 1}, got t={t}, n={n}")


# -- byte-level API -----------------------------------------------------------


@dataclass(frozen=True)
class SecretShare:
    index: int
    payload: bytes
    t: int
    n: int
    field_tag: int = GF256.tag

    def __post_init__(self) -> None:
        field = field_from_tag(self.field_tag)
        check_scheme(self.t, self.n, field)
        if not 1 <= self.index <= self.n:
            raise ValueError(f"share index {self.index} outside 1..{self.n}")
        if any(b >= field.order for b in self.payload):
            raise ValueError(f"payload symbol outside {field!r}")

    @property
    def field(self) -> Field:
        return field_from_tag(self.field_tag)

    @property
    def scheme(self) -> tuple[int, int, int]:
        return (self.t, self.n, self.field_tag)


def share_secret(
    secret: KeyMaterial, t: int, n: int, randomness: int | KeyStream, field: Field = GF256
) -> list[SecretShare]:
    """Split ``secret`` into ``n`` shares, any ``t`` of which reconstruct it."""
    check_scheme(t, n, field)
    vectors = split_symbols(key_to_symbols(secret, field), t, n, field, randomness)
    return [SecretShare(j, bytes(v), t, n, field.tag) for j, v in enumerate(vectors, start=1)]


def reconstruct(shares: Iterable[SecretShare]) -> KeyMaterial:
    """Interpolate the secret from the first ``t`` of ``shares``."""
    shares = list(shares)
    if not shares:
        raise ValueError("no shares given")
    schemes = {s.scheme for s in shares}
    if len(schemes) > 1:
        raise ValueError(f"mixed scheme tags {sorted(schemes)}")
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate indices")
    t, n, tag = shares[0].scheme
    if len(shares) < t:
        raise ValueError(f"fewer than t shares: have {len(shares)}, need {t}")
    if len({len(s.payload) for s in shares}) > 1:
        raise ValueError("share payloads differ in length")
    used = shares[:t]
    field = field_from_tag(tag)
    symbols = interpolate_at_zero([s.index for s in used], [list(s.payload) for s in used], field)
    return symbols_to_key(symbols, field, f"shamir({t}-of-{n})")


def encode_share(share: SecretShare) -> bytes:
    """Wire form: version, t, n, index, field tag (one byte each), then payload."""
    return bytes([SHARE_WIRE_VERSION, share.t, share.n, share.index, share.field_tag]) + share.payload


def decode_share(data: bytes) -> SecretShare:
    if len(data) < SHARE_HEADER_BYTES:
        raise ValueError("share encoding shorter than its header")
    version, t, n, index, tag = data[:SHARE_HEADER_BYTES]
    if version != SHARE_WIRE_VERSION:
        raise ValueError(f"unsupported share wire version {version}")
    return SecretShare(index, bytes(data[SHARE_HEADER_BYTES:]), t, n, tag)

