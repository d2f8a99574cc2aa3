"""Rivest's 1-out-of-2 oblivious transfer with a trusted initialiser.

Three parties: Alice holds ``m0, m1``; Bob wants ``m_c`` without revealing
``c``; the initialiser T hands out correlated keys and leaves.

1. T -> Alice: ``r0, r1``;   T -> Bob: ``d, r_d``
2. Bob -> Alice: ``e = c xor d``
3. Alice -> Bob: ``f0 = m0 xor r_e``, ``f1 = m1 xor r_{1-e}``

Bob recovers ``m_c = f_c xor r_d``.
"""

from __future__ import annotations

import random
from typing import NamedTuple

from .errors import ParameterError


class BitString(NamedTuple):
    """Fixed-length bit string; bit 0 is the leftmost character of ``str()``."""

    value: int
    length: int

    @classmethod
    def parse(cls, text: str) -> "BitString":
        if not text or set(text) - {"0", "1"}:
            raise ParameterError(f"not a bit string: {text!r}")
        return cls(int(text, 2), len(text))

    @classmethod
    def of(cls, value: "BitString | str | int", length: int = 1) -> "BitString":
        if isinstance(value, BitString):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        if not 0 <= value < (1 << length):
            raise ParameterError(f"{value} does not fit in {length} bits")
        return cls(int(value), length)

    def __xor__(self, other: "BitString") -> "BitString":  # type: ignore[override]
        if self.length != other.length:
            raise ParameterError(f"length mismatch: {self.length} vs {other.length}")
        return BitString(self.value ^ other.value, self.length)

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in str(self))


class OtInitPackage(NamedTuple):
    r0: BitString
    r1: BitString
    d: int

    @property
    def alice_share(self) -> tuple[BitString, BitString]:
        return (self.r0, self.r1)

    @property
    def bob_share(self) -> tuple[int, BitString]:
        return (self.d, self.r1 if self.d else self.r0)

    @property
    def k(self) -> int:
        return self.r0.length


class OtTranscript(NamedTuple):
    e: int
    f0: BitString
    f1: BitString
    delivered: BitString


def ot_init(
    k: int = 1,
    *,
    r0: BitString | str | int | None = None,
    r1: BitString | str | int | None = None,
    d: int | None = None,
    rng: random.Random | int | None = None,
) -> OtInitPackage:
    """Trusted-initialiser step.  Explicit values win; missing ones come from ``rng``."""
    if k < 1:
        raise ParameterError("OT strings need length k >= 1")
    if rng is None or isinstance(rng, int):
        rng = random.Random(rng)
    r0 = BitString.of(r0, k) if r0 is not None else BitString(rng.getrandbits(k), k)
    r1 = BitString.of(r1, k) if r1 is not None else BitString(rng.getrandbits(k), k)
    if d is None:
        d = rng.getrandbits(1)
    if r0.length != k or r1.length != k:
        raise ParameterError(f"keys must have length {k}")
    if d not in (0, 1):
        raise ParameterError(f"d must be a bit, got {d!r}")
    return OtInitPackage(r0, r1, int(d))


def ot_execute(m0: BitString, m1: BitString, c: int, pkg: OtInitPackage) -> OtTranscript:
    k = pkg.r0.length
    if m0.length != k or m1.length != k:
        raise ParameterError(f"length mismatch: m0={m0.length}, m1={m1.length}, keys={k}")
    if c not in (0, 1):
        raise ParameterError(f"choice must be a bit, got {c!r}")
    d = pkg.d
    e = c ^ d
    r = (pkg.r0.value, pkg.r1.value)
    f0 = m0.value ^ r[e]
    f1 = m1.value ^ r[1 - e]
    delivered = (f1 if c else f0) ^ r[d]
    return OtTranscript(e, BitString(f0, k), BitString(f1, k), BitString(delivered, k))


def sender_view(pkg: OtInitPackage, tr: OtTranscript) -> tuple:
    """What Alice sees besides her own messages."""
    return (pkg.r0, pkg.r1, tr.e)


def receiver_view(pkg: OtInitPackage, tr: OtTranscript) -> tuple:
    """What Bob sees besides his choice bit."""
    return (pkg.d, pkg.bob_share[1], tr.f0, tr.f1)
