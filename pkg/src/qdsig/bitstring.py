"""Fixed-length bit strings backed by integers.

Bit i of the integer value is bit i of the string; serialization to
bytes is little-endian (byte 0 carries bits 0..7).  XOR is defined
between equal-length strings only.  Instances are immutable and safe
to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BitString"]


@dataclass(frozen=True, slots=True)
class BitString:
    value: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative length")
        if self.value < 0 or self.value >> self.n:
            raise ValueError("value does not fit in the stated length")

    def __len__(self) -> int:
        return self.n

    def __xor__(self, other: "BitString") -> "BitString":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} != {other.n}")
        return BitString(self.value ^ other.value, self.n)

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError("bit index out of range")
        return (self.value >> i) & 1

    def is_zero(self) -> bool:
        return self.value == 0

    def popcount(self) -> int:
        return self.value.bit_count()

    def flip(self, i: int) -> "BitString":
        if not 0 <= i < self.n:
            raise IndexError("bit index out of range")
        return BitString(self.value ^ (1 << i), self.n)

    def concat(self, other: "BitString") -> "BitString":
        return BitString(self.value | (other.value << self.n), self.n + other.n)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.n + 7) // 8, "little")

    def hex(self) -> str:
        return self.to_bytes().hex()

    def to_array(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.uint8)
        raw = np.frombuffer(self.to_bytes(), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n]

    @classmethod
    def from_bytes(cls, data: bytes, n: int | None = None) -> "BitString":
        if n is None:
            n = 8 * len(data)
        value = int.from_bytes(data, "little") & ((1 << n) - 1) if n else 0
        return cls(value, n)

    @classmethod
    def from_hex(cls, s: str, n: int) -> "BitString":
        return cls.from_bytes(bytes.fromhex(s), n)

    @classmethod
    def from_array(cls, arr) -> "BitString":
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.size == 0:
            return cls(0, 0)
        data = np.packbits(arr, bitorder="little").tobytes()
        return cls.from_bytes(data, arr.size)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(0, n)

    @classmethod
    def random(cls, rng: np.random.Generator, n: int) -> "BitString":
        if n == 0:
            return cls(0, 0)
        value = int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)
        return cls(value, n)
