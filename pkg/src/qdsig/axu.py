"""The two keyed almost-XOR-universal hash families of the messaging stage.

Both families map an m-bit message to an n-bit digest and are linear
over GF(2), so the collision behaviour is controlled entirely by the
kernel of the keyed map:

* LFSR-based Toeplitz hashing: the digest is H * M where the columns of
  H are successive states of the shift register defined by a monic
  irreducible p(x) of degree n, seeded with the n-bit key string s.
  Equivalently the digest is (M(x) mod p(x)) evaluated on the register,
  which is how it is computed here: the message is folded byte-by-byte
  through a reduction table (O(n) memory, O(m*n/word) time) and the
  surviving n coefficients select register states.  The m x n matrix is
  never materialized.

* Generalized division hashing: the message bytes are the coefficients
  of M(x) over GF(2^8) and the digest encodes M(x) * x^d mod P(x) for a
  monic irreducible P of degree d = n/8.

Messages whose length is not a multiple of 8 are zero-padded at the top
for the GDH family; the protocol layer signs the true bit length inside
the packet header, so padding is not malleable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2, gf256
from .bitstring import BitString

__all__ = [
    "LfsrToeplitzKey",
    "GdhKey",
    "lfsr_toeplitz_hash",
    "lfsr_toeplitz_hash_bitwise",
    "toeplitz_matrix_explicit",
    "gdh_hash",
    "encode_gf2_poly",
    "decode_gf2_poly",
    "encode_gf256_poly",
    "decode_gf256_poly",
]

_MATRIX_BIT_LIMIT = 1 << 26


@dataclass(frozen=True)
class LfsrToeplitzKey:
    """Key for LFSR-based Toeplitz hashing: irreducible p and seed s."""

    p: int  # packed GF(2) polynomial, monic irreducible, degree n
    s: BitString  # initial register contents, length n
    _reducer: gf2.ModReducer = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = gf2.degree(self.p)
        if n < 1:
            raise ValueError("polynomial must have degree >= 1")
        if len(self.s) != n:
            raise ValueError("seed length must equal the polynomial degree")
        object.__setattr__(self, "_reducer", gf2.ModReducer(self.p))

    @property
    def n(self) -> int:
        return gf2.degree(self.p)

    @property
    def taps(self) -> int:
        return self.p & ((1 << self.n) - 1)

    def validate_irreducible(self) -> bool:
        return gf2.is_irreducible(self.p)


def _lfsr_step(state: int, taps: int, n: int) -> int:
    # drop the oldest bit, feed the tap parity in at the top
    return (state >> 1) | (((taps & state).bit_count() & 1) << (n - 1))


def lfsr_toeplitz_hash(key: LfsrToeplitzKey, message: BitString) -> BitString:
    """Streaming digest equal to the explicit Toeplitz product.

    Reduces the message polynomial modulo p first (byte-streamed), then
    combines at most n register states, so long messages never touch
    more than O(n) state.
    """
    if len(message) == 0:
        raise ValueError("empty message")
    n = key.n
    r = key._reducer.reduce(message.value)
    h = 0
    state = key.s.value
    taps = key.taps
    while r:
        if r & 1:
            h ^= state
        r >>= 1
        state = _lfsr_step(state, taps, n)
    return BitString(h, n)


def lfsr_toeplitz_hash_bitwise(key: LfsrToeplitzKey, message: BitString) -> BitString:
    """Literal evaluation, accumulating from the top message bit down.

    Kept as an independently-coded path for cross-checking the reduction
    shortcut; O(m) register steps.
    """
    if len(message) == 0:
        raise ValueError("empty message")
    n = key.n
    taps = key.taps
    s = key.s.value
    acc = 0
    v = message.value
    for i in range(len(message) - 1, -1, -1):
        acc = _lfsr_step(acc, taps, n)
        if (v >> i) & 1:
            acc ^= s
    return BitString(acc, n)


def toeplitz_matrix_explicit(key: LfsrToeplitzKey, m: int) -> np.ndarray:
    """The n x m matrix whose column j is the register after j steps.

    Row 0 is the newest register bit (the top of the column vector);
    digest bit k corresponds to row n-1-k.  Only for small n*m.
    """
    if m < 1:
        raise ValueError("need at least one column")
    n = key.n
    if n * m > _MATRIX_BIT_LIMIT:
        raise MemoryError("requested Toeplitz matrix exceeds the size cap")
    out = np.zeros((n, m), dtype=np.uint8)
    state = key.s.value
    taps = key.taps
    for j in range(m):
        col = state
        for r in range(n - 1, -1, -1):
            out[n - 1 - r, j] = (col >> r) & 1
        state = _lfsr_step(state, taps, n)
    return out


def digest_from_vector(vec: np.ndarray) -> BitString:
    """Fold an explicit digest column (row 0 = top) back into a BitString."""
    n = len(vec)
    value = 0
    for r in range(n):
        if vec[r]:
            value |= 1 << (n - 1 - r)
    return BitString(value, n)


# ---------------------------------------------------------------------------
# generalized division hashing

@dataclass(frozen=True)
class GdhKey:
    """Key for generalized division hashing: monic irreducible P over GF(2^8)."""

    P: bytes  # coefficient bytes, low power first, monic
    _fold: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = gf256.pdeg(self.P)
        if d < 1:
            raise ValueError("polynomial must have degree >= 1")
        if self.P[-1] != 1:
            raise ValueError("polynomial must be monic")
        low = np.frombuffer(self.P[:-1], dtype=np.uint8)
        rows = []
        for c in range(256):
            rows.append(int.from_bytes(gf256.MUL_TABLE[c][low].tobytes(), "little"))
        object.__setattr__(self, "_fold", tuple(rows))

    @property
    def d(self) -> int:
        return gf256.pdeg(self.P)

    @property
    def n(self) -> int:
        return 8 * self.d

    def validate_irreducible(self) -> bool:
        return gf256.is_irreducible_poly(self.P)


def gdh_hash(key: GdhKey, message: BitString) -> BitString:
    """Digest bits of M(x) * x^d mod P(x), coefficients = message bytes."""
    if len(message) == 0:
        raise ValueError("empty message")
    d = key.d
    fold = key._fold
    mask = (1 << (8 * d)) - 1
    shift = 8 * (d - 1)
    acc = 0
    for c in reversed(message.to_bytes()):
        top = acc >> shift
        acc = ((acc << 8) & mask) | c
        if top:
            acc ^= fold[top]
    for _ in range(d):
        top = acc >> shift
        acc = (acc << 8) & mask
        if top:
            acc ^= fold[top]
    return BitString(acc, 8 * d)


# ---------------------------------------------------------------------------
# coefficient-string codecs (monic leading coefficient implicit)

def encode_gf2_poly(p: int, n: int) -> BitString:
    """Low n coefficients of a monic degree-n polynomial as an n-bit string."""
    if gf2.degree(p) != n:
        raise ValueError("polynomial degree does not match n")
    return BitString(p & ((1 << n) - 1), n)


def decode_gf2_poly(bits: BitString) -> int:
    """Inverse of encode_gf2_poly; the all-zero string decodes to x^n."""
    return bits.value | (1 << len(bits))


def encode_gf256_poly(P: bytes, n: int) -> BitString:
    """Coefficients 0..d-1 of a monic degree-d polynomial, 8 bits each."""
    d = gf256.pdeg(P)
    if 8 * d != n:
        raise ValueError("polynomial degree does not match n/8")
    if P[-1] != 1:
        raise ValueError("polynomial must be monic")
    return BitString.from_bytes(P[:-1], n)


def decode_gf256_poly(bits: BitString) -> bytes:
    if len(bits) % 8:
        raise ValueError("length must be a multiple of 8")
    return bits.to_bytes() + b"\x01"
