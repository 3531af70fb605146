"""Three-party messaging-stage state machines and key grouping.

Roles: Alice signs; Bob and Charlie verify.  Alice shares one
error-corrected raw key with each receiver, shuffles both with
published permutations, and cuts them into n-bit strings.  One
signing act consumes, per receiver, three strings (X, Y, Z) under
LFSR-based Toeplitz hashing or two (X, Y) under generalized division
hashing; Alice's own strings are the XOR of the receivers'.

The flow for one act:

  1. Alice -> Bob:      {Sig, p, M}
  2. Bob -> Charlie:    {Sig, p, M} plus Bob's key strings
  3. Charlie -> Bob:    Charlie's key strings
  4. Bob verifies and announces; only if Bob accepted does Charlie
     verify with his own plus Bob's strings.

Every transmission goes through a transport object so tests can
inject faults leg by leg; the transcript records each transmitted
byte for audit.  Key strings are strictly one-time: consuming a
group twice raises.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass, field

import numpy as np

from . import gf2, gf256
from .axu import (
    GdhKey,
    LfsrToeplitzKey,
    decode_gf2_poly,
    decode_gf256_poly,
    encode_gf2_poly,
    encode_gf256_poly,
    gdh_hash,
    lfsr_toeplitz_hash,
)
from .bitstring import BitString
from .bounds import GDH, LFSR

__all__ = [
    "ALICE",
    "BOB",
    "CHARLIE",
    "strings_per_act",
    "string_labels",
    "OneTimeViolation",
    "PacketFormatError",
    "TransportError",
    "KeyExhaustedError",
    "RawKeyPair",
    "KeyGroups",
    "GroupedKeys",
    "group_keys",
    "SignaturePacket",
    "alice_sign",
    "receiver_verify",
    "VerdictTranscript",
    "InProcTransport",
    "SocketTransport",
    "run_protocol",
    "run_otuh_baseline",
    "single_bit_encode_length",
    "SingleBitEncoding",
]

ALICE, BOB, CHARLIE = "alice", "bob", "charlie"

_SCHEME_CODE = {LFSR: 0, GDH: 1}
_CODE_SCHEME = {v: k for k, v in _SCHEME_CODE.items()}
HEADER_LEN = 13  # scheme byte, n as u32, message bit length as u64


class OneTimeViolation(RuntimeError):
    """A key group was used a second time."""


class PacketFormatError(ValueError):
    """Malformed packet or key payload; verifiers treat this as a reject."""


class TransportError(RuntimeError):
    """The classical channel failed outright (robustness pathway)."""


class KeyExhaustedError(RuntimeError):
    """Not enough raw key material for even one signing act."""


def strings_per_act(scheme: str) -> int:
    if scheme == LFSR:
        return 3
    if scheme == GDH:
        return 2
    raise ValueError(f"unknown scheme {scheme!r}")


def string_labels(scheme: str) -> tuple[str, ...]:
    return ("X", "Y", "Z")[: strings_per_act(scheme)]


# ---------------------------------------------------------------------------
# key material

@dataclass(frozen=True)
class RawKeyPair:
    """One error-corrected raw key shared by Alice and a receiver.

    After reconciliation both sides hold identical bits, so a single
    BitString represents the pair; the containing KgpEstimates sidecar
    carries the leakage accounting.
    """

    bits: BitString

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class KeyGroups:
    """One party's string tuple for a single signing act."""

    scheme: str
    n: int
    role: str
    strings: dict[str, BitString]
    act_index: int = 0
    consumed: bool = False

    def __post_init__(self):
        want = string_labels(self.scheme)
        if tuple(self.strings) != want:
            raise ValueError(f"expected strings {want}")
        for lbl in want:
            if len(self.strings[lbl]) != self.n:
                raise ValueError("all strings must be n bits")

    def consume(self):
        if self.consumed:
            raise OneTimeViolation(
                f"{self.role} act {self.act_index} already consumed"
            )
        self.consumed = True

    def to_payload(self) -> bytes:
        return b"".join(self.strings[lbl].to_bytes() for lbl in string_labels(self.scheme))

    @classmethod
    def from_payload(cls, payload: bytes, scheme: str, n: int, role: str,
                     act_index: int = 0) -> "KeyGroups":
        nb = (n + 7) // 8
        labels = string_labels(scheme)
        if len(payload) != nb * len(labels):
            raise PacketFormatError("key payload has the wrong length")
        strings = {}
        for k, lbl in enumerate(labels):
            strings[lbl] = BitString.from_bytes(payload[k * nb : (k + 1) * nb], n)
        return cls(scheme, n, role, strings, act_index)


@dataclass
class GroupedKeys:
    scheme: str
    n: int
    alice: list[KeyGroups]
    bob: list[KeyGroups]
    charlie: list[KeyGroups]
    perm_seed_bob: int
    perm_seed_charlie: int

    @property
    def acts(self) -> int:
        return len(self.alice)


def _permute_bits(bits: BitString, seed: int) -> BitString:
    arr = bits.to_array()
    perm = np.random.default_rng(seed).permutation(len(arr))
    return BitString.from_array(arr[perm])


def group_keys(
    raw_bob: RawKeyPair,
    raw_charlie: RawKeyPair,
    n: int,
    scheme: str,
    rng: np.random.Generator,
) -> GroupedKeys:
    """Shuffle both raw keys and cut them into per-act string tuples.

    The permutation seeds are drawn from rng and would be published by
    Alice; grouping is therefore a random sampling of the raw key.  One
    act consumes strings_per_act(scheme) * n bits from each raw key.
    Raises KeyExhaustedError when not even one act fits.
    """
    per_act = strings_per_act(scheme) * n
    acts = min(len(raw_bob), len(raw_charlie)) // per_act
    if acts < 1:
        raise KeyExhaustedError(
            f"need {per_act} bits per act, have {min(len(raw_bob), len(raw_charlie))}"
        )
    seed_b = int(rng.integers(0, 2**63))
    seed_c = int(rng.integers(0, 2**63))
    shuffled_b = _permute_bits(raw_bob.bits, seed_b)
    shuffled_c = _permute_bits(raw_charlie.bits, seed_c)
    labels = string_labels(scheme)

    def cut(bits: BitString, act: int, k: int) -> BitString:
        off = act * per_act + k * n
        return BitString((bits.value >> off) & ((1 << n) - 1), n)

    alice, bob, charlie = [], [], []
    for a in range(acts):
        sb = {lbl: cut(shuffled_b, a, k) for k, lbl in enumerate(labels)}
        sc = {lbl: cut(shuffled_c, a, k) for k, lbl in enumerate(labels)}
        sa = {lbl: sb[lbl] ^ sc[lbl] for lbl in labels}
        bob.append(KeyGroups(scheme, n, BOB, sb, a))
        charlie.append(KeyGroups(scheme, n, CHARLIE, sc, a))
        alice.append(KeyGroups(scheme, n, ALICE, sa, a))
    return GroupedKeys(scheme, n, alice, bob, charlie, seed_b, seed_c)


# ---------------------------------------------------------------------------
# packets

@dataclass(frozen=True)
class SignaturePacket:
    scheme: str
    n: int
    message: BitString  # original message, unpadded
    sig: BitString      # encrypted digest, n bits
    p: BitString        # encrypted polynomial coefficients, n bits

    def header_bytes(self) -> bytes:
        return struct.pack(
            ">BIQ", _SCHEME_CODE[self.scheme], self.n, len(self.message)
        )

    def hash_input(self) -> BitString:
        """Header-then-message bit stream; signing covers both."""
        return BitString.from_bytes(self.header_bytes(), 8 * HEADER_LEN).concat(
            self.message
        )

    def to_bytes(self) -> bytes:
        return (
            self.header_bytes()
            + self.sig.to_bytes()
            + self.p.to_bytes()
            + self.message.to_bytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignaturePacket":
        if len(data) < HEADER_LEN:
            raise PacketFormatError("truncated header")
        code, n, bitlen = struct.unpack(">BIQ", data[:HEADER_LEN])
        if code not in _CODE_SCHEME:
            raise PacketFormatError(f"unknown scheme code {code}")
        scheme = _CODE_SCHEME[code]
        if scheme == GDH and n % 8:
            raise PacketFormatError("GDH group size must be a multiple of 8")
        nb = (n + 7) // 8
        mb = (bitlen + 7) // 8
        if len(data) != HEADER_LEN + 2 * nb + mb:
            raise PacketFormatError("packet length inconsistent with header")
        off = HEADER_LEN
        sig = BitString.from_bytes(data[off : off + nb], n)
        off += nb
        p = BitString.from_bytes(data[off : off + nb], n)
        off += nb
        msg = BitString.from_bytes(data[off:], bitlen)
        return cls(scheme, n, msg, sig, p)


def _digest(scheme: str, n: int, poly, seed: BitString | None, data: BitString) -> BitString:
    if scheme == LFSR:
        return lfsr_toeplitz_hash(LfsrToeplitzKey(poly, seed), data)
    return gdh_hash(GdhKey(poly), data)


def alice_sign(
    message: BitString,
    groups: KeyGroups,
    rng: np.random.Generator,
) -> SignaturePacket:
    """Produce {Sig, p, M} from Alice's strings for one act.

    LFSR: digest = h_{Y,p}(header || M), Sig = digest xor Z, p-field =
    coefficients(p) xor X.  GDH: digest = h_P(header || M), Sig =
    digest xor Y, p-field = coefficients(P) xor X.  The act is marked
    consumed before any output leaves.
    """
    if groups.role != ALICE:
        raise ValueError("signing requires Alice's strings")
    groups.consume()
    scheme, n = groups.scheme, groups.n
    pkt = SignaturePacket(
        scheme, n, message, BitString.zeros(n), BitString.zeros(n)
    )
    data = pkt.hash_input()
    if scheme == LFSR:
        poly = gf2.random_irreducible(n, rng)
        dig = _digest(scheme, n, poly, groups.strings["Y"], data)
        sig = dig ^ groups.strings["Z"]
        pf = encode_gf2_poly(poly, n) ^ groups.strings["X"]
    else:
        poly = gf256.random_irreducible(n // 8, rng)
        dig = _digest(scheme, n, poly, None, data)
        sig = dig ^ groups.strings["Y"]
        pf = encode_gf256_poly(poly, n) ^ groups.strings["X"]
    return SignaturePacket(scheme, n, message, sig, pf)


def receiver_verify(
    packet: SignaturePacket,
    own: KeyGroups,
    received: KeyGroups,
) -> tuple[bool, str]:
    """One receiver's check; deterministic and role-symmetric.

    Combines own and forwarded strings into Alice's, decrypts the
    polynomial and the expected digest, rejects outright if the decoded
    polynomial is not monic irreducible of the right degree, then
    recomputes the digest over header || M.  Returns (verdict, reason).
    """
    if own.role == ALICE or received.role == ALICE or own.role == received.role:
        raise ValueError("verification needs the two distinct receivers' strings")
    scheme, n = packet.scheme, packet.n
    if own.scheme != scheme or own.n != n or received.scheme != scheme or received.n != n:
        return False, "format: key/packet scheme mismatch"
    if len(packet.sig) != n or len(packet.p) != n:
        return False, "format: field lengths"
    combined = {
        lbl: own.strings[lbl] ^ received.strings[lbl]
        for lbl in string_labels(scheme)
    }
    p_clear = packet.p ^ combined["X"]
    if scheme == LFSR:
        poly = decode_gf2_poly(p_clear)
        if not gf2.is_irreducible(poly):
            return False, "polynomial: not irreducible"
        expected = packet.sig ^ combined["Z"]
        actual = _digest(scheme, n, poly, combined["Y"], packet.hash_input())
    else:
        poly = decode_gf256_poly(p_clear)
        if not gf256.is_irreducible_poly(poly):
            return False, "polynomial: not irreducible"
        expected = packet.sig ^ combined["Y"]
        actual = _digest(scheme, n, poly, None, packet.hash_input())
    if actual == expected:
        return True, "ok"
    return False, "digest mismatch"


# ---------------------------------------------------------------------------
# transports

@dataclass(frozen=True)
class TransportEvent:
    leg: int
    src: str
    dst: str
    kind: str
    payload: bytes


class InProcTransport:
    """Deterministic in-process channel with optional fault injection.

    faults maps a leg index to a list of (byte_offset, xor_mask) pairs
    applied to the payload; fail_legs lists legs that raise outright.
    Legs are numbered in protocol order: 0 packet A->B, 1 packet B->C,
    2 keys B->C, 3 keys C->B, 4 verdict B->C.
    """

    def __init__(self, faults=None, fail_legs=()):
        self.faults = dict(faults or {})
        self.fail_legs = set(fail_legs)
        self.events: list[TransportEvent] = []

    def convey(self, leg: int, src: str, dst: str, kind: str, payload: bytes) -> bytes:
        if leg in self.fail_legs:
            raise TransportError(f"leg {leg} ({kind}) failed")
        out = bytearray(payload)
        for off, mask in self.faults.get(leg, ()):
            if 0 <= off < len(out):
                out[off] ^= mask
        out = bytes(out)
        self.events.append(TransportEvent(leg, src, dst, kind, out))
        return out


class SocketTransport:
    """Length-prefixed byte stream over a connected socket pair.

    Every leg is physically serialized through the sockets so the
    networked demo exercises real framing; both endpoints live in this
    process.  Safe for the two-endpoint use of run_protocol.
    """

    def __init__(self):
        self._a, self._b = socket.socketpair()
        self.events: list[TransportEvent] = []

    def close(self):
        self._a.close()
        self._b.close()

    def _send(self, sock, payload: bytes):
        sock.sendall(struct.pack(">I", len(payload)) + payload)

    def _recv(self, sock) -> bytes:
        hdr = self._recv_exact(sock, 4)
        (ln,) = struct.unpack(">I", hdr)
        return self._recv_exact(sock, ln)

    def _recv_exact(self, sock, ln: int) -> bytes:
        buf = b""
        while len(buf) < ln:
            chunk = sock.recv(ln - len(buf))
            if not chunk:
                raise TransportError("connection closed mid-frame")
            buf += chunk
        return buf

    def convey(self, leg: int, src: str, dst: str, kind: str, payload: bytes) -> bytes:
        try:
            self._send(self._a, payload)
            out = self._recv(self._b)
        except OSError as e:  # pragma: no cover
            raise TransportError(str(e)) from e
        self.events.append(TransportEvent(leg, src, dst, kind, out))
        return out


# ---------------------------------------------------------------------------
# protocol driver

@dataclass
class VerdictTranscript:
    bob_accepts: bool | None = None
    charlie_accepts: bool | None = None
    bob_reason: str = ""
    charlie_reason: str = ""
    failure: str | None = None
    events: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return bool(self.bob_accepts) and bool(self.charlie_accepts)


def run_protocol(
    message: BitString,
    alice: KeyGroups,
    bob: KeyGroups,
    charlie: KeyGroups,
    rng: np.random.Generator,
    transport=None,
    packet: SignaturePacket | None = None,
) -> VerdictTranscript:
    """Drive one signing act end to end and record the transcript.

    A pre-built packet (e.g. a forgery) can be supplied; otherwise
    Alice signs the message with her strings.  Charlie only verifies
    after Bob announces acceptance.  Transport failures abort with the
    robustness tag; a Bob-accept/Charlie-reject split is tagged as the
    repudiation-relevant divergence.
    """
    tr = transport if transport is not None else InProcTransport()
    out = VerdictTranscript()
    try:
        if packet is None:
            packet = alice_sign(message, alice, rng)
        raw = tr.convey(0, ALICE, BOB, "packet", packet.to_bytes())
        bob.consume()
        charlie.consume()
        raw_c = tr.convey(1, BOB, CHARLIE, "packet", raw)
        keys_b = tr.convey(2, BOB, CHARLIE, "keys-bob", bob.to_payload())
        keys_c = tr.convey(3, CHARLIE, BOB, "keys-charlie", charlie.to_payload())

        try:
            pkt_b = SignaturePacket.from_bytes(raw)
            recv_c_at_b = KeyGroups.from_payload(
                keys_c, bob.scheme, bob.n, CHARLIE, charlie.act_index
            )
            ok_b, why_b = receiver_verify(pkt_b, bob, recv_c_at_b)
        except PacketFormatError as e:
            ok_b, why_b = False, f"format: {e}"
        out.bob_accepts, out.bob_reason = ok_b, why_b
        tr.convey(4, BOB, CHARLIE, "verdict", b"\x01" if ok_b else b"\x00")
        if not ok_b:
            out.failure = "bob-rejected"
            return out

        try:
            pkt_c = SignaturePacket.from_bytes(raw_c)
            recv_b_at_c = KeyGroups.from_payload(
                keys_b, charlie.scheme, charlie.n, BOB, bob.act_index
            )
            ok_c, why_c = receiver_verify(pkt_c, charlie, recv_b_at_c)
        except PacketFormatError as e:
            ok_c, why_c = False, f"format: {e}"
        out.charlie_accepts, out.charlie_reason = ok_c, why_c
        if ok_b and not ok_c:
            out.failure = "verdict-divergence (key-exchange error pathway)"
    except TransportError as e:
        out.failure = f"robustness-transport: {e}"
    finally:
        out.events = list(getattr(tr, "events", []))
    return out


# ---------------------------------------------------------------------------
# perfect-key baseline (hash value and polynomial packed into one digest)

def run_otuh_baseline(message: BitString, n: int, rng: np.random.Generator):
    """One act of the perfect-key variant, for rate/behaviour comparison.

    Keys are uniformly random (simulating fully distilled secrets): X of
    n bits seeds the register, Y of 2n bits one-time-pads the digest
    (hash || polynomial).  Consumes 3n bits per receiver per act.
    Returns (bob_ok, charlie_ok).
    """
    xb, xc = BitString.random(rng, n), BitString.random(rng, n)
    yb, yc = BitString.random(rng, 2 * n), BitString.random(rng, 2 * n)
    xa, ya = xb ^ xc, yb ^ yc
    poly = gf2.random_irreducible(n, rng)
    hashv = lfsr_toeplitz_hash(LfsrToeplitzKey(poly, xa), message)
    dig = hashv.concat(encode_gf2_poly(poly, n))
    sig = dig ^ ya

    def verify(kx: BitString, ky: BitString) -> bool:
        exp = sig ^ ky
        hash_part = BitString(exp.value & ((1 << n) - 1), n)
        p_part = BitString(exp.value >> n, n)
        cand = decode_gf2_poly(p_part)
        redone = lfsr_toeplitz_hash(LfsrToeplitzKey(cand, kx), message)
        return redone == hash_part

    kx, ky = xb ^ xc, yb ^ yc
    return verify(kx, ky), verify(kx, ky)


# ---------------------------------------------------------------------------
# single-bit comparison-baseline length calculator

@dataclass(frozen=True)
class SingleBitEncoding:
    msg_bits: int
    x_opt: int
    h: int
    efficiency: float


def single_bit_encode_length(msg_bits: int) -> SingleBitEncoding:
    """Shortest protected encoding of an m-bit message for bitwise signing.

    The encoder pads a guard zero at head and tail, inserts a zero
    every x bits and wraps the result in x+1 leading and trailing ones,
    giving h = m + floor(m/x) + 2x + 4 total signed bits; x is chosen
    by scan to minimize h.  The efficiency m/h is always below 1.
    """
    if msg_bits < 1:
        raise ValueError("message must have at least one bit")
    n = msg_bits
    best_x, best_h = 1, n + n + 2 + 4
    cap = min(n, 4 * int(n**0.5) + 8)
    for x in range(1, cap + 1):
        h = n + n // x + 2 * x + 4
        if h < best_h:
            best_h, best_x = h, x
    return SingleBitEncoding(n, best_x, best_h, n / best_h)
