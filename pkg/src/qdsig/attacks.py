"""Forgery attacks against the messaging stage, and their Monte-Carlo driver.

The implemented attacker is the optimal key-guessing one: draw up to
floor(m/n) distinct candidate irreducibles, multiply them into a
perturbation polynomial whose bits are XORed onto the message, and
keep Sig and the encrypted-polynomial field untouched.  The forgery
verifies iff the signer's polynomial divides the perturbation (or, for
the register-based family, iff the seed string happened to be zero,
which collapses every digest to zero).

Because the success event reduces exactly to "the signer's polynomial
is among the attacker's g distinct uniform draws", the bulk of the
Monte-Carlo samples that event directly; a configurable slice of the
trials additionally materializes the full packet, runs the real
verifier, and cross-checks the reduction trial by trial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2, gf256
from .axu import decode_gf2_poly, decode_gf256_poly
from .bitstring import BitString
from .bounds import GDH, LFSR, epsilon_forgery
from .protocol import (
    BOB,
    CHARLIE,
    HEADER_LEN,
    KeyGroups,
    RawKeyPair,
    SignaturePacket,
    alice_sign,
    group_keys,
    receiver_verify,
    string_labels,
    strings_per_act,
)

__all__ = [
    "forge_attack_guess_key",
    "forgery_monte_carlo",
    "MonteCarloResult",
    "irreducible_population",
]


def irreducible_population(scheme: str, n: int):
    """The candidate pool the attacker samples from.

    LFSR: all monic irreducibles of degree n (enumerable for n <= 20).
    GDH: all monic irreducibles of degree n/8 over GF(2^8) (n/8 <= 2).
    """
    if scheme == LFSR:
        return gf2.all_irreducibles(n)
    d = n // 8
    if n % 8:
        raise ValueError("GDH group size must be a multiple of 8")
    if d == 1:
        return [bytes([c, 1]) for c in range(256)]
    if d == 2:
        return _gdh_quadratics()
    raise ValueError("population enumeration supported for n/8 <= 2")


_quadratic_cache: list[bytes] | None = None


def _gdh_quadratics() -> list[bytes]:
    # sieve: x^2 + bx + c splits iff c = r*s, b = r+s for some roots r, s
    global _quadratic_cache
    if _quadratic_cache is None:
        reducible = np.zeros((256, 256), dtype=bool)
        rs = np.arange(256)
        for r in range(256):
            b = rs ^ r
            c = gf256.MUL_TABLE[r][rs]
            reducible[b, c] = True
        pairs = np.argwhere(~reducible)
        _quadratic_cache = [bytes([int(c), int(b), 1]) for b, c in pairs]
        assert len(_quadratic_cache) == (256 * 256 - 256) // 2
    return _quadratic_cache


def _perturbation_bits_gf2(guesses, msg_bits: int) -> int:
    prod = 1
    for p in guesses:
        prod = gf2.mul(prod, p)
    deg = gf2.degree(prod)
    if deg > msg_bits - 1:
        raise ValueError("perturbation does not fit in the message")
    return prod << (msg_bits - 1 - deg)  # filler power of x


def _perturbation_bits_gdh(guesses, msg_bits: int) -> int:
    prod = bytes([1])
    for p in guesses:
        prod = gf256.pmul(prod, p)
    nbytes = msg_bits // 8
    deg = gf256.pdeg(prod)
    if deg > nbytes - 1:
        raise ValueError("perturbation does not fit in the message")
    out = bytearray(nbytes)
    k = nbytes - 1 - deg  # filler x^k keeps every guess a divisor
    out[k : k + len(prod)] = prod
    return int.from_bytes(bytes(out), "little")


def _budget_cap(scheme: str, n: int, m_bits: int) -> int:
    # coefficient slots available in the message field, minus the top one
    if scheme == LFSR:
        return max(1, (m_bits - 1) // n)
    return max(1, (m_bits // 8 - 1) // (n // 8))


def forge_attack_guess_key(
    packet: SignaturePacket,
    rng: np.random.Generator,
    budget: int | None = None,
    guesses=None,
    known_x: BitString | None = None,
) -> SignaturePacket:
    """Emit a tampered packet carrying M xor bits(product of guesses).

    guesses overrides the random draw (used by the cross-checking
    harness); known_x simulates an attacker holding the true X string,
    who decrypts the signer's polynomial and succeeds with certainty.
    """
    scheme, n, m = packet.scheme, packet.n, len(packet.message)
    if known_x is not None:
        if scheme == LFSR:
            guesses = [decode_gf2_poly(packet.p ^ known_x)]
        else:
            guesses = [decode_gf256_poly(packet.p ^ known_x)]
    if guesses is None:
        pool = irreducible_population(scheme, n)
        cap = _budget_cap(scheme, n, m)
        g = min(budget if budget is not None else cap, cap, len(pool))
        idx = rng.choice(len(pool), size=g, replace=False)
        guesses = [pool[int(i)] for i in idx]
    if scheme == LFSR:
        delta = _perturbation_bits_gf2(guesses, m)
    else:
        delta = _perturbation_bits_gdh(guesses, m)
    forged = packet.message ^ BitString(delta, m)
    return SignaturePacket(scheme, n, forged, packet.sig, packet.p)


# ---------------------------------------------------------------------------
# Monte-Carlo driver

@dataclass(frozen=True)
class MonteCarloResult:
    scheme: str
    n: int
    m_bits: int
    trials: int
    successes: int
    budget: int
    population: int
    materialized: int
    predicate_mismatches: int
    eps_analytic: float  # scheme bound at Hn = n
    eps_analytic_log2: float

    @property
    def empirical(self) -> float:
        return self.successes / self.trials


def _fresh_act(scheme: str, n: int, rng: np.random.Generator):
    per = strings_per_act(scheme) * n
    g = group_keys(
        RawKeyPair(BitString.random(rng, per)),
        RawKeyPair(BitString.random(rng, per)),
        n,
        scheme,
        rng,
    )
    return g.alice[0], g.bob[0], g.charlie[0]


def _materialized_trial(scheme, n, m_bits, g, pool, rng) -> tuple[bool, bool]:
    """Full-path trial: returns (verifier_accepts, predicate_predicts)."""
    alice, bob, charlie = _fresh_act(scheme, n, rng)
    message = BitString.random(rng, m_bits)
    packet = alice_sign(message, alice, rng)
    idx = rng.choice(len(pool), size=g, replace=False)
    guesses = [pool[int(i)] for i in idx]
    forged = forge_attack_guess_key(packet, rng, guesses=guesses)
    ok, _ = receiver_verify(forged, bob, charlie)
    if scheme == LFSR:
        true_poly = decode_gf2_poly(packet.p ^ alice.strings["X"])
        seed_zero = alice.strings["Y"].is_zero()
        predicted = true_poly in guesses or seed_zero
    else:
        true_poly = decode_gf256_poly(packet.p ^ alice.strings["X"])
        predicted = true_poly in guesses or true_poly == bytes([0, 1])
    return ok, predicted


def forgery_monte_carlo(
    scheme: str,
    n: int,
    m_bits: int,
    trials: int,
    rng: np.random.Generator,
    budget: int | None = None,
    materialize: int = 500,
) -> MonteCarloResult:
    """Empirical forgery success rate of the key-guessing attack.

    The first `materialize` trials build real packets and run the real
    verifier, asserting agreement with the membership reduction; the
    remaining trials sample the success event directly (uniform rank of
    the signer's polynomial among g distinct uniform guesses, plus the
    zero-seed collapse for the register family).
    """
    pool = irreducible_population(scheme, n)
    cap = _budget_cap(scheme, n, m_bits)
    g = min(budget if budget is not None else cap, cap, len(pool))
    mat = min(materialize, trials)
    successes = 0
    mismatches = 0
    for _ in range(mat):
        ok, predicted = _materialized_trial(scheme, n, m_bits, g, pool, rng)
        if ok != predicted:
            mismatches += 1
        successes += int(ok)
    bulk = trials - mat
    if bulk > 0:
        rank = rng.integers(0, len(pool), size=bulk)
        hit = rank < g
        if scheme == LFSR:
            seed_zero = rng.integers(0, 1 << n, size=bulk) == 0
            hit |= seed_zero
        elif n // 8 == 1:
            # signer's polynomial may be exactly x, which divides the
            # header-shifted perturbation unconditionally
            pa_is_x = rng.integers(0, len(pool), size=bulk) == 0
            hit |= pa_is_x
        successes += int(np.count_nonzero(hit))
    b = epsilon_forgery(m_bits, float(n), scheme, n=n)
    return MonteCarloResult(
        scheme=scheme,
        n=n,
        m_bits=m_bits,
        trials=trials,
        successes=successes,
        budget=g,
        population=len(pool),
        materialized=mat,
        predicate_mismatches=mismatches,
        eps_analytic=b.eps_max,
        eps_analytic_log2=b.log2_max,
    )
