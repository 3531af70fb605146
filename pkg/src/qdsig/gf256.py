"""GF(2^8) field and polynomial arithmetic.

Field elements are ints 0..255 in the representation GF(2)[t]/(r(t))
with the fixed reduction polynomial r(t) = t^8 + t^4 + t^3 + t + 1
(0x11B).  The choice is a protocol constant and is recorded in key
file headers so both ends agree.

Polynomials over GF(2^8) are bytes objects with the coefficient of
x^i at index i and no trailing zero bytes; the zero polynomial is
b"".  A monic polynomial of degree d therefore has length d + 1 and
last byte 1.
"""

from __future__ import annotations

import random

import numpy as np

from .gf2 import GenerationError, UnsupportedDegreeError, _prime_factors

REDUCTION_POLY = 0x11B
GENERATOR = 0x03

__all__ = [
    "REDUCTION_POLY",
    "GENERATOR",
    "mul",
    "inv",
    "MUL_TABLE",
    "pdeg",
    "pnorm",
    "pmul",
    "pmod",
    "pgcd",
    "peval",
    "is_irreducible_poly",
    "bootstrap_irreducible",
    "supported_gdh_degrees",
    "random_irreducible",
    "berlekamp_massey",
]


def _build_tables():
    exp = [0] * 512
    log = [0] * 256
    v = 1
    for i in range(255):
        exp[i] = v
        log[v] = i
        vt = v << 1
        if vt & 0x100:
            vt ^= REDUCTION_POLY
        v = vt ^ v  # times the generator t + 1
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


_EXP, _LOG = _build_tables()


def mul(a: int, b: int) -> int:
    """Product of two field elements."""
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def inv(a: int) -> int:
    """Multiplicative inverse of a nonzero field element."""
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^8)")
    return _EXP[255 - _LOG[a]]


def _build_mul_table() -> np.ndarray:
    tbl = np.zeros((256, 256), dtype=np.uint8)
    exp = np.array(_EXP, dtype=np.int32)
    log = np.array(_LOG[1:], dtype=np.int32)
    idx = log[:, None] + log[None, :]
    tbl[1:, 1:] = exp[idx]
    return tbl


MUL_TABLE = _build_mul_table()
_SQR = np.array([mul(i, i) for i in range(256)], dtype=np.uint8)


# ---------------------------------------------------------------------------
# polynomials as bytes, coefficient of x^i at index i

def pnorm(c) -> bytes:
    b = bytes(c)
    i = len(b)
    while i > 0 and b[i - 1] == 0:
        i -= 1
    return b[:i]


def pdeg(c: bytes) -> int:
    return len(c) - 1


def pmul(a: bytes, b: bytes) -> bytes:
    if not a or not b:
        return b""
    if len(a) > len(b):
        a, b = b, a
    av = np.frombuffer(a, dtype=np.uint8)
    bv = np.frombuffer(b, dtype=np.uint8)
    out = np.zeros(len(a) + len(b) - 1, dtype=np.uint8)
    for i in np.flatnonzero(av):
        out[i : i + len(b)] ^= MUL_TABLE[av[i]][bv]
    return pnorm(out.tobytes())


def pmod(a: bytes, m: bytes) -> bytes:
    if not m:
        raise ValueError("zero modulus")
    dm = pdeg(m)
    if pdeg(a) < dm:
        return a
    lead_inv = inv(m[-1])
    mv = np.frombuffer(m, dtype=np.uint8)
    r = bytearray(a)
    rv = np.frombuffer(r, dtype=np.uint8)  # shares the buffer
    for i in range(len(r) - 1, dm - 1, -1):
        c = r[i]
        if c:
            q = mul(c, lead_inv)
            rv[i - dm : i + 1] ^= MUL_TABLE[q][mv]
    return pnorm(r[:dm])


def pgcd(a: bytes, b: bytes) -> bytes:
    if not a and not b:
        raise ValueError("gcd(0, 0) is undefined")
    while b:
        a, b = b, pmod(a, b)
    # monic normalization
    if a and a[-1] != 1:
        s = inv(a[-1])
        av = np.frombuffer(a, dtype=np.uint8)
        a = MUL_TABLE[s][av].tobytes()
    return a


def peval(c: bytes, x: int) -> int:
    acc = 0
    for coef in reversed(c):
        acc = mul(acc, x) ^ coef
    return acc


def _psquare_mod(a: bytes, m: bytes) -> bytes:
    # Frobenius: (sum c_i x^i)^2 = sum c_i^2 x^(2i)
    if not a:
        return a
    av = np.frombuffer(a, dtype=np.uint8)
    out = np.zeros(2 * len(a) - 1, dtype=np.uint8)
    out[::2] = _SQR[av]
    return pmod(out.tobytes(), m)


_XP = bytes([0, 1])  # the polynomial x


def is_irreducible_poly(f: bytes) -> bool:
    """Rabin irreducibility test over GF(2^8).

    Checks x^(q^n) = x mod f and gcd(x^(q^(n/r)) - x, f) = 1 for every
    prime r dividing n = deg f, with q = 256.
    """
    n = pdeg(f)
    if n < 1:
        raise ValueError("constant polynomial")
    if n == 1:
        return True
    if f[0] == 0:
        return False  # divisible by x
    checkpoints = {n // r for r in _prime_factors(n)}
    cur = pmod(_XP, f)
    for k in range(1, n + 1):
        for _ in range(8):  # one q-power is eight squarings
            cur = _psquare_mod(cur, f)
        if k in checkpoints:
            g = bytearray(max(len(cur), 2))
            g[: len(cur)] = cur
            g[1] ^= 1
            gp = pnorm(g)
            if not gp or pdeg(pgcd(gp, f)) != 0:
                return False
    return pnorm(cur) == _XP


_REJECTION_LIMIT = 64
_bootstrap_cache: dict[int, bytes] = {}


def bootstrap_irreducible(d: int) -> bytes:
    """A fixed monic irreducible of degree d over GF(2^8).

    Small degrees are found once by deterministic rejection sampling.
    Larger ones use binomials x^d - a with a a multiplicative generator,
    irreducible whenever d is odd with prime factors among {3, 5, 17}
    (the primes of 255).
    """
    if d < 1:
        raise ValueError("degree must be positive")
    hit = _bootstrap_cache.get(d)
    if hit is not None:
        return hit
    if d == 1:
        poly = bytes([0, 1])
    elif d <= _REJECTION_LIMIT:
        rnd = random.Random(0xC0FFEE ^ (d * 0x9E3779B1))
        poly = None
        for _ in range(64 * max(d, 8)):
            cand = bytes([rnd.randrange(1, 256)] + [rnd.randrange(256) for _ in range(d - 1)] + [1])
            if is_irreducible_poly(cand):
                poly = cand
                break
        if poly is None:  # pragma: no cover
            raise GenerationError(f"no irreducible of degree {d} found")
    else:
        t = d
        for r in (3, 5, 17):
            while t % r == 0:
                t //= r
        if t != 1 or d % 2 == 0:
            raise UnsupportedDegreeError(
                f"no bootstrap irreducible available for GF(2^8) degree {d}"
            )
        poly = bytes([GENERATOR] + [0] * (d - 1) + [1])
    _bootstrap_cache[d] = poly
    return poly


def supported_gdh_degrees(limit: int) -> list[int]:
    """Degrees <= limit at which random_irreducible can run."""
    out = set(range(1, min(limit, _REJECTION_LIMIT) + 1))
    for a in range(9):
        for b in range(7):
            for c in range(3):
                d = 3**a * 5**b * 17**c
                if _REJECTION_LIMIT < d <= limit and d % 2 == 1:
                    out.add(d)
    return sorted(out)


def berlekamp_massey(seq) -> bytes:
    """Minimal recurrence polynomial of a GF(2^8) sequence (monic bytes)."""
    s = list(seq)
    if len(s) % 2:
        raise ValueError("sequence length must be even")
    sv = np.array(s, dtype=np.uint8)
    size = len(s) + 2
    C = np.zeros(size, dtype=np.uint8)
    B = np.zeros(size, dtype=np.uint8)
    C[0] = B[0] = 1
    L = 0
    m = 1
    b = 1
    for i, s_i in enumerate(s):
        d = int(s_i)
        if L:
            k = min(L, i)
            win = sv[i - 1 : i - 1 - k : -1] if i - 1 - k >= 0 else sv[i - 1 :: -1]
            prods = MUL_TABLE[C[1 : 1 + k], win[:k]]
            if len(prods):
                d ^= int(np.bitwise_xor.reduce(prods))
        if d == 0:
            m += 1
            continue
        coef = mul(d, inv(b))
        if 2 * L <= i:
            T = C.copy()
            C[m:] ^= MUL_TABLE[coef][B[: size - m]]
            L = i + 1 - L
            B = T
            b = d
            m = 1
        else:
            C[m:] ^= MUL_TABLE[coef][B[: size - m]]
            m += 1
    lam = np.zeros(L + 1, dtype=np.uint8)
    k = min(size, L + 1)
    lam[L - np.arange(k)] = C[:k]
    return pnorm(lam.tobytes())


def random_irreducible(d: int, rng: np.random.Generator, max_tries: int = 64) -> bytes:
    """Random monic irreducible of degree d over GF(2^8).

    Degree 1 returns x + c for a random byte c.  Otherwise the minimal
    polynomial of a random extension-field element is recovered from the
    constant coefficients of its powers via Berlekamp-Massey, retrying
    while the element lands in a proper subfield.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if d == 1:
        return bytes([int(rng.integers(0, 256)), 1])
    f = bootstrap_irreducible(d)
    for _ in range(max_tries):
        g = pnorm(rng.integers(0, 256, size=d, dtype=np.uint8).tobytes())
        seq = []
        h = bytes([1])
        for _i in range(2 * d):
            seq.append(h[0] if h else 0)
            h = pmod(pmul(h, g), f)
        lam = berlekamp_massey(seq)
        if pdeg(lam) != d:
            continue
        if d <= _REJECTION_LIMIT and not is_irreducible_poly(lam):  # pragma: no cover
            raise GenerationError("minimal polynomial failed irreducibility")
        return lam
    raise GenerationError(f"retry limit exceeded for GF(2^8) degree {d}")
