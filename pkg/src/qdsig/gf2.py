"""Polynomial arithmetic over GF(2) with integer-packed coefficients.

A polynomial sum_i c_i x^i is stored as the nonnegative integer
sum_i c_i 2^i, so bit i of the integer is the coefficient of x^i.
The zero polynomial is 0 and its degree is reported as -1 (stand-in
for minus infinity).  All nonzero polynomials are automatically in
normalized form: the highest stored bit is the leading 1.

Large operands are multiplied through a carry-less trick: bits are
spread into zero-padded slots wide enough that column sums cannot
carry across slots, the spread integers are multiplied with gmpy2,
and slot parities are read back out.  Reduction by a fixed modulus
streams byte-by-byte through a 256-entry fold table.
"""

from __future__ import annotations

import random

import gmpy2
import numpy as np

__all__ = [
    "GenerationError",
    "UnsupportedDegreeError",
    "degree",
    "mul",
    "mod",
    "divmod_",
    "gcd",
    "mulmod",
    "powmod",
    "ModReducer",
    "is_irreducible",
    "irreducible_count",
    "berlekamp_massey",
    "bootstrap_irreducible",
    "supported_degrees",
    "random_irreducible",
    "all_irreducibles",
    "random_bits",
]

X = 0b10  # the polynomial x


class GenerationError(RuntimeError):
    """Raised when randomized generation exhausts its retry budget."""


class UnsupportedDegreeError(ValueError):
    """Raised when no bootstrap irreducible is available for a degree."""


def degree(a: int) -> int:
    """Degree of a packed polynomial (-1 for the zero polynomial)."""
    return a.bit_length() - 1


def random_bits(rng: np.random.Generator, n: int) -> int:
    """n uniformly random bits as a packed integer."""
    if n <= 0:
        return 0
    nbytes = (n + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), "little") & ((1 << n) - 1)


# ---------------------------------------------------------------------------
# multiplication

def _mul_shiftxor(a: int, b: int) -> int:
    if a.bit_count() > b.bit_count():
        a, b = b, a
    acc = 0
    while a:
        low = a & -a
        acc ^= b * low  # b << tz(a); multiplying by a power of two is exact
        a ^= low
    return acc


def _spread(x: int, nbits: int, w: int) -> int:
    bits = np.unpackbits(
        np.frombuffer(x.to_bytes((nbits + 7) // 8, "little"), dtype=np.uint8),
        bitorder="little",
    )[:nbits]
    out = np.zeros(nbits * w, dtype=np.uint8)
    out[::w] = bits
    return int.from_bytes(np.packbits(out, bitorder="little").tobytes(), "little")


def _mul_spread(a: int, b: int) -> int:
    na, nb = a.bit_length(), b.bit_length()
    w = min(na, nb).bit_length() + 1  # column sums < 2**w, no slot carries
    pa = _spread(a, na, w)
    pb = _spread(b, nb, w)
    prod = int(gmpy2.mpz(pa) * gmpy2.mpz(pb))
    nr = na + nb - 1
    raw = prod.to_bytes((nr * w + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    bits = bits[: nr * w : w]
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def mul(a: int, b: int) -> int:
    """Carry-less product of two packed polynomials."""
    if a == 0 or b == 0:
        return 0
    small = min(a.bit_length(), b.bit_length())
    large = max(a.bit_length(), b.bit_length())
    if small >= 512 and small * large >= 1 << 21:
        return _mul_spread(a, b)
    return _mul_shiftxor(a, b)


def square(a: int) -> int:
    """Square of a packed polynomial (Frobenius: spreads the bits)."""
    if a.bit_length() <= 256:
        return _mul_shiftxor(a, a)
    n = a.bit_length()
    return _spread(a, n, 2)


# ---------------------------------------------------------------------------
# division / reduction

class ModReducer:
    """Byte-streaming reduction by a fixed modulus.

    Precomputes t(x)*x^n mod m for every byte t, then folds an arbitrary
    polynomial eight bits at a time.  Memory is O(256 * n) bits.
    """

    def __init__(self, m: int):
        if m == 0:
            raise ValueError("zero modulus")
        self.m = m
        self.n = degree(m)
        n = self.n
        base = m ^ (1 << n)  # x^n mod m
        tbl = [0] * 256
        tbl[1] = base
        cur = base
        for k in range(1, 8):
            cur <<= 1
            if cur >> n & 1:
                cur = (cur ^ (1 << n)) ^ base
            tbl[1 << k] = cur
        for t in range(3, 256):
            if t & (t - 1):
                tbl[t] = tbl[t & (t - 1)] ^ tbl[t & -t]
        self._tbl = tbl
        self._mask = (1 << n) - 1

    def reduce(self, a: int) -> int:
        n = self.n
        if a.bit_length() <= n:
            return a
        tbl = self._tbl
        mask = self._mask
        r = 0
        for by in a.to_bytes((a.bit_length() + 7) // 8, "big"):
            r = (r << 8) | by
            t = r >> n
            if t:
                r = (r & mask) ^ tbl[t]
        return r


def _mod_loop(a: int, m: int) -> int:
    dm = degree(m)
    while True:
        da = degree(a)
        if da < dm:
            return a
        a ^= m << (da - dm)


def mod(a: int, m: int) -> int:
    """a mod m for packed polynomials; m must be nonzero."""
    if m == 0:
        raise ValueError("zero modulus")
    if a.bit_length() - m.bit_length() > 4096:
        return ModReducer(m).reduce(a)
    return _mod_loop(a, m)


def divmod_(a: int, m: int) -> tuple[int, int]:
    """Quotient and remainder of packed polynomial division."""
    if m == 0:
        raise ValueError("zero modulus")
    dm = degree(m)
    q = 0
    while True:
        da = degree(a)
        if da < dm:
            return q, a
        q ^= 1 << (da - dm)
        a ^= m << (da - dm)


def gcd(a: int, b: int) -> int:
    """Greatest common divisor; inputs must not both be zero.

    Over GF(2) every nonzero polynomial is monic, so the result is monic.
    """
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    while b:
        a, b = b, mod(a, b)
    return a


def mulmod(a: int, b: int, m: int) -> int:
    """(a * b) mod m; m must be nonzero with degree >= 1."""
    if m == 0:
        raise ValueError("zero modulus")
    if degree(m) < 1:
        raise ValueError("modulus must have degree >= 1")
    return mod(mul(mod(a, m), mod(b, m)), m)


def powmod(a: int, e: int, m: int) -> int:
    """a**e mod m by square-and-multiply."""
    if e < 0:
        raise ValueError("negative exponent")
    r = mod(1, m)
    a = mod(a, m)
    while e:
        if e & 1:
            r = mulmod(r, a, m)
        a = mulmod(a, a, m)
        e >>= 1
    return r


# ---------------------------------------------------------------------------
# irreducibility

def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(p: int) -> bool:
    """Irreducibility of a packed polynomial over GF(2).

    Uses the standard criterion: x^(2^n) = x mod p together with
    gcd(x^(2^(n/d)) - x, p) = 1 for every prime d dividing n = deg p.
    """
    n = degree(p)
    if n < 1:
        raise ValueError("constant polynomial")
    if n == 1:
        return True
    checkpoints = {n // d for d in _prime_factors(n)}
    reducer = ModReducer(p)
    cur = mod(X, p)
    for k in range(1, n + 1):
        cur = reducer.reduce(square(cur))
        if k in checkpoints:
            g = cur ^ X
            if g == 0 or gcd(g, p) != 1:
                return False
    return cur == mod(X, p)


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    m = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            m = -m
        d += 1
    if n > 1:
        m = -m
    return m


def irreducible_count(n: int) -> int:
    """Exact number of monic irreducible degree-n polynomials over GF(2).

    Necklace counting: (1/n) * sum over d | n of mobius(d) * 2^(n/d).
    Exceeds 2^(n-1)/n for every n >= 2, the bound the forgery analysis
    of the protocol relies on.
    """
    if not 1 <= n <= 64:
        raise ValueError("supported range is 1 <= n <= 64")
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _mobius(d) * (1 << (n // d))
    assert total % n == 0
    return total // n


# ---------------------------------------------------------------------------
# Berlekamp-Massey

def berlekamp_massey(seq) -> int:
    """Minimal recurrence polynomial of a GF(2) sequence.

    The input must have even length 2n.  Returns the monic polynomial
    lambda(x) = x^L + ... of least degree L such that
    sum_j lambda_j a_(t+j) = 0 for every window of the sequence;
    the all-zero sequence yields the constant polynomial 1.
    """
    s = [int(b) & 1 for b in seq]
    if len(s) % 2:
        raise ValueError("sequence length must be even")
    C = 1
    B = 1
    L = 0
    m = 1
    W = 0  # bit j of W is s[i-j]
    for i, bit in enumerate(s):
        W = (W << 1) | bit
        d = (C & W).bit_count() & 1
        if d == 0:
            m += 1
        elif 2 * L <= i:
            T = C
            C ^= B << m
            L = i + 1 - L
            B = T
            m = 1
        else:
            C ^= B << m
            m += 1
    # reverse the connection polynomial within L+1 bits -> recurrence form
    lam = 0
    for j in range(L + 1):
        if C >> j & 1:
            lam |= 1 << (L - j)
    return lam


# ---------------------------------------------------------------------------
# bootstrap irreducibles and random generation

_REJECTION_LIMIT = 512
_VERIFY_LIMIT = 2048
_bootstrap_cache: dict[int, int] = {}
_prim_root_cache: dict[int, bool] = {}


def _is_primitive_root_2(p: int) -> bool:
    hit = _prim_root_cache.get(p)
    if hit is not None:
        return hit
    ok = True
    for q in _prime_factors(p - 1):
        if pow(2, (p - 1) // q, p) == 1:
            ok = False
            break
    _prim_root_cache[p] = ok
    return ok


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _constructive_bootstrap(n: int) -> int | None:
    # all-ones polynomial of degree p-1 is irreducible when 2 generates
    # the multiplicative group mod p
    p = n + 1
    if _is_prime(p) and _is_primitive_root_2(p):
        return (1 << p) - 1
    # x^(2*3^k) + x^(3^k) + 1, irreducible for every k
    t = n
    while t % 3 == 0:
        t //= 3
    if t == 2 and n >= 2:
        return (1 << n) | (1 << (n // 2)) | 1
    return None


def bootstrap_irreducible(n: int) -> int:
    """A fixed irreducible polynomial of degree n.

    Degrees up to 512 are produced once per process by deterministic
    rejection sampling (seeded from n) and cached; larger degrees come
    from closed-form families.  Raises UnsupportedDegreeError when no
    construction is available.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    hit = _bootstrap_cache.get(n)
    if hit is not None:
        return hit
    if n == 1:
        poly = X
    elif n <= _REJECTION_LIMIT:
        rnd = random.Random(0x5EED ^ (n * 0x9E3779B1))
        poly = None
        for _ in range(64 * max(n, 8)):
            cand = (1 << n) | (rnd.getrandbits(n - 1) << 1) | 1
            if cand.bit_count() % 2 == 0:
                continue  # even weight means divisible by x + 1
            if is_irreducible(cand):
                poly = cand
                break
        if poly is None:  # pragma: no cover - astronomically unlikely
            raise GenerationError(f"no irreducible of degree {n} found")
    else:
        poly = _constructive_bootstrap(n)
        if poly is None:
            raise UnsupportedDegreeError(
                f"no bootstrap irreducible available for degree {n}"
            )
    _bootstrap_cache[n] = poly
    return poly


def supported_degrees(limit: int) -> list[int]:
    """Sorted degrees <= limit for which bootstrap_irreducible works."""
    out = set(range(2, min(limit, _REJECTION_LIMIT) + 1))
    p = _REJECTION_LIMIT + 2
    while p - 1 <= limit:
        if _is_prime(p) and _is_primitive_root_2(p):
            out.add(p - 1)
        p += 1
    t = 2
    while t <= limit:
        if t > _REJECTION_LIMIT:
            out.add(t)
        t *= 3
    return sorted(out)


def random_irreducible(n: int, rng: np.random.Generator, max_tries: int = 64) -> int:
    """Uniform-ish random monic irreducible polynomial of degree n.

    Draws a random element g of GF(2^n) (n random bits), projects the
    powers of g onto their constant coefficients and recovers the
    minimal polynomial of g with Berlekamp-Massey.  When g happens to
    lie in a proper subfield the minimal polynomial has degree < n and
    a fresh g is drawn; after max_tries failures GenerationError is
    raised.  Consumes n random bits per attempt.
    """
    if n < 2:
        raise ValueError("degree must be >= 2")
    f = bootstrap_irreducible(n)
    reducer = ModReducer(f)
    for _ in range(max_tries):
        g = random_bits(rng, n)
        seq = []
        h = 1
        for _i in range(2 * n):
            seq.append(h & 1)
            h = reducer.reduce(mul(h, g))
        lam = berlekamp_massey(seq)
        if degree(lam) != n:
            continue
        # a degree-n annihilator of the projected power sequence must be
        # the minimal polynomial of g itself, hence irreducible; verify
        # outright where that is cheap
        if n <= _VERIFY_LIMIT and not is_irreducible(lam):  # pragma: no cover
            raise GenerationError("minimal polynomial failed irreducibility")
        return lam
    raise GenerationError(f"retry limit exceeded for degree {n}")


_irreducible_sets: dict[int, list[int]] = {}


def all_irreducibles(n: int) -> list[int]:
    """All monic irreducible polynomials of degree n <= 20, sorted."""
    if not 1 <= n <= 20:
        raise ValueError("enumeration supported for 1 <= n <= 20")
    hit = _irreducible_sets.get(n)
    if hit is None:
        if n == 1:
            hit = [X, X | 1]
        else:
            hit = [
                (1 << n) | (t << 1) | 1
                for t in range(1 << (n - 1))
                if (((1 << n) | (t << 1) | 1).bit_count() & 1)
                and is_irreducible((1 << n) | (t << 1) | 1)
            ]
        _irreducible_sets[n] = hit
    return hit
