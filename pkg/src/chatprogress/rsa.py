"""Exact integer arithmetic for the RSA practice task.

Desk-scale keys only: no padding and no cryptographic security claims.
All functions are pure, use arbitrary-precision integers, and serve as the
ground truth the progress engine checks conversations against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Sequence


class RsaError(ValueError):
    pass


class ZeroModulus(RsaError):
    pass


class NotCoprime(RsaError):
    pass


class NotPrime(RsaError):
    pass


class EqualPrimes(RsaError):
    pass


class BlockTooLarge(RsaError):
    """A plaintext block encodes to a value >= the modulus."""


# Miller-Rabin witness set proven deterministic for all n < 3.3e24 (> 2^63).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(x: int) -> bool:
    """Deterministic primality test for x >= 0 (exact up to 2^63 and beyond)."""
    if x < 2:
        return False
    for p in _MR_WITNESSES:
        if x == p:
            return True
        if x % p == 0:
            return False
    d = x - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        y = pow(a, d, x)
        if y == 1 or y == x - 1:
            continue
        for _ in range(r - 1):
            y = y * y % x
            if y == x - 1:
                break
        else:
            return False
    return True


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """base**exp mod modulus by square-and-multiply; no intermediate overflow."""
    if modulus <= 0:
        raise ZeroModulus(f"modulus must be positive, got {modulus}")
    if exp < 0:
        raise RsaError("exponent must be nonnegative")
    result = 1 % modulus
    base %= modulus
    while exp:
        if exp & 1:
            result = result * base % modulus
        base = base * base % modulus
        exp >>= 1
    return result


def mod_inverse(a: int, m: int) -> int:
    """The d in (a*d) mod m = 1 with 0 < d < m, via extended Euclid."""
    if m < 2:
        raise RsaError(f"modulus must be >= 2, got {m}")
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
    if old_r != 1:
        raise NotCoprime(f"gcd({a}, {m}) = {old_r}, inverse does not exist")
    return old_s % m


def totient_of_semiprime(p: int, q: int) -> int:
    """Euler's totient of p*q for distinct primes: (p-1)*(q-1)."""
    if not is_prime(p):
        raise NotPrime(f"p = {p} is not prime")
    if not is_prime(q):
        raise NotPrime(f"q = {q} is not prime")
    if p == q:
        raise EqualPrimes(f"p and q must differ, both are {p}")
    return (p - 1) * (q - 1)


def char_codes(plaintext: str) -> list[int]:
    """Default encoding strategy: one block per character, its code point."""
    return [ord(ch) for ch in plaintext]


def codes_to_string(codes: Sequence[int]) -> str:
    return "".join(chr(c) for c in codes)


def encrypt_string(
    plaintext: str,
    e: int,
    n: int,
    encoder: Callable[[str], Sequence[int]] = char_codes,
) -> list[int]:
    """Encrypt plaintext block-wise; every encoded block must be < n."""
    blocks = []
    for code in encoder(plaintext):
        if code >= n:
            raise BlockTooLarge(f"block value {code} >= modulus {n}")
        blocks.append(mod_pow(code, e, n))
    return blocks


def decrypt_string(
    ciphertext: Sequence[int],
    d: int,
    n: int,
    decoder: Callable[[Sequence[int]], str] = codes_to_string,
) -> str:
    """Inverse of encrypt_string; used as a round-trip oracle in tests."""
    return decoder([mod_pow(block, d, n) for block in ciphertext])


@dataclass(frozen=True)
class RsaTaskState:
    """A complete, internally consistent key set plus task plaintext."""

    p: int
    q: int
    e: int
    d: int
    plaintext: str = ""
    ciphertext: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not is_prime(self.p) or not is_prime(self.q):
            raise NotPrime(f"p={self.p}, q={self.q} must both be prime")
        if self.p == self.q:
            raise EqualPrimes("p and q must differ")
        phi = self.phi
        if not (1 < self.e < phi) or gcd(self.e, phi) != 1:
            raise RsaError(f"e={self.e} invalid for phi={phi}")
        if not (1 < self.d < phi) or self.e * self.d % phi != 1:
            raise RsaError(f"d={self.d} is not the inverse of e={self.e} mod {phi}")
        for block in self.ciphertext:
            if not 0 <= block < self.n:
                raise RsaError(f"ciphertext block {block} out of range for n={self.n}")

    @property
    def n(self) -> int:
        return self.p * self.q

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)

    @classmethod
    def build(cls, p: int, q: int, e: int, plaintext: str = "") -> "RsaTaskState":
        """Derive d and the ciphertext from (p, q, e) and the plaintext."""
        d = mod_inverse(e, totient_of_semiprime(p, q))
        ciphertext = tuple(encrypt_string(plaintext, e, p * q)) if plaintext else ()
        return cls(p=p, q=q, e=e, d=d, plaintext=plaintext, ciphertext=ciphertext)
