"""Lexical similarity machinery: token bags, cosine similarity, SimHash, Hamming.

All functions are pure and deterministic.  SimHash fingerprints are 64 bits
wide and built from a pinned, platform-independent token hash (BLAKE2b with a
fixed personalization string), so fingerprints are bit-reproducible across
runs and platforms.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "Fingerprint",
    "TokenBag",
    "cosine_similarity",
    "hamming",
    "simhash",
    "token_hash",
    "tokenize",
]

FINGERPRINT_BITS = 64
_HASH_PERSON = b"errsearch-sh-v1"  # pinned; changing it invalidates stored fingerprints
MIN_TOKEN_LEN = 3

_ALNUM_RE = re.compile(r"[A-Za-z0-9]+")
_HUMP_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


@dataclass(frozen=True, slots=True)
class TokenBag:
    """Multiset of lowercase tokens with positive counts."""

    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", dict(self.counts))
        for token, count in self.counts.items():
            if not token or token != token.lower():
                raise ValueError(f"token {token!r} must be non-empty lowercase")
            if count < 1:
                raise ValueError(f"count for {token!r} must be >= 1, got {count}")

    def __len__(self) -> int:
        return len(self.counts)

    def __bool__(self) -> bool:
        return bool(self.counts)


@dataclass(frozen=True, slots=True)
class Fingerprint:
    """64-bit SimHash fingerprint; serializes as 16-digit lowercase hex."""

    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits < (1 << FINGERPRINT_BITS):
            raise ValueError(f"fingerprint out of 64-bit range: {self.bits}")

    def to_hex(self) -> str:
        return format(self.bits, "016x")

    @classmethod
    def from_hex(cls, text: str) -> "Fingerprint":
        return cls(int(text, 16))


def tokenize(text: str) -> TokenBag:
    """Split text into a lowercase token bag.

    Splits on non-alphanumerics and on camelCase humps, lowercases, and drops
    short tokens (fewer than 3 characters), so "NullPointerException at
    Foo.bar" yields {null, pointer, exception, foo, bar}.
    """
    counts: dict[str, int] = {}
    for chunk in _ALNUM_RE.findall(text):
        for hump in _HUMP_RE.findall(chunk):
            if len(hump) < MIN_TOKEN_LEN:
                continue
            token = hump.lower()
            counts[token] = counts.get(token, 0) + 1
    return TokenBag(counts)


def cosine_similarity(a: TokenBag, b: TokenBag) -> float:
    """Cosine of the two count vectors, in [0, 1].  Empty bags score 0."""
    if not a or not b:
        return 0.0
    small, large = (a.counts, b.counts) if len(a) <= len(b) else (b.counts, a.counts)
    dot = sum(count * large.get(token, 0) for token, count in small.items())
    if dot == 0:
        return 0.0
    norm_sq_a = sum(c * c for c in a.counts.values())
    norm_sq_b = sum(c * c for c in b.counts.values())
    return min(1.0, dot / math.sqrt(norm_sq_a * norm_sq_b))


def token_hash(token: str) -> int:
    """Pinned 64-bit hash of a token (BLAKE2b, fixed personalization)."""
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, person=_HASH_PERSON
    ).digest()
    return int.from_bytes(digest, "big")


def simhash(bag: TokenBag) -> Fingerprint:
    """Weighted SimHash of a token bag.

    Each token hashes to 64 bits; per bit position, token counts are summed
    with sign +count where the hash bit is 1 and -count where it is 0.  Output
    bit i is 1 iff the signed sum at position i is strictly positive.  The
    empty bag maps to the zero fingerprint.
    """
    if not bag:
        return Fingerprint(0)
    sums = [0] * FINGERPRINT_BITS
    for token, count in bag.counts.items():
        h = token_hash(token)
        for i in range(FINGERPRINT_BITS):
            sums[i] += count if (h >> i) & 1 else -count
    bits = 0
    for i in range(FINGERPRINT_BITS):
        if sums[i] > 0:
            bits |= 1 << i
    return Fingerprint(bits)


def hamming(a: Fingerprint, b: Fingerprint) -> int:
    """Number of differing bit positions between two fingerprints."""
    return (a.bits ^ b.bits).bit_count()
