"""Hash functions mapping a key to its degree and its cell indices.

All hashing uses BLAKE2b. A key's randomness is a counter-mode stream of 64-bit
words, ``blake2b(key || counter, key=hash_seed)``, eight words per block. Word 0
picks the degree by inverse-CDF lookup; words 1.. drive a partial Fisher-Yates
shuffle of ``range(m)`` which yields ``d`` distinct cells. Range reduction uses
multiply-shift with rejection, so draws are exactly uniform.
"""

from __future__ import annotations

import functools
from bisect import bisect_right
from hashlib import blake2b

from .degree_dist import DegreeDistribution
from .errors import DegreeExceedsCells, DomainError

MAX_KEY_BITS = 512
_TWO64 = 1 << 64
_MASK64 = _TWO64 - 1
_KEY_PERSON = b"iblt-key"


def key_bytes(nu: int) -> int:
    return (nu + 7) // 8


def key_of_value(value: bytes, nu: int = 64) -> int:
    """nu-bit key derived from a value (unkeyed BLAKE2b, little-endian, masked)."""
    if not 1 <= nu <= MAX_KEY_BITS:
        raise DomainError(f"key length {nu} outside [1, {MAX_KEY_BITS}]")
    digest = blake2b(value, digest_size=key_bytes(nu), person=_KEY_PERSON).digest()
    return int.from_bytes(digest, "little") & ((1 << nu) - 1)


def _seed_bytes(hash_seed: int) -> bytes:
    return (hash_seed & _MASK64).to_bytes(8, "little")


def _words(key: int, hash_seed: int):
    """Infinite stream of 64-bit words for one key."""
    kb = key.to_bytes(max(1, (key.bit_length() + 7) // 8), "little")
    seed = _seed_bytes(hash_seed)
    block = 0
    while True:
        digest = blake2b(kb + block.to_bytes(8, "little"), digest_size=64, key=seed).digest()
        for off in range(0, 64, 8):
            yield int.from_bytes(digest[off : off + 8], "little")
        block += 1


def _below(words, bound: int) -> int:
    """Uniform integer in [0, bound) from the word stream (Lemire's method)."""
    reject_under = (_TWO64 - bound) % bound
    while True:
        prod = next(words) * bound
        if (prod & _MASK64) >= reject_under:
            return prod >> 64


@functools.lru_cache(maxsize=64)
def _cdf_cuts(dist: DegreeDistribution) -> tuple[int, ...]:
    cuts = []
    acc = 0.0
    for p in dist.probs[:-1]:
        acc += p
        cuts.append(min(_TWO64, int(acc * _TWO64)))
    return tuple(cuts)


def _degree_from_word(word: int, dist: DegreeDistribution) -> int:
    return dist.degrees[bisect_right(_cdf_cuts(dist), word)]


def _draw_cells(words, d: int, m: int) -> list[int]:
    if d > m:
        raise DegreeExceedsCells(f"degree {d} > {m} cells")
    swapped: dict[int, int] = {}
    out = []
    for i in range(d):
        j = i + _below(words, m - i)
        pick = swapped.get(j, j)
        swapped[j] = swapped.get(i, i)
        out.append(pick)
    return out


def degree_of_key(key: int, dist: DegreeDistribution, hash_seed: int) -> int:
    return _degree_from_word(next(_words(key, hash_seed)), dist)


def cells_of_key(key: int, d: int, m: int, hash_seed: int) -> list[int]:
    """d distinct 0-based cell indices in range(m)."""
    if d < 1:
        raise DomainError(f"degree {d} < 1")
    words = _words(key, hash_seed)
    next(words)  # word 0 belongs to the degree hash
    return _draw_cells(words, d, m)


def key_layout(key: int, dist: DegreeDistribution, m: int, hash_seed: int) -> list[int]:
    """Cells of a key, degree drawn from dist; one stream, same result as the two calls above."""
    words = _words(key, hash_seed)
    d = _degree_from_word(next(words), dist)
    return _draw_cells(words, d, m)
