"""Counter-based randomness shared by code construction and bit sources.

Every draw is addressed by ``(role, seed, block index)``. The Philox key is a
BLAKE2b digest of ``"<role>:<seed>"``, so two roles never share a stream even
under the same seed, and any block can be regenerated without replaying the
blocks before it.
"""

import hashlib
from fractions import Fraction

import numpy as np

from . import settings

_TWO_64 = 1 << 64


def derive_key(role: str, seed: int) -> np.ndarray:
    """Philox key (two uint64 words) for a role-tagged seed."""
    material = f"{role}:{int(seed)}".encode("ascii")
    digest = hashlib.blake2b(material, digest_size=16).digest()
    return np.frombuffer(digest, dtype="<u8").astype(np.uint64)


def raw_block(role: str, seed: int, index: int, size: int = None) -> np.ndarray:
    """The ``index``-th block of raw 64-bit draws."""
    size = settings.BERNOULLI_BLOCK if size is None else size
    counter = np.array([0, index, 0, 0], dtype=np.uint64)
    generator = np.random.Philox(counter=counter, key=derive_key(role, seed))
    return generator.random_raw(size)


def bernoulli_threshold(p) -> int:
    """floor(p * 2^64); a draw is a one iff it falls below this value."""
    return int(Fraction(p) * _TWO_64)


def bernoulli_bits(p, role: str, seed: int, start: int, stop: int) -> np.ndarray:
    """Bits ``start..stop-1`` of the seeded Bernoulli(p) stream as uint8."""
    length = max(0, stop - start)
    threshold = bernoulli_threshold(p)
    if threshold <= 0:
        return np.zeros(length, dtype=np.uint8)
    if threshold >= _TWO_64:
        return np.ones(length, dtype=np.uint8)

    block = settings.BERNOULLI_BLOCK
    limit = np.uint64(threshold)
    out = np.empty(length, dtype=np.uint8)
    pos = start
    while pos < stop:
        index, offset = divmod(pos, block)
        take = min(block - offset, stop - pos)
        raw = raw_block(role, seed, index)[offset:offset + take]
        out[pos - start:pos - start + take] = raw < limit
        pos += take
    return out


def seeded_permutation(count: int, role: str, seed: int) -> np.ndarray:
    """A permutation of ``range(count)`` fixed by ``(role, seed)``."""
    keys = np.empty(count, dtype=np.uint64)
    block = settings.BERNOULLI_BLOCK
    for index in range(0, (count + block - 1) // block):
        lo = index * block
        hi = min(count, lo + block)
        keys[lo:hi] = raw_block(role, seed, index)[: hi - lo]
    return np.argsort(keys, kind="stable")
