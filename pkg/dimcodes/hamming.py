"""
Exact finite-string combinatorics: bit blocks, Hamming distance, density,
ball volumes and ball enumeration.

A BitBlock of length n keeps its payload as an int whose most significant of
n bits is the leftmost character, so int order is lexicographic order.
"""

import math
from dataclasses import dataclass
from functools import cache
from itertools import combinations
from typing import Iterator

import numpy as np

from .entropy import entropy
from .exceptions import DomainError


@dataclass(frozen=True, order=True)
class BitBlock:
    n: int
    value: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"negative block length {self.n}")
        if self.value < 0 or self.value >> self.n:
            raise DomainError(f"payload {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, text: str) -> "BitBlock":
        text = text.strip()
        if text and set(text) - {"0", "1"}:
            raise DomainError(f"not a binary string: {text!r}")
        return cls(len(text), int(text, 2) if text else 0)

    @classmethod
    def from_bits(cls, bits) -> "BitBlock":
        bits = np.asarray(bits, dtype=np.uint8)
        value = 0
        for bit in bits.tolist():
            value = (value << 1) | (bit & 1)
        return cls(len(bits), value)

    def to_bits(self) -> np.ndarray:
        return np.frombuffer(str(self).encode("ascii"), dtype=np.uint8) - np.uint8(48)

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.value >> (self.n - 1 - i)) & 1

    def __xor__(self, other: "BitBlock") -> "BitBlock":
        _same_length(self, other)
        return BitBlock(self.n, self.value ^ other.value)

    def __str__(self):
        return format(self.value, f"0{self.n}b") if self.n else ""


@dataclass(frozen=True)
class BallVolume:
    n: int
    r: int
    value: int

    @property
    def log2(self) -> float:
        return math.log2(self.value)


def _same_length(a: BitBlock, b: BitBlock):
    if a.n != b.n:
        raise DomainError(f"length mismatch: {a.n} vs {b.n}")


def hamming_distance(a: BitBlock, b: BitBlock) -> int:
    _same_length(a, b)
    return (a.value ^ b.value).bit_count()


def density(a: BitBlock) -> float:
    """Fraction of ones in the block."""
    if a.n == 0:
        raise DomainError("density of an empty block")
    return a.weight / a.n


@cache
def ball_volume(n: int, r: int) -> BallVolume:
    """
    Exact size V(n, r) of a radius-r Hamming ball in {0,1}^n.

    Args:
        n: Block length
        r: Radius, 0 <= r <= n

    Returns:
        BallVolume holding the exact integer and its log2
    """
    if n < 0 or not 0 <= r <= n:
        raise DomainError(f"ball radius r={r} outside [0, n={n}]")
    return BallVolume(n, r, sum(math.comb(n, i) for i in range(r + 1)))


def volume_entropy_gap(n: int, r: int) -> float:
    """H(r/n) n - log2 V(n, r); non-negative for r <= n/2."""
    return entropy(r / n) * n - ball_volume(n, r).log2


def enumerate_ball(center: BitBlock, r: int) -> Iterator[BitBlock]:
    """Members of B_r(center), by distance and then lexicographically."""
    n = center.n
    if not 0 <= r <= n:
        raise DomainError(f"ball radius r={r} outside [0, n={n}]")
    for d in range(r + 1):
        shell = []
        for positions in combinations(range(n), d):
            mask = 0
            for p in positions:
                mask |= 1 << p
            shell.append(center.value ^ mask)
        for value in sorted(shell):
            yield BitBlock(n, value)


def ball_rank(block: BitBlock) -> int:
    """Rank of a block in B_w(0^n) ordered by weight, then lexicographically."""
    n, w = block.n, block.weight
    rank = ball_volume(n, w - 1).value if w else 0
    remaining = w
    for i in range(n):
        if block[i]:
            rank += math.comb(n - 1 - i, remaining)
            remaining -= 1
    return rank


def ball_unrank(n: int, rank: int) -> BitBlock:
    """Inverse of ball_rank."""
    if not 0 <= rank < 2 ** n:
        raise DomainError(f"rank {rank} outside [0, 2^{n})")
    w = 0
    while ball_volume(n, w).value <= rank:
        w += 1
    rank -= ball_volume(n, w - 1).value if w else 0
    value, remaining = 0, w
    for i in range(n):
        value <<= 1
        step = math.comb(n - 1 - i, remaining)
        if remaining and rank >= step:
            value |= 1
            rank -= step
            remaining -= 1
    return BitBlock(n, value)


# Array helpers for the exhaustive loops

def popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values)


@cache
def _weights(n: int) -> np.ndarray:
    return popcount(np.arange(1 << n, dtype=np.int64))


def weight_masks(n: int, w: int) -> np.ndarray:
    """All n-bit ints of weight w, ascending."""
    return np.flatnonzero(_weights(n) == w).astype(np.int64)


def ball_masks(n: int, r: int) -> np.ndarray:
    """All n-bit ints of weight <= r, by weight then value."""
    return np.concatenate([weight_masks(n, w) for w in range(r + 1)])


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Rows of a 2-d 0/1 array as ints (leftmost column most significant)."""
    bits = np.asarray(bits, dtype=np.int64)
    n = bits.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    return bits @ weights


def unpack_values(values: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_rows: one row of n bits per value."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8)
