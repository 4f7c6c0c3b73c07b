"""
s-codeword generation over the canonical code family.

Chunk j of the output is a center of canonical_code(j, r_j) within r_j of the
base sequence, r_j = ceil(H^-1(1-s) j). Chunks longer than the chunk cap are
cut into blocks (full blocks of ``block_length`` plus one remainder), each
replaced through the code of its own length.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple

import numpy as np

from . import settings
from .covercode import CoveringCode, canonical_code
from .entropy import entropy_inv
from .exceptions import DomainError
from .hamming import pack_rows, unpack_values
from .ledger import CodeLengthLedger, decode_ledger, density_code_length, description_ledger
from .streams import LedgerSegment, PrefixSource, chunk_bounds, chunk_of, density_segments

logger = logging.getLogger(__name__)

__all__ = [
    "CenterPolicy", "CodewordSpec", "CodewordSource", "CodeLengthLedger",
    "codeword_radius", "codeword_source", "membership_violations",
    "description_ledger", "decode_ledger", "density_code_length",
]

_NEAR_INTEGER = 1e-9


class CenterPolicy(str, enum.Enum):
    NEAREST = "nearest"
    FARTHEST = "farthest"


def codeword_radius(s: float, n: int) -> int:
    """r_n = ceil(H^-1(1-s) n), clamped to [0, n] and 0 only at s = 1."""
    if n < 1:
        raise DomainError(f"codeword_radius needs n >= 1 (got {n})")
    x = entropy_inv(1.0 - s) * n
    if x <= 0.0:
        return 0
    return min(n, max(1, math.ceil(x - _NEAR_INTEGER)))


@dataclass
class CodewordSpec:
    s: float
    base: PrefixSource
    chunk_cap: int = settings.CHUNK_CAP
    block_length: Optional[int] = None
    policy: CenterPolicy = CenterPolicy.NEAREST

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise DomainError(f"s={self.s} is not a dimension in [0, 1]")
        if self.chunk_cap < 2:
            raise DomainError(f"chunk cap must be at least 2 (got {self.chunk_cap})")
        if self.block_length is None:
            self.block_length = self.chunk_cap
        if not 1 <= self.block_length <= self.chunk_cap:
            raise DomainError(f"block length {self.block_length} outside [1, {self.chunk_cap}]")
        self.policy = CenterPolicy(self.policy)


@lru_cache(maxsize=None)
def chunk_blocks(j: int, chunk_cap: int, block_length: int) -> Tuple[Tuple[int, int], ...]:
    """(offset, length) of the blocks of chunk j, relative to the chunk start."""
    if j <= chunk_cap:
        return ((0, j),) if j else ()
    full, rest = divmod(j, block_length)
    blocks = tuple((k * block_length, block_length) for k in range(full))
    if rest:
        blocks += ((full * block_length, rest),)
    return blocks


class CodewordSource(PrefixSource):
    """The s-codeword built around a base source."""

    kind = "codeword"

    def __init__(self, spec: CodewordSpec):
        super().__init__(spec.base.seed)
        self.spec = spec
        self.base = spec.base

    def params(self):
        spec = self.spec
        return {
            "s": spec.s, "cap": spec.chunk_cap, "block": spec.block_length,
            "policy": spec.policy.value, "base": self.base.descriptor(),
        }

    def radius(self, length: int) -> int:
        return codeword_radius(self.spec.s, length)

    def code_for(self, length: int) -> Optional[CoveringCode]:
        r = self.radius(length)
        return canonical_code(length, r) if r else None

    def blocks(self, start: int, stop: int) -> Iterator[Tuple[int, int, int]]:
        """(block start, block stop, chunk) for every block meeting [start, stop)."""
        if stop <= start:
            return
        for j in range(chunk_of(start), chunk_of(stop - 1) + 1):
            lo, _ = chunk_bounds(j)
            for offset, length in chunk_blocks(j, self.spec.chunk_cap, self.spec.block_length):
                a, b = lo + offset, lo + offset + length
                if b > start and a < stop:
                    yield a, b, j

    def _replace(self, words: np.ndarray, length: int) -> np.ndarray:
        code = self.code_for(length)
        if code is None:
            return words
        if self.spec.policy is CenterPolicy.FARTHEST:
            picks = code.farthest_table(code.r)[words]
        else:
            picks = code.nearest_table[words]
        return code.array[picks]

    def _materialize(self, start, stop):
        spans = list(self.blocks(start, stop))
        lo, hi = spans[0][0], spans[-1][1]
        base = self.base.window(lo, hi)
        out = base.copy()
        by_length = {}
        for a, b, _ in spans:
            by_length.setdefault(b - a, []).append(a - lo)
        for length, offsets in by_length.items():
            offsets = np.array(offsets, dtype=np.int64)
            rows = base[offsets[:, None] + np.arange(length)]
            centers = self._replace(pack_rows(rows), length)
            out[offsets[:, None] + np.arange(length)] = unpack_values(centers, length)
        return out[start - lo:stop - lo]

    def ledger_segments(self, start, stop):
        segments: List[LedgerSegment] = []
        for a, b, j in self.blocks(start, stop):
            code = self.code_for(b - a)
            if code is not None and a >= start and b <= stop:
                segments.append(LedgerSegment(a, b, j, code, self.spec.block_length))
            else:
                segments.extend(density_segments(max(a, start), min(b, stop)))
        return segments


def codeword_source(spec: CodewordSpec) -> CodewordSource:
    return CodewordSource(spec)


def membership_violations(src: CodewordSource, n: int) -> List[Tuple[int, int, str]]:
    """Whole blocks within n that are not code members within r of the base."""
    problems = []
    out = src.prefix(n)
    base = src.base.prefix(n)
    for a, b, _ in src.blocks(0, n):
        if b > n:
            continue
        code = src.code_for(b - a)
        dist = int(np.count_nonzero(out[a:b] != base[a:b]))
        if code is None:
            if dist:
                problems.append((a, b, "changed at radius 0"))
            continue
        word = int(pack_rows(out[None, a:b])[0])
        if word not in code.index_of:
            problems.append((a, b, "not a center"))
        if dist > code.r:
            problems.append((a, b, f"distance {dist} > {code.r}"))
    return problems
