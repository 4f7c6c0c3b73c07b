"""
Certified description lengths.

A prefix is written as a real self-delimiting bitstream: Elias-gamma(n+1),
then one block per ledger segment. Every block opens with a repeat flag.
A 1 starts a new layout: kind bit, gamma(nominal length) and a clip bit.
A 0 keeps the current layout. Either way the block length follows from the
layout alone: the nominal length, cut at n and, when clipped, at the end of
the current chunk. The radius of a codeword block is sent as gamma(r+1) the
first time its length appears (and on every new layout); later blocks of the
same length reuse it.

Codeword blocks carry the center index in ceil(log2 S) bits. Density blocks
carry the minority symbol, gamma(k+1) for its count k and the rank of its
pattern among the strings of weight at most k, in ceil(log2 V(b, k)) bits.

The bit counts are exact, and decode_ledger rebuilds the prefix from the
stream, so a ledger total is an auditable upper bound on description length.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .covercode import canonical_code
from .exceptions import DomainError, HorizonError
from .hamming import BitBlock, ball_rank, ball_unrank, ball_volume, pack_rows
from .streams import LedgerSegment, PrefixSource, chunk_bounds, chunk_of

logger = logging.getLogger(__name__)

KIND_DENSITY = 0
KIND_CODEWORD = 1


def gamma_length(k: int) -> int:
    """Bits of the Elias-gamma code of k >= 1."""
    if k < 1:
        raise DomainError(f"Elias gamma needs k >= 1 (got {k})")
    return 2 * (k.bit_length() - 1) + 1


def width(count: int) -> int:
    """ceil(log2 count): bits to index one of ``count`` items."""
    return (count - 1).bit_length()


class BitWriter:
    def __init__(self):
        self.bits: List[int] = []

    def __len__(self):
        return len(self.bits)

    def write(self, value: int, nbits: int):
        for shift in range(nbits - 1, -1, -1):
            self.bits.append((value >> shift) & 1)

    def gamma(self, k: int):
        gamma_length(k)
        self.write(0, k.bit_length() - 1)
        self.write(k, k.bit_length())

    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)


class BitReader:
    def __init__(self, bits):
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.pos = 0

    def read(self, nbits: int) -> int:
        if self.pos + nbits > len(self.bits):
            raise HorizonError(f"bitstream ends at {len(self.bits)}, needed {self.pos + nbits}")
        value = 0
        for bit in self.bits[self.pos:self.pos + nbits].tolist():
            value = (value << 1) | bit
        self.pos += nbits
        return value

    def gamma(self) -> int:
        zeros = 0
        while self.read(1) == 0:
            zeros += 1
        return (1 << zeros) | self.read(zeros)


@dataclass(frozen=True)
class LedgerRow:
    chunk: int
    end: int
    header_bits: int
    payload_bits: int

    @property
    def bits(self) -> int:
        return self.header_bits + self.payload_bits


@dataclass(frozen=True)
class CodeLengthLedger:
    n: int
    entries: Tuple[LedgerRow, ...]
    bitstream: Optional[np.ndarray] = None

    @property
    def header_bits(self) -> int:
        return sum(e.header_bits for e in self.entries)

    @property
    def payload_bits(self) -> int:
        return sum(e.payload_bits for e in self.entries)

    @property
    def total_bits(self) -> int:
        return self.header_bits + self.payload_bits

    @property
    def ratio(self) -> float:
        return self.total_bits / self.n if self.n else 0.0

    def records(self) -> List[dict]:
        rows, running = [], 0
        for e in self.entries:
            running += e.bits
            rows.append({
                "chunk": e.chunk,
                "header_bits": e.header_bits,
                "payload_bits": e.payload_bits,
                "cumulative_bits": running,
                "cumulative_ratio": running / e.end,
            })
        return rows

    def bits_through(self, position: int) -> int:
        """Cumulative bits of the entries whose chunks end at or before ``position``."""
        return sum(e.bits for e in self.entries if e.end <= position)


def _minority(bits: np.ndarray) -> Tuple[int, int, np.ndarray]:
    ones = int(bits.sum())
    if ones <= len(bits) - ones:
        return 1, ones, bits
    return 0, len(bits) - ones, 1 - bits


def _density_payload(bits: np.ndarray) -> Tuple[int, int, int, int]:
    """(minority symbol, k, rank, rank width) of a block."""
    symbol, k, pattern = _minority(bits)
    rank = ball_rank(BitBlock.from_bits(pattern))
    return symbol, k, rank, width(ball_volume(len(bits), k).value)


def density_code_length(block: BitBlock) -> int:
    """Bits of a stand-alone density block: layout header, symbol, gamma(k+1), rank."""
    if block.n < 1:
        raise DomainError("density code of an empty block")
    _, k, _, rank_bits = _density_payload(block.to_bits())
    return 1 + 1 + gamma_length(block.n) + 1 + 1 + gamma_length(k + 1) + rank_bits


Layout = Tuple[int, int, bool]  # (kind, nominal length, clipped at chunk ends)


def _layout_length(layout: Layout, pos: int, n: int) -> int:
    _, nominal, clipped = layout
    length = min(nominal, n - pos)
    if clipped:
        length = min(length, chunk_bounds(chunk_of(pos))[1] - pos)
    return length


def _segment_layout(kind: int, seg: LedgerSegment, n: int) -> Layout:
    for clipped in (True, False):
        if _layout_length((kind, seg.nominal, clipped), seg.start, n) == seg.length:
            return kind, seg.nominal, clipped
    return kind, seg.length, False


def description_ledger(src: PrefixSource, n: int, emit: bool = False) -> CodeLengthLedger:
    """
    Encode the first n bits of ``src`` along its ledger segments.

    Args:
        src: Any source; codeword spans are coded by center index
        n: Prefix length
        emit: Keep the encoded bitstream on the ledger

    Returns:
        CodeLengthLedger with one entry per chunk (the preamble counts toward the first)
    """
    if n < 0:
        raise DomainError(f"negative prefix length {n}")
    if n == 0:
        return CodeLengthLedger(0, (), np.zeros(0, dtype=np.uint8) if emit else None)

    bits = src.prefix(n)
    writer = BitWriter()
    writer.gamma(n + 1)
    pending = len(writer)
    per_chunk = OrderedDict()
    layout: Optional[Layout] = None
    radii = {}
    for seg in src.ledger_segments(0, n):
        block = bits[seg.start:seg.stop]
        word = int(pack_rows(block[None, :])[0]) if seg.code is not None else None
        if seg.code is not None and word not in seg.code.index_of:
            # Not a center (the source changed under us): fall back to density
            seg = LedgerSegment(seg.start, seg.stop, seg.chunk, block=seg.block)
        kind = KIND_DENSITY if seg.code is None else KIND_CODEWORD
        radius = None if seg.code is None else seg.code.r

        mark = len(writer)
        repeat = (
            layout is not None and layout[0] == kind
            and _layout_length(layout, seg.start, n) == seg.length
            and (kind == KIND_DENSITY or radii.get(seg.length, radius) == radius)
        )
        if repeat:
            writer.write(0, 1)
        else:
            layout = _segment_layout(kind, seg, n)
            writer.write(1, 1)
            writer.write(kind, 1)
            writer.gamma(layout[1])
            writer.write(int(layout[2]), 1)
        if kind == KIND_CODEWORD and (not repeat or seg.length not in radii):
            writer.gamma(radius + 1)
            radii[seg.length] = radius

        if kind == KIND_CODEWORD:
            header = len(writer) - mark
            writer.write(seg.code.index_of[word], width(seg.code.size))
        else:
            symbol, k, rank, rank_bits = _density_payload(block)
            writer.write(symbol, 1)
            writer.gamma(k + 1)
            header = len(writer) - mark
            writer.write(rank, rank_bits)
        payload = len(writer) - mark - header

        chunk_header, chunk_payload = per_chunk.get(seg.chunk, (0, 0))
        per_chunk[seg.chunk] = (chunk_header + header + pending, chunk_payload + payload)
        pending = 0

    entries = tuple(
        LedgerRow(j, min(n, chunk_bounds(j)[1]), header, payload)
        for j, (header, payload) in per_chunk.items()
    )
    ledger = CodeLengthLedger(n, entries, writer.array() if emit else None)
    if ledger.total_bits != len(writer):
        raise DomainError(f"ledger accounting drifted: {ledger.total_bits} vs {len(writer)} bits")
    logger.debug("ledger n=%d: %d header + %d payload bits", n, ledger.header_bits, ledger.payload_bits)
    return ledger


def decode_ledger(bitstream) -> np.ndarray:
    """Reference decoder: rebuild the prefix a ledger bitstream describes."""
    reader = BitReader(bitstream)
    if len(reader.bits) == 0:
        return np.zeros(0, dtype=np.uint8)
    n = reader.gamma() - 1
    out = np.zeros(n, dtype=np.uint8)
    pos = 0
    layout: Optional[Layout] = None
    radii = {}
    while pos < n:
        fresh = bool(reader.read(1))
        if fresh:
            layout = (reader.read(1), reader.gamma(), bool(reader.read(1)))
        elif layout is None:
            raise DomainError("repeat flag before any block header")
        kind = layout[0]
        length = _layout_length(layout, pos, n)
        if kind == KIND_CODEWORD and (fresh or length not in radii):
            radii[length] = reader.gamma() - 1
        if kind == KIND_CODEWORD:
            code = canonical_code(length, radii[length])
            index = reader.read(width(code.size))
            block = BitBlock(length, code.values[index]).to_bits()
        else:
            symbol = reader.read(1)
            k = reader.gamma() - 1
            rank = reader.read(width(ball_volume(length, k).value))
            block = ball_unrank(length, rank).to_bits()
            if symbol == 0:
                block = 1 - block
        out[pos:pos + length] = block
        pos += length
    return out
