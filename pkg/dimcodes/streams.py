"""
Sequence machinery at finite scale.

Chunks I_j = [j(j-1)/2, j(j+1)/2) of length j, the dyadic interpolant b(r),
and restartable bit sources (constant, Bernoulli, b(r), Mix, XOR, thinning)
that materialize prefixes on demand.
"""

import copy
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import settings
from .covercode import CoveringCode
from .exceptions import DomainError, HorizonError
from .randomness import bernoulli_bits

logger = logging.getLogger(__name__)

_DYADIC_DENOMINATOR = 1 << 53


# Chunk layout

def chunk_start(j: int) -> int:
    return j * (j - 1) // 2


def chunk_bounds(j: int) -> Tuple[int, int]:
    """(n_j, n_{j+1}) for chunk I_j."""
    if j < 0:
        raise DomainError(f"negative chunk index {j}")
    return chunk_start(j), chunk_start(j + 1)


def chunk_of(i: int) -> int:
    """Index of the chunk holding position i."""
    return (1 + math.isqrt(1 + 8 * i)) // 2


def chunks_of(positions: np.ndarray) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.int64)
    j = ((1 + np.sqrt(1 + 8 * positions.astype(np.float64))) // 2).astype(np.int64)
    j += (j * (j + 1) // 2 <= positions)
    j -= (j * (j - 1) // 2 > positions)
    return j


def chunk_checkpoints(n: int, first: int = 2) -> List[int]:
    """Chunk boundaries n_j (j >= first) not above n."""
    points = []
    j = first
    while chunk_start(j) <= n:
        if chunk_start(j) > 0:
            points.append(chunk_start(j))
        j += 1
    return points


# The interpolant b(r)

def to_dyadic(r) -> Fraction:
    """Exact rational for r; floats snap to the nearest multiple of 2^-53."""
    if isinstance(r, str):
        r = Fraction(r)
    if isinstance(r, float):
        r = Fraction(round(r * _DYADIC_DENOMINATOR), _DYADIC_DENOMINATOR)
    r = Fraction(r)
    if not 0 <= r <= 1:
        raise DomainError(f"r={r} outside [0, 1]")
    return r


def b_bit(r, j: int) -> int:
    """
    Bit j of b(r).

    b(0) = 0^w, b(1) = 1^w, b(r) = 0^w (+) b(2r) for r <= 1/2 and
    b(2r-1) (+) 1^w above, where (+) interleaves even and odd positions.
    Each step either resolves the bit or halves j; once j = 0 a step with
    r <= 1/2 resolves it, and for r < 1 the map r -> 2r-1 reaches [0, 1/2]
    after finitely many steps.
    """
    r = to_dyadic(r)
    while True:
        if r == 0:
            return 0
        if r == 1:
            return 1
        if r <= Fraction(1, 2):
            if j % 2 == 0:
                return 0
            j, r = (j - 1) // 2, 2 * r
        else:
            if j % 2 == 1:
                return 1
            j, r = j // 2, 2 * r - 1


def b_bits(r, indices: np.ndarray) -> np.ndarray:
    """b(r) at every index of ``indices``; the r-sequence is shared by all."""
    r = to_dyadic(r)
    j = np.array(indices, dtype=np.int64, copy=True)
    out = np.zeros(len(j), dtype=np.uint8)
    open_ = np.ones(len(j), dtype=bool)
    half = Fraction(1, 2)
    while open_.any():
        if r == 0 or r == 1:
            out[open_] = int(r)
            break
        if r <= half:
            done = open_ & (j % 2 == 0)
            out[done] = 0
            open_ &= ~done
            j = np.where(open_, (j - 1) // 2, j)
            r = 2 * r
        else:
            done = open_ & (j % 2 == 1)
            out[done] = 1
            open_ &= ~done
            j = np.where(open_, j // 2, j)
            r = 2 * r - 1
    return out


def b_prefix(r, n: int) -> np.ndarray:
    return b_bits(r, np.arange(n, dtype=np.int64))


# Sources

@dataclass(frozen=True)
class LedgerSegment:
    """A span a ledger encodes as one block: by center index when ``code`` is set."""

    start: int
    stop: int
    chunk: int
    code: Optional[CoveringCode] = None
    block: Optional[int] = None

    @property
    def length(self) -> int:
        return self.stop - self.start

    @property
    def nominal(self) -> int:
        """Block length of the layout this span was cut from."""
        return self.block or self.length


def density_segments(start: int, stop: int, block: int = None) -> List[LedgerSegment]:
    """Chunk-aligned pieces of at most ``block`` bits."""
    block = settings.DENSITY_BLOCK_BITS if block is None else block
    segments = []
    pos = start
    while pos < stop:
        j = chunk_of(pos)
        end = min(stop, chunk_start(j + 1), pos + block)
        segments.append(LedgerSegment(pos, end, j, block=block))
        pos = end
    return segments


class PrefixSource:
    """
    Deterministic, restartable producer of sequence bits.

    Subclasses implement ``_materialize(start, stop)``; prefixes are cached so
    every position is computed once per source object.
    """

    kind = "source"

    def __init__(self, seed: int = 0, horizon: Optional[int] = None):
        self.seed = int(seed)
        self.horizon = horizon
        self.cursor = 0
        self._bits = np.zeros(0, dtype=np.uint8)

    def params(self) -> dict:
        return {}

    def descriptor(self) -> str:
        parts = [f"{k}={_format_param(v)}" for k, v in self.params().items()]
        parts.append(f"seed={self.seed}")
        return f"{self.kind}:" + ",".join(parts)

    def __repr__(self):
        return f"<{type(self).__name__} {self.descriptor()}>"

    def _materialize(self, start: int, stop: int) -> np.ndarray:
        raise NotImplementedError

    def prefix(self, n: int) -> np.ndarray:
        if n < 0:
            raise DomainError(f"negative prefix length {n}")
        if self.horizon is not None and n > self.horizon:
            raise HorizonError(f"{self.descriptor()}: {n} bits requested, horizon is {self.horizon}")
        have = len(self._bits)
        if n > have:
            fresh = np.asarray(self._materialize(have, n), dtype=np.uint8)
            if len(fresh) != n - have:
                raise HorizonError(f"{self.descriptor()}: produced {have + len(fresh)} of {n} bits")
            self._bits = np.concatenate([self._bits, fresh])
            self._bits.flags.writeable = False
        return self._bits[:n]

    def window(self, start: int, stop: int) -> np.ndarray:
        return self.prefix(stop)[start:stop]

    def bit(self, i: int) -> int:
        return int(self.prefix(i + 1)[i])

    def read(self, k: int) -> np.ndarray:
        bits = self.window(self.cursor, self.cursor + k)
        self.cursor += k
        return bits

    def restart(self):
        self.cursor = 0

    def clone(self) -> "PrefixSource":
        # Cached bits are immutable, so clones may share them
        return copy.copy(self)

    def ledger_segments(self, start: int, stop: int) -> List[LedgerSegment]:
        return density_segments(start, stop)


class ConstantSource(PrefixSource):
    def __init__(self, bit: int):
        super().__init__()
        if bit not in (0, 1):
            raise DomainError(f"constant bit must be 0 or 1, got {bit}")
        self.value = bit
        self.kind = "ones" if bit else "zeros"

    def _materialize(self, start, stop):
        return np.full(stop - start, self.value, dtype=np.uint8)


class BitsSource(PrefixSource):
    """A finite explicit bit string; its length is its horizon."""

    kind = "bits"

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        super().__init__(horizon=len(bits))
        self.data = bits

    def params(self):
        return {"n": len(self.data)}

    def _materialize(self, start, stop):
        return self.data[start:stop]


class BernoulliSource(PrefixSource):
    """Seeded i.i.d.-style Bernoulli(p) bits; ``role`` separates seed domains."""

    kind = "bernoulli"

    def __init__(self, p, seed: int = 0, role: str = "bernoulli"):
        super().__init__(seed)
        if not 0 <= float(p) <= 1:
            raise DomainError(f"p={p} outside [0, 1]")
        self.p = p
        self.role = role

    def params(self):
        return {"p": self.p, "role": self.role}

    def _materialize(self, start, stop):
        return bernoulli_bits(self.p, self.role, self.seed, start, stop)


class DyadicSource(PrefixSource):
    """The sequence b(r) itself."""

    kind = "dyadic"

    def __init__(self, r):
        super().__init__()
        self.r = to_dyadic(r)

    def params(self):
        return {"r": self.r}

    def _materialize(self, start, stop):
        return b_bits(self.r, np.arange(start, stop, dtype=np.int64))


class MixSource(PrefixSource):
    """Mix(src0, src1, r): chunk j is copied from src_{b(r)(j)}."""

    kind = "mix"

    def __init__(self, src0: PrefixSource, src1: PrefixSource, r):
        super().__init__()
        self.src0 = src0
        self.src1 = src1
        self.r = to_dyadic(r)

    def params(self):
        return {"r": self.r, "src0": self.src0.descriptor(), "src1": self.src1.descriptor()}

    def selector(self, j: int) -> PrefixSource:
        return self.src1 if b_bit(self.r, j) else self.src0

    def _materialize(self, start, stop):
        select = b_bits(self.r, chunks_of(np.arange(start, stop, dtype=np.int64)))
        if not select.any():
            return self.src0.window(start, stop)
        if select.all():
            return self.src1.window(start, stop)
        return np.where(select == 1, self.src1.window(start, stop), self.src0.window(start, stop))

    def ledger_segments(self, start, stop):
        segments = []
        pos = start
        while pos < stop:
            j = chunk_of(pos)
            end = min(stop, chunk_start(j + 1))
            segments.extend(self.selector(j).ledger_segments(pos, end))
            pos = end
        return segments


class XorSource(PrefixSource):
    kind = "xor"

    def __init__(self, a: PrefixSource, b: PrefixSource):
        super().__init__()
        self.a = a
        self.b = b

    def params(self):
        return {"a": self.a.descriptor(), "b": self.b.descriptor()}

    def _materialize(self, start, stop):
        return self.a.window(start, stop) ^ self.b.window(start, stop)


class ThinningSource(PrefixSource):
    """B thinning Y: keep the k-th one of Y iff bit k of B is set."""

    kind = "thin"

    def __init__(self, base: PrefixSource, selector: PrefixSource, horizon: Optional[int] = None):
        super().__init__(horizon=horizon)
        self.base = base
        self.selector = selector

    def params(self):
        return {"base": self.base.descriptor(), "selector": self.selector.descriptor()}

    def _materialize(self, start, stop):
        y = self.base.prefix(stop).astype(np.int64)
        rank = np.cumsum(y) - y
        wanted = int(rank[-1]) + 1 if stop else 0
        chosen = self.selector.prefix(wanted)[rank[start:stop]]
        return (y[start:stop] & chosen).astype(np.uint8)

    def thinned_elements(self, count: int) -> np.ndarray:
        """
        The first ``count`` elements y_{b_0} < y_{b_1} < ... of the thinned set.

        Raises:
            HorizonError: the scan horizon holds too few ones of the base or selector
        """
        horizon = self.horizon if self.horizon is not None else settings.BERNOULLI_BLOCK * 16
        ones = np.flatnonzero(self.base.prefix(horizon))
        picks = np.flatnonzero(self.selector.prefix(len(ones)))
        if len(picks) < count:
            raise HorizonError(
                f"only {len(picks)} of {count} thinned elements lie within {horizon} bits "
                f"({len(ones)} ones of the base scanned, short by {count - len(picks)})"
            )
        return ones[picks[:count]]


def bernoulli_source(p, seed: int = 0, role: str = "bernoulli") -> BernoulliSource:
    return BernoulliSource(p, seed, role)


def mix(src0: PrefixSource, src1: PrefixSource, r) -> MixSource:
    return MixSource(src0, src1, r)


def thin_by(base: PrefixSource, selector: PrefixSource, horizon: Optional[int] = None) -> ThinningSource:
    return ThinningSource(base, selector, horizon)


def complement(src: PrefixSource) -> XorSource:
    return XorSource(src, ConstantSource(1))


# Profiles

@dataclass(frozen=True)
class DistanceProfile:
    checkpoints: Tuple[int, ...]
    distances: Tuple[float, ...]
    density_a: Tuple[float, ...]
    density_b: Tuple[float, ...]
    tail: float

    def rows(self) -> List[dict]:
        return [
            {"n": n, "distance": d, "density_a": da, "density_b": db}
            for n, d, da, db in zip(self.checkpoints, self.distances, self.density_a, self.density_b)
        ]


def distance_profile(a: PrefixSource, b: PrefixSource, checkpoints: Sequence[int]) -> DistanceProfile:
    """Normalized Hamming distance and densities of two sources at each checkpoint."""
    points = [int(n) for n in checkpoints]
    if not points or points[0] < 1 or any(x >= y for x, y in zip(points, points[1:])):
        raise DomainError("checkpoints must be positive and strictly increasing")
    top = points[-1]
    xa = a.prefix(top).astype(np.int64)
    xb = b.prefix(top).astype(np.int64)
    diff = np.cumsum(xa ^ xb)
    ones_a = np.cumsum(xa)
    ones_b = np.cumsum(xb)
    idx = np.array(points) - 1
    ns = np.array(points, dtype=np.float64)
    distances = diff[idx] / ns
    tail = float(distances[len(points) // 2:].max())
    return DistanceProfile(
        tuple(points),
        tuple(float(x) for x in distances),
        tuple(float(x) for x in ones_a[idx] / ns),
        tuple(float(x) for x in ones_b[idx] / ns),
        tail,
    )


def hoeffding_tolerance(eps: float, trials: int) -> float:
    """2 exp(-2 eps^2 j), the chance a j-trial mean strays eps from its expectation."""
    if eps < 0 or trials < 0:
        raise DomainError(f"need eps >= 0 and trials >= 0 (got {eps}, {trials})")
    return 2.0 * math.exp(-2.0 * eps * eps * trials)


# Bitstream export

def export_text(src: PrefixSource, n: int) -> str:
    return (src.prefix(n) + ord("0")).astype(np.uint8).tobytes().decode("ascii")


def export_packed(src: PrefixSource, n: int) -> bytes:
    """8-byte little-endian bit count, then the bits packed MSB-first."""
    return n.to_bytes(8, "little") + np.packbits(src.prefix(n), bitorder="big").tobytes()


def import_packed(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise DomainError("packed bitstream shorter than its header")
    n = int.from_bytes(data[:8], "little")
    bits = np.unpackbits(np.frombuffer(data[8:], dtype=np.uint8), bitorder="big")
    if len(bits) < n:
        raise DomainError(f"packed bitstream holds {len(bits)} bits, header says {n}")
    return bits[:n]


def import_text(text: str) -> np.ndarray:
    text = text.strip()
    if set(text) - {"0", "1"}:
        raise DomainError("bitstream text must contain only '0' and '1'")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - np.uint8(48)


def _format_param(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str) and ":" in value:
        return f"({value})"
    return str(value)


def source_from_descriptor(text: str) -> PrefixSource:
    """Build a primitive source from ``kind:param=value,...,seed=<u64>``."""
    kind, _, body = text.strip().partition(":")
    params = dict(item.split("=", 1) for item in body.split(",") if item)
    seed = int(params.pop("seed", 0))
    if kind == "zeros":
        return ConstantSource(0)
    if kind == "ones":
        return ConstantSource(1)
    if kind == "bernoulli":
        p = Fraction(params["p"]) if "/" in params["p"] else float(params["p"])
        return BernoulliSource(p, seed, params.get("role", "bernoulli"))
    if kind == "dyadic":
        return DyadicSource(Fraction(params["r"]))
    raise DomainError(f"cannot rebuild source kind {kind!r} from a descriptor")
