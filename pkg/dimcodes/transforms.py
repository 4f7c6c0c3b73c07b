"""
Dimension-changing constructions.

raise_dimension XORs in Bernoulli noise; lower_bernoulli swaps each block for
a nearby center of a cover of its own weight class; worst_case_lower spends
its changes in stages [l_j, l_j + m_j) through the codes of radius ceil(c b).
Every construction reports a ChangeLog so distance claims can be audited.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import settings
from .codeword import CenterPolicy, CodewordSpec, codeword_source
from .covercode import BallCover, ball_cover, canonical_code
from .entropy import critical_profile, entropy, entropy_inv, interpolation_ratio
from .exceptions import DomainError, HorizonError
from .hamming import pack_rows, popcount, unpack_values
from .ledger import description_ledger
from .streams import (
    BernoulliSource, DistanceProfile, LedgerSegment, MixSource, PrefixSource,
    XorSource, chunk_of, distance_profile, thin_by,
)

logger = logging.getLogger(__name__)

_NEAR_INTEGER = 1e-9


def _ceil(x: float) -> int:
    return max(0, math.ceil(x - _NEAR_INTEGER))


# Change accounting

@dataclass
class ChangeLog:
    """Changed positions of an output against its input, grouped by block."""

    positions: np.ndarray
    blocks: Tuple[Tuple[int, int, int], ...]
    checkpoints: Tuple[int, ...]
    densities: Tuple[float, ...]

    @classmethod
    def from_streams(cls, before: np.ndarray, after: np.ndarray,
                     blocks: Sequence[Tuple[int, int]], checkpoints: Sequence[int]) -> "ChangeLog":
        positions = np.flatnonzero(np.asarray(before) != np.asarray(after))
        grouped = []
        for a, b in blocks:
            lo, hi = np.searchsorted(positions, [a, b])
            grouped.append((int(a), int(b), int(hi - lo)))
        points = tuple(sorted({int(n) for n in checkpoints if n > 0}))
        counts = np.searchsorted(positions, points)
        densities = tuple(float(c) / n for c, n in zip(counts, points))
        return cls(positions, tuple(grouped), points, densities)

    @property
    def changes(self) -> int:
        return len(self.positions)

    def max_block_changes(self) -> int:
        return max((k for _, _, k in self.blocks), default=0)

    def position_rows(self) -> List[dict]:
        return [{"position": int(p)} for p in self.positions]

    def density_rows(self) -> List[dict]:
        return [{"n": n, "change_density": d} for n, d in zip(self.checkpoints, self.densities)]


# Raising

class RaisedSource(XorSource):
    kind = "raise"

    def __init__(self, base: PrefixSource, noise: BernoulliSource, s: float, t: float):
        super().__init__(base, noise)
        self.noise = noise
        self.s = s
        self.t = t

    def params(self):
        return {"s": self.s, "t": self.t, "a": self.a.descriptor(), "b": self.b.descriptor()}


def raise_dimension(x: PrefixSource, s: float, t: float, seed: int = 0) -> RaisedSource:
    """X XOR a Bernoulli(H^-1(t - s)) stream; lands at distance H^-1(t - s)."""
    if t < s:
        raise DomainError(f"raise_dimension needs t >= s (got s={s}, t={t})")
    noise = BernoulliSource(entropy_inv(t - s), seed, role="raise")
    return RaisedSource(x, noise, s, t)


# Bernoulli lowering

class BernoulliLoweredSource(PrefixSource):
    """
    Blocks of X replaced by the nearest center of a cover of their weight ball.

    A trailing partial block at the horizon of a finite X is copied unchanged.
    """

    kind = "lower-bernoulli"

    def __init__(self, base: PrefixSource, s: float, t: float, block: int, seed: int = 0):
        super().__init__(seed, horizon=base.horizon)
        if t > s:
            raise DomainError(f"lowering needs t <= s (got s={s}, t={t})")
        if block < 1 or block > settings.EXHAUSTIVE_CAP:
            raise DomainError(f"block {block} outside [1, {settings.EXHAUSTIVE_CAP}]")
        self.base = base
        self.s = s
        self.t = t
        self.block = block
        self.radius = _ceil(entropy_inv(s - t) * block)
        self.covers: Dict[int, BallCover] = {}

    def params(self):
        return {"s": self.s, "t": self.t, "block": self.block, "base": self.base.descriptor()}

    def cover(self, weight: int) -> BallCover:
        q = max(weight, self.radius)
        if q not in self.covers:
            self.covers[q] = ball_cover(self.block, q, self.radius, self.seed)
        return self.covers[q]

    def _materialize(self, start, stop):
        b = self.block
        lo, hi = (start // b) * b, -(-stop // b) * b
        if self.horizon is not None:
            hi = min(hi, self.horizon)
        base = self.base.window(lo, hi)
        whole = (hi - lo) // b * b
        if self.radius == 0 or whole == 0:
            return base[start - lo:stop - lo]
        rows = base[:whole].reshape(-1, b)
        words = pack_rows(rows)
        weights = popcount(words).astype(np.int64)
        out = words.copy()
        for w in np.unique(weights):
            pick = weights == w
            centers = self.cover(int(w)).array
            dist = popcount(words[pick, None] ^ centers[None, :]).astype(np.int64)
            key = dist * (1 << b) + centers[None, :]
            out[pick] = centers[key.argmin(axis=1)]
        lowered = np.concatenate([unpack_values(out, b).ravel(), base[whole:]])
        return lowered[start - lo:stop - lo]


def lower_bernoulli(x: PrefixSource, s: float, t: float, block: int = settings.CHUNK_CAP,
                    n: int = 10 ** 5, seed: int = 0) -> Tuple[BernoulliLoweredSource, ChangeLog]:
    """
    Lower a Bernoulli-like X toward dimension t block by block.

    Args:
        x: Input source
        s: Dimension of the input
        t: Target dimension, t <= s
        block: Block length b (at most the exhaustive cap)
        n: Prefix length the ChangeLog covers
        seed: Seed of the ball covers

    Returns:
        The lowered source and its ChangeLog over the first n bits
    """
    out = BernoulliLoweredSource(x, s, t, block, seed)
    blocks = [(a, min(a + block, n)) for a in range(0, n, block)]
    log = ChangeLog.from_streams(x.prefix(n), out.prefix(n), blocks, [b for _, b in blocks])
    logger.info("lower_bernoulli s=%g t=%g b=%d: %d changes in %d bits (radius %d)",
                s, t, block, log.changes, n, out.radius)
    return out, log


# Worst-case lowering

class ScheduleMode(str, enum.Enum):
    FAITHFUL = "faithful"
    RELAXED = "relaxed"


@dataclass(frozen=True)
class LoweringSchedule:
    s: float
    t: float
    c: float
    t_star: float
    ratio: float
    mode: ScheduleMode
    growth: float
    horizon: int
    ell: Tuple[int, ...]
    m: Tuple[int, ...]

    @property
    def stages(self) -> int:
        return len(self.ell)

    def stage_end(self, j: int) -> int:
        return self.ell[j] + self.m[j]

    def record(self) -> dict:
        return {
            "s": self.s, "t": self.t, "c": self.c, "t_star": self.t_star, "ratio": self.ratio,
            "mode": self.mode.value, "growth": self.growth, "horizon": self.horizon,
            "ell": list(self.ell), "m": list(self.m),
        }


def change_count(s: float, t: float, ell: int) -> int:
    profile = critical_profile(s)
    return _ceil((s - t) / (t - profile.t_star) * ell)


def lowering_schedule(s: float, t: float, ell_1: int, mode=ScheduleMode.RELAXED,
                      growth: float = settings.RELAXED_GROWTH, horizon: int = 10 ** 5) -> LoweringSchedule:
    """
    Stage starts l_j and change counts m_j = ceil((s-t)/(t-t*) l_j).

    Faithful mode spaces stages by l_{j+1} = ceil(l_j (1 + (s-t)/(t-t*)))^2 + 1,
    relaxed mode by l_{j+1} = ceil((l_j + m_j) G). Stages are kept while
    l_j + m_j fits in the horizon.
    """
    mode = ScheduleMode(mode)
    profile = critical_profile(s)
    if not profile.t_star < t < s:
        raise DomainError(
            f"worst-case lowering needs t in (1 - H(c), s) = ({profile.t_star:.6g}, {s:.6g}), got t={t}"
        )
    if ell_1 < 1:
        raise DomainError(f"l_1 must be positive (got {ell_1})")
    if mode is ScheduleMode.RELAXED and growth < 2:
        raise DomainError(f"relaxed growth must be at least 2 (got {growth})")

    spread = (s - t) / (t - profile.t_star)
    ell, m = [], []
    current = int(ell_1)
    while True:
        changes = _ceil(spread * current)
        if current + changes > horizon:
            break
        ell.append(current)
        m.append(changes)
        if mode is ScheduleMode.FAITHFUL:
            current = math.ceil(current * (1 + spread) - _NEAR_INTEGER) ** 2 + 1
        else:
            current = math.ceil((current + changes) * growth - _NEAR_INTEGER)
    if not ell:
        raise HorizonError(f"first stage l_1 + m_1 = {ell_1 + _ceil(spread * ell_1)} exceeds horizon {horizon}")
    return LoweringSchedule(s, t, profile.c, profile.t_star, profile.ratio, mode,
                            float(growth), int(horizon), tuple(ell), tuple(m))


class WorstCaseSource(PrefixSource):
    """
    X with every stage [l_j, l_j + m_j) replaced block by block by nearest
    centers of canonical_code(b, ceil(c b)). A stage whose m_j is not a
    multiple of b ends in one shorter block of length m_j mod b.
    """

    kind = "lower-worst"

    def __init__(self, base: PrefixSource, schedule: LoweringSchedule, block: int = settings.CHUNK_CAP):
        super().__init__(base.seed, horizon=schedule.horizon)
        if block < 1 or block > settings.EXHAUSTIVE_CAP:
            raise DomainError(f"block {block} outside [1, {settings.EXHAUSTIVE_CAP}]")
        self.base = base
        self.schedule = schedule
        self.block = block

    def params(self):
        sc = self.schedule
        return {"s": sc.s, "t": sc.t, "mode": sc.mode.value, "l1": sc.ell[0],
                "block": self.block, "base": self.base.descriptor()}

    def block_length(self, j: int) -> int:
        previous = self.block if j == 0 else self.schedule.ell[j - 1]
        return min(previous, self.block)

    @cached_property
    def replaced(self) -> Tuple[Tuple[int, int, int], ...]:
        """(start, stop, stage) of every replaced block, in order."""
        spans = []
        for j in range(self.schedule.stages):
            b = self.block_length(j)
            start = self.schedule.ell[j]
            full, rest = divmod(self.schedule.m[j], b)
            for k in range(full):
                spans.append((start + k * b, start + (k + 1) * b, j))
            if rest:
                spans.append((start + full * b, self.schedule.stage_end(j), j))
        return tuple(spans)

    def code_for(self, length: int):
        return canonical_code(length, max(1, _ceil(self.schedule.c * length)))

    def _spans(self, start, stop):
        return [span for span in self.replaced if span[1] > start and span[0] < stop]

    def _materialize(self, start, stop):
        spans = self._spans(start, stop)
        lo = min([start] + [a for a, _, _ in spans])
        hi = max([stop] + [b for _, b, _ in spans])
        out = self.base.window(lo, hi).copy()
        for a, b, _ in spans:
            code = self.code_for(b - a)
            word = int(pack_rows(out[None, a - lo:b - lo])[0])
            center = code.array[code.nearest_table[word]]
            out[a - lo:b - lo] = unpack_values(np.array([center]), b - a)[0]
        return out[start - lo:stop - lo]

    def checkpoints(self) -> List[int]:
        points = []
        for j in range(self.schedule.stages):
            b = self.block_length(j)
            start = self.schedule.ell[j]
            points.extend(start + k * b for k in range(self.schedule.m[j] // b + 1))
            points.append(self.schedule.stage_end(j))
        return sorted(set(points))

    def ledger_segments(self, start, stop):
        segments: List[LedgerSegment] = []
        pos = start
        for a, b, _ in self._spans(start, stop):
            if a >= start and b <= stop:
                if pos < a:
                    segments.extend(self.base.ledger_segments(pos, a))
                segments.append(LedgerSegment(a, b, chunk_of(a), self.code_for(b - a), self.block))
                pos = b
        if pos < stop:
            segments.extend(self.base.ledger_segments(pos, stop))
        return segments


def worst_case_lower(x: PrefixSource, s: float, t: float, schedule: LoweringSchedule,
                     block: int = settings.CHUNK_CAP, n: Optional[int] = None) -> Tuple[WorstCaseSource, ChangeLog]:
    """
    Staged worst-case lowering of X.

    Args:
        x: Input source of dimension s
        s: Dimension of the input
        t: Target dimension; must match the schedule
        schedule: Output of lowering_schedule
        block: Cap on the replaced block length
        n: Prefix length of the ChangeLog (defaults to the schedule horizon)

    Returns:
        The lowered source and its ChangeLog with one checkpoint per replaced block
    """
    if not (math.isclose(schedule.s, s) and math.isclose(schedule.t, t)):
        raise DomainError(f"schedule is for s={schedule.s}, t={schedule.t}, not s={s}, t={t}")
    n = schedule.horizon if n is None else n
    if n > schedule.horizon:
        raise HorizonError(f"ChangeLog over {n} bits exceeds the schedule horizon {schedule.horizon}")
    out = WorstCaseSource(x, schedule, block)
    blocks = [(a, b) for a, b, _ in out.replaced if b <= n]
    log = ChangeLog.from_streams(x.prefix(n), out.prefix(n), blocks,
                                 [p for p in out.checkpoints() if p <= n])
    logger.info("worst_case_lower s=%g t=%g: %d stages, %d blocks, %d changes",
                s, t, schedule.stages, len(blocks), log.changes)
    return out, log


def checkpoint_bound(schedule: LoweringSchedule, stage: int, k: int, block: int) -> float:
    """c k b / (l_j + k b) + b / l_j, the distance ceiling at l_j + k b."""
    ell = schedule.ell[stage]
    return schedule.c * k * block / (ell + k * block) + block / ell


def stage_end_bound(s: float, t: float) -> float:
    """c (s - t) / (s - 1 + H(c)), the distance reached at the end of a stage."""
    profile = critical_profile(s)
    return profile.c * (s - t) / (s - 1.0 + entropy(profile.c))


# Lower-bound inequalities

@dataclass(frozen=True)
class LowerBoundCheck:
    passed: bool
    linear_slack: Optional[float]
    entropy_slack: Optional[float]


def lower_bound_check(s: float, t: float, d: float) -> LowerBoundCheck:
    """
    Both necessary conditions for a dimension-t sequence at distance d.

    s - t <= ratio d always, and s - t <= s - 1 + H(d) once d >= c.
    """
    if not 0.0 <= d <= 0.5:
        raise DomainError(f"d={d} outside [0, 1/2]")
    profile = critical_profile(s)
    drop = s - t
    linear = None if profile.ratio is None else profile.ratio * d - drop
    entropic = s - 1.0 + entropy(d) - drop if d >= profile.c else None
    slacks = [x for x in (linear, entropic) if x is not None]
    return LowerBoundCheck(all(x >= -1e-12 for x in slacks), linear, entropic)


@dataclass
class LoweringCertificate:
    t: float
    ledger_ratio: float
    distance: float
    check: LowerBoundCheck
    tolerance: float

    @property
    def certified(self) -> bool:
        """The ledger ratio reaches the target dimension."""
        return self.ledger_ratio <= self.t + self.tolerance

    @property
    def passed(self) -> bool:
        return self.certified and self.check.passed

    def reason(self) -> str:
        if not self.certified:
            return (f"not certified: ledger ratio {self.ledger_ratio:.4f} exceeds "
                    f"t + {self.tolerance:g} = {self.t + self.tolerance:.4f}")
        if not self.check.passed:
            return f"distance {self.distance:.4f} violates the lower bound for t={self.ledger_ratio:.4f}"
        return "certified"


def certify_lowering(s: float, t: float, ledger_ratio: float, distance: float,
                     tolerance: float = settings.CERTIFY_TOLERANCE) -> LoweringCertificate:
    """
    Audit a lowered output: its ledger ratio must reach t, and the pair
    (distance, ledger ratio) must satisfy lower_bound_check.
    """
    check = lower_bound_check(s, ledger_ratio, min(0.5, distance))
    return LoweringCertificate(t, ledger_ratio, distance, check, tolerance)


# Interpolation

@dataclass
class InterpolationResult:
    r: float
    against_ref: DistanceProfile
    against_x0: DistanceProfile
    against_x1: DistanceProfile
    ledger_ratio: Optional[float] = None


def interpolate_family(x0: PrefixSource, x1: PrefixSource, r_grid: Sequence, ref: PrefixSource,
                       checkpoints: Sequence[int], with_ledger: bool = False) -> List[InterpolationResult]:
    """Profiles of Mix(x0, x1, r) against ref, x0 and x1 for every r in the grid."""
    results = []
    n = int(checkpoints[-1])
    for r in r_grid:
        mixed = MixSource(x0, x1, r)
        result = InterpolationResult(
            float(r),
            distance_profile(mixed, ref, checkpoints),
            distance_profile(mixed, x0, checkpoints),
            distance_profile(mixed, x1, checkpoints),
        )
        if with_ledger:
            result.ledger_ratio = description_ledger(mixed, n).ratio
        results.append(result)
    return results


@dataclass
class ThinningInterpolation:
    x0: PrefixSource
    x1: PrefixSource
    mixed: MixSource
    ratio: float


def thinning_interpolation(base: PrefixSource, s: float, d: float, seed: int = 0,
                           policy=CenterPolicy.FARTHEST, block_length: Optional[int] = None) -> ThinningInterpolation:
    """
    A sequence at distance d from a uniform base: Mix of an s-codeword around the
    base and the base thinned by a Bernoulli(2 H^-1(s)) selection.
    """
    x0 = codeword_source(CodewordSpec(s, base, block_length=block_length, policy=policy))
    selector = BernoulliSource(2.0 * entropy_inv(s), seed, role="thin")
    x1 = thin_by(base, selector)
    ratio = interpolation_ratio(s, d)
    return ThinningInterpolation(x0, x1, MixSource(x0, x1, ratio), ratio)


@dataclass
class LoweredToDimension:
    target: PrefixSource
    mixed: MixSource
    branch: str
    schedule: Optional[LoweringSchedule] = None
    changes: Optional[ChangeLog] = None


def lower_to_dimension(x: PrefixSource, s: float, t: float, r, ell_1: int = 100,
                       mode=ScheduleMode.RELAXED, growth: float = settings.RELAXED_GROWTH,
                       block: int = settings.CHUNK_CAP, horizon: int = 10 ** 5) -> LoweredToDimension:
    """
    Finite-scale lowering pipeline: build the extreme target for (s, t), then Mix(X, target, r).

    Below the breakpoint t* the target is a t-codeword around X itself; above it
    the target is the worst-case lowering output.
    """
    if t > s:
        raise DomainError(f"lowering needs t <= s (got s={s}, t={t})")
    profile = critical_profile(s)
    if t <= profile.t_star:
        target = codeword_source(CodewordSpec(t, x, block_length=block))
        return LoweredToDimension(target, MixSource(x, target, r), "codeword")
    if t >= s:
        return LoweredToDimension(x, MixSource(x, x, r), "identity")
    schedule = lowering_schedule(s, t, ell_1, mode=mode, growth=growth, horizon=horizon)
    target, log = worst_case_lower(x, s, t, schedule, block=block)
    return LoweredToDimension(target, MixSource(x, target, r), "worst-case", schedule, log)
