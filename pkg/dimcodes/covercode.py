"""
Well-distributed covering codes.

Random codes of the target size are drawn from a seeded permutation of
{0,1}^n, verified exhaustively (covering radius, then the per-q ball counts),
and the first passing seed becomes the canonical code for (n, r). Canonical
codes are cached on disk so the code family is fixed once and for all.
"""

import logging
import os
from dataclasses import dataclass, replace
from decimal import ROUND_CEILING, Decimal, localcontext
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
from filelock import FileLock
from tqdm import tqdm

from . import settings
from .exceptions import CapExceededError, CodeSearchError, DomainError
from .hamming import BitBlock, ball_masks, ball_volume, popcount, weight_masks
from .randomness import seeded_permutation

logger = logging.getLogger(__name__)

# Exhaustive kernels keep their temporaries below this many entries
_BATCH_CELLS = 1 << 22


def _ln2_ceiling(numerator: int, denominator: int) -> int:
    """ceil(ln 2 * numerator / denominator) evaluated with 50 digits."""
    with localcontext() as ctx:
        ctx.prec = 50
        value = Decimal(2).ln() * Decimal(numerator) / Decimal(denominator)
        return int(value.to_integral_value(rounding=ROUND_CEILING))


def _check_radius(n: int, r: int):
    if r < 1:
        raise DomainError(f"covering codes need r >= 1 (got r={r})")
    if r > n:
        raise DomainError(f"radius r={r} exceeds length n={n}")


def _check_cap(operation: str, n: int, cap: Optional[int], default: int):
    limit = default if cap is None else cap
    if n > limit:
        raise CapExceededError(operation, n, limit)


def target_size(n: int, r: int) -> int:
    """S = ceil(ln 2 (n+1) 2^n / V(n, r))."""
    _check_radius(n, r)
    return _ln2_ceiling((n + 1) << n, ball_volume(n, r).value)


def distribution_bound(n: int, r: int, q: int) -> int:
    """S_q = ceil(5 (n+1) V(n, q) / V(n, r))."""
    return -(-5 * (n + 1) * ball_volume(n, q).value // ball_volume(n, r).value)


def delsarte_piret_size(n: int, r: int) -> int:
    """Upper side of the minimum-cover sandwich, ceil(ln 2 n 2^n / V(n, r))."""
    if r == 0:
        return 1 << n
    return _ln2_ceiling(n << n, ball_volume(n, r).value)


@dataclass(frozen=True)
class CoveringCode:
    n: int
    r: int
    seed: int
    values: Tuple[int, ...]
    verified: bool = False

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def target_size(self) -> int:
        return target_size(self.n, self.r)

    @property
    def centers(self) -> List[BitBlock]:
        return [BitBlock(self.n, v) for v in self.values]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)

    @cached_property
    def index_of(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.values)}

    @cached_property
    def nearest_table(self) -> np.ndarray:
        """Index of the nearest center (ties: least center) for every word."""
        return _decode_table(self, None)

    def farthest_table(self, radius: int) -> np.ndarray:
        """Index of the farthest center within ``radius`` (-1 when none) for every word."""
        tables = self.__dict__.setdefault("_farthest", {})
        if radius not in tables:
            tables[radius] = _decode_table(self, radius)
        return tables[radius]


@dataclass(frozen=True)
class DistributionRecord:
    q: int
    max_count: int
    bound: int


@dataclass(frozen=True)
class DistributionReport:
    records: Tuple[DistributionRecord, ...]
    passed: bool

    def failures(self) -> List[DistributionRecord]:
        return [rec for rec in self.records if rec.max_count >= rec.bound]


@dataclass(frozen=True)
class BallCover:
    n: int
    q: int
    r: int
    seed: int
    values: Tuple[int, ...]
    target: int
    attempts: int = 1

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def centers(self) -> List[BitBlock]:
        return [BitBlock(self.n, v) for v in self.values]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


def build_random_code(n: int, r: int, seed: int, cap: Optional[int] = None) -> CoveringCode:
    """
    Draw S distinct centers from a seeded permutation of {0,1}^n.

    Args:
        n: Block length
        r: Covering radius the code is sized for
        seed: Seed of the permutation
        cap: Largest n accepted (defaults to EXHAUSTIVE_CAP)

    Returns:
        An unverified CoveringCode with centers in construction order
    """
    _check_radius(n, r)
    _check_cap("build_random_code", n, cap, settings.EXHAUSTIVE_CAP)
    size = target_size(n, r)
    if size > (1 << n):
        raise DomainError(f"target size {size} exceeds the 2^{n} available words")
    order = seeded_permutation(1 << n, f"covercode/{n}/{r}", seed)
    return CoveringCode(n, r, seed, tuple(int(v) for v in order[:size]))


def covered_words(n: int, centers: np.ndarray, r: int) -> np.ndarray:
    """Boolean map of the words within distance r of some center."""
    covered = np.zeros(1 << n, dtype=bool)
    masks = ball_masks(n, r)
    # Loop over whichever side is shorter
    if len(centers) <= len(masks):
        for c in centers:
            covered[c ^ masks] = True
    else:
        for m in masks:
            covered[centers ^ m] = True
    return covered


def verify_covering_radius(code: CoveringCode, cap: Optional[int] = None) -> bool:
    """Exhaustive check that every word lies within r of a center."""
    _check_cap("verify_covering_radius", code.n, cap, settings.EXHAUSTIVE_CAP)
    if not code.values:
        return False
    return bool(covered_words(code.n, code.array, code.r).all())


def verify_well_distributed(code: CoveringCode, cap: Optional[int] = None) -> DistributionReport:
    """Exhaustive max over words of |B_q(word) & C| against S_q, for q in [r, n]."""
    n, r = code.n, code.r
    _check_cap("verify_well_distributed", n, cap, settings.WELL_DISTRIBUTED_CAP)
    centers = code.array
    counts = np.zeros(1 << n, dtype=np.int64)
    records = []
    for w in range(n + 1):
        masks = weight_masks(n, w)
        batch = max(1, _BATCH_CELLS // len(masks))
        for lo in range(0, len(centers), batch):
            hits = (centers[lo:lo + batch, None] ^ masks[None, :]).ravel()
            counts += np.bincount(hits, minlength=1 << n)
        if w >= r:
            records.append(DistributionRecord(w, int(counts.max()), distribution_bound(n, r, w)))
    passed = all(rec.max_count < rec.bound for rec in records)
    return DistributionReport(tuple(records), passed)


def _decode_table(code: CoveringCode, radius: Optional[int]) -> np.ndarray:
    n = code.n
    centers = code.array
    words = np.arange(1 << n, dtype=np.int64)
    table = np.empty(1 << n, dtype=np.int64)
    batch = max(1, _BATCH_CELLS // max(1, len(centers)))
    for lo in range(0, len(words), batch):
        dist = popcount(words[lo:lo + batch, None] ^ centers[None, :]).astype(np.int64)
        if radius is None:
            key = dist * (1 << n) + centers[None, :]
        else:
            key = np.where(dist <= radius, (radius - dist) * (1 << n) + centers[None, :],
                           np.iinfo(np.int64).max)
        best = key.argmin(axis=1)
        if radius is not None:
            best = np.where(key[np.arange(len(best)), best] == np.iinfo(np.int64).max, -1, best)
        table[lo:lo + batch] = best
    return table


def nearest_center(code: CoveringCode, word: BitBlock) -> Tuple[BitBlock, int]:
    """Closest center to ``word``; ties go to the lexicographically least center."""
    if word.n != code.n:
        raise DomainError(f"length mismatch: word {word.n} vs code {code.n}")
    if not code.values:
        raise DomainError("nearest_center on an empty code")
    dist = popcount(code.array ^ word.value)
    best = int(dist.min())
    value = int(code.array[dist == best].min())
    return BitBlock(code.n, value), best


def farthest_within(code: CoveringCode, word: BitBlock, radius: int) -> Tuple[BitBlock, int]:
    """Center at the largest distance not above ``radius``; ties to the least center."""
    if word.n != code.n:
        raise DomainError(f"length mismatch: word {word.n} vs code {code.n}")
    dist = popcount(code.array ^ word.value)
    inside = dist <= radius
    if not inside.any():
        raise DomainError(f"no center within {radius} of {word}")
    best = int(dist[inside].max())
    value = int(code.array[inside & (dist == best)].min())
    return BitBlock(code.n, value), best


# Persistence

def code_path(n: int, r: int, directory: Optional[str] = None) -> str:
    directory = settings.code_cache_dir() if directory is None else directory
    return os.path.join(directory, f"covercode_n{n}_r{r}.txt")


def write_code(code: CoveringCode, path: str):
    """Write a code in the v1 text format (create-then-rename)."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="ascii", newline="\n") as f:
        f.write(f"{settings.CODE_FORMAT_ID} n={code.n} r={code.r} seed={code.seed} S={code.size}\n")
        for value in code.values:
            f.write(format(value, f"0{code.n}b") + "\n")
    os.replace(tmp, path)


def read_code(path: str, verified: bool = True) -> CoveringCode:
    with open(path, "r", encoding="ascii") as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith(settings.CODE_FORMAT_ID + " "):
        raise DomainError(f"{path}: not a {settings.CODE_FORMAT_ID} file")
    fields = dict(item.split("=", 1) for item in lines[0][len(settings.CODE_FORMAT_ID):].split())
    n, r, seed, size = (int(fields[k]) for k in ("n", "r", "seed", "S"))
    rows = [row for row in lines[1:] if row]
    if len(rows) != size or any(len(row) != n for row in rows):
        raise DomainError(f"{path}: body does not match header S={size}, n={n}")
    return CoveringCode(n, r, seed, tuple(int(row, 2) for row in rows), verified=verified)


def search_canonical(n: int, r: int, cap: Optional[int] = None) -> CoveringCode:
    """Smallest seed whose random code passes both exhaustive checks."""
    stats = {"covering": 0, "distribution": 0}
    seeds = range(settings.SEED_RETRY_CAP)
    if settings.SHOW_PROGRESS:
        seeds = tqdm(seeds, desc=f"code n={n} r={r}", leave=False)
    for seed in seeds:
        code = build_random_code(n, r, seed, cap=cap)
        if not verify_covering_radius(code, cap=cap):
            stats["covering"] += 1
            continue
        report = verify_well_distributed(code, cap=cap)
        if not report.passed:
            stats["distribution"] += 1
            continue
        logger.info("canonical code n=%d r=%d: seed %d (S=%d, rejected %s)",
                    n, r, seed, code.size, stats)
        return replace(code, verified=True)
    raise CodeSearchError(n, r, settings.SEED_RETRY_CAP, stats)


class CodeCache:
    """In-memory memo backed by one file per (n, r) in the cache directory."""

    def __init__(self):
        self.memo = {}

    def get(self, n: int, r: int, cap: Optional[int] = None) -> CoveringCode:
        directory = settings.code_cache_dir()
        key = (directory, n, r)
        if key in self.memo:
            return self.memo[key]

        path = code_path(n, r, directory)
        os.makedirs(directory, exist_ok=True)
        with FileLock(path + ".lock"):
            if os.path.exists(path):
                code = read_code(path)
                if (code.n, code.r) != (n, r):
                    raise DomainError(f"{path}: holds n={code.n} r={code.r}")
                logger.debug("loaded canonical code n=%d r=%d from %s", n, r, path)
            else:
                code = search_canonical(n, r, cap=cap)
                write_code(code, path)
        self.memo[key] = code
        return code

    def clear(self):
        self.memo.clear()


CODE_CACHE = CodeCache()


def canonical_code(n: int, r: int, cap: Optional[int] = None) -> CoveringCode:
    """The fixed verified code C^n_r."""
    _check_radius(n, r)
    _check_cap("canonical_code", n, cap, settings.EXHAUSTIVE_CAP)
    return CODE_CACHE.get(n, r, cap=cap)


# Exact minimum covers

class ExactCoverSearch:
    """Branch and bound for K(n, r) over int bitsets of {0,1}^n."""

    def __init__(self, n: int, r: int):
        self.n = n
        self.r = r
        self.words = 1 << n
        self.full = (1 << self.words) - 1
        masks = ball_masks(n, r).tolist()
        self.balls = []
        for x in range(self.words):
            bits = 0
            for m in masks:
                bits |= 1 << (x ^ m)
            self.balls.append(bits)
        self.gain = len(masks)
        self.best = None
        self.nodes = 0

    def init_upper_bound(self):
        # Greedy cover as the first incumbent
        uncovered, count = self.full, 0
        while uncovered:
            x = max(range(self.words), key=lambda c: (uncovered & self.balls[c]).bit_count())
            uncovered &= ~self.balls[x]
            count += 1
        self.best = count

    def bound(self, uncovered: int, count: int) -> bool:
        left = uncovered.bit_count()
        return count + -(-left // self.gain) >= self.best

    def branch(self, uncovered: int, count: int):
        self.nodes += 1
        if not uncovered:
            self.best = min(self.best, count)
            return
        if self.bound(uncovered, count):
            return
        # Some center must cover the lowest uncovered word
        low = (uncovered & -uncovered).bit_length() - 1
        options = [x for x in range(self.words) if self.balls[x] >> low & 1]
        options.sort(key=lambda x: -(uncovered & self.balls[x]).bit_count())
        for x in options:
            self.branch(uncovered & ~self.balls[x], count + 1)

    def run(self) -> int:
        self.init_upper_bound()
        # The cube's symmetry group is transitive, so one center can be 0^n
        self.branch(self.full & ~self.balls[0], 1)
        return self.best


def min_cover_size_exact(n: int, r: int, cap: Optional[int] = None) -> int:
    """Exact K(n, r), the minimum size of a radius-r covering code."""
    _check_cap("min_cover_size_exact", n, cap, settings.MIN_COVER_CAP)
    if n < 0 or not 0 <= r <= n:
        raise DomainError(f"radius r={r} outside [0, n={n}]")
    if r == 0:
        return 1 << n
    search = ExactCoverSearch(n, r)
    best = search.run()
    logger.debug("K(%d,%d)=%d after %d nodes", n, r, best, search.nodes)
    return best


# Covers of a ball by smaller balls

def ball_cover_target(n: int, q: int, r: int) -> int:
    return _ln2_ceiling((n + 1) * ball_volume(n, q).value, ball_volume(n, r).value)


def ball_cover(n: int, q: int, r: int, seed: int, cap: Optional[int] = None) -> BallCover:
    """
    Cover B_q(0^n) by radius-r balls centred inside it.

    Starts from the target count and doubles it until the sample covers,
    verifying every attempt exhaustively.
    """
    if n < 0 or not 0 <= r <= q <= n:
        raise DomainError(f"ball_cover needs 0 <= r <= q <= n (got n={n}, q={q}, r={r})")
    _check_cap("ball_cover", n, cap, settings.EXHAUSTIVE_CAP)
    target = ball_cover_target(n, q, r)
    if q == r:
        return BallCover(n, q, r, seed, (0,), target)

    members = ball_masks(n, q)
    count = min(target, len(members))
    for attempt in range(1, settings.BALL_COVER_RETRY_CAP + 1):
        order = seeded_permutation(len(members), f"ballcover/{n}/{q}/{r}/{attempt}", seed)
        centers = members[order[:count]]
        if covered_words(n, centers, r)[members].all():
            logger.debug("ball cover n=%d q=%d r=%d: %d centers (target %d, attempt %d)",
                         n, q, r, count, target, attempt)
            return BallCover(n, q, r, seed, tuple(int(c) for c in centers), target, attempt)
        count = min(2 * count, len(members))
    raise CodeSearchError(n, r, settings.BALL_COVER_RETRY_CAP, {"uncovered": settings.BALL_COVER_RETRY_CAP})
