"""Tests for s-codeword generation and the certified description ledger."""

from fractions import Fraction

import numpy as np
import pytest

from dimcodes.codeword import (
    CenterPolicy,
    CodewordSpec,
    chunk_blocks,
    codeword_radius,
    codeword_source,
    membership_violations,
)
from dimcodes.covercode import canonical_code, target_size, verify_well_distributed
from dimcodes.entropy import entropy_inv
from dimcodes.exceptions import DomainError
from dimcodes.hamming import BitBlock
from dimcodes.ledger import (
    BitReader,
    BitWriter,
    decode_ledger,
    density_code_length,
    description_ledger,
    gamma_length,
    width,
)
from dimcodes.streams import (
    BernoulliSource,
    ConstantSource,
    DyadicSource,
    chunk_bounds,
    chunk_checkpoints,
    chunk_start,
    distance_profile,
    mix,
)


def base(seed=0):
    return BernoulliSource(0.5, seed, role="base")


def half_codeword(seed=0, **kwargs):
    return codeword_source(CodewordSpec(0.5, base(seed), **kwargs))


@pytest.mark.parametrize("s, n, expected", [(1.0, 7, 0), (0.5, 8, 1), (0.0, 10, 5), (0.5, 10, 2), (0.5, 1, 1)])
def test_codeword_radius(s, n, expected):
    assert codeword_radius(s, n) == expected


def test_codeword_radius_domain():
    with pytest.raises(DomainError):
        codeword_radius(0.5, 0)


def test_spec_validation():
    assert CodewordSpec(0.5, base()).block_length == 12
    with pytest.raises(DomainError):
        CodewordSpec(1.5, base())
    with pytest.raises(DomainError):
        CodewordSpec(0.5, base(), chunk_cap=1)
    with pytest.raises(DomainError):
        CodewordSpec(0.5, base(), block_length=13)


def test_chunk_blocks():
    assert chunk_blocks(5, 12, 9) == ((0, 5),)
    assert chunk_blocks(12, 12, 9) == ((0, 12),)
    assert chunk_blocks(30, 12, 12) == ((0, 12), (12, 12), (24, 6))
    assert chunk_blocks(27, 12, 9) == ((0, 9), (9, 9), (18, 9))
    assert chunk_blocks(0, 12, 12) == ()


def test_full_dimension_codeword_is_the_base():
    src = codeword_source(CodewordSpec(1.0, base()))
    assert (src.prefix(3000) == base().prefix(3000)).all()


def test_chunk_8_is_a_center_near_the_base():
    src = half_codeword()
    lo, hi = chunk_bounds(8)
    block = BitBlock.from_bits(src.prefix(hi)[lo:hi])
    code = canonical_code(8, 1)
    assert block.value in code.index_of
    assert np.count_nonzero(src.prefix(hi)[lo:hi] != base().prefix(hi)[lo:hi]) <= 1


@pytest.mark.parametrize("policy", list(CenterPolicy))
def test_membership(policy):
    src = half_codeword(seed=3, policy=policy)
    assert membership_violations(src, chunk_start(60)) == []


def test_distance_ceiling_over_whole_chunks():
    src = half_codeword(seed=5)
    n = chunk_start(13)
    radii = sum(codeword_radius(0.5, j) for j in range(1, 13))
    profile = distance_profile(src, base(5), [n])
    assert profile.distances[0] <= radii / n


def test_prefix_is_independent_of_materialization_order():
    first = half_codeword(seed=2)
    first.prefix(37)
    first.prefix(400)
    second = half_codeword(seed=2)
    assert (first.prefix(1000) == second.prefix(1000)).all()


def test_codeword_distance_converges():
    src = half_codeword(seed=1, block_length=9, policy=CenterPolicy.FARTHEST)
    n = chunk_start(142)
    distance = distance_profile(src, base(1), [n]).distances[0]
    assert 0.09 <= distance <= 0.13


def test_nearest_policy_stays_below_the_radius_density():
    src = half_codeword(seed=1)
    n = chunk_start(142)
    assert distance_profile(src, base(1), [n]).distances[0] <= entropy_inv(0.5) + 0.02


def test_redundancy_of_canonical_codes():
    for n, r in ((8, 1), (10, 2), (12, 2)):
        first = verify_well_distributed(canonical_code(n, r)).records[0]
        assert first.q == r
        assert first.bound == 5 * (n + 1)
        assert first.max_count < 5 * (n + 1)


# Ledger

def test_gamma_code():
    writer = BitWriter()
    for k in (1, 2, 5, 17):
        writer.gamma(k)
    assert len(writer) == sum(gamma_length(k) for k in (1, 2, 5, 17))
    reader = BitReader(writer.array())
    assert [reader.gamma() for _ in range(4)] == [1, 2, 5, 17]
    with pytest.raises(DomainError):
        gamma_length(0)


def test_width():
    assert [width(c) for c in (1, 2, 3, 4, 5, 468)] == [0, 1, 2, 2, 3, 9]


def test_density_code_length():
    assert density_code_length(BitBlock.from_str("00000000")) == 12
    assert density_code_length(BitBlock.from_str("11111111")) == 12
    assert density_code_length(BitBlock.from_str("00010001")) == 20
    with pytest.raises(DomainError):
        density_code_length(BitBlock(0, 0))


def test_empty_ledger():
    ledger = description_ledger(half_codeword(), 0)
    assert ledger.total_bits == 0
    assert ledger.entries == ()
    assert ledger.ratio == 0.0


def test_zero_source_ledger_total():
    # gamma(11), one layout header (flag, kind, gamma(64), clip) with symbol and
    # gamma(1), then three repeated chunks of (flag, symbol, gamma(1))
    ledger = description_ledger(ConstantSource(0), 10)
    assert ledger.total_bits == 7 + 18 + 3 + 3 + 3
    assert ledger.payload_bits == 0
    assert [e.chunk for e in ledger.entries] == [1, 2, 3, 4]


def test_codeword_ledger_total_over_whole_chunks():
    n = chunk_start(13)
    ledger = description_ledger(half_codeword(seed=4), n)
    # one layout header; every chunk then repeats it and sends its radius once
    expected = gamma_length(n + 1) + 1 + gamma_length(12) + 1
    for j in range(1, 13):
        r = codeword_radius(0.5, j)
        expected += 1 + gamma_length(r + 1) + width(target_size(j, r))
    assert ledger.total_bits == expected
    assert ledger.payload_bits == sum(width(target_size(j, codeword_radius(0.5, j))) for j in range(1, 13))


def test_split_chunks_cost_a_flag_per_block():
    ledger = description_ledger(half_codeword(seed=5), chunk_start(25))
    later = ledger.total_bits - ledger.bits_through(chunk_start(13))
    expected = 0
    for j in range(13, 25):
        for _, length in chunk_blocks(j, 12, 12):
            expected += 1 + width(target_size(length, codeword_radius(0.5, length)))
    assert later == expected


def test_codeword_ledger_ratio_falls_with_the_horizon():
    src = half_codeword(seed=11)
    ledgers = [description_ledger(src, n) for n in (1000, 5000, 20000)]
    ratios = [ledger.ratio for ledger in ledgers]
    assert ratios == sorted(ratios, reverse=True)
    assert 0.5 < ratios[-1] < 0.9
    assert ledgers[-1].header_bits < ledgers[-1].payload_bits / 4


def test_ledger_records_accumulate():
    ledger = description_ledger(half_codeword(seed=6), 2000)
    records = ledger.records()
    assert records[-1]["cumulative_bits"] == ledger.total_bits
    assert records[-1]["cumulative_ratio"] == pytest.approx(ledger.ratio)
    assert ledger.bits_through(2000) == ledger.total_bits
    running = [row["cumulative_bits"] for row in records]
    assert running == sorted(running)


def test_ledger_is_nondecreasing_at_chunk_boundaries():
    src = half_codeword(seed=7)
    totals = [description_ledger(src, n).total_bits for n in chunk_checkpoints(1500)]
    assert totals == sorted(totals)


@pytest.mark.parametrize("make", [
    lambda: half_codeword(seed=8),
    lambda: half_codeword(seed=8, block_length=9, policy=CenterPolicy.FARTHEST),
    lambda: BernoulliSource(0.3, seed=8),
    lambda: mix(half_codeword(seed=8), BernoulliSource(0.5, seed=9), Fraction(1, 2)),
    lambda: DyadicSource(Fraction(1, 3)),
], ids=["nearest", "farthest", "bernoulli", "mix", "dyadic"])
def test_ledger_decodes_to_the_prefix(make):
    src = make()
    ledger = description_ledger(src, 3000, emit=True)
    assert len(ledger.bitstream) == ledger.total_bits
    assert (decode_ledger(ledger.bitstream) == src.prefix(3000)).all()


def test_codeword_ledger_beats_uniform_bits():
    n = 5000
    codeword = description_ledger(half_codeword(seed=10), n)
    uniform = description_ledger(base(10), n)
    assert codeword.ratio < uniform.ratio


def test_decoder_rejects_a_stream_without_headers():
    # gamma(2) announces n = 1, then a repeat flag with nothing to repeat
    with pytest.raises(DomainError):
        decode_ledger(np.array([0, 1, 0, 0], dtype=np.uint8))


@pytest.mark.slow
def test_codeword_acceptance_prefix():
    src = half_codeword(seed=0, block_length=9, policy=CenterPolicy.FARTHEST)
    n = chunk_start(142)
    assert membership_violations(src, n) == []
    ledger = description_ledger(src, 5050, emit=True)
    assert (decode_ledger(ledger.bitstream) == src.prefix(5050)).all()
