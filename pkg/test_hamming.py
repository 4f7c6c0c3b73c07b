"""Tests for bit blocks, Hamming balls and the array helpers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimcodes.exceptions import DomainError
from dimcodes.hamming import (
    BitBlock,
    ball_masks,
    ball_rank,
    ball_unrank,
    ball_volume,
    density,
    enumerate_ball,
    hamming_distance,
    pack_rows,
    popcount,
    unpack_values,
    volume_entropy_gap,
    weight_masks,
)


def test_bitblock_leftmost_is_most_significant():
    block = BitBlock.from_str("0110")
    assert block.value == 6
    assert [block[i] for i in range(4)] == [0, 1, 1, 0]
    assert str(block) == "0110"
    assert block.weight == 2


def test_bitblock_order_is_lexicographic():
    words = [BitBlock.from_str(w) for w in ("101", "011", "110", "001")]
    assert [str(w) for w in sorted(words)] == ["001", "011", "101", "110"]


def test_bitblock_long_blocks():
    text = "1" + "0" * 68 + "1"
    block = BitBlock.from_str(text)
    bits = block.to_bits()
    assert len(bits) == 70
    assert bits[0] == 1 and bits[-1] == 1 and bits[1:-1].sum() == 0
    assert BitBlock.from_bits(bits) == block


def test_bitblock_rejects_bad_input():
    with pytest.raises(DomainError):
        BitBlock.from_str("0120")
    with pytest.raises(DomainError):
        BitBlock(3, 8)
    with pytest.raises(IndexError):
        BitBlock(3, 1)[3]


def test_hamming_distance_and_density():
    a = BitBlock.from_str("11001")
    b = BitBlock.from_str("10011")
    assert hamming_distance(a, b) == 2
    assert str(a ^ b) == "01010"
    assert density(a) == pytest.approx(0.6)
    with pytest.raises(DomainError):
        hamming_distance(a, BitBlock.from_str("1"))
    with pytest.raises(DomainError):
        density(BitBlock(0, 0))


@pytest.mark.parametrize("n", range(1, 9))
def test_triangle_inequality_exhaustive(n):
    words = np.arange(1 << n, dtype=np.int64)
    table = popcount(words[:, None] ^ words[None, :]).astype(np.int64)
    for a in words:
        # rows b, columns c: d(a, c) <= d(a, b) + d(b, c)
        assert (table[a][None, :] <= table[a][:, None] + table).all()


@settings(max_examples=200, deadline=None)
@given(n=st.integers(min_value=1, max_value=64), data=st.data())
def test_triangle_inequality_on_random_triples(n, data):
    word = st.integers(min_value=0, max_value=(1 << n) - 1).map(lambda v: BitBlock(n, v))
    a, b, c = data.draw(word), data.draw(word), data.draw(word)
    assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


@pytest.mark.parametrize("n, r, expected", [(12, 2, 79), (8, 2, 37), (5, 1, 6), (4, 4, 16), (7, 0, 1)])
def test_ball_volume_values(n, r, expected):
    volume = ball_volume(n, r)
    assert volume.value == expected
    assert volume.log2 == pytest.approx(math.log2(expected))


def test_ball_volume_matches_brute_force():
    for n in range(1, 11):
        weights = popcount(np.arange(1 << n, dtype=np.int64))
        for r in range(n + 1):
            assert ball_volume(n, r).value == int((weights <= r).sum())


def test_ball_volume_domain():
    with pytest.raises(DomainError):
        ball_volume(4, 5)
    with pytest.raises(DomainError):
        ball_volume(4, -1)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(min_value=1, max_value=60), data=st.data())
def test_volume_entropy_gap_is_logarithmic(n, data):
    r = data.draw(st.integers(min_value=0, max_value=n // 2))
    gap = volume_entropy_gap(n, r)
    assert -1e-9 <= gap <= math.log2(n + 1) + 1e-9


def test_enumerate_ball():
    center = BitBlock.from_str("10110")
    members = list(enumerate_ball(center, 2))
    assert len(members) == ball_volume(5, 2).value
    assert len(set(members)) == len(members)
    distances = [hamming_distance(center, m) for m in members]
    assert distances == sorted(distances)
    assert members[0] == center


def test_ball_rank_follows_weight_then_lexicographic_order():
    n = 7
    ranks = [ball_rank(BitBlock(n, int(v))) for v in ball_masks(n, n)]
    assert ranks == list(range(1 << n))


@settings(max_examples=200, deadline=None)
@given(n=st.integers(min_value=1, max_value=40), data=st.data())
def test_ball_unrank_inverts_rank(n, data):
    value = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    block = BitBlock(n, value)
    rank = ball_rank(block)
    assert rank < ball_volume(n, block.weight).value
    assert ball_unrank(n, rank) == block


def test_ball_unrank_domain():
    with pytest.raises(DomainError):
        ball_unrank(3, 8)


def test_weight_and_ball_masks():
    masks = weight_masks(6, 2)
    assert len(masks) == math.comb(6, 2)
    assert (popcount(masks) == 2).all()
    assert list(masks) == sorted(masks)
    ball = ball_masks(6, 2)
    assert len(ball) == ball_volume(6, 2).value
    assert list(popcount(ball)) == sorted(popcount(ball))


def test_pack_and_unpack_rows():
    rows = np.array([[1, 0, 1, 1], [0, 0, 0, 1], [1, 1, 1, 1]], dtype=np.uint8)
    values = pack_rows(rows)
    assert list(values) == [11, 1, 15]
    assert (unpack_values(values, 4) == rows).all()
