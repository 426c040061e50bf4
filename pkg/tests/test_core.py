import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_lab import limits
from ca_lab.core import (
    AsymptoticPair2D,
    PeriodicConfig1D,
    RuleTable1D,
    RuleTable2D,
    TorusConfig2D,
    apply_1d,
    apply_2d,
    evaluate_region,
    evolve_pair,
    identity_2d,
    moore_offsets,
    random_rule_2d,
    random_torus,
    shift,
    temporal_period,
    von_neumann_offsets,
    xor_1d,
    xor_corners,
)

import oracles

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("number", [0, 30, 90, 110, 150, 184, 255])
def test_elementary_numbering(number):
    rule = RuleTable1D.elementary(number)
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                assert rule.table[4 * a + 2 * b + c] == oracles.wolfram(number, a, b, c)


def test_rule_90_is_xor():
    assert np.array_equal(RuleTable1D.elementary(90).table, xor_1d().table)


@given(seeds, st.integers(1, 9))
def test_apply_1d_matches_ring_oracle(seed, n):
    rng = np.random.default_rng(seed)
    rule = RuleTable1D(3, 1, rng.integers(0, 3, 27))
    row = rng.integers(0, 3, n).tolist()
    got = apply_1d(rule, PeriodicConfig1D(3, row)).cells.tolist()
    assert got == oracles.step_ring(rule.table, 3, 1, row)


def test_periodic_equality_ignores_period_choice():
    assert PeriodicConfig1D(2, [0, 1]) == PeriodicConfig1D(2, [0, 1, 0, 1, 0, 1])
    assert PeriodicConfig1D(2, [0, 1, 1]) != PeriodicConfig1D(2, [0, 1])
    assert PeriodicConfig1D(2, [1, 1, 1]).minimal().period == 1


@settings(max_examples=40)
@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_apply_2d_matches_naive(seed, p, q):
    rng = np.random.default_rng(seed)
    rule = random_rule_2d(rng)
    c = random_torus(rng, 2, p, q)
    want = oracles.step_torus(oracles.moore_local(rule.table, 2, rule.offsets), rule.offsets, c.cells.tolist())
    assert apply_2d(rule, c).cells.tolist() == want


@settings(max_examples=50)
@given(seeds, st.integers(-3, 3), st.integers(-3, 3))
def test_shift_commutes(seed, dx, dy):
    rng = np.random.default_rng(seed)
    rule = random_rule_2d(rng)
    c = random_torus(rng, 2, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    assert apply_2d(rule, shift(c, (dx, dy))) == shift(apply_2d(rule, c), (dx, dy))


@settings(max_examples=25)
@given(seeds, st.integers(1, 3))
def test_region_evaluation_matches_torus(seed, steps):
    rng = np.random.default_rng(seed)
    rule = random_rule_2d(rng)
    c = random_torus(rng, 2, 5, 4)
    window = (-2, 1, 3, 4)
    traces = evaluate_region(rule, lambda x, y: c[(x, y)], window, steps)
    cur = c
    for n in range(steps + 1):
        want = [[cur[(x, y)] for y in range(1, 5)] for x in range(-2, 1)]
        assert traces[n].tolist() == want
        cur = apply_2d(rule, cur)


def test_von_neumann_rule():
    offs = von_neumann_offsets(2, 1)
    assert len(offs) == 7 and (2, 0) in offs and (0, -1) in offs and (1, 1) not in offs
    rule = RuleTable2D.from_function(2, 2, lambda m: m[(2, 0)], offsets=offs)
    assert rule.kind == "von_neumann" and rule.extent == (2, 1)
    c = TorusConfig2D(2, np.eye(5, dtype=int))
    assert apply_2d(rule, c) == shift(c, (2, 0)) or apply_2d(rule, c) == shift(c, (-2, 0))


def test_moore_requires_canonical_offsets():
    with pytest.raises(ValueError):
        RuleTable2D(2, 1, tuple(reversed(moore_offsets(1))), np.zeros(512, dtype=int), "moore")


def test_rule_validation():
    with pytest.raises(ValueError):
        RuleTable1D(2, 1, [0] * 7)
    with pytest.raises(ValueError):
        RuleTable1D(2, 1, [2] * 8)
    with pytest.raises(ValueError):
        TorusConfig2D(2, [[0, 3]])


def test_xor_corners_reads_opposite_corners():
    rule = xor_corners()
    c = TorusConfig2D(2, np.zeros((4, 4), dtype=int)).cells.copy()
    c[1, 1] = 1
    out = apply_2d(rule, TorusConfig2D(2, c)).cells
    assert sorted(zip(*np.nonzero(out))) == [(0, 0), (2, 2)]


def test_asymptotic_pair_validation():
    bg = TorusConfig2D(2, [[0]])
    with pytest.raises(ValueError):
        AsymptoticPair2D(bg, {(0, 0): 1}, {(0, 0): 1})
    with pytest.raises(ValueError):
        AsymptoticPair2D(bg, {(0, 0): 1}, {(1, 0): 1})
    with pytest.raises(ValueError):
        AsymptoticPair2D(bg, {(3, 0): 1}, {(3, 0): 0}, halfplane=((1, 0), 2))
    pair = AsymptoticPair2D(bg, {(0, 0): 1}, {(0, 0): 0}, halfplane=((1, 0), 1))
    assert pair.value_a(0, 0) == 1 and pair.value_b(0, 0) == 0 and pair.value_a(7, -3) == 0


def test_evolve_pair_spreads_difference():
    bg = TorusConfig2D(2, [[0]])
    pair = AsymptoticPair2D(bg, {(0, 0): 1}, {(0, 0): 0})
    ta, tb = evolve_pair(xor_corners(), pair, 2, (-3, -3, 7, 7))
    diff = np.argwhere(ta[2] != tb[2]) - 3
    assert sorted(map(tuple, diff.tolist())) == [(-2, -2), (2, 2)]  # the centre cancels mod 2


def test_temporal_period():
    c = TorusConfig2D(2, np.eye(3, dtype=int))
    assert temporal_period(identity_2d(), c, 5) == (0, 1)


def test_cap_env(monkeypatch):
    monkeypatch.setenv("CA_LAB_MAX_CELLS", "100")
    with pytest.raises(limits.CapExceeded):
        evaluate_region(identity_2d(), lambda x, y: 0, (0, 0, 20, 20), 1)
    monkeypatch.setenv("CA_LAB_MAX_CELLS", "0")
    with pytest.raises(ValueError):
        limits.max_cells()
