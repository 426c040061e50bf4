import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_lab.core import RuleTable1D, identity_1d, xor_1d
from ca_lab.dyn1d import (
    BLOCKING,
    CLOSING,
    LEFT,
    NOT_CLOSING,
    RIGHT,
    EventuallyPeriodic,
    blocking_status,
    check_closing,
    closing_oracle,
    expansivity_certificate,
    find_blocking_word,
    is_leftmost_permutive,
    is_rightmost_permutive,
    simulate_window,
    verify_closing_witness,
)

AND = RuleTable1D.elementary(128)
LEFT_XOR = RuleTable1D.from_function(2, 1, lambda w: w[0] ^ w[1])


def naive_images_agree(rule, a, b, lo=-40, hi=40):
    r = rule.radius
    k = rule.n_symbols

    def img(c, i):
        idx = 0
        for j in range(i - r, i + r + 1):
            idx = idx * k + c[j]
        return int(rule.table[idx])

    return all(img(a, i) == img(b, i) for i in range(lo, hi))


def test_permutivity_examples():
    assert is_rightmost_permutive(xor_1d()) and is_leftmost_permutive(xor_1d())
    assert not is_rightmost_permutive(identity_1d()) and not is_leftmost_permutive(identity_1d())
    const = RuleTable1D.elementary(0)
    assert not is_rightmost_permutive(const) and not is_leftmost_permutive(const)
    assert is_leftmost_permutive(LEFT_XOR) and not is_rightmost_permutive(LEFT_XOR)


@pytest.mark.parametrize("side", [LEFT, RIGHT])
def test_closing_examples(side):
    assert check_closing(xor_1d(), side).answer == CLOSING
    assert check_closing(identity_1d(), side).answer == CLOSING


def test_and_is_not_right_closing():
    v = check_closing(AND, RIGHT)
    assert v.answer == NOT_CLOSING
    a, b = v.witness
    assert verify_closing_witness(AND, RIGHT, a, b)
    assert a.left == b.left and a.segment(-60, -20) == b.segment(-60, -20)
    assert a != b and naive_images_agree(AND, a, b)


def test_oracle_examples():
    assert closing_oracle(xor_1d(), RIGHT) is None
    assert closing_oracle(identity_1d(), RIGHT) is None
    assert closing_oracle(AND, RIGHT, head_len=3, period=1) is not None


def test_witness_verifier_rejects_bad_pairs():
    a = EventuallyPeriodic((0,), (1,), (0,))
    b = EventuallyPeriodic((0,), (0,), (0,))
    assert not verify_closing_witness(xor_1d(), RIGHT, a, b)
    assert not verify_closing_witness(AND, RIGHT, a, a)


def test_blocking_examples():
    rep = find_blocking_word(AND, 1, 3, 4)
    assert rep is not None and rep.word == (0,) and rep.offset == 0 and rep.status == BLOCKING
    assert find_blocking_word(xor_1d(), 1, 4, 4) is None
    for a in (0, 1):
        assert blocking_status(identity_1d(), (a,), 1, 0, 3).status == BLOCKING


def test_certificates():
    cert = expansivity_certificate(xor_1d())
    assert cert is not None and cert.epsilon_exponent == 1
    assert expansivity_certificate(identity_1d()) is None
    assert expansivity_certificate(LEFT_XOR) is None


def test_simulate_window():
    assert simulate_window(xor_1d(), [1, 0, 0, 0], 2) == [(1, 0, 0, 0), (0, 1, 0, 1), (0, 0, 0, 0)]


rules = st.integers(0, 255).map(RuleTable1D.elementary)


@settings(max_examples=60, deadline=None)
@given(rules, st.sampled_from([LEFT, RIGHT]))
def test_permutive_implies_closing(rule, side):
    perm = is_rightmost_permutive(rule) if side == RIGHT else is_leftmost_permutive(rule)
    if perm:
        assert check_closing(rule, side).answer == CLOSING


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([LEFT, RIGHT]))
def test_three_symbol_rules_against_oracle(seed, side):
    rule = RuleTable1D(3, 1, np.random.default_rng(seed).integers(0, 3, 27))
    v = check_closing(rule, side)
    w = closing_oracle(rule, side, head_len=4, period=2)
    if w is not None:
        assert v.answer == NOT_CLOSING
    if v.answer == NOT_CLOSING:
        assert verify_closing_witness(rule, side, *v.witness)
        assert naive_images_agree(rule, *v.witness)
