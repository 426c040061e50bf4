import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ca_lab import dyn1d
from ca_lab.core import (
    RuleTable2D,
    all_words,
    apply_torus_array,
    constant_2d,
    identity_2d,
    random_rule_2d,
    xor_1d,
    xor_corners,
)
from ca_lab.dyn2d import (
    CORNERS,
    NOT_SENSITIVE,
    REFUTED,
    SENSITIVE,
    SUPPORTING,
    count_rectangles,
    entropy_growth_report,
    is_gamma_permutive,
    nu_closing_evidence,
    nu_mu_closing_refuter,
    quasi_expansivity_certificate,
    quasi_sensitivity_check,
    verify_finite_witness,
    verify_line_witness,
)
from ca_lab.slicing import build_family, build_sliced_rule

import oracles

XOR = xor_corners()
CENTRE_CORNER = RuleTable2D.from_function(2, 1, lambda m: m[(0, 0)] ^ m[(1, 1)])


def test_gamma_permutivity_examples():
    assert is_gamma_permutive(XOR, (1, 1)) and is_gamma_permutive(XOR, (-1, -1))
    assert not is_gamma_permutive(XOR, (1, -1)) and not is_gamma_permutive(XOR, (-1, 1))
    assert not any(is_gamma_permutive(identity_2d(), g) for g in CORNERS)
    with pytest.raises(ValueError):
        is_gamma_permutive(XOR, (1, 0))


def test_quasi_expansivity_certificates():
    cert = quasi_expansivity_certificate(XOR)
    assert cert is not None and cert.gamma == (1, 1) and cert.sliced_bipermutive
    sl = build_sliced_rule(XOR, (1, 1), (2, -2))
    assert dyn1d.is_leftmost_permutive(sl.rule) and dyn1d.is_rightmost_permutive(sl.rule)
    assert quasi_expansivity_certificate(identity_2d()) is None
    assert quasi_expansivity_certificate(CENTRE_CORNER) is None


def test_nu_closing_refuted_for_xor_corners():
    rep = nu_closing_evidence(XOR, (1, -1), [(1, 1)])
    assert rep.status == REFUTED and rep.witness.verified
    assert verify_line_witness(XOR, rep.witness.pair)


def test_nu_closing_supported():
    rep = nu_closing_evidence(XOR, (1, 1), [(1, -1), (2, -2)])
    assert rep.status == SUPPORTING
    assert all(e.right == dyn1d.CLOSING and e.left == dyn1d.CLOSING for e in rep.entries)
    assert nu_closing_evidence(identity_2d(), (1, 2), [(2, -1)]).status == SUPPORTING


def test_nu_mu_refuter():
    assert nu_mu_closing_refuter(identity_2d(), (1, -1), (-1, 1)) is None
    w = nu_mu_closing_refuter(XOR, (1, -1), (-1, 1))
    assert w is not None and w.verified
    w0 = nu_mu_closing_refuter(constant_2d(0), (1, 0), (0, 1))
    assert w0 is not None and w0.kind == "finite" and verify_finite_witness(constant_2d(0), w0.pair)


def test_quasi_sensitivity():
    assert quasi_sensitivity_check(XOR, (1, 1), (1, -1)).status == SENSITIVE
    rep = quasi_sensitivity_check(XOR, (1, -1), (1, 1))
    assert rep.status == NOT_SENSITIVE and rep.blocking.status == dyn1d.BLOCKING
    assert quasi_sensitivity_check(identity_2d(), (1, 0), (0, 1)).status == NOT_SENSITIVE


@pytest.mark.parametrize("rule,w,t", [(XOR, 1, 2), (XOR, 2, 1), (identity_2d(), 1, 2), (constant_2d(0), 2, 2)])
def test_counts_match_brute_force(rule, w, t):
    local = oracles.moore_local(rule.table, 2, rule.offsets)
    want = oracles.boxes(local, rule.offsets, rule.extent, 2, w, t)
    assert count_rectangles(rule, w, t).count == want


def test_count_examples():
    assert count_rectangles(XOR, 1, 2).count == 4
    assert count_rectangles(XOR, 2, 2).count == 256
    assert count_rectangles(xor_1d(), 2, 2).count == 16
    assert [count_rectangles(constant_2d(0), w, t).count for t in (1, 2) for w in (1, 2)] == [2, 16, 2, 16]
    assert count_rectangles(identity_2d(), 2, 1).count == 16


def test_entropy_report():
    table = entropy_growth_report(XOR, [1, 2], [2])
    assert table.growth_in_w == {2: True}
    assert table.to_tsv().splitlines()[1] == "1\t2\t4\t1.0"


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sampled_counts_never_exceed_exact(seed):
    rule = random_rule_2d(np.random.default_rng(seed))
    exact = count_rectangles(rule, 1, 2).count
    assert count_rectangles(rule, 1, 2, sample=64, seed=seed).count <= exact
    assert count_rectangles(rule, 1, 1).count <= exact
    assert exact <= count_rectangles(rule, 2, 2).count


def corner_permutive_rule(rng, gamma, both):
    """c(gamma) xor [c(-gamma) xor] g(other cells) with g random."""
    g = rng.integers(0, 2, 512)

    def f(m):
        rest = [m[o] for o in sorted(m) if o not in (gamma, (-gamma[0], -gamma[1]))]
        idx = int("".join(map(str, rest)), 2)
        out = m[gamma] ^ int(g[idx])
        return out ^ m[(-gamma[0], -gamma[1])] if both else out

    return RuleTable2D.from_function(2, 1, f)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(CORNERS), st.sampled_from([(1, 1), (2, 1), (1, 2)]))
def test_permutivity_transfers_to_slices(seed, gamma, base):
    rule = corner_permutive_rule(np.random.default_rng(seed), gamma, both=False)
    assert is_gamma_permutive(rule, gamma)
    nu = (base[0] * gamma[0], base[1] * gamma[1])
    sl = build_sliced_rule(rule, nu, build_family(nu).d)
    assert dyn1d.is_leftmost_permutive(sl.rule) or dyn1d.is_rightmost_permutive(sl.rule)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(1, 1), (-1, 1)]))
def test_expansive_rules_are_closing_on_slices(seed, gamma):
    rule = corner_permutive_rule(np.random.default_rng(seed), gamma, both=True)
    cert = quasi_expansivity_certificate(rule)
    assert cert is not None
    rep = nu_closing_evidence(rule, cert.gamma, [build_family(cert.gamma).d])
    assert rep.status == SUPPORTING


@pytest.mark.parametrize("p", [3, 5])
def test_xor_corners_mixing_spot_check(p):
    rng = np.random.default_rng(p)
    start = all_words(2, p * p).reshape(-1, p, p) if p == 3 else rng.integers(0, 2, (20000, p, p))
    cur = start
    for _ in range(6):
        cur = apply_torus_array(XOR, cur)
        pairs = set(zip((start[:, 0, 0] * 2 + start[:, 1, 0]).tolist(), (cur[:, 0, 0] * 2 + cur[:, 1, 0]).tolist()))
        assert len(pairs) == 16
