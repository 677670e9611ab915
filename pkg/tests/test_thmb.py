from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from conlat import oracles
from conlat.errors import BudgetExceeded, ConstructionError, DecompositionError
from conlat.presented import ONE, ZERO, Gen, Join, Meet, entails
from conlat.semilattice import A0, A1, TOP, nat
from conlat.thmb import (
    Decomposition,
    TheoremBInstance,
    build_g,
    build_instance,
    certified_lower_bound,
    check_2ton,
    check_hom,
    check_ideal_intersection,
    check_lineq,
    decomposition_from_levels,
    default_instance,
    default_length,
    level_sets,
    make_codes,
    min_forced_level,
    mu,
    p_star,
    parse_code,
    sample_term_pairs,
    scan,
    u0,
    u1,
    uniform_decomposition,
    v,
    validate_decomposition,
    verify_zn_bound,
    w,
)


def binary(m: int) -> TheoremBInstance:
    return default_instance(m, seed=None)


# -- codes and g ------------------------------------------------------------------


def test_g_examples():
    g = build_g([parse_code("00"), parse_code("01")])
    assert g(0, 1) == 1
    assert g(0, 0) == 0
    assert build_g([parse_code("01"), parse_code("10")])(0, 1) == 0


def test_codes_must_be_distinct():
    with pytest.raises(ConstructionError):
        build_g([parse_code("01"), parse_code("01")])
    with pytest.raises(ConstructionError):
        make_codes(5, 2)
    with pytest.raises(ConstructionError):
        parse_code("012")


def test_default_length():
    assert [default_length(m) for m in (1, 2, 3, 4, 5, 8, 9, 256)] == [1, 1, 2, 2, 3, 3, 4, 8]


@given(st.integers(1, 64), st.integers(0, 10**6))
def test_g_matches_prefix_scan(m, seed):
    codes = make_codes(m, seed=seed)
    g = build_g(codes)
    for i, j in itertools.combinations(range(m), 2):
        k = g(i, j)
        assert codes[i][:k] == codes[j][:k] and codes[i][k] != codes[j][k]


# -- the 2^n lemma -----------------------------------------------------------------


def test_2ton_singleton_at_zero():
    g = build_g(make_codes(8, seed=None))
    assert check_2ton(g, [3], 0).hypothesis
    assert check_2ton(g, [3], 0).ok


def test_2ton_tight_and_collision():
    codes = make_codes(256, seed=None)
    g = build_g(codes)
    for n in range(9):
        # all n-bit prefixes, padded with zeros
        X = [i for i, c in enumerate(codes) if not any(c[n:])]
        res = check_2ton(g, X, n)
        assert res.hypothesis and res.size == 2**n
        if n < 8:
            extra = next(i for i in range(256) if i not in X)
            res = check_2ton(g, X + [extra], n)
            assert not res.hypothesis and res.ok
            a, b = res.collision
            assert codes[a][:n] == codes[b][:n]


@settings(max_examples=200)
@given(st.integers(0, 10**6), st.integers(0, 8), st.integers(1, 256))
def test_2ton_random(seed, n, size):
    codes = make_codes(256, seed=seed)
    g = build_g(codes)
    X = random.Random(seed).sample(range(256), size)
    res = check_2ton(g, X, n)
    assert res.ok
    assert res.hypothesis == all(g(i, j) < n for i, j in itertools.combinations(X, 2))
    if size > 2**n:
        a, b = res.collision
        assert codes[a][:n] == codes[b][:n]
        assert oracles.pigeonhole_collision(codes, X, n) is not None


# -- instances -------------------------------------------------------------------


def relation_targets(inst: TheoremBInstance) -> Counter:
    return Counter(k for _, _, k in inst.presentation.relations)


def test_build_instance_examples():
    assert relation_targets(binary(1)) == Counter({"v.0": 1})
    assert relation_targets(binary(2)) == Counter({"v.0": 4})
    inst = binary(4)
    # 8 off-diagonal pairs differ at bit 0, 4 at bit 1, and the 4 diagonal pairs go to v.0
    assert relation_targets(inst) == Counter({"v.0": 12, "v.1": 4})
    off = Counter(inst.gmap(i, j) for i in range(4) for j in range(4) if i != j)
    assert off == Counter({0: 8, 1: 4})


def test_instance_json_round_trip():
    inst = default_instance(8, seed=3)
    back = TheoremBInstance.from_json(inst.to_json())
    assert back.codes == inst.codes and back.presentation == inst.presentation
    obj = inst.to_json()
    obj["codes"][0], obj["codes"][1] = obj["codes"][1], obj["codes"][0]
    with pytest.raises(ConstructionError):
        TheoremBInstance.from_json(obj)


def test_wrong_code_length_rejected():
    with pytest.raises(ConstructionError):
        build_instance(2, 2, [parse_code("0"), parse_code("1")])


# -- the measure -------------------------------------------------------------------


@pytest.mark.parametrize("m", [2, 4, 8])
def test_mu_examples(m):
    inst = default_instance(m, seed=1)
    assert mu(inst, ONE) == TOP
    assert mu(inst, ZERO) == nat(0)
    assert mu(inst, u0(0)) == A0
    assert mu(inst, u1(m - 1)) == A1
    for k in range(inst.L):
        assert mu(inst, v(k)) == nat(k)
    assert mu(inst, Join(u0(0), u1(0))) == TOP


def test_mu_of_v_join():
    inst = default_instance(4, L=6, seed=0)
    assert mu(inst, Join(v(2), v(5))) == nat(5)


def test_mu_meet_is_g():
    inst = default_instance(8, seed=2)
    for i in range(8):
        for j in range(8):
            assert mu(inst, Meet(u0(i), u1(j))) == nat(inst.gmap(i, j))


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_lineq(m):
    assert check_lineq(default_instance(m, seed=5))


@pytest.mark.parametrize("m", [2, 4])
def test_mu_hom_on_samples(m):
    inst = default_instance(m, seed=0)
    assert check_hom(inst, sample_term_pairs(inst, 200, seed=9))
    assert check_hom(inst, [(ZERO, ZERO)])


def test_ideal_intersection():
    inst = default_instance(4, seed=0)
    terms = [t for pair in sample_term_pairs(inst, 100, seed=1) for t in pair]
    assert check_ideal_intersection(inst, terms)


# -- decompositions ---------------------------------------------------------------


def test_level_decomposition_hand_example():
    inst = binary(4)
    dec = decomposition_from_levels(inst, [1, 1, 0, 0], [0, 0, 1, 1])
    assert validate_decomposition(inst, dec)
    sets = level_sets(inst, dec)
    assert sets.X[0] == {2, 3} and sets.Y[0] == {0, 1}
    assert sets.Z[0] == frozenset()
    assert sets.Z[1] == frozenset(range(4))
    assert verify_zn_bound(inst, dec)


def test_level_rule_matches_validation():
    inst = binary(4)
    for a in itertools.product(range(3), repeat=4):
        b = (a[2], a[3], a[0], a[1])
        dec = decomposition_from_levels(inst, a, b)
        expected = all(inst.gmap(i, j) <= max(a[i], b[j]) for i in range(4) for j in range(4))
        assert bool(validate_decomposition(inst, dec)) == expected


def test_zero_levels_give_full_x0():
    inst = binary(2)
    dec = uniform_decomposition(inst, 0)
    assert validate_decomposition(inst, dec)
    sets = level_sets(inst, dec)
    assert sets.X[0] == {0, 1}
    assert all(a <= b for a, b in zip(sets.Z, sets.Z[1:]))


def test_zn_bound_over_all_valid_level_decompositions():
    inst = binary(4)
    seen = 0
    for a in itertools.product(range(2), repeat=4):
        for b in itertools.product(range(2), repeat=4):
            if all(inst.gmap(i, j) <= max(a[i], b[j]) for i in range(4) for j in range(4)):
                seen += 1
                report = verify_zn_bound(inst, decomposition_from_levels(inst, a, b))
                assert report.ok
                assert all(r.size <= r.bound for r in report.rows)
    assert seen > 1


def test_adversarial_decomposition_rejected():
    inst = binary(4)
    dec = uniform_decomposition(inst, 1)
    broken = Decomposition(dict(dec.mu0), dict(dec.mu1))
    broken.mu0["0"], broken.mu1["0"] = nat(0), nat(1)  # 0 <= everything, but mu(0) = 0
    with pytest.raises(DecompositionError):
        level_sets(inst, broken)
    order_broken = Decomposition(dict(dec.mu0), dict(dec.mu1))
    # u0.0 ^ u1.0 <= u1.0, yet give the meet a larger mu0 value than u1.0
    order_broken.mu0["u1.0"] = nat(0)
    assert not validate_decomposition(inst, order_broken)
    with pytest.raises(DecompositionError):
        verify_zn_bound(inst, order_broken)


def test_decomposition_json_round_trip():
    inst = binary(4)
    dec = uniform_decomposition(inst, 1)
    assert Decomposition.from_json(dec.to_json()) == dec


# -- minimum forced level ------------------------------------------------------------


def test_forced_level_small():
    assert min_forced_level(binary(1)).n_min == 0
    inst = binary(2)
    assert min_forced_level(inst).n_min == oracles.brute_force_forced_level(inst) == 0
    res = min_forced_level(binary(4))
    assert res.mode == "exact" and res.n_min == 1
    assert validate_decomposition(binary(4), res.witness)


def test_forced_level_certificate():
    res = min_forced_level(binary(16))
    assert res.mode == "bound" and res.n_min == 3
    assert certified_lower_bound(16) == 3


def test_forced_level_equals_max_g():
    # with every code of length L present, the level is L - 1
    for m in (2, 4, 8):
        inst = default_instance(m, seed=11)
        res = min_forced_level(inst, exact_limit=8)
        assert res.n_min == int(inst.gmap.table.max()) == max(0, inst.L - 1)


def test_forced_level_budget():
    with pytest.raises(BudgetExceeded):
        min_forced_level(binary(4), budget_ms=1e-6)


def test_scan_rows():
    rows = scan([2, 4, 8, 16], seed=0)
    assert [r.mode for r in rows] == ["exact", "exact", "bound", "bound"]
    assert [r.n_min for r in rows] == [0, 1, 2, 3]
    assert all(r.elapsed_ms >= 0 for r in rows)


def test_p_star_shape():
    inst = binary(4)
    keys = list(p_star(inst))
    assert keys[:2] == ["1", "0"]
    assert len(keys) == 2 + 4 + 4 + 16 + inst.L
    assert entails(inst.presentation, w(0), w(1))
    assert isinstance(p_star(inst)["u0.1"], Gen)
