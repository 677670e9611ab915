from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conlat import oracles, thmb
from conlat.errors import CapExceeded, TermParseError, UndeclaredGenerator
from conlat.presented import (
    ONE,
    ZERO,
    Gen,
    Meet,
    Presentation,
    enumerate_atoms,
    entails,
    equivalent,
    evaluate,
    in_ideal,
    parse_term,
    satisfies,
)

g, h, v = Gen("g"), Gen("h"), Gen("v")
GHV = Presentation(("g", "h", "v"), (("g", "h", "v"),))


# -- terms ----------------------------------------------------------------------


def test_parse_round_trip():
    for text in ["0", "1", "g", "(not g)", "(and g h)", "(or (and g h) (not v))"]:
        t = parse_term(text)
        assert parse_term(str(t)) == t


def test_parse_nary_folds_left():
    assert parse_term("(and g h v)") == (g & h) & v


@pytest.mark.parametrize("text", ["", "(and g", "(xor g h)", "g h", ")", "(not g h)"])
def test_parse_errors(text):
    with pytest.raises(TermParseError):
        parse_term(text)


def test_evaluate_examples():
    assert evaluate(ONE, {}) == 1
    assert evaluate(g & ~g, {"g": 1}) == 0
    assert evaluate(g & ~g, {"g": 0}) == 0
    assert evaluate(Meet(Gen("u0.0"), Gen("u1.0")), {"u0.0": 1, "u1.0": 1}) == 1


# -- presentations ----------------------------------------------------------------


def test_undeclared_generator():
    with pytest.raises(UndeclaredGenerator):
        Presentation(("g",), (("g", "h", "v"),))
    with pytest.raises(UndeclaredGenerator):
        entails(GHV, Gen("w"), ONE)


def test_presentation_json_round_trip():
    P = Presentation.family(2, 3, 2, [(0, 1, 0), (1, 2, 1)])
    assert Presentation.from_json(P.to_json()) == P
    assert Presentation.from_json(GHV.to_json()) == GHV


# -- entailment ---------------------------------------------------------------------


def test_reflexive():
    for t in (ZERO, ONE, g, g & h, ~v | g):
        assert entails(GHV, t, t)


def test_relation_is_entailed():
    assert entails(GHV, g & h, v)
    verdict = entails(GHV, g, v)
    assert not verdict
    assert satisfies(GHV, verdict.witness)
    assert verdict.witness["g"] == 1 and verdict.witness["v"] == 0


def test_first_difference_at_bit_two():
    inst = thmb.default_instance(8, seed=None)
    i, j = next((i, j) for i in range(8) for j in range(8) if inst.gmap(i, j) == 2)
    P = inst.presentation
    s = Meet(thmb.u0(i), thmb.u1(j))
    verdict = entails(P, s, thmb.w(1))
    assert not verdict
    assert {k for k, b in verdict.witness.items() if b and k.startswith("v.")} == {"v.2"}
    assert entails(P, s, thmb.w(2))


def test_in_ideal_examples():
    inst = thmb.default_instance(4, seed=None)
    P = inst.presentation
    vs = [f"v.{k}" for k in range(inst.L)]
    u1s = [f"u1.{j}" for j in range(inst.m)]
    assert in_ideal(P, ZERO, [])
    verdict = in_ideal(P, thmb.u0(0), u1s + vs)
    assert not verdict
    assert {k for k, b in verdict.witness.items() if b} == {"u0.0"}
    assert in_ideal(P, Meet(thmb.u0(1), thmb.u1(2)), vs)


def test_equivalent():
    assert equivalent(GHV, g & h & v, g & h)
    assert not equivalent(GHV, g, h)


def test_cap():
    P = Presentation(tuple(f"x{i}" for i in range(41)), ())
    with pytest.raises(CapExceeded):
        entails(P, Gen("x0"), Gen("x1"))
    with pytest.raises(CapExceeded):
        enumerate_atoms(Presentation(tuple(f"x{i}" for i in range(21)), ()))


def test_forty_generators_is_fast():
    P = Presentation.family(13, 13, 14, [(i, i, i) for i in range(13)])
    assert entails(P, Meet(Gen("u0.5"), Gen("u1.5")), Gen("v.5"))
    assert not entails(P, Meet(Gen("u0.5"), Gen("u1.6")), Gen("v.5"))


# -- atoms --------------------------------------------------------------------------


def test_atoms_examples():
    assert enumerate_atoms(Presentation((), ())) == [{}]
    assert len(enumerate_atoms(Presentation(("g",), ()))) == 2
    atoms = enumerate_atoms(GHV)
    assert len(atoms) == 7
    assert {"g": 1, "h": 1, "v": 0} not in atoms


# -- differential checks against enumeration ----------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_entails_matches_enumeration(seed):
    rng = random.Random(seed)
    P = oracles.random_presentation(rng, max_generators=10)
    s = oracles.random_bool_term(rng, P.generators, depth=3)
    t = oracles.random_bool_term(rng, P.generators, depth=3)
    assert bool(entails(P, s, t)) == oracles.entails_by_enumeration(P, s, t)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_atoms_match_enumeration(seed):
    rng = random.Random(seed)
    P = oracles.random_presentation(rng, max_generators=10)
    expected = [val for val in oracles.all_valuations(P.generators) if satisfies(P, val)]
    assert enumerate_atoms(P) == expected
