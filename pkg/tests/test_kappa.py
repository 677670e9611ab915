from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from conlat.errors import EmulationError, NormUndefined, SelectionError
from conlat.kappa import (
    CofinalInput,
    all_subsets,
    build_kappa_instance,
    build_kappa_mu,
    canonical_candidate,
    chain_union,
    check_kappa_hom,
    check_norm_laws,
    check_selection,
    d_input,
    norm,
    parse_blocks,
    parse_subset_key,
    probe_family,
    refutation_trace,
    select_f,
    subset_key,
)
from conlat.semilattice import A0, A1, D, TOP, ZERO, chain_semilattice, nat


def identity_q(k: int):
    return select_f(d_input(range(1, k + 1)))


def d_mu(inst):
    return build_kappa_mu(inst, A0, A1, identity_q(inst.k).q)


# -- selection ---------------------------------------------------------------------


def test_select_worked_examples():
    assert select_f(d_input([2, 1, 3, 3, 5])).f == (0, 2, 4)
    assert select_f(d_input([1, 2, 3, 4, 5])).f == (0, 1, 2, 3, 4)
    assert select_f(d_input([3, 3, 3, 3])).f == (0,)


def test_zero_is_never_selected():
    # Q_0 is the ideal generated by nothing, which already holds 0
    assert select_f(d_input([0, 0, 1])).f == (2,)


def test_selection_rejects_elements_outside_q():
    with pytest.raises(SelectionError):
        CofinalInput(D, (nat(1), A0), A0, A1)
    with pytest.raises(SelectionError):
        select_f(d_input([]))


@given(st.lists(st.integers(0, 30), min_size=1, max_size=20))
def test_selection_invariants(seq):
    inp = d_input(seq)
    res = select_f(inp)
    assert check_selection(inp, res)
    assert check_norm_laws(res)


def test_norm_examples():
    res = select_f(d_input([2, 1, 3, 3, 5]))
    assert [norm(res, q) for q in res.q] == [1, 2, 3]
    assert norm(res, ZERO) == 0
    assert norm(res, nat(4)) == 3
    assert norm(res, nat(2)) == 1
    with pytest.raises(NormUndefined):
        norm(res, nat(6))
    with pytest.raises(NormUndefined):
        norm(res, A0)
    assert chain_union(res) == [nat(i) for i in range(6)]


def test_selection_on_finite_semilattice():
    C = chain_semilattice(5)
    inp = CofinalInput(C, (2, 1, 4, 3), 4, 4)
    res = select_f(inp)
    assert res.f == (0, 2)
    assert check_selection(inp, res) and check_norm_laws(res)


# -- the emulated instance ----------------------------------------------------------


def test_instance_validation():
    with pytest.raises(EmulationError):
        build_kappa_instance([4], 1)
    with pytest.raises(EmulationError):
        build_kappa_instance([2, 2], 2)
    assert parse_blocks("4x3") == [3, 3, 3, 3]
    assert parse_blocks("2,3") == [2, 3]
    with pytest.raises(EmulationError):
        parse_blocks("ax3")


@pytest.mark.parametrize("sizes,t", [([2, 2], 1), ([3, 3], 1), ([3, 3], 2), ([2, 3, 3], 1), ([3, 3, 3], 2)])
def test_ideal_triple_is_exact(sizes, t):
    inst = build_kappa_instance(sizes, t)
    for X in all_subsets(inst.k):
        assert inst.in_I(X) == (inst.in_I0(X) and inst.in_I1(X))


def test_measure_examples():
    inst = build_kappa_instance([3, 3], 1)
    mu = d_mu(inst)
    assert mu(frozenset()) == ZERO
    assert mu(inst.ground) == TOP
    assert mu(inst.blocks[0]) == A0
    assert mu({0, 3}) == A1
    assert mu({4}) == nat(5)


@pytest.mark.parametrize("sizes,t", [([2, 2], 1), ([3, 3], 1), ([3, 3], 2), ([2, 2, 3], 1)])
def test_measure_preserves_in_window_joins(sizes, t):
    inst = build_kappa_instance(sizes, t)
    mu = d_mu(inst)
    subsets = list(all_subsets(inst.k))
    assert check_kappa_hom(mu, [(X, Y) for X in subsets for Y in subsets])


def test_measure_needs_enough_q():
    inst = build_kappa_instance([2, 2], 1)
    with pytest.raises(EmulationError):
        build_kappa_mu(inst, A0, A1, [nat(1)])
    with pytest.raises(EmulationError):
        build_kappa_mu(inst, A0, A1, [A0, nat(1), nat(2), nat(3)])


def test_subset_keys():
    for X in (frozenset(), frozenset({3}), frozenset({0, 5, 2})):
        assert parse_subset_key(subset_key(X)) == X


# -- candidates and the trace ------------------------------------------------------


def test_zero_mu1_candidate_rejected():
    inst = build_kappa_instance([2, 2], 1)
    mu = d_mu(inst)
    fam = probe_family(inst)
    report = refutation_trace(inst, mu, identity_q(inst.k), {X: mu(X) for X in fam}, {X: ZERO for X in fam})
    assert not report.accepted
    assert "(iii)" in report.rejection


def test_trace_on_two_blocks_of_two():
    inst = build_kappa_instance([2, 2], 1)
    mu = d_mu(inst)
    mu0, mu1 = canonical_candidate(mu)
    report = refutation_trace(inst, mu, identity_q(inst.k), mu0, mu1)
    assert report.accepted
    first = report.first_failure
    assert first is not None and first.name.startswith("exists xi_0")
    assert first.holds is False


@pytest.mark.parametrize("spec,t", [("2x3", 1), ("3x3", 1), ("4x3", 1), ("3,3,4", 2)])
def test_trace_always_finds_a_failing_step(spec, t):
    inst = build_kappa_instance(parse_blocks(spec), t)
    mu = d_mu(inst)
    mu0, mu1 = canonical_candidate(mu)
    report = refutation_trace(inst, mu, identity_q(inst.k), mu0, mu1)
    assert report.accepted
    assert report.first_failure is not None
    assert report.lines()


def test_candidate_missing_a_set_is_rejected():
    inst = build_kappa_instance([2, 2], 1)
    mu = d_mu(inst)
    mu0, mu1 = canonical_candidate(mu)
    del mu0[inst.ground]
    report = refutation_trace(inst, mu, identity_q(inst.k), mu0, mu1)
    assert not report.accepted and "undefined" in report.rejection
