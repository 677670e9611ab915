"""Invariant suites behind ``conlat selfcheck``.

Each suite compares the fast code paths against the brute-force oracles on
small fixed inputs.  Output is deterministic for a given seed.
"""

from __future__ import annotations

import random
from typing import Callable, Mapping

from . import kappa, lattice, oracles, presented, semilattice, thmb
from .errors import ConlatError


def _fixture(name: str, elements: str, covers: str, distributive: bool) -> dict:
    up = {e: {e} for e in elements}
    for pair in covers.split():
        lo, hi = pair
        up[lo].add(hi)
    changed = True
    while changed:
        changed = False
        for e in elements:
            more = set().union(*(up[x] for x in up[e]))
            if more != up[e]:
                up[e], changed = more, True
    S = semilattice.FiniteJoinSemilattice.from_order(elements, lambda x, y: y in up[x])
    return {"name": name, **S.to_json(), "distributive": distributive}


# A distributive 2x2 square, and M3 read as a join-semilattice (not distributive).
DEFAULT_SEMILATTICE_FIXTURES = [
    _fixture("2x2", "0ab1", "0a 0b a1 b1", True),
    _fixture("M3", "0abc1", "0a 0b 0c a1 b1 c1", False),
]


def suite_semilattice(rng: random.Random, fixtures: Mapping) -> str | None:
    for fx in fixtures.get("semilattice", DEFAULT_SEMILATTICE_FIXTURES):
        try:
            S = semilattice.FiniteJoinSemilattice.from_json(fx)
        except ConlatError as exc:
            return f"{fx.get('name', '?')}: {exc}"
        got = bool(semilattice.is_distributive_semilattice(S))
        if got != oracles.distributive_by_enumeration(S):
            return f"{fx.get('name', '?')}: distributivity disagrees with enumeration"
        if "distributive" in fx and got != fx["distributive"]:
            return f"{fx.get('name', '?')}: expected distributive={fx['distributive']}"
    if semilattice.intersection_has_largest(semilattice.D, semilattice.A0, semilattice.A1) is not None:
        return "D: Id(a0) meet Id(a1) should have no largest element"
    return None


def suite_lattice(rng: random.Random, fixtures: Mapping) -> str | None:
    lats = list(lattice.enumerate_lattices(4)) + [lattice.m3(), lattice.n5()]
    for L in lats:
        cons = oracles.congruences_by_filter(L)
        if set(lattice.conc(L).elements) != cons:
            return f"Con_c mismatch on {L.elements}"
        for a in L.elements:
            for b in L.elements:
                if lattice.principal_congruence(L, a, b) != oracles.least_congruence_containing(L, [(a, b)], cons):
                    return f"Theta({a}, {b}) mismatch on {L.elements}"
    return None


def suite_presented(rng: random.Random, fixtures: Mapping) -> str | None:
    for trial in range(30):
        P = oracles.random_presentation(rng, max_generators=10)
        s = oracles.random_bool_term(rng, P.generators)
        t = oracles.random_bool_term(rng, P.generators)
        if bool(presented.entails(P, s, t)) != oracles.entails_by_enumeration(P, s, t):
            return f"trial {trial}: entailment disagrees on {s} <= {t}"
    return None


def suite_thmb(rng: random.Random, fixtures: Mapping) -> str | None:
    for m in (2, 4):
        inst = thmb.default_instance(m, seed=rng.randrange(1000))
        if not thmb.check_lineq(inst):
            return f"m={m}: entailment of u0^u1 <= w_n disagrees with g"
        verdict = thmb.check_hom(inst, thmb.sample_term_pairs(inst, 60, seed=rng.randrange(1000)))
        if not verdict:
            return f"m={m}: mu not a join homomorphism ({verdict.detail})"
        forced = thmb.min_forced_level(inst)
        if forced.n_min < thmb.certified_lower_bound(m):
            return f"m={m}: forced level {forced.n_min} below the certified bound"
    inst = thmb.default_instance(2, seed=None)
    if thmb.min_forced_level(inst).n_min != oracles.brute_force_forced_level(inst):
        return "m=2: forced level disagrees with exhaustive enumeration"
    gmap = thmb.default_instance(64, seed=rng.randrange(1000)).gmap
    for _ in range(200):
        n = rng.randrange(0, 6)
        X = rng.sample(range(64), rng.randint(1, 40))
        res = thmb.check_2ton(gmap, X, n)
        if not res.ok:
            return f"2^n lemma fails on |X|={len(X)}, n={n}"
    return None


def suite_kappa(rng: random.Random, fixtures: Mapping) -> str | None:
    if list(kappa.select_f(kappa.d_input([2, 1, 3, 3, 5])).f) != [0, 2, 4]:
        return "select_f on 2,1,3,3,5 should pick indices 0,2,4"
    for _ in range(10):
        seq = [rng.randrange(0, 30) for _ in range(rng.randint(1, 20))]
        inp = kappa.d_input(seq)
        res = kappa.select_f(inp)
        if not kappa.check_selection(inp, res) or not kappa.check_norm_laws(res):
            return f"selection or norm laws fail on {seq}"
    inst = kappa.build_kappa_instance([2, 2], 1)
    sel = kappa.select_f(kappa.d_input(range(1, inst.k + 1)))
    mu = kappa.build_kappa_mu(inst, semilattice.A0, semilattice.A1, sel.q)
    pairs = [(X, Y) for X in kappa.all_subsets(inst.k) for Y in kappa.all_subsets(inst.k)]
    if not kappa.check_kappa_hom(mu, pairs):
        return "kappa measure not a homomorphism on in-window pairs"
    mu0, mu1 = kappa.canonical_candidate(mu)
    report = kappa.refutation_trace(inst, mu, sel, mu0, mu1)
    if not report.accepted or report.first_failure is None:
        return "refutation trace on 2+2 blocks should find a failing step"
    return None


SUITES: list[tuple[str, Callable]] = [
    ("semilattice", suite_semilattice),
    ("lattice", suite_lattice),
    ("presented", suite_presented),
    ("thmb", suite_thmb),
    ("kappa", suite_kappa),
]


def run_selfcheck(seed: int = 0, fixtures: Mapping | None = None) -> tuple[list[str], bool]:
    lines, ok = [], True
    for name, suite in SUITES:
        rng = random.Random(f"{seed}:{name}")
        try:
            problem = suite(rng, fixtures or {})
        except ConlatError as exc:
            problem = f"{type(exc).__name__}: {exc}"
        if problem:
            ok = False
            lines.append(f"FAIL {name}: {problem}")
        else:
            lines.append(f"PASS {name}")
    return lines, ok
