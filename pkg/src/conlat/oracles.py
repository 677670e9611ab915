"""Brute-force reference computations.

Each function here answers a question the main modules also answer, by plain
enumeration and without sharing their algorithms.  Used by the test suite and
by ``conlat selfcheck``.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

from .lattice import Congruence, FiniteLattice, canonical_congruence
from .presented import Presentation, Term, all_valuations, evaluate, satisfies
from .semilattice import A0, A1, TOP, FiniteJoinSemilattice, d_join, d_leq, nat


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _compatible(L: FiniteLattice, block_of: dict) -> bool:
    elems = L.elements
    for x, x2 in itertools.product(elems, repeat=2):
        if block_of[x] != block_of[x2]:
            continue
        for y in elems:
            if block_of[L.meet(x, y)] != block_of[L.meet(x2, y)]:
                return False
            if block_of[L.join(x, y)] != block_of[L.join(x2, y)]:
                return False
    return True


def congruences_by_filter(L: FiniteLattice) -> set[Congruence]:
    """Every partition of L that is compatible with meet and join."""
    out = set()
    for part in set_partitions(L.elements):
        block_of = {x: i for i, b in enumerate(part) for x in b}
        if _compatible(L, block_of):
            out.add(canonical_congruence(L, part))
    return out


def least_congruence_containing(L: FiniteLattice, pairs: Iterable[tuple], congruences: Iterable[Congruence]) -> Congruence:
    pairs = list(pairs)
    holding = [c for c in congruences if all(c.related(a, b) for a, b in pairs)]
    least = [c for c in holding if all(c.refines(d) for d in holding)]
    assert len(least) == 1
    return least[0]


def entails_by_enumeration(P: Presentation, s: Term, t: Term) -> bool:
    for val in all_valuations(P.generators):
        if satisfies(P, val) and evaluate(s, val) == 1 and evaluate(t, val) == 0:
            return False
    return True


def distributive_by_enumeration(S: FiniteJoinSemilattice) -> bool:
    E = S.elements
    for s, a, b in itertools.product(E, repeat=3):
        if not S.leq(s, S.join(a, b)):
            continue
        found = False
        for a2, b2 in itertools.product(E, repeat=2):
            if S.leq(a2, a) and S.leq(b2, b) and S.join(a2, b2) == s:
                found = True
                break
        if not found:
            return False
    return True


def pigeonhole_collision(codes: Sequence[tuple], X: Iterable[int], n: int) -> tuple[int, int] | None:
    """Two members of X with equal n-bit prefixes, by exhaustive pair scan."""
    X = sorted(X)
    for i, j in itertools.combinations(X, 2):
        if codes[i][:n] == codes[j][:n]:
            return i, j
    return None


def brute_force_forced_level(inst) -> int:
    """Minimum forced level by enumerating every table pair on P* (tiny m only).

    The order on P* is recomputed by valuation enumeration and the measure by
    its defining case split, so nothing is shared with the search in thmb.
    """
    from .thmb import p_star

    P = inst.presentation
    terms = p_star(inst)
    keys = list(terms)
    vals = [v for v in all_valuations(P.generators) if satisfies(P, v)]

    def below(s, t):
        return all(not evaluate(s, v) or evaluate(t, v) for v in vals)

    order = {(a, b): below(terms[a], terms[b]) for a in keys for b in keys}
    u0s = [g for g in P.generators if g.startswith("u0.")]
    u1s = [g for g in P.generators if g.startswith("u1.")]
    vs = [g for g in P.generators if g.startswith("v.")]

    def under_join(t, gens):
        return all(not evaluate(t, v) or any(v[g] for g in gens) for v in vals)

    def measure(t):
        in0, in1 = under_join(t, u0s + vs), under_join(t, u1s + vs)
        if in0 and in1:
            for n in range(len(vs)):
                if under_join(t, vs[: n + 1]):
                    return nat(n)
            raise AssertionError("in I but below no w_n")
        return A0 if in0 else A1 if in1 else TOP

    target = {k: measure(terms[k]) for k in keys}
    values = [nat(i) for i in range(len(vs) + 1)] + [A0, A1, TOP]
    options = {
        k: [(x, y) for x in values for y in values if d_join(x, y) == target[k]
            and (k != "1" or (d_leq(x, A0) and d_leq(y, A1)))]
        for k in keys
    }
    best = None
    for combo in itertools.product(*(options[k] for k in keys)):
        table = dict(zip(keys, combo))
        if all(
            not order[a, b] or (d_leq(table[a][0], table[b][0]) and d_leq(table[a][1], table[b][1]))
            for a in keys
            for b in keys
        ):
            level = max(
                [z.n for k in keys if k.startswith(("u0.", "u1.")) and "^" not in k for z in table[k] if z.is_nat],
                default=0,
            )
            best = level if best is None else min(best, level)
    if best is None:
        raise AssertionError("no decomposition at all")
    return best


def random_presentation(rng, max_generators: int = 12, max_relations: int = 10) -> Presentation:
    """A random family-form presentation, for differential testing."""
    m0, m1 = rng.randint(1, 4), rng.randint(1, 4)
    nv = rng.randint(1, max(1, max_generators - m0 - m1))
    rels = [(rng.randrange(m0), rng.randrange(m1), rng.randrange(nv)) for _ in range(rng.randint(0, max_relations))]
    return Presentation.family(m0, m1, nv, sorted(set(rels)))


def random_bool_term(rng, generators: Sequence[str], depth: int = 2) -> Term:
    from .presented import ONE, ZERO, Gen

    if depth == 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.05:
            return ZERO
        if r < 0.1:
            return ONE
        return Gen(rng.choice(list(generators)))
    op = rng.randrange(3)
    if op == 0:
        return ~random_bool_term(rng, generators, depth - 1)
    left, right = random_bool_term(rng, generators, depth - 1), random_bool_term(rng, generators, depth - 1)
    return left & right if op == 1 else left | right
