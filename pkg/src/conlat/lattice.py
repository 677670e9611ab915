"""Finite lattices, their congruences, and the Con_c functor.

Congruences are generated by union-find closure: every merged pair is queued
and translated by x -> x ^ z and x -> x v z for all z until nothing new merges.
Translating the generating edges is enough because translations carry chains of
edges to chains of edges.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    BudgetExceeded,
    CapExceeded,
    ChainError,
    HomomorphismError,
    LatticeError,
    UnknownElement,
)
from .semilattice import FiniteJoinSemilattice, JoinHom, Verdict

DEFAULT_CONC_BOUND = 10


class FiniteLattice:
    def __init__(self, elements: Iterable[Hashable], meet: Mapping, join: Mapping, validate: bool = True):
        self.elements = tuple(elements)
        if not self.elements:
            raise LatticeError("a lattice needs at least one element")
        if len(set(self.elements)) != len(self.elements):
            raise LatticeError("duplicate element ids")
        self.index = {x: i for i, x in enumerate(self.elements)}
        self._meet = self._fill(meet, "meet")
        self._join = self._fill(join, "join")
        if validate:
            bad = self.axiom_violation()
            if bad is not None:
                raise LatticeError(bad)
        self.bottom = next(x for x in self.elements if all(self.leq(x, y) for y in self.elements))
        self.top = next(x for x in self.elements if all(self.leq(y, x) for y in self.elements))

    def _fill(self, table: Mapping, name: str) -> dict:
        out = {}
        for (x, y), z in table.items():
            for e in (x, y, z):
                if e not in self.index:
                    raise LatticeError(f"{name} table mentions unknown element {e!r}")
            for key in ((x, y), (y, x)):
                if out.get(key, z) != z:
                    raise LatticeError(f"conflicting {name} entries for {key!r}")
                out[key] = z
        for x in self.elements:
            for y in self.elements:
                if (x, y) not in out:
                    raise LatticeError(f"{name} table incomplete at {(x, y)!r}")
        return out

    @classmethod
    def from_leq(cls, elements: Iterable, leq: Callable[[Any, Any], bool]) -> FiniteLattice:
        elements = tuple(elements)
        meet, join = {}, {}
        for x, y in itertools.combinations_with_replacement(elements, 2):
            ubs = [z for z in elements if leq(x, z) and leq(y, z)]
            lbs = [z for z in elements if leq(z, x) and leq(z, y)]
            lub = [z for z in ubs if all(leq(z, w) for w in ubs)]
            glb = [z for z in lbs if all(leq(w, z) for w in lbs)]
            if len(lub) != 1 or len(glb) != 1:
                raise LatticeError(f"{x!r}, {y!r} lack a meet or join")
            join[x, y] = lub[0]
            meet[x, y] = glb[0]
        return cls(elements, meet, join)

    def axiom_violation(self) -> str | None:
        m, j = self._meet, self._join
        for x in self.elements:
            if m[x, x] != x or j[x, x] != x:
                return f"not idempotent at {x!r}"
        for x, y in itertools.product(self.elements, repeat=2):
            if m[x, j[x, y]] != x or j[x, m[x, y]] != x:
                return f"absorption fails at {(x, y)!r}"
        for x, y, z in itertools.product(self.elements, repeat=3):
            if m[m[x, y], z] != m[x, m[y, z]]:
                return f"meet not associative at {(x, y, z)!r}"
            if j[j[x, y], z] != j[x, j[y, z]]:
                return f"join not associative at {(x, y, z)!r}"
        return None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.index

    def check_element(self, x):
        if x not in self.index:
            raise UnknownElement(x)

    def meet(self, x, y):
        return self._meet[x, y]

    def join(self, x, y):
        return self._join[x, y]

    def leq(self, x, y) -> bool:
        return self._meet[x, y] == x

    def to_json(self) -> dict:
        pairs = list(itertools.combinations_with_replacement(self.elements, 2))
        return {
            "elements": list(self.elements),
            "meet": [[x, y, self._meet[x, y]] for x, y in pairs],
            "join": [[x, y, self._join[x, y]] for x, y in pairs],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> FiniteLattice:
        try:
            elements = obj["elements"]
            meet = _triples(obj["meet"])
            join = _triples(obj["join"])
        except (KeyError, TypeError) as exc:
            raise LatticeError(f"lattice JSON missing field: {exc}") from None
        return cls(elements, meet, join)

    def __repr__(self):
        return f"FiniteLattice({list(self.elements)!r})"


def _triples(rows) -> dict:
    table = {}
    for row in rows:
        if len(row) != 3:
            raise LatticeError(f"expected a triple, got {row!r}")
        x, y, z = row
        if table.get((x, y), z) != z:
            raise LatticeError(f"conflicting entries for {(x, y)!r}")
        table[x, y] = z
    return table


# -- standard small lattices ------------------------------------------------


def chain(n: int, names: Sequence[str] | None = None) -> FiniteLattice:
    names = list(names) if names is not None else [str(i) for i in range(n)]
    if len(names) != n:
        raise LatticeError("wrong number of names")
    rank = {x: i for i, x in enumerate(names)}
    return FiniteLattice.from_leq(names, lambda x, y: rank[x] <= rank[y])


def boolean_lattice(atoms: Sequence[str]) -> FiniteLattice:
    """Powerset of ``atoms``; the empty set is "0", the full set "1", others concatenated."""
    atoms = list(atoms)
    subsets = [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]

    def label(s):
        if not s:
            return "0"
        if len(s) == len(atoms):
            return "1"
        return "".join(a for a in atoms if a in s)

    by_label = {label(s): s for s in subsets}
    return FiniteLattice.from_leq(list(by_label), lambda x, y: by_label[x] <= by_label[y])


def m3() -> FiniteLattice:
    up = {"0": {"0", "a", "b", "c", "1"}, "a": {"a", "1"}, "b": {"b", "1"}, "c": {"c", "1"}, "1": {"1"}}
    return FiniteLattice.from_leq(["0", "a", "b", "c", "1"], lambda x, y: y in up[x])


def n5() -> FiniteLattice:
    """0 < a < c < 1 and 0 < b < 1 with b incomparable to a and c."""
    up = {"0": {"0", "a", "b", "c", "1"}, "a": {"a", "c", "1"}, "b": {"b", "1"}, "c": {"c", "1"}, "1": {"1"}}
    return FiniteLattice.from_leq(["0", "a", "b", "c", "1"], lambda x, y: y in up[x])


def product(K: FiniteLattice, L: FiniteLattice) -> FiniteLattice:
    pairs = [(x, y) for x in K for y in L]
    name = {p: f"({p[0]},{p[1]})" for p in pairs}
    back = {v: k for k, v in name.items()}
    return FiniteLattice.from_leq(
        list(name.values()),
        lambda s, t: K.leq(back[s][0], back[t][0]) and L.leq(back[s][1], back[t][1]),
    )


# -- lattice homomorphisms ---------------------------------------------------


@dataclass
class LatticeHom:
    """Total map preserving meet and join. 0/1 preservation is not required."""

    source: FiniteLattice
    target: FiniteLattice
    mapping: dict

    def __post_init__(self):
        for x in self.source:
            if x not in self.mapping:
                raise HomomorphismError(f"map undefined at {x!r}")
            self.target.check_element(self.mapping[x])

    def __call__(self, x):
        return self.mapping[x]

    def check(self) -> Verdict:
        K, L = self.source, self.target
        for x, y in itertools.combinations_with_replacement(K.elements, 2):
            if self(K.meet(x, y)) != L.meet(self(x), self(y)):
                return Verdict(False, (x, y), "meet not preserved")
            if self(K.join(x, y)) != L.join(self(x), self(y)):
                return Verdict(False, (x, y), "join not preserved")
        return Verdict(True)


def identity_lattice_hom(K: FiniteLattice) -> LatticeHom:
    return LatticeHom(K, K, {x: x for x in K})


def lattice_homomorphisms(K: FiniteLattice, L: FiniteLattice) -> Iterator[LatticeHom]:
    """All homomorphisms K -> L, lexicographic in L's element order."""
    for images in itertools.product(L.elements, repeat=len(K)):
        f = LatticeHom(K, L, dict(zip(K.elements, images)))
        if f.check():
            yield f


# -- congruences -------------------------------------------------------------


@dataclass(frozen=True)
class Congruence:
    """Partition of a lattice, blocks in canonical (lattice element) order."""

    blocks: tuple[tuple, ...]
    _block_of: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        lookup = {x: i for i, b in enumerate(self.blocks) for x in b}
        object.__setattr__(self, "_block_of", lookup)

    def related(self, x, y) -> bool:
        return self._block_of[x] == self._block_of[y]

    def block(self, x) -> tuple:
        return self.blocks[self._block_of[x]]

    def refines(self, other: Congruence) -> bool:
        return all(other.related(b[0], x) for b in self.blocks for x in b)

    def pairs(self) -> Iterator[tuple]:
        for b in self.blocks:
            for x, y in itertools.product(b, repeat=2):
                yield x, y

    def label(self) -> str:
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    def to_json(self) -> dict:
        return {"blocks": [list(b) for b in self.blocks]}

    def __str__(self):
        return "{" + " ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks) + "}"


def canonical_congruence(L: FiniteLattice, blocks: Iterable[Iterable]) -> Congruence:
    idx = L.index
    canon = [tuple(sorted(b, key=idx.__getitem__)) for b in blocks]
    canon.sort(key=lambda b: idx[b[0]])
    return Congruence(tuple(canon))


def congruence_from_json(L: FiniteLattice, obj: Mapping) -> Congruence:
    try:
        blocks = obj["blocks"]
    except (KeyError, TypeError):
        raise LatticeError("congruence JSON needs a 'blocks' field") from None
    seen = [x for b in blocks for x in b]
    for x in seen:
        L.check_element(x)
    if sorted(map(L.index.__getitem__, seen)) != list(range(len(L))):
        raise LatticeError("blocks do not partition the lattice")
    theta = canonical_congruence(L, blocks)
    if not is_compatible(L, theta):
        raise LatticeError("partition is not compatible with meet and join")
    return theta


def equality(L: FiniteLattice) -> Congruence:
    return canonical_congruence(L, [[x] for x in L])


def full(L: FiniteLattice) -> Congruence:
    return canonical_congruence(L, [list(L.elements)])


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[ry] = rx
        return True

    def groups(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def generated_congruence(L: FiniteLattice, pairs: Iterable[tuple]) -> Congruence:
    """Least congruence of L containing every given pair."""
    uf = _UnionFind(L.elements)
    queue: deque = deque()
    for a, b in pairs:
        L.check_element(a)
        L.check_element(b)
        if uf.union(a, b):
            queue.append((a, b))
    elems = L.elements
    while queue:
        a, b = queue.popleft()
        for z in elems:
            for op in (L.meet, L.join):
                x, y = op(a, z), op(b, z)
                if uf.union(x, y):
                    queue.append((x, y))
    return canonical_congruence(L, uf.groups())


def principal_congruence(L: FiniteLattice, a, b) -> Congruence:
    return generated_congruence(L, [(a, b)])


def join_congruences(L: FiniteLattice, *thetas: Congruence) -> Congruence:
    pairs = [(blk[0], x) for th in thetas for blk in th.blocks for x in blk[1:]]
    return generated_congruence(L, pairs)


def is_compatible(L: FiniteLattice, theta: Congruence) -> bool:
    for b1 in theta.blocks:
        for b2 in theta.blocks:
            x0, y0 = b1[0], b2[0]
            m, j = theta.block(L.meet(x0, y0)), theta.block(L.join(x0, y0))
            for x in b1:
                for y in b2:
                    if L.meet(x, y) not in m or L.join(x, y) not in j:
                        return False
    return True


class ConcSemilattice(FiniteJoinSemilattice):
    """Con_c L for finite L: every congruence, ordered by refinement.

    Element ids are the Congruence objects themselves; the zero is equality.
    """

    def __init__(self, lattice: FiniteLattice, congruences: list[Congruence], join: Mapping):
        self.lattice = lattice
        super().__init__(congruences, join, equality(lattice), validate=len(congruences) <= 32)

    def by_label(self) -> dict[str, Congruence]:
        return {c.label(): c for c in self.elements}

    def to_json(self) -> dict:
        return super().to_json(name=Congruence.label)


def _conc_sort_key(L):
    def key(c: Congruence):
        return (-len(c.blocks), [[L.index[x] for x in b] for b in c.blocks])

    return key


def conc(K: FiniteLattice, max_size: int = DEFAULT_CONC_BOUND) -> ConcSemilattice:
    """All congruences of K, reached as joins of principal congruences."""
    if len(K) > max_size:
        raise CapExceeded(f"lattice has {len(K)} elements, bound is {max_size}")
    zero = equality(K)
    found = {zero}
    for a, b in itertools.combinations(K.elements, 2):
        found.add(principal_congruence(K, a, b))
    joins: dict = {}
    queue = list(found)
    while queue:
        c1 = queue.pop()
        for c2 in list(found):
            if (c1, c2) in joins:
                continue
            c = join_congruences(K, c1, c2)
            joins[c1, c2] = joins[c2, c1] = c
            if c not in found:
                found.add(c)
                queue.append(c)
    elements = sorted(found, key=_conc_sort_key(K))
    return ConcSemilattice(K, elements, joins)


def conc_functor(f: LatticeHom, source: ConcSemilattice | None = None, target: ConcSemilattice | None = None) -> JoinHom:
    """Con_c f: a congruence of K goes to the congruence of L generated by its image pairs."""
    verdict = f.check()
    if not verdict:
        raise HomomorphismError(f"not a lattice homomorphism: {verdict.detail} at {verdict.witness!r}")
    source = source or conc(f.source)
    target = target or conc(f.target)
    mapping = {
        alpha: generated_congruence(f.target, [(f(x), f(y)) for x, y in alpha.pairs()])
        for alpha in source
    }
    return JoinHom(source, target, mapping)


# -- the decomposition of a lift along a chain -------------------------------


def find_alternating_chain(L: FiniteLattice, a, b, psi0: Congruence, psi1: Congruence) -> list | None:
    """Shortest a = t0 <= t1 <= ... <= t_2n = b with t_2i ~ t_2i+1 (psi0), t_2i+1 ~ t_2i+2 (psi1).

    Breadth-first over (element, parity); None when b is unreachable.
    """
    if not L.leq(a, b):
        raise ChainError("chain endpoints out of order")
    start = (a, 0)
    prev = {start: None}
    queue = deque([start])
    while queue:
        t, parity = queue.popleft()
        if t == b and parity == 0:
            path = []
            node = (t, parity)
            while node is not None:
                path.append(node[0])
                node = prev[node]
            return path[::-1]
        psi = psi0 if parity == 0 else psi1
        for u in L.elements:
            if L.leq(t, u) and L.leq(u, b) and psi.related(t, u):
                node = (u, 1 - parity)
                if node not in prev:
                    prev[node] = (t, parity)
                    queue.append(node)
    return None


@dataclass
class ChainDecomposition:
    mu0: dict
    mu1: dict
    n: int


def decompose_from_chain(
    L: FiniteLattice,
    f: LatticeHom,
    alpha: JoinHom,
    chain: Sequence,
    psi0: Congruence,
    psi1: Congruence,
) -> ChainDecomposition:
    """Split alpha o Con_c f o (x -> Theta_B(0, x)) into two order-preserving maps.

    mu0(x) joins alpha Theta(t_2i ^ f(x), t_2i+1 ^ f(x)) over i < n and mu1
    does the same with the odd steps.  Neither map is claimed to preserve joins.
    """
    B = f.source
    if f.target is not L:
        raise ChainError("f must land in L")
    S = alpha.target
    chain = list(chain)
    for t in chain:
        L.check_element(t)
    if len(chain) % 2 != 1:
        raise ChainError("chain must have an odd number 2n+1 of terms", len(chain))
    if chain[0] != f(B.bottom):
        raise ChainError("chain must start at f(0_B)", 0)
    if chain[-1] != f(B.top):
        raise ChainError("chain must end at f(1_B)", len(chain) - 1)
    for i in range(len(chain) - 1):
        if not L.leq(chain[i], chain[i + 1]):
            raise ChainError("chain is not increasing", i)
        psi = psi0 if i % 2 == 0 else psi1
        if not psi.related(chain[i], chain[i + 1]):
            raise ChainError(f"t_{i} and t_{i + 1} not related by psi{i % 2}", i)
    if join_congruences(L, psi0, psi1) != principal_congruence(L, f(B.bottom), f(B.top)):
        raise ChainError("psi0 v psi1 differs from Theta(f(0), f(1))")
    n = (len(chain) - 1) // 2

    def side(x, offset):
        fx = f(x)
        return S.join_all(
            alpha(principal_congruence(L, L.meet(chain[2 * i + offset], fx), L.meet(chain[2 * i + offset + 1], fx)))
            for i in range(n)
        )

    return ChainDecomposition({x: side(x, 0) for x in B}, {x: side(x, 1) for x in B}, n)


def check_chain_decomposition(
    L: FiniteLattice,
    f: LatticeHom,
    alpha: JoinHom,
    psi0: Congruence,
    psi1: Congruence,
    dec: ChainDecomposition,
) -> Verdict:
    """Re-verify, over every element of B, the three properties of the split."""
    B = f.source
    S = alpha.target
    conc_b = conc(B)
    conc_f = conc_functor(f, conc_b, alpha.source)
    for x in B:
        phi = alpha(conc_f(principal_congruence(B, B.bottom, x)))
        if S.join(dec.mu0[x], dec.mu1[x]) != phi:
            return Verdict(False, x, "mu0 v mu1 differs from the composite at x")
    for x, y in itertools.product(B.elements, repeat=2):
        if B.leq(x, y):
            for name, mu in (("mu0", dec.mu0), ("mu1", dec.mu1)):
                if not S.leq(mu[x], mu[y]):
                    return Verdict(False, (x, y), f"{name} not order-preserving")
    if not S.leq(dec.mu0[B.top], alpha(psi0)):
        return Verdict(False, B.top, "mu0(1) not below alpha(psi0)")
    if not S.leq(dec.mu1[B.top], alpha(psi1)):
        return Verdict(False, B.top, "mu1(1) not below alpha(psi1)")
    return Verdict(True)


# -- lattice enumeration and the lift searcher -------------------------------


def _leq_key(n: int, rel: set, perm: Sequence[int]) -> tuple:
    return tuple(int((perm[i], perm[j]) in rel) for i in range(n) for j in range(n))


def enumerate_lattices(max_size: int) -> Iterator[FiniteLattice]:
    """Every lattice with at most ``max_size`` elements, one per isomorphism type.

    Size-ordered; within a size, ordered by canonical key.  Elements are named
    "0".."n-1" along a linear extension, with "0" the bottom and "n-1" the top.
    """
    for n in range(1, max_size + 1):
        seen = {}
        inner = list(range(1, n - 1))
        cand_pairs = list(itertools.combinations(inner, 2))
        for bits in itertools.product((0, 1), repeat=len(cand_pairs)):
            rel = {(i, i) for i in range(n)}
            rel |= {(0, i) for i in range(n)} | {(i, n - 1) for i in range(n)}
            rel |= {p for p, bit in zip(cand_pairs, bits) if bit}
            if any((a, b) in rel and (b, c) in rel and (a, c) not in rel for a in range(n) for b in range(n) for c in range(n)):
                continue
            try:
                lat = FiniteLattice.from_leq([str(i) for i in range(n)], lambda x, y: (int(x), int(y)) in rel)
            except LatticeError:
                continue
            key = min(_leq_key(n, rel, perm) for perm in itertools.permutations(range(n)))
            seen.setdefault(key, lat)
        for key in sorted(seen):
            yield seen[key]


def semilattice_isomorphisms(S: FiniteJoinSemilattice, T: FiniteJoinSemilattice) -> Iterator[JoinHom]:
    if len(S) != len(T):
        return
    for images in itertools.permutations(T.elements):
        h = JoinHom(S, T, dict(zip(S.elements, images)))
        if h.check():
            yield h


@dataclass
class LiftWitness:
    lattice: FiniteLattice
    f: LatticeHom
    alpha: JoinHom


@dataclass
class LiftSearch:
    witness: LiftWitness | None
    lattices_tried: int
    exhausted: bool


def brute_force_lift(
    K: FiniteLattice,
    S: FiniteJoinSemilattice,
    phi: JoinHom,
    max_size: int,
    budget: int = 200_000,
    budget_ms: float | None = None,
) -> LiftSearch:
    """Search L (size-ordered), f: K -> L, iso alpha: Con_c L -> S with alpha o Con_c f = phi.

    ``budget`` caps the number of (f, alpha) pairs examined; hitting it or the
    wall-clock cap raises rather than reporting a partial exhaustion.
    """
    if len(K) > 5 or len(S) > 5 or max_size > 5:
        raise CapExceeded("lift search is limited to |K|, |S|, max_size <= 5")
    started = time.monotonic()
    conc_k = phi.source
    work = 0
    tried = 0
    for L in enumerate_lattices(max_size):
        tried += 1
        conc_l = conc(L)
        if len(conc_l) != len(S):
            continue
        isos = list(semilattice_isomorphisms(conc_l, S))
        if not isos:
            continue
        for f in lattice_homomorphisms(K, L):
            conc_f = conc_functor(f, conc_k, conc_l)
            for alpha in isos:
                work += 1
                if work > budget:
                    raise BudgetExceeded(f"lift search examined more than {budget} candidates")
                if budget_ms is not None and (time.monotonic() - started) * 1000 > budget_ms:
                    raise BudgetExceeded(f"lift search exceeded {budget_ms} ms")
                if all(alpha(conc_f(c)) == phi(c) for c in conc_k):
                    return LiftSearch(LiftWitness(L, f, alpha), tried, False)
    return LiftSearch(None, tried, True)
