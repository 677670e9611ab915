"""The size-m construction: codes, first-difference map, presented algebra, measure into D.

Indices 0..m-1 stand in for the uncountable index set and length-L bitstrings
for subsets of omega.  ``g(i, j)`` is the first position where codes i and j
differ (0 on the diagonal); the presentation has generators u0.i, u1.j, v.k and
one relation u0.i ^ u1.j <= v.g(i,j) per ordered pair.

Decompositions of the measure are studied on the finite test set
``P* = {0, 1} + {u0.i} + {u1.j} + {u0.i ^ u1.j} + {w.n}``; restricting the
domain only removes constraints, so lower bounds found there hold on the whole
algebra.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, ConstructionError, DecompositionError
from .presented import (
    ONE,
    ZERO,
    Gen,
    Join,
    Meet,
    Not,
    Presentation,
    Term,
    entails,
    in_ideal,
    join_all,
)
from .semilattice import A0, A1, TOP, DValue, Verdict, d_join, d_leq, nat

Code = tuple[int, ...]


# ---------------------------------------------------------------------------
# Codes and the first-difference map


def default_length(m: int) -> int:
    """ceil(log2 m), but at least 1 so that v.0 exists."""
    return max(1, (m - 1).bit_length())


def make_codes(m: int, length: int | None = None, seed: int | None = 0) -> list[Code]:
    """m distinct bitstrings of the given length (bit 0 first).

    ``seed=None`` takes the first m strings in binary order; an integer seed
    draws them at random without replacement.
    """
    if m < 1:
        raise ConstructionError("need at least one code")
    length = default_length(m) if length is None else length
    if length < 1 or m > 2**length:
        raise ConstructionError(f"cannot fit {m} distinct codes in {length} bits")
    if seed is None:
        values = list(range(m))
    else:
        values = random.Random(seed).sample(range(2**length), m)
    return [tuple((v >> (length - 1 - i)) & 1 for i in range(length)) for v in values]


def parse_code(text: str) -> Code:
    if not text or set(text) - {"0", "1"}:
        raise ConstructionError(f"bad code {text!r}")
    return tuple(int(c) for c in text)


def code_str(code: Code) -> str:
    return "".join(map(str, code))


@dataclass(frozen=True)
class GMap:
    codes: tuple[Code, ...]
    table: np.ndarray = field(compare=False, repr=False)
    rank: np.ndarray = field(compare=False, repr=False)  # lexicographic position of each code

    @property
    def m(self) -> int:
        return len(self.codes)

    def __call__(self, i: int, j: int) -> int:
        return int(self.table[i, j])


def build_g(codes: Sequence[Code]) -> GMap:
    codes = tuple(tuple(c) for c in codes)
    if len({len(c) for c in codes}) > 1:
        raise ConstructionError("codes have different lengths")
    if len(set(codes)) != len(codes):
        raise ConstructionError("duplicate codes: the index map must be one-to-one")
    bits = np.array(codes, dtype=np.int8).reshape(len(codes), -1)
    differ = bits[:, None, :] != bits[None, :, :]
    # argmax finds the first True; rows with no difference (the diagonal) give 0
    table = differ.argmax(axis=2).astype(np.int16)
    table.setflags(write=False)
    rank = np.empty(len(codes), dtype=np.intp)
    rank[np.lexsort(bits.T[::-1])] = np.arange(len(codes))
    return GMap(codes, table, rank)


@dataclass(frozen=True)
class TwoToNVerdict:
    hypothesis: bool  # g(i, j) < n for all distinct i, j in X
    size: int
    bound: int  # 2**n
    collision: tuple[int, int] | None  # two members with equal n-prefix

    @property
    def ok(self) -> bool:
        return not self.hypothesis or self.size <= self.bound

    def __bool__(self):
        return self.ok


def check_2ton(gmap: GMap, X: Iterable[int], n: int) -> TwoToNVerdict:
    """If all distinct pairs of X have g < n then |X| <= 2**n.

    The hypothesis quantifies over distinct pairs only.  When |X| exceeds
    2**n the two members sharing their first n bits are returned.
    """
    idx = np.unique(np.fromiter(X, dtype=np.intp))
    if idx.size and (idx[0] < 0 or idx[-1] >= len(gmap.codes)):
        raise ConstructionError("index outside 0..m-1")
    X = idx.tolist()
    if len(X) > 1:
        # g is the common-prefix length, and the longest common prefix in a set
        # of strings is always shared by two neighbours in lexicographic order
        ordered = idx[np.argsort(gmap.rank[idx])]
        hypothesis = int(gmap.table[ordered[:-1], ordered[1:]].max()) < n
    else:
        hypothesis = True
    collision = None
    if len(X) > 2**n:
        seen: dict[Code, int] = {}
        for i in X:
            prefix = gmap.codes[i][:n]
            if prefix in seen:
                collision = (seen[prefix], i)
                break
            seen[prefix] = i
    return TwoToNVerdict(hypothesis, len(X), 2**n, collision)


# ---------------------------------------------------------------------------
# The presented algebra and its measure


def u0(i: int) -> Gen:
    return Gen(f"u0.{i}")


def u1(j: int) -> Gen:
    return Gen(f"u1.{j}")


def v(k: int) -> Gen:
    return Gen(f"v.{k}")


def w(n: int) -> Term:
    """w_n = v.0 v ... v v.n."""
    return join_all(v(k) for k in range(n + 1))


@dataclass
class TheoremBInstance:
    codes: tuple[Code, ...]
    gmap: GMap
    presentation: Presentation
    ideal_gens: tuple[tuple[str, ...], tuple[str, ...]]  # I0, I1
    small_gens: tuple[str, ...]  # I
    _mu_cache: dict = field(default_factory=dict, repr=False)
    _order_cache: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return len(self.codes)

    @property
    def L(self) -> int:
        return len(self.codes[0])

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "L": self.L,
            "codes": [code_str(c) for c in self.codes],
            "presentation": self.presentation.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> TheoremBInstance:
        try:
            codes = [parse_code(c) for c in obj["codes"]]
            inst = build_instance(obj["m"], obj["L"], codes)
        except (KeyError, TypeError) as exc:
            raise ConstructionError(f"bad instance JSON: {exc}") from None
        if "presentation" in obj and Presentation.from_json(obj["presentation"]) != inst.presentation:
            raise ConstructionError("embedded presentation does not match the codes")
        return inst


def build_instance(m: int, L: int, codes: Sequence[Code]) -> TheoremBInstance:
    codes = [tuple(c) for c in codes]
    if len(codes) != m:
        raise ConstructionError(f"expected {m} codes, got {len(codes)}")
    if any(len(c) != L for c in codes):
        raise ConstructionError(f"every code must have length {L}")
    if L < 1:
        raise ConstructionError("code length must be at least 1")
    gmap = build_g(codes)
    rels = [(i, j, gmap(i, j)) for i in range(m) for j in range(m)]
    P = Presentation.family(m, m, L, rels)
    vs = tuple(f"v.{k}" for k in range(L))
    I0 = tuple(f"u0.{i}" for i in range(m)) + vs
    I1 = tuple(f"u1.{j}" for j in range(m)) + vs
    return TheoremBInstance(tuple(codes), gmap, P, (I0, I1), vs)


def default_instance(m: int, L: int | None = None, seed: int | None = 0) -> TheoremBInstance:
    L = default_length(m) if L is None else L
    return build_instance(m, L, make_codes(m, L, seed))


def ideal_memberships(inst: TheoremBInstance, x: Term) -> tuple[bool, bool, bool]:
    P = inst.presentation
    return (
        bool(in_ideal(P, x, inst.ideal_gens[0])),
        bool(in_ideal(P, x, inst.ideal_gens[1])),
        bool(in_ideal(P, x, inst.small_gens)),
    )


def mu(inst: TheoremBInstance, x: Term) -> DValue:
    """Least n with x <= w_n inside I0 n I1; a_l on I_l minus I_(1-l); top elsewhere."""
    cached = inst._mu_cache.get(x)
    if cached is not None:
        return cached
    P = inst.presentation
    in0 = bool(in_ideal(P, x, inst.ideal_gens[0]))
    in1 = bool(in_ideal(P, x, inst.ideal_gens[1]))
    if in0 and in1:
        for n in range(inst.L):
            if entails(P, x, w(n)):
                value = nat(n)
                break
        else:
            raise ConstructionError(f"{x} lies in I0 and I1 but below no w_n")
    elif in0:
        value = A0
    elif in1:
        value = A1
    else:
        value = TOP
    inst._mu_cache[x] = value
    return value


def random_term(inst: TheoremBInstance, rng: random.Random, depth: int = 2) -> Term:
    if depth == 0 or rng.random() < 0.35:
        r = rng.random()
        if r < 0.05:
            return ZERO
        if r < 0.08:
            return ONE
        if r < 0.30:
            return Meet(u0(rng.randrange(inst.m)), u1(rng.randrange(inst.m)))
        if r < 0.40:
            return w(rng.randrange(inst.L))
        return Gen(rng.choice(inst.presentation.generators))
    r = rng.random()
    if r < 0.1:
        return Not(random_term(inst, rng, depth - 1))
    a, b = random_term(inst, rng, depth - 1), random_term(inst, rng, depth - 1)
    return Meet(a, b) if r < 0.45 else Join(a, b)


def sample_term_pairs(inst: TheoremBInstance, count: int, seed: int = 0) -> list[tuple[Term, Term]]:
    rng = random.Random(seed)
    return [(random_term(inst, rng), random_term(inst, rng)) for _ in range(count)]


def check_hom(inst: TheoremBInstance, sample: Iterable[tuple[Term, Term]]) -> Verdict:
    if mu(inst, ZERO) != nat(0):
        return Verdict(False, (ZERO, ZERO), "mu(0) is not 0")
    for s, t in sample:
        if mu(inst, Join(s, t)) != d_join(mu(inst, s), mu(inst, t)):
            return Verdict(False, (s, t), "join not preserved")
    return Verdict(True)


def check_ideal_intersection(inst: TheoremBInstance, terms: Iterable[Term]) -> Verdict:
    """I0 n I1 = I on the given terms."""
    for x in terms:
        in0, in1, small = ideal_memberships(inst, x)
        if (in0 and in1) != small:
            return Verdict(False, x)
    return Verdict(True)


@dataclass
class LineqReport:
    checked: int
    mismatches: list[tuple[int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __bool__(self):
        return self.ok


def check_lineq(inst: TheoremBInstance) -> LineqReport:
    """u0.i ^ u1.j <= w_n exactly when g(i, j) <= n, for every pair and n < L."""
    P = inst.presentation
    bad = []
    count = 0
    for i in range(inst.m):
        for j in range(inst.m):
            s = Meet(u0(i), u1(j))
            for n in range(inst.L):
                count += 1
                if bool(entails(P, s, w(n))) != (inst.gmap(i, j) <= n):
                    bad.append((i, j, n))
    return LineqReport(count, bad)


# ---------------------------------------------------------------------------
# Decompositions on the test set P*


def meet_key(i: int, j: int) -> str:
    return f"u0.{i}^u1.{j}"


def p_star(inst: TheoremBInstance) -> dict[str, Term]:
    """Test set in search order: 1, 0, u0s, u1s, pairwise meets, w's."""
    out: dict[str, Term] = {"1": ONE, "0": ZERO}
    out.update({f"u0.{i}": u0(i) for i in range(inst.m)})
    out.update({f"u1.{j}": u1(j) for j in range(inst.m)})
    out.update({meet_key(i, j): Meet(u0(i), u1(j)) for i in range(inst.m) for j in range(inst.m)})
    out.update({f"w.{n}": w(n) for n in range(inst.L)})
    return out


def p_star_mu(inst: TheoremBInstance) -> dict[str, DValue]:
    return {k: mu(inst, t) for k, t in p_star(inst).items()}


def p_star_order(inst: TheoremBInstance) -> dict[tuple[str, str], bool]:
    """x <= y in B for all x, y in P*, decided by entailment."""
    if not inst._order_cache:
        terms = p_star(inst)
        P = inst.presentation
        for a, s in terms.items():
            for b, t in terms.items():
                inst._order_cache[a, b] = a == b or bool(entails(P, s, t))
    return inst._order_cache


@dataclass
class Decomposition:
    mu0: dict[str, DValue]
    mu1: dict[str, DValue]

    def to_json(self) -> dict:
        return {
            "mu0": {k: x.to_json() for k, x in self.mu0.items()},
            "mu1": {k: x.to_json() for k, x in self.mu1.items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> Decomposition:
        return cls(
            {k: DValue.from_json(x) for k, x in obj["mu0"].items()},
            {k: DValue.from_json(x) for k, x in obj["mu1"].items()},
        )


def validate_decomposition(inst: TheoremBInstance, dec: Decomposition) -> Verdict:
    keys = list(p_star(inst))
    if set(dec.mu0) != set(keys) or set(dec.mu1) != set(keys):
        return Verdict(False, None, "tables are not defined exactly on P*")
    target = p_star_mu(inst)
    for k in keys:
        if d_join(dec.mu0[k], dec.mu1[k]) != target[k]:
            return Verdict(False, k, "mu0 v mu1 differs from mu")
    if not d_leq(dec.mu0["1"], A0):
        return Verdict(False, "1", "mu0(1) not below a0")
    if not d_leq(dec.mu1["1"], A1):
        return Verdict(False, "1", "mu1(1) not below a1")
    order = p_star_order(inst)
    for (a, b), below in order.items():
        if below and not (d_leq(dec.mu0[a], dec.mu0[b]) and d_leq(dec.mu1[a], dec.mu1[b])):
            return Verdict(False, (a, b), "not order-preserving")
    return Verdict(True)


def decomposition_from_levels(inst: TheoremBInstance, a: Sequence[int], b: Sequence[int]) -> Decomposition:
    """Decomposition with mu1(u0.i) = a[i] and mu0(u1.j) = b[j].

    Valid exactly when g(i, j) <= max(a[i], b[j]) for every pair.
    """
    mus = p_star_mu(inst)
    mu0: dict[str, DValue] = {"1": A0, "0": nat(0)}
    mu1: dict[str, DValue] = {"1": A1, "0": nat(0)}
    for i in range(inst.m):
        mu0[f"u0.{i}"], mu1[f"u0.{i}"] = A0, nat(a[i])
    for j in range(inst.m):
        mu0[f"u1.{j}"], mu1[f"u1.{j}"] = nat(b[j]), A1
    for i in range(inst.m):
        for j in range(inst.m):
            g = mus[meet_key(i, j)].n
            mu0[meet_key(i, j)] = nat(min(g, b[j]))
            mu1[meet_key(i, j)] = nat(min(g, a[i]))
    for n in range(inst.L):
        mu0[f"w.{n}"] = mu1[f"w.{n}"] = nat(n)
    return Decomposition(mu0, mu1)


def uniform_decomposition(inst: TheoremBInstance, level: int) -> Decomposition:
    return decomposition_from_levels(inst, [level] * inst.m, [level] * inst.m)


@dataclass
class LevelSets:
    X: list[frozenset[int]]
    Y: list[frozenset[int]]
    Z: list[frozenset[int]]


def _u_levels(inst: TheoremBInstance, dec: Decomposition) -> tuple[list[DValue], list[DValue]]:
    return [dec.mu1[f"u0.{i}"] for i in range(inst.m)], [dec.mu0[f"u1.{j}"] for j in range(inst.m)]


def level_sets(inst: TheoremBInstance, dec: Decomposition) -> LevelSets:
    """X_n = {i : mu1(u0.i) <= n}, Y_n = {j : mu0(u1.j) <= n}, Z_n = X_n n Y_n.

    n runs from 0 to max(L, largest natural used on a u-generator), so the last
    Z_n is the whole index set.
    """
    verdict = validate_decomposition(inst, dec)
    if not verdict:
        raise DecompositionError(f"invalid decomposition: {verdict.detail} at {verdict.witness!r}")
    xs, ys = _u_levels(inst, dec)
    top = max([inst.L] + [x.n for x in xs + ys if x.is_nat])
    X, Y, Z = [], [], []
    for n in range(top + 1):
        X.append(frozenset(i for i, x in enumerate(xs) if d_leq(x, nat(n))))
        Y.append(frozenset(j for j, y in enumerate(ys) if d_leq(y, nat(n))))
        Z.append(X[-1] & Y[-1])
    return LevelSets(X, Y, Z)


@dataclass
class ZnRow:
    n: int
    size: int
    bound: int
    pairs_ok: bool

    @property
    def ok(self) -> bool:
        return self.pairs_ok and self.size <= self.bound


@dataclass
class ZnReport:
    rows: list[ZnRow]
    failures: list[tuple[int, int, int, str]]

    @property
    def ok(self) -> bool:
        return not self.failures and all(r.ok for r in self.rows)

    def __bool__(self):
        return self.ok


def verify_zn_bound(inst: TheoremBInstance, dec: Decomposition) -> ZnReport:
    """For i, j in Z_n: mu(u0.i ^ u1.j) <= n, hence u0.i ^ u1.j <= w_n, hence g(i, j) <= n.

    Distinct (n+1)-prefixes then give |Z_n| <= 2**(n+1).
    """
    sets = level_sets(inst, dec)
    P = inst.presentation
    rows, failures = [], []
    for n, Zn in enumerate(sets.Z):
        pairs_ok = True
        cap = nat(n)
        wn = w(min(n, inst.L - 1))
        for i in Zn:
            for j in Zn:
                k = meet_key(i, j)
                value = d_join(dec.mu0[k], dec.mu1[k])
                if not (d_leq(dec.mu0[k], dec.mu0[f"u1.{j}"]) and d_leq(dec.mu1[k], dec.mu1[f"u0.{i}"])):
                    failures.append((n, i, j, "meet values exceed the generator values"))
                elif not d_leq(value, cap):
                    failures.append((n, i, j, "mu of the meet exceeds n"))
                elif not entails(P, Meet(u0(i), u1(j)), wn):
                    failures.append((n, i, j, "meet not below w_n"))
                elif inst.gmap(i, j) > n:
                    failures.append((n, i, j, "g exceeds n"))
                else:
                    continue
                pairs_ok = False
        rows.append(ZnRow(n, len(Zn), 2 ** (n + 1), pairs_ok))
    return ZnReport(rows, failures)


# ---------------------------------------------------------------------------
# Minimum forced level


def certified_lower_bound(m: int) -> int:
    """Every index lies in some Z_N and |Z_N| <= 2**(N+1), so N >= ceil(log2 m) - 1."""
    return max(0, (m - 1).bit_length() - 1)


@dataclass
class ForcedLevel:
    n_min: int
    mode: str  # "exact" or "bound"
    lower_bound: int
    witness: Decomposition | None = None
    certificate: dict | None = None


def _value_range(L: int) -> list[DValue]:
    return [nat(i) for i in range(L + 1)] + [A0, A1, TOP]


def _search_at_level(inst, level, order, mus, deadline) -> Decomposition | None:
    keys = list(mus)
    values = _value_range(inst.L)
    u_keys = {k for k in keys if k.startswith(("u0.", "u1.")) and "^" not in k}

    def allowed(k, x, y):
        if d_join(x, y) != mus[k]:
            return False
        if k == "1" and not (d_leq(x, A0) and d_leq(y, A1)):
            return False
        if k in u_keys and any(z.is_nat and z.n > level for z in (x, y)):
            return False
        return True

    domains = {k: [(x, y) for x in values for y in values if allowed(k, x, y)] for k in keys}
    related = {k: [(o, order[k, o], order[o, k]) for o in keys if o != k and (order[k, o] or order[o, k])] for k in keys}

    def fits(k, pair, o, opair):
        below, above = order[k, o], order[o, k]
        if below and not (d_leq(pair[0], opair[0]) and d_leq(pair[1], opair[1])):
            return False
        if above and not (d_leq(opair[0], pair[0]) and d_leq(opair[1], pair[1])):
            return False
        return True

    assignment: dict = {}

    def backtrack(i, doms):
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("decomposition search exceeded its time budget")
        if i == len(keys):
            return True
        k = keys[i]
        for pair in doms[k]:
            pruned = dict(doms)
            dead = False
            for o, _, _ in related[k]:
                if o in assignment:
                    continue
                keep = [op for op in pruned[o] if fits(k, pair, o, op)]
                if not keep:
                    dead = True
                    break
                pruned[o] = keep
            if dead:
                continue
            assignment[k] = pair
            if backtrack(i + 1, pruned):
                return True
            del assignment[k]
        return False

    if not backtrack(0, domains):
        return None
    return Decomposition({k: assignment[k][0] for k in keys}, {k: assignment[k][1] for k in keys})


def min_forced_level(
    inst: TheoremBInstance,
    exact_limit: int = 4,
    budget_ms: float | None = None,
) -> ForcedLevel:
    """Least possible top natural value on u-generators over all decompositions on P*.

    Exhaustive (levels tried upward, lexicographically first witness) when
    m <= exact_limit, otherwise the pigeonhole bound.
    """
    lb = certified_lower_bound(inst.m)
    if inst.m > exact_limit:
        n = lb - 1
        return ForcedLevel(lb, "bound", lb, certificate={"m": inst.m, "below": n, "capacity": 2 ** (n + 1) if n >= 0 else 0})
    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000
    order = p_star_order(inst)
    mus = p_star_mu(inst)
    for level in range(inst.L + 1):
        dec = _search_at_level(inst, level, order, mus, deadline)
        if dec is not None:
            verdict = validate_decomposition(inst, dec)
            if not verdict:  # pragma: no cover - search only emits consistent tables
                raise DecompositionError(f"search produced an invalid table: {verdict.detail}")
            return ForcedLevel(level, "exact", lb, witness=dec)
    raise DecompositionError("no decomposition within the capped value range")


@dataclass
class ExperimentRow:
    m: int
    L: int
    mode: str
    n_min: int
    elapsed_ms: float | None = None
    witness_path: str | None = None


def scan(ms: Iterable[int], seed: int | None = 0, exact_limit: int = 4, budget_ms: float | None = None) -> list[ExperimentRow]:
    rows = []
    for m in ms:
        started = time.perf_counter()
        inst = default_instance(m, seed=seed)
        result = min_forced_level(inst, exact_limit=exact_limit, budget_ms=budget_ms)
        elapsed = (time.perf_counter() - started) * 1000
        rows.append(ExperimentRow(m, inst.L, result.mode, result.n_min, elapsed))
    return rows


