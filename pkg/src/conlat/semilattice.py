"""Join-zero semilattices: explicit finite tables and the symbolic semilattice D.

D is the semilattice omega + {a0, a1, top}: the naturals form a chain, a0 and a1
sit incomparably above every natural, and a0 v a1 = top.  It is kept symbolic so
no finite truncation (which would always be a lattice) ever enters a
computation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

from .errors import (
    DomainMismatch,
    HomomorphismError,
    SemilatticeError,
    UndecidableAtScale,
    UnknownElement,
)


@dataclass(frozen=True)
class Verdict:
    """Boolean outcome of a check, with an optional witness when it fails."""

    ok: bool
    witness: Any = None
    detail: str = ""

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# The semilattice D

_KINDS = ("nat", "a0", "a1", "top")


@dataclass(frozen=True)
class DValue:
    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"bad DValue kind {self.kind!r}")
        if self.kind == "nat" and self.n < 0:
            raise ValueError("Nat value must be a natural number")
        if self.kind != "nat" and self.n != 0:
            raise ValueError("only Nat carries a number")

    @property
    def is_nat(self) -> bool:
        return self.kind == "nat"

    def __str__(self):
        return str(self.n) if self.is_nat else self.kind

    def __repr__(self):
        return f"Nat({self.n})" if self.is_nat else self.kind.upper()

    def to_json(self):
        return {"nat": self.n} if self.is_nat else self.kind

    @classmethod
    def from_json(cls, obj) -> DValue:
        if isinstance(obj, dict) and set(obj) == {"nat"} and isinstance(obj["nat"], int):
            return nat(obj["nat"])
        if obj in ("a0", "a1", "top"):
            return cls(obj)
        raise SemilatticeError(f"not a serialized DValue: {obj!r}")

    @classmethod
    def parse(cls, text: str) -> DValue:
        text = text.strip().lower()
        if text.isdigit():
            return nat(int(text))
        if text in ("a0", "a1", "top"):
            return cls(text)
        raise SemilatticeError(f"not a DValue: {text!r}")


def nat(n: int) -> DValue:
    return DValue("nat", n)


A0 = DValue("a0")
A1 = DValue("a1")
TOP = DValue("top")
ZERO = nat(0)


def d_leq(x: DValue, y: DValue) -> bool:
    if x == y or y.kind == "top":
        return True
    if x.is_nat:
        return not y.is_nat or x.n <= y.n
    return False


def d_join(x: DValue, y: DValue) -> DValue:
    if x.is_nat and y.is_nat:
        return x if x.n >= y.n else y
    if d_leq(x, y):
        return y
    if d_leq(y, x):
        return x
    return TOP


class DSemilattice:
    """Symbolic handle on D, exposing the same join/leq/zero surface as the
    finite tables."""

    zero = ZERO
    is_finite = False

    def join(self, x: DValue, y: DValue) -> DValue:
        return d_join(x, y)

    def leq(self, x: DValue, y: DValue) -> bool:
        return d_leq(x, y)

    def join_all(self, xs: Iterable[DValue]) -> DValue:
        out = ZERO
        for x in xs:
            out = d_join(out, x)
        return out

    def __contains__(self, x):
        return isinstance(x, DValue)

    def __repr__(self):
        return "D"


D = DSemilattice()


def no_largest_certificate(length: int) -> list[DValue]:
    """Strictly increasing run Nat(0) < Nat(1) < ... inside (a0] n (a1] of D.

    Every member of that intersection is a natural, and each natural is
    exceeded by its successor, so no prefix of this run is ever bounded by a
    member of the intersection.
    """
    return [nat(i) for i in range(length)]


# ---------------------------------------------------------------------------
# Finite semilattices


class FiniteJoinSemilattice:
    """Finite {v,0}-semilattice given by an explicit join table.

    ``join`` maps (x, y) to x v y; only one of (x, y) / (y, x) is required,
    the other is filled in (a disagreement between the two is an error).
    """

    is_finite = True

    def __init__(self, elements: Iterable[Hashable], join: Mapping, zero, validate: bool = True):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise SemilatticeError("duplicate element ids")
        self._set = frozenset(self.elements)
        self.zero = zero
        if zero not in self._set:
            raise SemilatticeError(f"zero {zero!r} is not an element")
        table: dict = {}
        for (x, y), z in join.items():
            for e in (x, y, z):
                if e not in self._set:
                    raise SemilatticeError(f"join table mentions unknown element {e!r}")
            for key in ((x, y), (y, x)):
                if key in table and table[key] != z:
                    raise SemilatticeError(f"conflicting entries for join{key}")
                table[key] = z
        missing = [(x, y) for x in self.elements for y in self.elements if (x, y) not in table]
        if missing:
            raise SemilatticeError(f"join table incomplete, e.g. missing {missing[0]}")
        self._join = table
        if validate:
            bad = self.axiom_violation()
            if bad is not None:
                raise SemilatticeError(bad)

    @classmethod
    def from_order(cls, elements: Iterable, leq: Callable[[Any, Any], bool]) -> FiniteJoinSemilattice:
        """Build from an order relation; every pair must have a least upper bound."""
        elements = tuple(elements)
        table = {}
        for x, y in itertools.combinations_with_replacement(elements, 2):
            ubs = [z for z in elements if leq(x, z) and leq(y, z)]
            least = [z for z in ubs if all(leq(z, w) for w in ubs)]
            if len(least) != 1:
                raise SemilatticeError(f"{x!r} and {y!r} have no least upper bound")
            table[x, y] = least[0]
        bottoms = [z for z in elements if all(leq(z, w) for w in elements)]
        if len(bottoms) != 1:
            raise SemilatticeError("no least element")
        return cls(elements, table, bottoms[0])

    def axiom_violation(self) -> str | None:
        """First failing semilattice law, or None."""
        j = self._join
        for x in self.elements:
            if j[x, x] != x:
                return f"join not idempotent at {x!r}"
            if j[self.zero, x] != x:
                return f"zero not neutral at {x!r}"
        for x, y, z in itertools.product(self.elements, repeat=3):
            if j[j[x, y], z] != j[x, j[y, z]]:
                return f"join not associative at {(x, y, z)!r}"
        return None

    def __contains__(self, x):
        return x in self._set

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def _check(self, x):
        if x not in self._set:
            raise UnknownElement(x)

    def join(self, x, y):
        try:
            return self._join[x, y]
        except KeyError:
            self._check(x)
            self._check(y)
            raise

    def join_all(self, xs: Iterable):
        out = self.zero
        for x in xs:
            out = self.join(out, x)
        return out

    def leq(self, x, y) -> bool:
        return self.join(x, y) == y

    def down_set(self, a) -> frozenset:
        self._check(a)
        return frozenset(x for x in self.elements if self.leq(x, a))

    def to_json(self, name: Callable[[Any], Any] = lambda e: e) -> dict:
        return {
            "elements": [name(e) for e in self.elements],
            "zero": name(self.zero),
            "join": [
                [name(x), name(y), name(self._join[x, y])]
                for x, y in itertools.combinations_with_replacement(self.elements, 2)
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> FiniteJoinSemilattice:
        try:
            elements = obj["elements"]
            zero = obj["zero"]
            triples = obj["join"]
        except (KeyError, TypeError) as exc:
            raise SemilatticeError(f"semilattice JSON missing field: {exc}") from None
        table = {}
        for row in triples:
            if len(row) != 3:
                raise SemilatticeError(f"join entry must be a triple, got {row!r}")
            x, y, z = row
            if (x, y) in table and table[x, y] != z:
                raise SemilatticeError(f"conflicting entries for join({x!r}, {y!r})")
            table[x, y] = z
        return cls(elements, table, zero)

    def __repr__(self):
        return f"FiniteJoinSemilattice({len(self.elements)} elements)"


def chain_semilattice(n: int) -> FiniteJoinSemilattice:
    """The n-element chain 0 < 1 < ... < n-1 with integer ids."""
    elems = range(n)
    return FiniteJoinSemilattice(elems, {(x, y): max(x, y) for x in elems for y in elems}, 0)


# ---------------------------------------------------------------------------
# Ideals


@dataclass(frozen=True)
class Ideal:
    carrier: Any
    members: frozenset | None = None
    predicate: Callable[[Any], bool] | None = field(default=None, compare=False)

    def __contains__(self, x):
        if self.members is not None:
            return x in self.members
        return x in self.carrier and self.predicate(x)

    def is_ideal(self) -> Verdict:
        """Exhaustive ideal check; only meaningful for an explicit member set."""
        if self.members is None:
            raise UndecidableAtScale("ideal given by a predicate cannot be checked exhaustively")
        S = self.carrier
        if S.zero not in self.members:
            return Verdict(False, S.zero, "zero missing")
        for x in self.members:
            for y in S:
                if S.leq(y, x) and y not in self.members:
                    return Verdict(False, (y, x), "not downward closed")
        for x, y in itertools.product(self.members, repeat=2):
            if S.join(x, y) not in self.members:
                return Verdict(False, (x, y), "not closed under join")
        return Verdict(True)


def principal_ideal(S, a) -> Ideal:
    if isinstance(S, DSemilattice):
        if not isinstance(a, DValue):
            raise UnknownElement(a)
        return Ideal(S, None, lambda x, a=a: d_leq(x, a))
    return Ideal(S, S.down_set(a))


def generated_ideal(S: FiniteJoinSemilattice, xs: Iterable) -> Ideal:
    """Id X: for a finite set X this is the principal ideal of its join."""
    return principal_ideal(S, S.join_all(xs))


def intersection_has_largest(S, a0, a1):
    """Largest element of (a0] n (a1], or None when there is none."""
    if isinstance(S, DSemilattice):
        for x in (a0, a1):
            if not isinstance(x, DValue):
                raise UnknownElement(x)
        if d_leq(a0, a1):
            return a0
        if d_leq(a1, a0):
            return a1
        if a0.is_nat or a1.is_nat:  # pragma: no cover - comparable with everything
            raise AssertionError
        # {a0, a1} incomparable: the intersection is omega
        return None
    Q = S.down_set(a0) & S.down_set(a1)
    for q in S.elements:
        if q in Q and all(S.leq(x, q) for x in Q):
            return q
    return None


# ---------------------------------------------------------------------------
# Distributivity


def is_distributive_semilattice(S: FiniteJoinSemilattice) -> Verdict:
    """Refinement distributivity: s <= a v b forces s = a' v b' with a' <= a, b' <= b.

    Failure witness is the first (s, a, b) in element order.
    """
    downs = {x: S.down_set(x) for x in S.elements}
    for s, a, b in itertools.product(S.elements, repeat=3):
        if not S.leq(s, S.join(a, b)):
            continue
        if not any(S.join(x, y) == s for x in downs[a] for y in downs[b]):
            return Verdict(False, (s, a, b))
    return Verdict(True)


# ---------------------------------------------------------------------------
# Homomorphisms


@dataclass
class JoinHom:
    """A map between join-zero semilattices, given by an explicit table.

    The source must be finite; the target may be finite or D.
    """

    source: Any
    target: Any
    mapping: dict

    def __post_init__(self):
        for x in self.source:
            if x not in self.mapping:
                raise HomomorphismError(f"map undefined at {x!r}")
            if self.mapping[x] not in self.target:
                raise HomomorphismError(f"image of {x!r} not in target")

    def __call__(self, x):
        try:
            return self.mapping[x]
        except KeyError:
            raise UnknownElement(x) from None

    def check(self) -> Verdict:
        S, T = self.source, self.target
        if self(S.zero) != T.zero:
            return Verdict(False, (S.zero,), "zero not preserved")
        for x, y in itertools.combinations_with_replacement(S.elements, 2):
            if self(S.join(x, y)) != T.join(self(x), self(y)):
                return Verdict(False, (x, y), "join not preserved")
        return Verdict(True)

    def is_monotone(self) -> Verdict:
        S, T = self.source, self.target
        for x, y in itertools.product(S.elements, repeat=2):
            if S.leq(x, y) and not T.leq(self(x), self(y)):
                return Verdict(False, (x, y))
        return Verdict(True)

    def compose(self, other: JoinHom) -> JoinHom:
        """self after other."""
        return JoinHom(other.source, self.target, {x: self(other(x)) for x in other.source})


def identity_hom(S) -> JoinHom:
    return JoinHom(S, S, {x: x for x in S})


def is_weakly_distributive_at(mu: JoinHom, a, candidates: Iterable[tuple] | None = None) -> Verdict:
    """Every split mu(a) = b0 v b1 must be matched by a = a0 v a1 with mu(a_l) <= b_l.

    For an infinite target the caller provides the splits to test; without them
    the question is reported undecidable rather than guessed.
    """
    S, T = mu.source, mu.target
    if a not in S:
        raise UnknownElement(a)
    top = mu(a)
    if candidates is None:
        if not getattr(T, "is_finite", False):
            raise UndecidableAtScale("target is infinite; supply candidate decompositions")
        splits = [(b0, b1) for b0 in T for b1 in T if T.join(b0, b1) == top]
    else:
        splits = []
        for b0, b1 in candidates:
            if T.join(b0, b1) != top:
                raise HomomorphismError(f"candidate {(b0, b1)!r} does not join to mu(a)")
            splits.append((b0, b1))
    below_a = [x for x in S if S.leq(x, a)]
    for b0, b1 in splits:
        if not any(
            S.join(a0, a1) == a and T.leq(mu(a0), b0) and T.leq(mu(a1), b1)
            for a0 in below_a
            for a1 in below_a
        ):
            return Verdict(False, (b0, b1))
    return Verdict(True)


def pointwise_join(mu0: Mapping, mu1: Mapping, target) -> dict:
    if set(mu0) != set(mu1):
        raise DomainMismatch("maps have different domains")
    return {x: target.join(mu0[x], mu1[x]) for x in mu0}


def is_order_preserving(table: Mapping, source_leq: Callable, target_leq: Callable) -> Verdict:
    keys = list(table)
    for x, y in itertools.product(keys, repeat=2):
        if source_leq(x, y) and not target_leq(table[x], table[y]):
            return Verdict(False, (x, y))
    return Verdict(True)


# ---------------------------------------------------------------------------
# JSON for homomorphisms


def value_from_json(obj, target):
    if isinstance(target, DSemilattice):
        return DValue.from_json(obj)
    return obj


def value_to_json(x):
    return x.to_json() if isinstance(x, DValue) else x


def hom_from_json(obj: Mapping, resolve: Callable[[Any], Any]) -> JoinHom:
    """``resolve`` turns a source/target reference (inline object, path, "D") into a semilattice."""
    try:
        source = resolve(obj["source"])
        target = resolve(obj["target"])
        raw = obj["map"]
    except (KeyError, TypeError) as exc:
        raise HomomorphismError(f"homomorphism JSON missing field: {exc}") from None
    mapping = {k: value_from_json(v, target) for k, v in raw.items()}
    # JSON keys are strings; let integer ids through when the source uses them
    ids = {str(x): x for x in source}
    mapping = {ids.get(k, k): v for k, v in mapping.items()}
    return JoinHom(source, target, mapping)


def hom_to_json(mu: JoinHom, source_ref, target_ref) -> dict:
    return {
        "source": source_ref,
        "target": target_ref,
        "map": {str(x): value_to_json(mu(x)) for x in mu.source},
    }
