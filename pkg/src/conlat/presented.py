"""Boolean algebras presented by generators and relations g ^ h <= v.

Elements are terms; two terms are compared only through entailment, judged
over 2-valued valuations that satisfy every relation.  Each relation is the
definite clause g ^ h -> v, so the relation theory is Horn: a set of generators
forced to 1 extends to a model exactly when its least model (unit propagation)
leaves every generator forced to 0 untouched.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import CapExceeded, ConlatError, TermParseError, UndeclaredGenerator
from .semilattice import Verdict

DEFAULT_ENTAIL_CAP = 40
DEFAULT_ATOM_CAP = 20


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()

    def __and__(self, other):
        return Meet(self, other)

    def __or__(self, other):
        return Join(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Term):
    value: bool

    def __str__(self):
        return "1" if self.value else "0"


@dataclass(frozen=True)
class Gen(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Term):
    arg: Term

    def __str__(self):
        return f"(not {self.arg})"


@dataclass(frozen=True)
class Meet(Term):
    left: Term
    right: Term

    def __str__(self):
        return f"(and {self.left} {self.right})"


@dataclass(frozen=True)
class Join(Term):
    left: Term
    right: Term

    def __str__(self):
        return f"(or {self.left} {self.right})"


ZERO = Const(False)
ONE = Const(True)


def join_all(terms: Iterable[Term]) -> Term:
    out = None
    for t in terms:
        out = t if out is None else Join(out, t)
    return ZERO if out is None else out


def meet_all(terms: Iterable[Term]) -> Term:
    out = None
    for t in terms:
        out = t if out is None else Meet(out, t)
    return ONE if out is None else out


def generators_of(t: Term) -> frozenset[str]:
    out = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Gen):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (Meet, Join)):
            stack.extend((node.left, node.right))
    return frozenset(out)


def gen_key(name: str):
    """Natural order on generator names: numeric dotted parts compare as numbers."""
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in name.split("."))


# -- s-expression syntax -----------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([A-Za-z0-9_.]+))")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(\.[0-9A-Za-z_]+)*$")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.start(m.lastindex) != pos:
            raise TermParseError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(m.lastindex), pos))
        pos = m.end()
    return tokens


def parse_term(text: str) -> Term:
    """Parse ``(and x y)``, ``(or x y)``, ``(not x)``, ``0``, ``1`` and generator names.

    ``and`` / ``or`` accept two or more arguments and fold to the left.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise TermParseError("empty term", 0)
    term, i = _parse(tokens, 0, len(text))
    if i != len(tokens):
        raise TermParseError("trailing input", tokens[i][1])
    return term


def _parse(tokens, i, end) -> tuple[Term, int]:
    if i >= len(tokens):
        raise TermParseError("unexpected end of input", end)
    tok, pos = tokens[i]
    if tok == ")":
        raise TermParseError("unexpected ')'", pos)
    if tok != "(":
        if tok == "0":
            return ZERO, i + 1
        if tok == "1":
            return ONE, i + 1
        if not _NAME.match(tok):
            raise TermParseError(f"bad generator name {tok!r}", pos)
        return Gen(tok), i + 1
    if i + 1 >= len(tokens):
        raise TermParseError("unexpected end of input", end)
    op, op_pos = tokens[i + 1]
    if op not in ("and", "or", "not"):
        raise TermParseError(f"unknown operator {op!r}", op_pos)
    i += 2
    args = []
    while True:
        if i >= len(tokens):
            raise TermParseError("missing ')'", end)
        if tokens[i][0] == ")":
            break
        arg, i = _parse(tokens, i, end)
        args.append(arg)
    close = i + 1
    if op == "not":
        if len(args) != 1:
            raise TermParseError("'not' takes exactly one argument", op_pos)
        return Not(args[0]), close
    if len(args) < 2:
        raise TermParseError(f"'{op}' takes at least two arguments", op_pos)
    return (meet_all(args) if op == "and" else join_all(args)), close


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relations: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ConlatError("duplicate generator names")
        declared = set(self.generators)
        for rel in self.relations:
            for g in rel:
                if g not in declared:
                    raise UndeclaredGenerator(f"relation mentions undeclared generator {g!r}")
        if len(set(self.relations)) != len(self.relations):
            raise ConlatError("duplicate relations")

    @classmethod
    def family(cls, m0: int, m1: int, nv: int, relations: Iterable[tuple[int, int, int]]) -> Presentation:
        """Generators u0.0.., u1.0.., v.0..; each (i, j, k) reads u0.i ^ u1.j <= v.k."""
        gens = [f"u0.{i}" for i in range(m0)] + [f"u1.{j}" for j in range(m1)] + [f"v.{k}" for k in range(nv)]
        rels = []
        for i, j, k in relations:
            if not (0 <= i < m0 and 0 <= j < m1 and 0 <= k < nv):
                raise UndeclaredGenerator(f"relation {(i, j, k)} out of range")
            rels.append((f"u0.{i}", f"u1.{j}", f"v.{k}"))
        return cls(tuple(gens), tuple(rels))

    def family_sizes(self) -> tuple[int, int, int] | None:
        counts = {"u0": 0, "u1": 0, "v": 0}
        for g in self.generators:
            head = g.split(".")[0]
            if head not in counts:
                return None
            counts[head] += 1
        if self.generators != Presentation.family(counts["u0"], counts["u1"], counts["v"], ()).generators:
            return None
        return counts["u0"], counts["u1"], counts["v"]

    def to_json(self) -> dict:
        sizes = self.family_sizes()
        if sizes is not None:
            m0, m1, nv = sizes
            return {
                "u0": m0,
                "u1": m1,
                "v": nv,
                "relations": [[int(g.split(".")[1]), int(h.split(".")[1]), int(v.split(".")[1])] for g, h, v in self.relations],
            }
        return {"generators": list(self.generators), "relations": [list(r) for r in self.relations]}

    @classmethod
    def from_json(cls, obj: Mapping) -> Presentation:
        try:
            if "generators" in obj:
                return cls(tuple(obj["generators"]), tuple(tuple(r) for r in obj["relations"]))
            return cls.family(obj["u0"], obj["u1"], obj["v"], [tuple(r) for r in obj["relations"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConlatError(f"bad presentation JSON: {exc}") from None

    def check_term(self, t: Term):
        missing = generators_of(t) - set(self.generators)
        if missing:
            raise UndeclaredGenerator(f"undeclared generator {sorted(missing, key=gen_key)[0]!r}")


def evaluate(t: Term, val: Mapping[str, int]) -> int:
    """Two-valued evaluation; ``val`` must cover every generator of ``t``."""
    if isinstance(t, Const):
        return int(t.value)
    if isinstance(t, Gen):
        try:
            return int(val[t.name])
        except KeyError:
            raise UndeclaredGenerator(f"valuation does not cover {t.name!r}") from None
    if isinstance(t, Not):
        return 1 - evaluate(t.arg, val)
    if isinstance(t, Meet):
        return evaluate(t.left, val) & evaluate(t.right, val)
    if isinstance(t, Join):
        return evaluate(t.left, val) | evaluate(t.right, val)
    raise TypeError(f"not a term: {t!r}")


def _eval3(t: Term, val: Mapping[str, int]) -> int | None:
    """Kleene evaluation under a partial valuation; None = undetermined."""
    if isinstance(t, Const):
        return int(t.value)
    if isinstance(t, Gen):
        return val.get(t.name)
    if isinstance(t, Not):
        a = _eval3(t.arg, val)
        return None if a is None else 1 - a
    a = _eval3(t.left, val)
    if isinstance(t, Meet):
        if a == 0:
            return 0
        b = _eval3(t.right, val)
        if b == 0:
            return 0
        return 1 if a == 1 and b == 1 else None
    if a == 1:
        return 1
    b = _eval3(t.right, val)
    if b == 1:
        return 1
    return 0 if a == 0 and b == 0 else None


def satisfies(P: Presentation, val: Mapping[str, int]) -> bool:
    return all(not (val[g] and val[h]) or val[v] for g, h, v in P.relations)


class _Horn:
    def __init__(self, P: Presentation):
        self.watch: dict[str, list[tuple[str, str]]] = {g: [] for g in P.generators}
        for g, h, v in P.relations:
            self.watch[g].append((h, v))
            if h != g:
                self.watch[h].append((g, v))

    def least_model(self, ones: Iterable[str]) -> set[str]:
        model = set(ones)
        stack = list(model)
        while stack:
            g = stack.pop()
            for other, v in self.watch[g]:
                if other in model and v not in model:
                    model.add(v)
                    stack.append(v)
        return model


_HORN_CACHE: dict[Presentation, _Horn] = {}


def _horn(P: Presentation) -> _Horn:
    h = _HORN_CACHE.get(P)
    if h is None:
        if len(_HORN_CACHE) > 64:
            _HORN_CACHE.clear()
        h = _HORN_CACHE[P] = _Horn(P)
    return h


def _countermodel(P: Presentation, s: Term, t: Term) -> dict[str, int] | None:
    """Relation-satisfying valuation with s = 1 and t = 0, or None.

    Branches only on generators of s and t (lexicographic, 0 before 1); the
    rest of the valuation is the least model of whatever was set to 1.
    """
    horn = _horn(P)
    names = sorted(generators_of(s) | generators_of(t), key=gen_key)
    partial: dict[str, int] = {}

    def search(i: int) -> set[str] | None:
        sv, tv = _eval3(s, partial), _eval3(t, partial)
        if sv == 0 or tv == 1:
            return None
        ones = [g for g, b in partial.items() if b]
        model = horn.least_model(ones)
        if any(partial.get(g) == 0 for g in model):
            return None
        if sv == 1 and tv == 0:
            return model
        if i == len(names):  # pragma: no cover - fully assigned terms are determined
            return None
        g = names[i]
        for bit in (0, 1):
            partial[g] = bit
            found = search(i + 1)
            if found is not None:
                return found
        del partial[g]
        return None

    model = search(0)
    if model is None:
        return None
    return {g: int(g in model) for g in sorted(P.generators, key=gen_key)}


def entails(P: Presentation, s: Term, t: Term, cap: int = DEFAULT_ENTAIL_CAP) -> Verdict:
    """s <= t in the presented algebra.  A false verdict carries a separating valuation."""
    if len(P.generators) > cap:
        raise CapExceeded(f"{len(P.generators)} generators exceeds the entailment cap {cap}")
    P.check_term(s)
    P.check_term(t)
    val = _countermodel(P, s, t)
    if val is None:
        return Verdict(True)
    if not (satisfies(P, val) and evaluate(s, val) == 1 and evaluate(t, val) == 0):
        raise AssertionError("separating valuation failed its own re-check")
    return Verdict(False, val)


def equivalent(P: Presentation, s: Term, t: Term, cap: int = DEFAULT_ENTAIL_CAP) -> bool:
    return bool(entails(P, s, t, cap)) and bool(entails(P, t, s, cap))


def in_ideal(P: Presentation, x: Term, gens: Iterable[str], cap: int = DEFAULT_ENTAIL_CAP) -> Verdict:
    """Membership in the ideal generated by finitely many generators: x <= their join."""
    gens = sorted(set(gens), key=gen_key)
    declared = set(P.generators)
    for g in gens:
        if g not in declared:
            raise UndeclaredGenerator(f"undeclared generator {g!r}")
    return entails(P, x, join_all(Gen(g) for g in gens), cap)


def enumerate_atoms(P: Presentation, cap: int = DEFAULT_ATOM_CAP) -> list[dict[str, int]]:
    """Every relation-satisfying valuation, in lexicographic generator order."""
    if len(P.generators) > cap:
        raise CapExceeded(f"{len(P.generators)} generators exceeds the atom cap {cap}")
    names = sorted(P.generators, key=gen_key)
    pos = {g: i for i, g in enumerate(names)}
    # a relation can be checked once its last generator is assigned
    due: list[list[tuple[str, str, str]]] = [[] for _ in names]
    for rel in P.relations:
        due[max(pos[g] for g in rel)].append(rel)
    out = []
    val: dict[str, int] = {}

    def walk(i):
        if i == len(names):
            out.append(dict(val))
            return
        for bit in (0, 1):
            val[names[i]] = bit
            if all(not (val[g] and val[h]) or val[v] for g, h, v in due[i]):
                walk(i + 1)
        del val[names[i]]

    walk(0)
    return out


def all_valuations(generators: Sequence[str]) -> Iterator[dict[str, int]]:
    names = sorted(generators, key=gen_key)
    for bits in itertools.product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))
