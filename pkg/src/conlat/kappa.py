"""Finite emulation of the cardinal-kappa construction.

A caller-supplied sequence x_0, x_1, ... inside Q = (a0] n (a1] replaces the
cofinal subset.  Greedy selection keeps x_xi exactly when it escapes the ideal
generated by the elements kept so far, giving q_0, q_1, ... and the ideal chain
Q_alpha = Id{q_beta : beta < alpha}.  In a join-semilattice the ideal generated
by a finite set is the principal ideal of its join, so each Q_alpha is stored
as that join (for D: the maximum natural).

On a finite ground set every subset is finite, so "finite" is replaced by a
size threshold t:

    I  = {X : |X| <= t}
    I0 = I  +  {X : X inside a single block}
    I1 = {X : |X n Z_alpha| <= t for every block}

which makes I = I0 n I1 exact for every t.  The threshold must stay below the
smallest block so that each block is large.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .errors import EmulationError, NormUndefined, SelectionError
from .semilattice import A0, A1, D, DValue, Verdict, nat


@dataclass(frozen=True)
class CofinalInput:
    semilattice: Any
    sequence: tuple
    a0: Any
    a1: Any

    def __post_init__(self):
        S = self.semilattice
        object.__setattr__(self, "sequence", tuple(self.sequence))
        for i, x in enumerate(self.sequence):
            if x not in S or not (S.leq(x, self.a0) and S.leq(x, self.a1)):
                raise SelectionError(f"x_{i} = {x} is not below both a0 and a1")


def d_input(values: Iterable[int]) -> CofinalInput:
    return CofinalInput(D, tuple(nat(v) for v in values), A0, A1)


@dataclass(frozen=True)
class SelectionResult:
    semilattice: Any
    f: tuple[int, ...]
    q: tuple
    bounds: tuple  # bounds[alpha] = join of q_beta, beta < alpha; Q_alpha = (bounds[alpha]]

    def in_chain(self, alpha: int, x) -> bool:
        return self.semilattice.leq(x, self.bounds[alpha])

    @property
    def length(self) -> int:
        return len(self.f)


def select_f(inp: CofinalInput) -> SelectionResult:
    """f(alpha) = least xi with x_xi outside Id{x_f(beta) : beta < alpha}, until none is left."""
    if not inp.sequence:
        raise SelectionError("sequence must be nonempty")
    S = inp.semilattice
    f: list[int] = []
    bounds = [S.zero]
    start = 0
    while True:
        current = bounds[-1]
        nxt = next((xi for xi in range(len(inp.sequence)) if not S.leq(inp.sequence[xi], current)), None)
        if nxt is None:
            break
        if nxt < start:  # pragma: no cover - ideals only grow
            raise AssertionError("selection went backwards")
        f.append(nxt)
        start = nxt + 1
        bounds.append(S.join(current, inp.sequence[nxt]))
    q = tuple(inp.sequence[i] for i in f)
    return SelectionResult(S, tuple(f), q, tuple(bounds))


def norm(result: SelectionResult, x) -> int:
    """Least alpha with x in Q_alpha."""
    for alpha in range(len(result.bounds)):
        if result.in_chain(alpha, x):
            return alpha
    raise NormUndefined(f"{x} lies outside every Q_alpha of this finite selection")


def chain_union(result: SelectionResult) -> list:
    """Members of the last Q_alpha: an explicit down-set for finite S, naturals for D."""
    S = result.semilattice
    top = result.bounds[-1]
    if isinstance(top, DValue):
        if not top.is_nat:
            raise NormUndefined("chain union is not a set of naturals")
        return [nat(i) for i in range(top.n + 1)]
    return [x for x in S.elements if S.leq(x, top)]


def check_selection(inp: CofinalInput, result: SelectionResult) -> Verdict:
    S = result.semilattice
    f, q = result.f, result.q
    if any(f[i] >= f[i + 1] for i in range(len(f) - 1)):
        return Verdict(False, f, "f not strictly increasing")
    for alpha, qa in enumerate(q):
        if result.in_chain(alpha, qa):
            return Verdict(False, alpha, "q_alpha lies in Q_alpha")
        for beta in range(alpha + 1, len(result.bounds)):
            if not result.in_chain(beta, qa):
                return Verdict(False, (alpha, beta), "q_alpha missing from a later Q_beta")
            if S.leq(result.bounds[beta], result.bounds[alpha]):
                return Verdict(False, (alpha, beta), "Q_alpha not strictly smaller than Q_beta")
    whole = S.zero
    for x in q:
        whole = S.join(whole, x)
    if whole != result.bounds[-1]:
        return Verdict(False, None, "last Q_alpha differs from Id(selected)")
    for xi, x in enumerate(inp.sequence):
        if not S.leq(x, whole):
            return Verdict(False, xi, "sequence element outside the final ideal")
    return Verdict(True)


def check_norm_laws(result: SelectionResult) -> Verdict:
    """||q_alpha|| = alpha + 1 and ||x v y|| = max(||x||, ||y||) over the whole chain union."""
    S = result.semilattice
    for alpha, qa in enumerate(result.q):
        if norm(result, qa) != alpha + 1:
            return Verdict(False, alpha, "norm of q_alpha is not alpha + 1")
    members = chain_union(result)
    norms = {x: norm(result, x) for x in members}
    for x, y in itertools.combinations_with_replacement(members, 2):
        if norm(result, S.join(x, y)) != max(norms[x], norms[y]):
            return Verdict(False, (x, y), "norm of a join is not the max of norms")
    return Verdict(True)


# ---------------------------------------------------------------------------
# Ground set, blocks and the ideal triple


@dataclass(frozen=True)
class KappaInstance:
    k: int
    blocks: tuple[frozenset[int], ...]
    t: int
    _block_of: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        lookup = {}
        for a, blk in enumerate(self.blocks):
            if not blk:
                raise EmulationError("empty block")
            for x in blk:
                if x in lookup:
                    raise EmulationError(f"{x} lies in two blocks")
                lookup[x] = a
        if set(lookup) != set(range(self.k)):
            raise EmulationError("blocks do not partition the ground set")
        if len(self.blocks) < 2:
            raise EmulationError("need at least two blocks (one block makes the ground set a single block)")
        if not 0 <= self.t < min(len(b) for b in self.blocks):
            raise EmulationError(f"threshold t={self.t} must be below the smallest block size")
        object.__setattr__(self, "_block_of", lookup)

    @property
    def ground(self) -> frozenset[int]:
        return frozenset(range(self.k))

    def block_of(self, x: int) -> int:
        return self._block_of[x]

    def in_I(self, X: frozenset) -> bool:
        return len(X) <= self.t

    def in_I0(self, X: frozenset) -> bool:
        return self.in_I(X) or len({self._block_of[x] for x in X}) <= 1

    def in_I1(self, X: frozenset) -> bool:
        return all(len(X & blk) <= self.t for blk in self.blocks)

    def classify(self, X: frozenset) -> str:
        """'I', 'I0' (in I0 minus I), 'I1' (in I1 minus I) or 'out'."""
        if self.in_I(X):
            return "I"
        in0, in1 = self.in_I0(X), self.in_I1(X)
        if in0 and in1:  # pragma: no cover - excluded by I = I0 n I1
            raise AssertionError("I0 n I1 strictly larger than I")
        return "I0" if in0 else "I1" if in1 else "out"


def build_kappa_instance(block_sizes: Sequence[int], t: int = 1) -> KappaInstance:
    """Consecutive blocks of the given sizes on {0, ..., sum - 1}."""
    blocks = []
    start = 0
    for size in block_sizes:
        blocks.append(frozenset(range(start, start + size)))
        start += size
    return KappaInstance(start, tuple(blocks), t)


def parse_blocks(spec: str) -> list[int]:
    """'4x3' means four blocks of size three; '2,3,3' lists sizes."""
    try:
        if "x" in spec:
            count, size = spec.split("x")
            return [int(size)] * int(count)
        return [int(s) for s in spec.split(",")]
    except ValueError:
        raise EmulationError(f"bad block specification {spec!r}") from None


def all_subsets(k: int):
    for r in range(k + 1):
        for c in itertools.combinations(range(k), r):
            yield frozenset(c)


def class_join(c1: str, c2: str) -> str:
    if c1 == c2:
        return c1
    if c1 == "I":
        return c2
    if c2 == "I":
        return c1
    return "out"


def in_window(inst: KappaInstance, X: frozenset, Y: frozenset) -> bool:
    """The emulated ideals behave like ideals on this pair: class(X u Y) is the join of the classes."""
    return inst.classify(X | Y) == class_join(inst.classify(X), inst.classify(Y))


@dataclass
class KappaMeasure:
    inst: KappaInstance
    semilattice: Any
    a0: Any
    a1: Any
    q: tuple

    def __call__(self, X: Iterable[int]):
        X = frozenset(X)
        if not X <= self.inst.ground:
            raise EmulationError("subset outside the ground set")
        cls = self.inst.classify(X)
        S = self.semilattice
        if cls == "I":
            out = S.zero
            for a in sorted(X):
                out = S.join(out, self.q[a])
            return out
        if cls == "I0":
            return self.a0
        if cls == "I1":
            return self.a1
        return S.join(self.a0, self.a1)


def build_kappa_mu(inst: KappaInstance, a0, a1, q: Sequence, semilattice=D) -> KappaMeasure:
    q = tuple(q)
    if len(q) < inst.k:
        raise EmulationError(f"need q_alpha for every alpha < {inst.k}, got {len(q)}")
    S = semilattice
    for a, x in enumerate(q):
        if not (S.leq(x, a0) and S.leq(x, a1)):
            raise EmulationError(f"q_{a} is not below both a0 and a1")
    return KappaMeasure(inst, semilattice, a0, a1, q)


def check_kappa_hom(mu: KappaMeasure, pairs: Iterable[tuple[frozenset, frozenset]]) -> Verdict:
    """Zero and in-window binary joins are preserved."""
    S = mu.semilattice
    if mu(frozenset()) != S.zero:
        return Verdict(False, (), "mu(empty) is not zero")
    for X, Y in pairs:
        if not in_window(mu.inst, X, Y):
            continue
        if mu(X | Y) != S.join(mu(X), mu(Y)):
            return Verdict(False, (X, Y), "join not preserved")
    return Verdict(True)


# ---------------------------------------------------------------------------
# Candidate decompositions and the refutation trace


def transversals(inst: KappaInstance) -> list[frozenset[int]]:
    return [frozenset(c) for c in itertools.product(*(sorted(b) for b in inst.blocks))]


def probe_family(inst: KappaInstance) -> list[frozenset[int]]:
    """Empty set, singletons, blocks, transversals, ground set."""
    fam: dict[frozenset, None] = {frozenset(): None}
    for x in range(inst.k):
        fam[frozenset([x])] = None
    for blk in inst.blocks:
        fam[blk] = None
    for tr in transversals(inst):
        fam[tr] = None
    fam[inst.ground] = None
    return list(fam)


def subset_key(X: Iterable[int]) -> str:
    return ",".join(map(str, sorted(X)))


def parse_subset_key(key: str) -> frozenset[int]:
    return frozenset(int(p) for p in key.split(",") if p != "")


def canonical_candidate(mu: KappaMeasure) -> tuple[dict, dict]:
    """A pair satisfying the three conditions on the test family.

    mu0 follows mu on I0-type sets and takes the join of q on transversals;
    mu1 takes the join of q on blocks and follows mu elsewhere.
    """
    S, inst = mu.semilattice, mu.inst

    def qjoin(X):
        out = S.zero
        for a in sorted(X):
            out = S.join(out, mu.q[a])
        return out

    mu0, mu1 = {}, {}
    block_set = set(inst.blocks)
    for X in probe_family(inst):
        if X == inst.ground:
            mu0[X], mu1[X] = mu.a0, mu.a1
        elif len(X) <= 1:
            mu0[X] = mu1[X] = mu(X)
        elif X in block_set:
            mu0[X], mu1[X] = mu(X), qjoin(X)
        else:
            mu0[X], mu1[X] = qjoin(X), mu(X)
    return mu0, mu1


@dataclass
class TraceStep:
    name: str
    holds: bool | None  # None: step could not be evaluated
    detail: str = ""


@dataclass
class TraceReport:
    accepted: bool
    rejection: str | None = None
    steps: list[TraceStep] = field(default_factory=list)
    xi: dict[int, int] = field(default_factory=dict)
    beta: int | None = None

    @property
    def first_failure(self) -> TraceStep | None:
        return next((s for s in self.steps if s.holds is not True), None)

    def lines(self) -> list[str]:
        if not self.accepted:
            return [f"rejected: {self.rejection}"]
        out = []
        for s in self.steps:
            mark = {True: "holds", False: "FAILS", None: "undefined"}[s.holds]
            out.append(f"{s.name}: {mark}" + (f" ({s.detail})" if s.detail else ""))
        return out


def _check_conditions(inst, mu, mu0, mu1) -> str | None:
    S = mu.semilattice
    fam = probe_family(inst)
    for X in fam:
        if X not in mu0 or X not in mu1:
            return f"candidate undefined at {{{subset_key(X)}}}"
    for X in fam:
        if S.join(mu0[X], mu1[X]) != mu(X):
            return f"condition (i) fails at {{{subset_key(X)}}}"
    for X in fam:
        for Y in fam:
            if X <= Y and not (S.leq(mu0[X], mu0[Y]) and S.leq(mu1[X], mu1[Y])):
                return f"condition (ii) fails at {{{subset_key(X)}}} <= {{{subset_key(Y)}}}"
    if not S.leq(mu0[inst.ground], mu.a0):
        return "condition (iii) fails: mu0(1) not below a0"
    if not S.leq(mu1[inst.ground], mu.a1):
        return "condition (iii) fails: mu1(1) not below a1"
    return None


def refutation_trace(inst: KappaInstance, mu: KappaMeasure, selection: SelectionResult, mu0: Mapping, mu1: Mapping) -> TraceReport:
    """Run the final inequality chain on a finite candidate and report each step.

    In the infinite setting every step holds and the chain ends in
    xi_beta + 1 <= xi_beta; on a finite instance some step has to give way, and
    the report names it.
    """
    mu0 = {frozenset(k): v for k, v in mu0.items()}
    mu1 = {frozenset(k): v for k, v in mu1.items()}
    rejection = _check_conditions(inst, mu, mu0, mu1)
    if rejection:
        return TraceReport(False, rejection)
    S = mu.semilattice
    report = TraceReport(True)
    steps = report.steps

    def in_Q(x):
        return S.leq(x, mu.a0) and S.leq(x, mu.a1)

    def nrm(x):
        try:
            return norm(selection, x)
        except NormUndefined:
            return None

    for alpha, blk in enumerate(inst.blocks):
        val = mu1[blk]
        if not in_Q(val):
            steps.append(TraceStep(f"mu1(Z_{alpha}) in Q", False, f"value {val}"))
            return report
        n = nrm(val)
        if n is None:
            steps.append(TraceStep(f"||mu1(Z_{alpha})|| defined", None, f"{val} outside the selected chain"))
            return report
        need = max(alpha, n)
        choice = next((x for x in sorted(blk) if x >= need), None)
        if choice is None:
            steps.append(
                TraceStep(
                    f"exists xi_{alpha} in Z_{alpha} with max({alpha}, ||mu1(Z_{alpha})||) <= xi_{alpha}",
                    False,
                    f"need >= {need}, block max is {max(blk)}",
                )
            )
            return report
        report.xi[alpha] = choice
    steps.append(TraceStep("xi_alpha exists for every block", True, f"xi = {report.xi}"))

    Z = frozenset(report.xi.values())
    cls = inst.classify(Z)
    if cls != "I1":
        steps.append(TraceStep("Z in I1 minus I", False, f"emulation boundary: Z falls in class {cls}"))
        return report
    steps.append(TraceStep("Z in I1 minus I", True))
    steps.append(TraceStep("mu(Z) = a1", mu(Z) == mu.a1))
    mz = mu0[Z]
    if not in_Q(mz):
        steps.append(TraceStep("mu0(Z) in Q", False, f"value {mz}"))
        return report
    beta = nrm(mz)
    if beta is None:
        steps.append(TraceStep("beta = ||mu0(Z)|| defined", None, f"{mz} outside the selected chain"))
        return report
    report.beta = beta
    if beta >= len(inst.blocks):
        steps.append(TraceStep("Z_beta exists", False, f"beta = {beta} but only {len(inst.blocks)} blocks"))
        return report
    xb = report.xi[beta]
    single = frozenset([xb])
    lhs = xb + 1
    n_q = nrm(mu.q[xb])
    n_mu = nrm(mu(single))
    n0, n1 = nrm(mu0[single]), nrm(mu1[single])
    n1b = nrm(mu1[inst.blocks[beta]])
    vals = [n_q, n_mu, n0, n1, n1b]
    if any(x is None for x in vals):
        steps.append(TraceStep("all norms in the chain defined", None))
        return report
    mid = max(n0, n1)
    steps.append(TraceStep("xi_beta + 1 = ||q_xi_beta||", lhs == n_q, f"{lhs} vs {n_q}"))
    steps.append(TraceStep("||q_xi_beta|| = ||mu({xi_beta})||", n_q == n_mu, f"{n_q} vs {n_mu}"))
    steps.append(TraceStep("||mu({xi_beta})|| = ||mu0({xi_beta})|| v ||mu1({xi_beta})||", n_mu == mid, f"{n_mu} vs {mid}"))
    steps.append(TraceStep("... <= ||mu0(Z)|| v ||mu1(Z_beta)||", mid <= max(beta, n1b), f"{mid} vs {max(beta, n1b)}"))
    steps.append(TraceStep("... = beta v ||mu1(Z_beta)||", True, f"beta = {beta}"))
    steps.append(TraceStep("... <= xi_beta", max(beta, n1b) <= xb, f"{max(beta, n1b)} vs {xb}"))
    steps.append(TraceStep("contradiction xi_beta + 1 <= xi_beta", lhs <= xb))
    return report
