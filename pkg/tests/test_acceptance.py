"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line."""

from __future__ import annotations

import random
import time

import pytest

from _fixtures import chain_fixtures
from conlat import oracles
from conlat.cli import main
from conlat.kappa import check_norm_laws, check_selection, d_input, norm, select_f
from conlat.lattice import (
    check_chain_decomposition,
    conc,
    decompose_from_chain,
    enumerate_lattices,
    m3,
    n5,
    principal_congruence,
)
from conlat.presented import ONE, entails
from conlat.semilattice import TOP
from conlat.thmb import (
    build_g,
    certified_lower_bound,
    check_2ton,
    check_hom,
    check_lineq,
    default_instance,
    make_codes,
    min_forced_level,
    mu,
    sample_term_pairs,
)


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {title}"
            print("\n" + line + (f" ({detail})" if detail else ""))
        assert ok, detail or title

    return emit


def test_1_lineq_exact(report):
    started = time.perf_counter()
    bad = []
    for m in (2, 4, 8):
        inst = default_instance(m, seed=m)
        assert inst.L == m.bit_length() - 1
        res = check_lineq(inst)
        bad += [(m, *x) for x in res.mismatches]
    elapsed = time.perf_counter() - started
    report(1, "entails(u0^u1 <= w_n) iff g <= n, m in {2,4,8}", not bad and elapsed < 5, f"{elapsed:.2f}s, {len(bad)} mismatches")


def prefix_buckets(codes, n: int) -> list[list[int]]:
    by_prefix: dict = {}
    for i, c in enumerate(codes):
        by_prefix.setdefault(c[:n], []).append(i)
    return [by_prefix[p] for p in sorted(by_prefix)]


def distinct_prefix_set(rng: random.Random, buckets, size: int) -> list[int]:
    return [rng.choice(b) for b in rng.sample(buckets, min(size, len(buckets)))]


def test_2_two_to_n(report):
    started = time.perf_counter()
    codes = make_codes(256, seed=0)
    g = build_g(codes)
    buckets = [prefix_buckets(codes, n) for n in range(9)]
    rng = random.Random(2024)
    violations = 0
    hypothesis_held = 0
    for trial in range(10_000):
        n = trial % 9
        kind = rng.randrange(3)
        if kind == 0:
            X = rng.sample(range(256), rng.randint(1, 256))
        elif kind == 1:
            X = distinct_prefix_set(rng, buckets[n], rng.randint(1, 2**n))
        else:
            X = distinct_prefix_set(rng, buckets[n], 2**n) + [rng.randrange(256)]
        res = check_2ton(g, X, n)
        hypothesis_held += res.hypothesis
        if not res.ok:
            violations += 1
        if res.size > 2**n and res.collision is None:
            violations += 1
    tight = True
    for n in range(9):
        X = [i for i, c in enumerate(codes) if not any(c[n:])]
        res = check_2ton(g, X, n)
        tight &= res.hypothesis and res.size == 2**n
    elapsed = time.perf_counter() - started
    ok = violations == 0 and tight and elapsed < 2
    report(2, "|X| <= 2^n over 10^4 random X at m=256, tight at all n <= 8", ok, f"{elapsed:.2f}s, hypothesis held in {hypothesis_held} trials")


def test_3_growth_law(report):
    rows = []
    slow = []
    for m in (2, 4, 8, 16, 32):
        inst = default_instance(m, seed=0)
        started = time.perf_counter()
        res = min_forced_level(inst, exact_limit=4)
        elapsed = time.perf_counter() - started
        rows.append((m, res.mode, res.n_min))
        if (m == 4 and elapsed >= 60) or (m == 32 and elapsed >= 1):
            slow.append((m, elapsed))
    bound_ok = all(n >= certified_lower_bound(m) for m, _, n in rows)
    exact_ok = all((mode == "exact") == (m <= 4) for m, mode, _ in rows)
    monotone = all(a[2] <= b[2] for a, b in zip(rows, rows[1:]))
    ok = bound_ok and exact_ok and monotone and not slow
    report(3, "N_min >= ceil(log2 m) - 1, exact for m <= 4, nondecreasing", ok, " ".join(f"m={m}:{n}({mode})" for m, mode, n in rows))


def test_4_mu_homomorphism(report):
    failures = []
    for m in (2, 4, 8):
        inst = default_instance(m, seed=m)
        if mu(inst, ONE) != TOP:
            failures.append((m, "mu(1)"))
        verdict = check_hom(inst, sample_term_pairs(inst, 500, seed=m))
        if not verdict:
            failures.append((m, verdict.detail))
    report(4, "mu preserves joins on 500 pairs per m <= 8, mu(1) = top", not failures, str(failures) if failures else "")


def test_5_entailment_oracle(report):
    rng = random.Random(5)
    disagreements = 0
    for _ in range(200):
        P = oracles.random_presentation(rng, max_generators=12)
        assert len(P.generators) <= 12
        s = oracles.random_bool_term(rng, P.generators, depth=3)
        t = oracles.random_bool_term(rng, P.generators, depth=3)
        if bool(entails(P, s, t)) != oracles.entails_by_enumeration(P, s, t):
            disagreements += 1
    report(5, "entails agrees with valuation enumeration on 200 presentations", disagreements == 0, f"{disagreements} disagreements")


def test_6_congruence_oracle(report):
    started = time.perf_counter()
    corpus = list(enumerate_lattices(5)) + [m3(), n5()]
    bad = 0
    for L in corpus:
        cons = oracles.congruences_by_filter(L)
        bad += set(conc(L).elements) != cons
        for a in L:
            for b in L:
                bad += principal_congruence(L, a, b) != oracles.least_congruence_containing(L, [(a, b)], cons)
    elapsed = time.perf_counter() - started
    report(6, f"conc and Theta match the partition oracle on {len(corpus)} lattices", bad == 0 and elapsed < 10, f"{elapsed:.2f}s")


def test_7_chain_decomposition(report):
    fixtures = chain_fixtures()
    failed = []
    for fx in fixtures:
        dec = decompose_from_chain(fx.L, fx.f, fx.alpha, fx.chain, fx.psi0, fx.psi1)
        if not check_chain_decomposition(fx.L, fx.f, fx.alpha, fx.psi0, fx.psi1, dec):
            failed.append(fx.name)
    ok = len(fixtures) == 10 and not failed
    report(7, "decompose_from_chain satisfies (i)-(iii) on 10 fixtures", ok, ", ".join(failed))


def test_8_norm_laws(report):
    started = time.perf_counter()
    rng = random.Random(8)
    bad = 0
    for _ in range(50):
        seq = [rng.randrange(0, 40) for _ in range(rng.randint(1, 20))]
        inp = d_input(seq)
        res = select_f(inp)
        bad += not (check_selection(inp, res) and check_norm_laws(res))
    worked = [
        ([2, 1, 3, 3, 5], (0, 2, 4)),
        ([1, 2, 3, 4, 5, 6], (0, 1, 2, 3, 4, 5)),
        ([4, 4, 4], (0,)),
    ]
    for seq, f in worked:
        res = select_f(d_input(seq))
        bad += res.f != f
        bad += [norm(res, q) for q in res.q] != list(range(1, len(f) + 1))
        bad += not check_norm_laws(res)
    elapsed = time.perf_counter() - started
    report(8, "norm laws on 50 random sequences and 3 worked examples", bad == 0 and elapsed < 1, f"{elapsed:.2f}s")


def test_9_scan_determinism(report, tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    codes = [main(["thmb", "scan", "--m", "2,4,8,16", "--seed", "0", "--csv", str(p)]) for p in paths]
    capsys.readouterr()
    ok = codes == [0, 0] and paths[0].read_bytes() == paths[1].read_bytes()
    report(9, "thmb scan twice with the same seed gives byte-identical CSV", ok)
