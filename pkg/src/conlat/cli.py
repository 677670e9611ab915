"""Command-line front end.

Exit status: 0 success, 1 a checked property is false, 2 usage, parse or
budget errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

from . import kappa, lattice, presented, semilattice, thmb
from .errors import ConlatError

CSV_HEADER = "# conlat-csv v1"
CSV_COLUMNS = ["m", "L", "exact_or_bound", "N_min", "runtime_ms"]


class UsageError(ConlatError):
    pass


# -- I/O helpers --------------------------------------------------------------


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory, renamed on success."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def budget_ms() -> float | None:
    raw = os.environ.get("CONLAT_BUDGET_MS")
    if raw is None:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"CONLAT_BUDGET_MS must be a number, got {raw!r}") from None
    if value <= 0:
        raise UsageError("CONLAT_BUDGET_MS must be positive")
    return value


def emit(text: str, out=None) -> None:
    print(text, file=out or sys.stdout)


def resolve_semilattice(ref):
    if ref == "D":
        return semilattice.D
    if isinstance(ref, str):
        ref = load_json(ref)
    return semilattice.FiniteJoinSemilattice.from_json(ref)


def load_lattice(path: str) -> lattice.FiniteLattice:
    return lattice.FiniteLattice.from_json(load_json(path))


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(map(str, header))] + [[("" if c is None else str(c)) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# -- lattice commands ---------------------------------------------------------


def cmd_conc(args) -> int:
    L = load_lattice(args.lattice)
    C = lattice.conc(L, max_size=args.max_size)
    if args.format == "json":
        emit(json.dumps(C.to_json(), indent=2))
        return 0
    names = {c: f"c{i}" for i, c in enumerate(C.elements)}
    shape = "distributive" if semilattice.is_distributive_semilattice(C) else "not distributive"
    emit(f"Con_c: {len(C)} congruences, {shape}")
    for c in C.elements:
        emit(f"  {names[c]}  {c}")
    emit("join table:")
    rows = [[names[x]] + [names[C.join(x, y)] for y in C.elements] for x in C.elements]
    emit(format_table(["v"] + [names[c] for c in C.elements], rows))
    return 0


def cmd_theta(args) -> int:
    L = load_lattice(args.lattice)
    theta = lattice.principal_congruence(L, args.a, args.b)
    emit(json.dumps(theta.to_json()) if args.format == "json" else str(theta))
    return 0


def cmd_lift(args) -> int:
    K = load_lattice(args.lattice)
    conc_k = lattice.conc(K)
    if args.semilattice:
        S = resolve_semilattice(args.semilattice)
        if not args.map:
            raise UsageError("--map is required together with --semilattice")
        labels = conc_k.by_label()
        raw = load_json(args.map)
        try:
            phi = semilattice.JoinHom(conc_k, S, {labels[k]: v for k, v in raw.items()})
        except KeyError as exc:
            raise UsageError(f"unknown congruence label {exc}") from None
    else:
        S = conc_k
        phi = semilattice.identity_hom(conc_k)
    if not phi.check():
        emit("phi is not a join-zero homomorphism")
        return 1
    result = lattice.brute_force_lift(K, S, phi, args.max_size, budget_ms=budget_ms())
    if result.witness is None:
        emit(f"no lift with |L| <= {args.max_size} ({result.lattices_tried} lattices tried)")
        return 1
    wit = result.witness
    emit(f"lift found after {result.lattices_tried} lattices")
    emit(f"L = {list(wit.lattice.elements)}")
    emit("f = " + ", ".join(f"{x}->{wit.f(x)}" for x in K))
    emit("alpha = " + ", ".join(f"{c}->{wit.alpha(c)}" for c in wit.alpha.source))
    return 0


# -- semilattice commands -----------------------------------------------------


def cmd_semi_distributive(args) -> int:
    S = resolve_semilattice(args.semilattice)
    verdict = semilattice.is_distributive_semilattice(S)
    if verdict:
        emit("distributive")
        return 0
    s, a, b = verdict.witness
    emit(f"not distributive: {s} <= {a} v {b} has no refinement")
    return 1


def cmd_semi_weakdist(args) -> int:
    obj = load_json(args.hom)
    mu = semilattice.hom_from_json(obj, resolve_semilattice)
    ids = {str(x): x for x in mu.source}
    if args.at not in ids:
        raise UsageError(f"unknown source element {args.at!r}")
    candidates = None
    if args.candidates:
        candidates = [
            tuple(semilattice.value_from_json(b, mu.target) for b in pair) for pair in load_json(args.candidates)
        ]
    verdict = semilattice.is_weakly_distributive_at(mu, ids[args.at], candidates)
    if verdict:
        emit(f"weakly distributive at {args.at}")
        return 0
    b0, b1 = verdict.witness
    emit(f"not weakly distributive at {args.at}: split {b0} v {b1} has no matching decomposition")
    return 1


# -- Boolean algebra commands -------------------------------------------------


def cmd_ba_entail(args) -> int:
    P = presented.Presentation.from_json(load_json(args.presentation))
    s, t = presented.parse_term(args.s), presented.parse_term(args.t)
    verdict = presented.entails(P, s, t, cap=args.cap)
    if verdict:
        emit(f"{s} <= {t}")
        return 0
    ones = [g for g, b in verdict.witness.items() if b]
    emit(f"{s} </= {t}; separating valuation sets to 1: {' '.join(ones) or '(nothing)'}")
    return 1


# -- construction commands ----------------------------------------------------


def load_instance(path: str) -> thmb.TheoremBInstance:
    return thmb.TheoremBInstance.from_json(load_json(path))


def cmd_thmb_build(args) -> int:
    inst = thmb.default_instance(args.m, args.L, args.seed)
    text = json.dumps(inst.to_json(), indent=2) + "\n"
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_thmb_mu(args) -> int:
    inst = load_instance(args.instance)
    term = presented.parse_term(args.term)
    emit(str(thmb.mu(inst, term)))
    return 0


def scan_csv(rows: Sequence[thmb.ExperimentRow], timing: bool) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.m, r.L, r.mode, r.n_min, f"{r.elapsed_ms:.1f}" if timing else ""])
    return buf.getvalue()


def scan_table(rows: Sequence[thmb.ExperimentRow], timing: bool) -> str:
    return format_table(
        CSV_COLUMNS,
        [[r.m, r.L, r.mode, r.n_min, f"{r.elapsed_ms:.1f}" if timing else ""] for r in rows],
    )


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise UsageError("empty list")
    return values


def cmd_thmb_scan(args) -> int:
    ms = parse_int_list(args.m)
    if any(m < 1 for m in ms):
        raise UsageError("m must be positive")
    rows = thmb.scan(ms, seed=args.seed, exact_limit=args.exact_limit, budget_ms=budget_ms())
    if args.csv:
        atomic_write(args.csv, scan_csv(rows, args.timing))
    else:
        emit(scan_table(rows, args.timing))
    ok = all(r.n_min >= thmb.certified_lower_bound(r.m) for r in rows)
    by_m = sorted(rows, key=lambda r: r.m)
    ok = ok and all(a.n_min <= b.n_min for a, b in zip(by_m, by_m[1:]))
    if not ok:
        emit("growth check failed: N_min below the bound or decreasing in m", sys.stderr)
        return 1
    return 0


def cmd_thmb_check_lineq(args) -> int:
    inst = load_instance(args.instance)
    report = thmb.check_lineq(inst)
    if report:
        emit(f"ok: {report.checked} (pair, n) cases, entailment matches g <= n everywhere")
        return 0
    emit(f"{len(report.mismatches)} mismatches out of {report.checked}:")
    for i, j, n in report.mismatches[:20]:
        emit(f"  xi={i} eta={j} n={n} g={inst.gmap(i, j)}")
    return 1


# -- kappa commands -----------------------------------------------------------


def cmd_kappa_select(args) -> int:
    inp = kappa.d_input(parse_int_list(args.seq))
    result = kappa.select_f(inp)
    emit("f = " + json.dumps(list(result.f)))
    emit("q = " + json.dumps([str(x) for x in result.q]))
    verdict = kappa.check_selection(inp, result)
    emit("selection invariants: " + ("hold" if verdict else f"FAIL ({verdict.detail})"))
    return 0 if verdict else 1


def random_sequences(count: int, max_len: int, seed: int) -> list[list[int]]:
    rng = random.Random(seed)
    return [[rng.randrange(0, 30) for _ in range(rng.randint(1, max_len))] for _ in range(count)]


def cmd_kappa_norms(args) -> int:
    failures = 0
    seqs = random_sequences(args.trials, args.max_len, args.seed)
    for seq in seqs:
        inp = kappa.d_input(seq)
        result = kappa.select_f(inp)
        verdict = kappa.check_norm_laws(result)
        if not verdict:
            failures += 1
            emit(f"norm law fails on {seq}: {verdict.detail}")
    emit(f"norm laws: {len(seqs) - failures}/{len(seqs)} sequences pass")
    return 0 if failures == 0 else 1


def cmd_kappa_trace(args) -> int:
    inst = kappa.build_kappa_instance(kappa.parse_blocks(args.blocks), args.t)
    seq = parse_int_list(args.seq) if args.seq else list(range(1, inst.k + 1))
    selection = kappa.select_f(kappa.d_input(seq))
    mu = kappa.build_kappa_mu(inst, semilattice.A0, semilattice.A1, selection.q)
    if args.candidate:
        obj = load_json(args.candidate)
        try:
            mu0 = {kappa.parse_subset_key(k): semilattice.DValue.from_json(v) for k, v in obj["mu0"].items()}
            mu1 = {kappa.parse_subset_key(k): semilattice.DValue.from_json(v) for k, v in obj["mu1"].items()}
        except (KeyError, AttributeError, ValueError) as exc:
            raise UsageError(f"bad candidate file: {exc}") from None
    else:
        mu0, mu1 = kappa.canonical_candidate(mu)
    report = kappa.refutation_trace(inst, mu, selection, mu0, mu1)
    for line in report.lines():
        emit(line)
    if report.accepted and report.first_failure is not None:
        emit(f"first failing step: {report.first_failure.name}")
    return 0 if report.accepted else 1


# -- selfcheck ----------------------------------------------------------------


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    fixtures = load_json(args.fixture) if args.fixture else None
    if fixtures is not None and not isinstance(fixtures, dict):
        raise UsageError("fixture file must hold a JSON object")
    lines, ok = run_selfcheck(seed=args.seed, fixtures=fixtures)
    for line in lines:
        emit(line)
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conlat", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option defaults")
    sub = p.add_subparsers(dest="command")

    c = sub.add_parser("conc", help="list the congruences of a finite lattice")
    c.add_argument("--lattice", required=True)
    c.add_argument("--max-size", type=int, default=lattice.DEFAULT_CONC_BOUND)
    c.add_argument("--format", choices=["table", "json"], default="table")
    c.set_defaults(func=cmd_conc)

    c = sub.add_parser("theta", help="principal congruence Theta(A, B)")
    c.add_argument("--lattice", required=True)
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--format", choices=["table", "json"], default="table")
    c.set_defaults(func=cmd_theta)

    c = sub.add_parser("lift", help="brute-force lift of phi: Con_c K -> S (identity by default)")
    c.add_argument("--lattice", required=True)
    c.add_argument("--semilattice")
    c.add_argument("--map", help="JSON object: congruence label -> element of S")
    c.add_argument("--max-size", type=int, default=5)
    c.set_defaults(func=cmd_lift)

    semi = sub.add_parser("semi", help="semilattice checks").add_subparsers(dest="semi_command")
    c = semi.add_parser("check-distributive")
    c.add_argument("--semilattice", required=True)
    c.set_defaults(func=cmd_semi_distributive)
    c = semi.add_parser("weakdist")
    c.add_argument("--hom", required=True)
    c.add_argument("--at", required=True)
    c.add_argument("--candidates", help="JSON list of [b0, b1] splits (needed when the target is D)")
    c.set_defaults(func=cmd_semi_weakdist)

    ba = sub.add_parser("ba", help="presented Boolean algebras").add_subparsers(dest="ba_command")
    c = ba.add_parser("entail")
    c.add_argument("--presentation", required=True)
    c.add_argument("s")
    c.add_argument("t")
    c.add_argument("--cap", type=int, default=presented.DEFAULT_ENTAIL_CAP)
    c.set_defaults(func=cmd_ba_entail)

    tb = sub.add_parser("thmb", help="the size-m construction").add_subparsers(dest="thmb_command")
    c = tb.add_parser("build")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--L", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_thmb_build)
    c = tb.add_parser("mu")
    c.add_argument("instance")
    c.add_argument("term")
    c.set_defaults(func=cmd_thmb_mu)
    c = tb.add_parser("scan")
    c.add_argument("--m", default="2,4,8,16,32")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--exact-limit", type=int, default=4)
    c.add_argument("--csv")
    c.add_argument("--timing", action="store_true", help="fill runtime_ms (makes output run-dependent)")
    c.set_defaults(func=cmd_thmb_scan)
    c = tb.add_parser("check-lineq")
    c.add_argument("instance")
    c.set_defaults(func=cmd_thmb_check_lineq)

    kp = sub.add_parser("kappa", help="finite emulation of the kappa construction").add_subparsers(dest="kappa_command")
    c = kp.add_parser("select")
    c.add_argument("--seq", required=True, help="comma-separated naturals")
    c.set_defaults(func=cmd_kappa_select)
    c = kp.add_parser("norms")
    c.add_argument("--check", action="store_true")
    c.add_argument("--trials", type=int, default=50)
    c.add_argument("--max-len", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_kappa_norms)
    c = kp.add_parser("trace")
    c.add_argument("--blocks", required=True, help="e.g. 4x3 or 2,3,3")
    c.add_argument("--t", type=int, default=1)
    c.add_argument("--seq", help="cofinal sequence (naturals); default 1..k")
    c.add_argument("--candidate", help="JSON {mu0: {subset: value}, mu1: {...}}")
    c.set_defaults(func=cmd_kappa_trace)

    c = sub.add_parser("selfcheck", help="run every invariant suite")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--fixture", help='JSON {"semilattice": [tables]} replacing the built-in fixtures')
    c.set_defaults(func=cmd_selfcheck)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = load_json(known.config)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for action in parser._subparsers._group_actions if parser._subparsers else []:
        for sp in action.choices.values():
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
            for inner in getattr(sp, "_subparsers", None)._group_actions if sp._subparsers else []:
                for leaf in inner.choices.values():
                    leaf.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConlatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
