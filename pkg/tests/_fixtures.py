"""Shared small configurations for the chain-decomposition tests."""

from __future__ import annotations

from dataclasses import dataclass

from conlat.lattice import (
    FiniteLattice,
    LatticeHom,
    boolean_lattice,
    chain,
    conc,
    equality,
    find_alternating_chain,
    full,
    identity_lattice_hom,
    m3,
    n5,
    principal_congruence,
    product,
)
from conlat.semilattice import JoinHom, chain_semilattice, identity_hom


@dataclass
class ChainFixture:
    name: str
    L: FiniteLattice
    f: LatticeHom
    alpha: JoinHom
    psi0: object
    psi1: object
    chain: list


def collapse_alpha(L: FiniteLattice) -> JoinHom:
    """Con_c L -> 2-chain: equality to 0, everything else to 1."""
    C = conc(L)
    zero = equality(L)
    return JoinHom(C, chain_semilattice(2), {c: int(c != zero) for c in C})


def _fixture(name, L, f, psi0, psi1, alpha=None, t=None):
    alpha = alpha or identity_hom(conc(L))
    B = f.source
    t = t or find_alternating_chain(L, f(B.bottom), f(B.top), psi0, psi1)
    return ChainFixture(name, L, f, alpha, psi0, psi1, t)


def chain_fixtures() -> list[ChainFixture]:
    c2, c3, c4 = chain(2), chain(3), chain(4)
    b2 = boolean_lattice(["x", "y"])
    N5, M3 = n5(), m3()
    sq3 = product(c2, c3)
    out = [
        _fixture("2-chain, psi0 = all", c2, identity_lattice_hom(c2), full(c2), equality(c2), t=["0", "1", "1"]),
        _fixture(
            "2x2 through atom x",
            b2,
            identity_lattice_hom(b2),
            principal_congruence(b2, "0", "x"),
            principal_congruence(b2, "x", "1"),
            t=["0", "x", "1"],
        ),
        _fixture(
            "3-chain, lower then upper",
            c3,
            identity_lattice_hom(c3),
            principal_congruence(c3, "0", "1"),
            principal_congruence(c3, "1", "2"),
        ),
        _fixture(
            "3-chain, upper then lower",
            c3,
            identity_lattice_hom(c3),
            principal_congruence(c3, "1", "2"),
            principal_congruence(c3, "0", "1"),
        ),
        _fixture(
            "2-chain into 3-chain",
            c3,
            LatticeHom(c2, c3, {"0": "0", "1": "1"}),
            principal_congruence(c3, "0", "1"),
            equality(c3),
        ),
        _fixture(
            "4-chain, middle step first",
            c4,
            identity_lattice_hom(c4),
            principal_congruence(c4, "1", "2"),
            conc(c4).join(principal_congruence(c4, "0", "1"), principal_congruence(c4, "2", "3")),
        ),
        _fixture(
            "N5 through a",
            N5,
            identity_lattice_hom(N5),
            principal_congruence(N5, "0", "a"),
            principal_congruence(N5, "a", "1"),
        ),
        _fixture("M3 collapsed", M3, identity_lattice_hom(M3), full(M3), equality(M3), alpha=collapse_alpha(M3)),
        _fixture(
            "2x3 grid, 2-chain alpha",
            sq3,
            identity_lattice_hom(sq3),
            principal_congruence(sq3, sq3.bottom, sq3.elements[1]),
            principal_congruence(sq3, sq3.elements[1], sq3.top),
            alpha=collapse_alpha(sq3),
        ),
        _grid_fixture(b2, sq3),
    ]
    return out


def _grid_fixture(b2: FiniteLattice, grid: FiniteLattice) -> ChainFixture:
    f = _grid_embedding(b2, grid)
    lo, mid, hi = f("0"), f("x"), f("1")
    return _fixture(
        "2x2 into 2x3 grid",
        grid,
        f,
        principal_congruence(grid, lo, mid),
        principal_congruence(grid, mid, hi),
    )


def _grid_embedding(b2: FiniteLattice, grid: FiniteLattice) -> LatticeHom:
    from conlat.lattice import lattice_homomorphisms

    for f in lattice_homomorphisms(b2, grid):
        if len(set(f.mapping.values())) == 4:
            return f
    raise AssertionError("no embedding")
