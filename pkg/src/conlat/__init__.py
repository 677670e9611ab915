"""Finite-scale workbench for congruence semilattices of lattices, presented
Boolean algebras, and the unliftability constructions built on them."""

__version__ = "0.1.0"
