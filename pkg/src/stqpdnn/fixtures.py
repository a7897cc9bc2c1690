"""Bundled benchmark matrices in the shared text format.

The eight worked instances plus the Horn matrix and the all-ones matrix;
``ex7`` reuses the ``ex4`` matrix (the same instance is revisited for the
clique-decomposition analysis).
"""

from __future__ import annotations

import importlib.resources

from .matrices import SymMatrix, parse_matrix_text

FIXTURE_NAMES = (
    "ex1",
    "ex2",
    "ex3",
    "ex4",
    "ex5",
    "ex6",
    "ex7",
    "ex8",
    "horn",
    "e",
)


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    ref = importlib.resources.files("stqpdnn").joinpath("fixtures", f"{name}.txt")
    return ref.read_text(encoding="utf-8")


def fixture_matrix(name: str) -> SymMatrix:
    return parse_matrix_text(fixture_text(name))
