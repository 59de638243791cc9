"""Brute-force reference solver: enumerate assignments, check equality.

No cleverness on purpose; this is the yardstick the real solver is checked
against at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence

from .model import Equation, Substitution, is_var, substitute, sym_var_id


@dataclass(frozen=True)
class OracleLimits:
    max_total_length: int
    alphabet: tuple[int, ...] | None = None  # None: input letters of the equation
    allow_empty: bool = True


def _alphabet(eq: Equation, limits: OracleLimits) -> tuple[int, ...]:
    if limits.alphabet is not None:
        return tuple(sorted(limits.alphabet))
    return eq.letters()


def _length_vectors(k: int, total: int, low: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(low, total + 1):
        for rest in _length_vectors(k - 1, total - first, low):
            yield (first,) + rest


def enumerate_assignments(eq: Equation, limits: OracleLimits) -> Iterator[Substitution]:
    """All assignments in length-lexicographic order, including the empty ones."""
    variables = sorted(eq.variables())
    alphabet = _alphabet(eq, limits)
    low = 0 if limits.allow_empty else 1
    if not variables:
        yield {}
        return
    if not alphabet and low > 0:
        return
    for total in range(low * len(variables), limits.max_total_length + 1):
        for lengths in _length_vectors(len(variables), total, low):
            pools = [product(alphabet, repeat=n) for n in lengths]
            for words in product(*pools):
                yield {v: tuple(w) for v, w in zip(variables, words)}


def _balanced(eq: Equation, sub: Substitution) -> bool:
    total = 0
    for sym in eq.lhs:
        total += len(sub[sym_var_id(sym)]) if is_var(sym) else 1
    for sym in eq.rhs:
        total -= len(sub[sym_var_id(sym)]) if is_var(sym) else 1
    return total == 0


def is_solution(eq: Equation, sub: Substitution) -> bool:
    return substitute(eq.lhs, sub) == substitute(eq.rhs, sub)


def brute_solve(eq: Equation, limits: OracleLimits) -> Optional[Substitution]:
    """First solution in enumeration order, or None up to the bound."""
    for sub in enumerate_assignments(eq, limits):
        if _balanced(eq, sub) and is_solution(eq, sub):
            return sub
    return None


def enumerate_solutions(eq: Equation, limits: OracleLimits) -> list[Substitution]:
    """All solutions with total assignment length up to the bound."""
    return [
        sub
        for sub in enumerate_assignments(eq, limits)
        if _balanced(eq, sub) and is_solution(eq, sub)
    ]


def minimal_image_solution(
    eq: Equation, limits: OracleLimits
) -> Optional[Substitution]:
    """A solution minimizing the substituted side length |sigma(lhs)|.

    The result is certified length-minimal whenever its total assignment
    length is within the enumeration bound, since any shorter-image solution
    would have a smaller total assignment length as well.
    """
    best = None
    best_len = None
    for sub in enumerate_solutions(eq, limits):
        image = len(substitute(eq.lhs, sub))
        if best_len is None or image < best_len:
            best, best_len = sub, image
    return best
