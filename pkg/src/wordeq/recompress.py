"""Equation rewriting primitives: pops, pair compression, block compression.

All operations are pure: they take an equation plus registry and return new
ones together with replay records.  Completeness of the enclosing search
relies on the guesses being read off a solution; here we only implement the
mechanics and validate the stated preconditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .model import AlphabetRegistry, Equation, Side, is_var, sym_var_id, var_sym
from .records import (
    BlockRecExplicit,
    PairRec,
    PopRec,
    PrefSuffRec,
    RejectedBranch,
    TransformRecord,
)


@dataclass(frozen=True)
class PopGuess:
    """What one variable pops: first/last letter (or None) and removal.

    ``removed`` means the variable becomes empty after the pops and is
    deleted from the equation; it requires at least one popped letter.
    """

    left: Optional[int] = None
    right: Optional[int] = None
    removed: bool = False


@dataclass(frozen=True)
class CutGuess:
    """Explicit prefix/suffix cut for one variable: X -> a^ell X b^r."""

    first: int
    ell: int
    last: Optional[int] = None
    r: int = 0
    is_block: bool = False
    removed: bool = False


def pop(
    eq: Equation,
    sigma_l: frozenset[int],
    sigma_r: frozenset[int],
    guess: Mapping[int, PopGuess],
) -> tuple[Equation, list[TransformRecord]]:
    present = set(eq.variables())
    for vid, g in guess.items():
        if vid not in present:
            raise RejectedBranch(f"pop guess for absent variable {vid}")
        if g.left is not None and g.left not in sigma_r:
            raise ValueError("left pop must come from the right partition class")
        if g.right is not None and g.right not in sigma_l:
            raise ValueError("right pop must come from the left partition class")
        if g.removed and g.left is None and g.right is None:
            raise ValueError("a removed variable must pop at least one letter")

    records: list[TransformRecord] = []

    def rewrite(side: Side) -> Side:
        out: list[int] = []
        for sym in side:
            if is_var(sym):
                g = guess.get(sym_var_id(sym))
                if g is not None:
                    if g.left is not None:
                        out.append(g.left)
                    if not g.removed:
                        out.append(sym)
                    if g.right is not None:
                        out.append(g.right)
                    continue
            out.append(sym)
        return tuple(out)

    new_eq = Equation(rewrite(eq.lhs), rewrite(eq.rhs))
    for vid in sorted(guess):
        g = guess[vid]
        if g.left is None and g.right is None:
            continue
        records.append(PopRec(vid, g.left, g.right, g.removed))
    return new_eq, records


def compress_pair(
    eq: Equation, registry: AlphabetRegistry, a: int, b: int
) -> tuple[Equation, AlphabetRegistry, int, PairRec]:
    """Replace every explicit factor ab by a fresh letter (greedy, left to right)."""
    if a == b:
        raise ValueError("pair compression is defined only for distinct letters")
    registry, fresh = registry.with_pair(a, b)

    def rewrite(side: Side) -> Side:
        out: list[int] = []
        i, n = 0, len(side)
        while i < n:
            if i + 1 < n and side[i] == a and side[i + 1] == b:
                out.append(fresh)
                i += 2
            else:
                out.append(side[i])
                i += 1
        return tuple(out)

    new_eq = Equation(rewrite(eq.lhs), rewrite(eq.rhs))
    return new_eq, registry, fresh, PairRec(fresh, a, b)


def _pair_occurs(side: Side, a: int, b: int) -> bool:
    for i in range(len(side) - 1):
        if side[i] == a and side[i + 1] == b:
            return True
    return False


def occurring_pairs(eq: Equation, sigma_l: Iterable[int], sigma_r: Iterable[int]) -> list[tuple[int, int]]:
    pairs = []
    for a in sorted(sigma_l):
        for b in sorted(sigma_r):
            if a != b and (_pair_occurs(eq.lhs, a, b) or _pair_occurs(eq.rhs, a, b)):
                pairs.append((a, b))
    return pairs


def pair_comp_crossing(
    eq: Equation,
    registry: AlphabetRegistry,
    sigma_l: frozenset[int],
    sigma_r: frozenset[int],
    guess: Mapping[int, PopGuess],
) -> tuple[Equation, AlphabetRegistry, list[TransformRecord]]:
    """Pop per the guess, then compress every occurring pair from sigma_l x sigma_r.

    The two classes are disjoint, so replaced factors never overlap and the
    fixed lexicographic order is canonical up to renaming of fresh letters.
    """
    if sigma_l & sigma_r:
        raise ValueError("partition classes must be disjoint")
    eq, records = pop(eq, sigma_l, sigma_r, guess)
    for a, b in occurring_pairs(eq, sigma_l, sigma_r):
        eq, registry, _, rec = compress_pair(eq, registry, a, b)
        records.append(rec)
    return eq, registry, records


# --- explicit block compression ----------------------------------------------

def _runs(side: Side) -> list[tuple[int, int, int]]:
    """Maximal runs of a single letter as (letter, start, length)."""
    runs = []
    i, n = 0, len(side)
    while i < n:
        sym = side[i]
        if is_var(sym):
            i += 1
            continue
        j = i + 1
        while j < n and side[j] == sym:
            j += 1
        runs.append((sym, i, j - i))
        i = j
    return runs


def compress_blocks_explicit(
    eq: Equation, registry: AlphabetRegistry, letter: int
) -> tuple[Equation, AlphabetRegistry, list[TransformRecord]]:
    """Replace every explicit maximal run letter^ell with ell >= 2 by a fresh letter.

    Equal lengths share one fresh letter across both sides; runs of length 1
    are never touched.
    """
    lengths = sorted(
        {ln for side in eq.sides() for (sym, _, ln) in _runs(side) if sym == letter and ln >= 2}
    )
    fresh_by_len: dict[int, int] = {}
    records: list[TransformRecord] = []
    for ln in lengths:
        registry, fresh = registry.with_block(letter, ln)
        fresh_by_len[ln] = fresh
        records.append(BlockRecExplicit(fresh, letter, ln))

    def rewrite(side: Side) -> Side:
        out: list[int] = []
        i, n = 0, len(side)
        while i < n:
            sym = side[i]
            if sym == letter and not is_var(sym):
                j = i + 1
                while j < n and side[j] == letter:
                    j += 1
                ln = j - i
                if ln >= 2:
                    out.append(fresh_by_len[ln])
                else:
                    out.append(sym)
                i = j
            else:
                out.append(sym)
                i += 1
        return tuple(out)

    return Equation(rewrite(eq.lhs), rewrite(eq.rhs)), registry, records


def cut_pref_suff_explicit(
    eq: Equation,
    guess: Mapping[int, CutGuess],
    block_cap: int,
) -> tuple[Equation, list[TransformRecord]]:
    """Replace each guessed X by first^ell X last^r (or first^ell when a block)."""
    present = set(eq.variables())
    for vid, g in guess.items():
        if vid not in present:
            raise RejectedBranch(f"cut guess for absent variable {vid}")
        if g.ell < 1:
            raise ValueError("prefix length must be >= 1")
        if g.is_block:
            if g.r != 0 or (g.last is not None and g.last != g.first):
                raise ValueError("a block variable has no separate suffix")
            if not g.removed:
                raise ValueError("a block variable is consumed by the cut")
        else:
            if g.r < 1 or g.last is None:
                raise ValueError("a non-block variable has a non-empty suffix")
        if g.ell > block_cap or g.r > block_cap:
            raise RejectedBranch("cut length beyond the block cap")

    def rewrite(side: Side) -> Side:
        out: list[int] = []
        for sym in side:
            if is_var(sym) and sym_var_id(sym) in guess:
                g = guess[sym_var_id(sym)]
                out.extend([g.first] * g.ell)
                if not g.removed:
                    out.append(sym)
                if g.last is not None:
                    out.extend([g.last] * g.r)
            else:
                out.append(sym)
        return tuple(out)

    records: list[TransformRecord] = [
        PrefSuffRec(
            vid,
            g.first,
            g.ell,
            None if g.is_block else g.last,
            0 if g.is_block else g.r,
            g.removed,
            g.is_block,
        )
        for vid, g in sorted(guess.items())
    ]
    return Equation(rewrite(eq.lhs), rewrite(eq.rhs)), records


def block_comp_explicit(
    eq: Equation,
    registry: AlphabetRegistry,
    guess: Mapping[int, CutGuess],
    block_cap: int,
) -> tuple[Equation, AlphabetRegistry, list[TransformRecord]]:
    """Cut prefixes/suffixes, then compress blocks of every letter with a run."""
    eq, records = cut_pref_suff_explicit(eq, guess, block_cap)
    letters = sorted(
        {sym for side in eq.sides() for (sym, _, ln) in _runs(side) if ln >= 2}
    )
    for letter in letters:
        eq, registry, recs = compress_blocks_explicit(eq, registry, letter)
        records.extend(recs)
    return eq, registry, records
