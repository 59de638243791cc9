"""Replay log of equation transformations.

Each rewriting step appends records describing exactly what was popped,
cut or compressed, so a solution of the rewritten equation can be mapped
back to a solution of the original one by replaying the records in
reverse (prepending/appending popped letters; compressed letters stay
compressed in the substitution and expand through the registry).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class RejectedBranch(Exception):
    """A nondeterministic guess that cannot be realized; prune the branch."""


@dataclass(frozen=True)
class PopRec:
    var: int
    left: Optional[int]
    right: Optional[int]
    removed: bool


@dataclass(frozen=True)
class PairRec:
    fresh: int
    a: int
    b: int


@dataclass(frozen=True)
class BlockRecExplicit:
    fresh: int
    letter: int
    length: int


@dataclass(frozen=True)
class PrefSuffRec:
    """Prefix/suffix cut of one variable.

    ``left_len``/``right_len`` are the concrete cut lengths.  In parametric
    mode they are resolved from the Diophantine witness of the same step and
    the parameters are kept so a replay may instantiate a different witness.
    """

    var: int
    left_letter: int
    left_len: Optional[int]
    right_letter: Optional[int]
    right_len: Optional[int]
    removed: bool
    is_block: bool
    left_param: object = None
    right_param: object = None


@dataclass(frozen=True)
class BlockRecParam:
    fresh: int
    letter: int
    expr: object  # dioph.LinExpr
    length: Optional[int]  # expr evaluated at the branch witness


TransformRecord = PopRec | PairRec | BlockRecExplicit | PrefSuffRec | BlockRecParam
