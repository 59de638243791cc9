"""Small linear Diophantine systems and the parametric block compression.

After prefix/suffix cutting with symbolic lengths, every maximal run of a
single letter has a length that is a linear expression over the per-variable
parameters x_X (prefix length) and y_X (suffix length).  Guessing which runs
are equal yields a system of equalities plus positivity constraints whose
satisfiability is decided by parity halving: guess the low bit of every
parameter, check parities, divide by two, repeat.  Coefficients never change
and the constant sums stay bounded by max(initial constants, coefficient
sum), so memoizing residual states makes the search finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .model import AlphabetRegistry, Equation, Side, is_var, sym_var_id, var_sym
from .records import BlockRecParam, PrefSuffRec, RejectedBranch, TransformRecord


@dataclass(frozen=True, order=True)
class Param:
    kind: str  # "x" (prefix) or "y" (suffix)
    var: int

    def label(self, var_names: Mapping[int, str] | None = None) -> str:
        name = var_names.get(self.var, str(self.var)) if var_names else str(self.var)
        return f"{self.kind}{name}"


@dataclass(frozen=True)
class LinExpr:
    """Non-negative linear expression: const + sum(coeff * param)."""

    const: int
    coeffs: tuple[tuple[Param, int], ...]  # sorted by param, coeffs > 0

    @classmethod
    def of(cls, const: int = 0, terms: Mapping[Param, int] | None = None) -> "LinExpr":
        items = tuple(sorted((p, c) for p, c in (terms or {}).items() if c))
        if const < 0 or any(c < 0 for _, c in items):
            raise ValueError("expressions are over naturals")
        if const == 0 and not items:
            raise ValueError("an expression needs at least one term")
        return cls(const, items)

    @classmethod
    def const_of(cls, value: int) -> "LinExpr":
        return cls.of(const=value)

    def params(self) -> tuple[Param, ...]:
        return tuple(p for p, _ in self.coeffs)

    def add(self, other: "LinExpr") -> "LinExpr":
        terms = dict(self.coeffs)
        for p, c in other.coeffs:
            terms[p] = terms.get(p, 0) + c
        return LinExpr.of(self.const + other.const, terms)

    def evaluate(self, assignment: Mapping[Param, int]) -> int:
        return self.const + sum(c * assignment[p] for p, c in self.coeffs)

    def min_value(self) -> int:
        """Smallest possible value when every parameter is >= 1."""
        return self.const + sum(c for _, c in self.coeffs)

    def is_const(self) -> bool:
        return not self.coeffs

    def label(self, var_names: Mapping[int, str] | None = None) -> str:
        parts = []
        if self.const or not self.coeffs:
            parts.append(str(self.const))
        for p, c in self.coeffs:
            parts.append(p.label(var_names) if c == 1 else f"{c}*{p.label(var_names)}")
        return " + ".join(parts)


@dataclass(frozen=True)
class DiophSystem:
    equalities: tuple[tuple[LinExpr, LinExpr], ...]
    positivity: frozenset[Param]
    # context of the originating equation, for the smallness check
    occurrences: Optional[tuple[tuple[int, int], ...]] = None  # var id -> count
    eq_size: Optional[int] = None

    def params(self) -> tuple[Param, ...]:
        seen = set(self.positivity)
        for l, r in self.equalities:
            seen.update(l.params())
            seen.update(r.params())
        return tuple(sorted(seen))

    def satisfied_by(self, assignment: Mapping[Param, int]) -> bool:
        if any(assignment.get(p, 0) < 1 for p in self.positivity):
            return False
        return all(l.evaluate(assignment) == r.evaluate(assignment) for l, r in self.equalities)

    def check_small(self) -> None:
        """Validate the smallness invariants against the recorded context."""
        sides = [e for pair in self.equalities for e in pair]
        counts: dict[LinExpr, int] = {}
        for e in sides:
            counts[e] = counts.get(e, 0) + 1
        if any(n > 2 for n in counts.values()):
            raise ValueError("an expression is used on more than two equality sides")
        if self.eq_size is not None:
            const_sum = sum(e.const for e in sides)
            if const_sum > 2 * self.eq_size:
                raise ValueError("constant sum exceeds twice the equation size")
        if self.occurrences is not None:
            occ = dict(self.occurrences)
            totals: dict[Param, int] = {}
            for e in sides:
                for p, c in e.coeffs:
                    totals[p] = totals.get(p, 0) + c
            for p, total in totals.items():
                k = occ.get(p.var)
                if k is not None and total > 2 * k:
                    raise ValueError(f"coefficient sum of {p.label()} exceeds 2x its occurrences")

    def format(self, var_names: Mapping[int, str] | None = None) -> str:
        lines = [f"{l.label(var_names)} = {r.label(var_names)}" for l, r in self.equalities]
        lines.extend(f"{p.label(var_names)} >= 1" for p in sorted(self.positivity))
        return "\n".join(lines)


# --- satisfiability by parity halving -----------------------------------------

def dioph_satisfiable(
    system: DiophSystem,
    trace: Optional[list[int]] = None,
) -> Optional[dict[Param, int]]:
    """Find a witness by exhaustive search over parity vectors, or None.

    Each round guesses the low bit of every parameter (trying 1 before 0,
    which makes e.g. {x+1 = x+1, x >= 1} resolve to x = 1), checks that both
    sides of every equality agree modulo two, halves the constants and
    adjusts the x >= 1 flags.  Residual states are memoized, so the search
    always terminates.  Any returned witness is validated before returning.
    """
    system.check_small()
    params = system.params()
    r = len(params)
    index = {p: i for i, p in enumerate(params)}
    coef_l = []
    coef_r = []
    consts0 = []
    for l, rr in system.equalities:
        vl = [0] * r
        for p, c in l.coeffs:
            vl[index[p]] = c
        vr = [0] * r
        for p, c in rr.coeffs:
            vr[index[p]] = c
        coef_l.append(tuple(vl))
        coef_r.append(tuple(vr))
        consts0.append((l.const, rr.const))
    flags0 = tuple(1 if p in system.positivity else 0 for p in params)

    visited: set[tuple] = set()
    bit_rows: list[tuple[int, ...]] = []
    choices = list(product((1, 0), repeat=r))

    def record(consts) -> None:
        if trace is not None:
            trace.append(sum(a + b for a, b in consts))

    def search(consts: tuple[tuple[int, int], ...], flags: tuple[int, ...]) -> bool:
        if all(a == 0 and b == 0 for a, b in consts) and not any(flags):
            return True
        state = (consts, flags)
        if state in visited:
            return False
        visited.add(state)
        for bits in choices:
            ok = True
            nxt = []
            for (ca, cb), vl, vr in zip(consts, coef_l, coef_r):
                sa = ca + sum(v * b for v, b in zip(vl, bits))
                sb = cb + sum(v * b for v, b in zip(vr, bits))
                if (sa ^ sb) & 1:
                    ok = False
                    break
                nxt.append((sa >> 1, sb >> 1))
            if not ok:
                continue
            nflags = tuple(0 if b else f for f, b in zip(flags, bits))
            record(nxt)
            bit_rows.append(bits)
            if search(tuple(nxt), nflags):
                return True
            bit_rows.pop()
        return False

    record(consts0)
    if not search(tuple(consts0), flags0):
        return None
    witness = {p: sum(row[index[p]] << k for k, row in enumerate(bit_rows)) for p in params}
    assert system.satisfied_by(witness), "parity search produced an invalid witness"
    return witness


def _prepared(system: DiophSystem, cap: int):
    params = system.params()
    lows = [1 if p in system.positivity else 0 for p in params]
    eqs = []
    for l, r in system.equalities:
        cl = [0] * len(params)
        for p, c in l.coeffs:
            cl[params.index(p)] = c
        cr = [0] * len(params)
        for p, c in r.coeffs:
            cr[params.index(p)] = c
        eqs.append((l.const, tuple(cl), r.const, tuple(cr)))
    return params, lows, eqs


def enumerate_dioph(system: DiophSystem, cap: int, limit: Optional[int] = None) -> Iterator[dict[Param, int]]:
    """All solutions with every component <= cap, in lexicographic order.

    Plain nested enumeration with interval pruning: a partial assignment is
    abandoned as soon as some equality cannot be balanced by any completion.
    """
    params, lows, eqs = _prepared(system, cap)
    r = len(params)
    emitted = 0

    def feasible(values: list[int], depth: int) -> bool:
        for cl0, cl, cr0, cr in eqs:
            la = cl0 + sum(c * v for c, v in zip(cl[:depth], values))
            ra = cr0 + sum(c * v for c, v in zip(cr[:depth], values))
            llo = la + sum(c * lows[j] for j, c in enumerate(cl[depth:], depth))
            lhi = la + sum(c * cap for c in cl[depth:])
            rlo = ra + sum(c * lows[j] for j, c in enumerate(cr[depth:], depth))
            rhi = ra + sum(c * cap for c in cr[depth:])
            if lhi < rlo or rhi < llo:
                return False
        return True

    def rec(values: list[int]) -> Iterator[dict[Param, int]]:
        nonlocal emitted
        depth = len(values)
        if limit is not None and emitted >= limit:
            return
        if depth == r:
            assignment = dict(zip(params, values))
            if system.satisfied_by(assignment):
                emitted += 1
                yield assignment
            return
        for v in range(lows[depth], cap + 1):
            values.append(v)
            if feasible(values, depth + 1):
                yield from rec(values)
            values.pop()
            if limit is not None and emitted >= limit:
                return

    yield from rec([])


def dioph_brute_force(system: DiophSystem, cap: int) -> Optional[dict[Param, int]]:
    """Lexicographically least solution with components <= cap, else None."""
    for assignment in enumerate_dioph(system, cap, limit=1):
        return assignment
    return None


def minimal_dioph_solutions(
    system: DiophSystem, cap: int, max_enum: int = 200_000
) -> list[dict[Param, int]]:
    """Pointwise-minimal solutions among those with all components <= cap."""
    params = system.params()
    sols = []
    for assignment in enumerate_dioph(system, cap):
        sols.append(tuple(assignment[p] for p in params))
        if len(sols) > max_enum:
            raise RuntimeError("too many solutions to enumerate")
    minimal = [
        s for s in sols if not any(o != s and all(a <= b for a, b in zip(o, s)) for o in sols)
    ]
    return [dict(zip(params, s)) for s in minimal]


def minimal_witness_bound(system: DiophSystem) -> float:
    """(w + r) * e^(c/e) bound on the coordinates of minimal solutions."""
    params = system.params()
    r = len(params)
    w = r  # the right-hand sides of the positivity constraints
    c = 0
    for l, rr in system.equalities:
        w += abs(rr.const - l.const)
        terms = {p: cf for p, cf in l.coeffs}
        for p, cf in rr.coeffs:
            terms[p] = terms.get(p, 0) - cf
        c += sum(abs(v) for v in terms.values())
    return (w + r) * math.exp(c / math.e)


# --- prefix-suffix structures and parametrised blocks --------------------------

@dataclass(frozen=True)
class PssEntry:
    """First/last letter of a variable and whether its value is a block."""

    first: int
    last: int
    is_block: bool = False

    def __post_init__(self):
        if self.is_block and self.last != self.first:
            raise ValueError("a block variable starts and ends with the same letter")


Token = tuple  # ("lit", letter) | ("run", letter, Param) | ("var", vid)


def x_param(vid: int) -> Param:
    return Param("x", vid)


def y_param(vid: int) -> Param:
    return Param("y", vid)


def pref_suff_parametric(
    eq: Equation,
    pss: Mapping[int, PssEntry],
    empties: frozenset[int] = frozenset(),
) -> tuple[tuple[Token, ...], tuple[Token, ...], list[PrefSuffRec]]:
    """Cut symbolic prefixes/suffixes: X -> a^{x_X} X b^{y_X}.

    Block variables are consumed entirely (they become the run a^{x_X});
    variables in ``empties`` are guessed to have an empty core and removed.
    Returns both token sides plus unresolved cut records (lengths are filled
    in once a Diophantine witness is known).
    """
    for vid in eq.variables():
        if vid not in pss:
            raise ValueError(f"prefix-suffix structure misses variable {vid}")
    for vid in empties:
        if pss[vid].is_block:
            raise ValueError("block variables are removed implicitly, not via empties")

    def rewrite(side: Side) -> tuple[Token, ...]:
        out: list[Token] = []
        for sym in side:
            if is_var(sym):
                vid = sym_var_id(sym)
                entry = pss[vid]
                if entry.is_block:
                    out.append(("run", entry.first, x_param(vid)))
                else:
                    out.append(("run", entry.first, x_param(vid)))
                    if vid not in empties:
                        out.append(("var", vid))
                    out.append(("run", entry.last, y_param(vid)))
            else:
                out.append(("lit", sym))
        return tuple(out)

    protos = []
    for vid in sorted(set(eq.variables()) & set(pss)):
        entry = pss[vid]
        if entry.is_block:
            protos.append(
                PrefSuffRec(vid, entry.first, None, None, None, True, True, x_param(vid), None)
            )
        else:
            protos.append(
                PrefSuffRec(
                    vid,
                    entry.first,
                    None,
                    entry.last,
                    None,
                    vid in empties,
                    False,
                    x_param(vid),
                    y_param(vid),
                )
            )
    return rewrite(eq.lhs), rewrite(eq.rhs), protos


@dataclass(frozen=True)
class ParamBlock:
    """A maximal same-letter run in the token sequence; expr is its length."""

    letter: int
    expr: LinExpr
    side: int  # 0 = lhs, 1 = rhs
    start: int  # token span [start, end)
    end: int


def collect_param_blocks(tokens: Sequence[Token], side: int = 0) -> list[ParamBlock]:
    """Merge adjacent contributions of one letter into maximal blocks.

    Explicit letters contribute +1, parametric runs contribute their
    parameter; variable cores and letter changes break runs.
    """
    blocks: list[ParamBlock] = []
    cur_letter = None
    const = 0
    terms: dict[Param, int] = {}
    start = 0

    def flush(end: int) -> None:
        nonlocal cur_letter, const, terms
        if cur_letter is not None:
            blocks.append(ParamBlock(cur_letter, LinExpr.of(const, terms), side, start, end))
        cur_letter, const, terms = None, 0, {}

    for i, tok in enumerate(tokens):
        kind = tok[0]
        if kind == "var":
            flush(i)
            continue
        letter = tok[1]
        if letter != cur_letter:
            flush(i)
            cur_letter = letter
            start = i
        if kind == "lit":
            const += 1
        else:
            p = tok[2]
            terms[p] = terms.get(p, 0) + 1
    flush(len(tokens))
    return blocks


def collect_blocks_of_eq(
    lhs_tokens: Sequence[Token], rhs_tokens: Sequence[Token]
) -> list[ParamBlock]:
    return collect_param_blocks(lhs_tokens, 0) + collect_param_blocks(rhs_tokens, 1)


def word_to_diophantine(
    blocks: Sequence[ParamBlock],
    partition: Sequence[Sequence[int]],
    occurrences: Mapping[int, int] | None = None,
    eq_size: int | None = None,
) -> DiophSystem:
    """Equalise the lengths inside each partition part, chain-wise.

    Each part must contain blocks of a single letter.  Every parameter that
    occurs in any block gets a positivity constraint (a cut prefix or suffix
    is non-empty by definition).
    """
    seen: set[int] = set()
    equalities: list[tuple[LinExpr, LinExpr]] = []
    for part in partition:
        if not part:
            raise ValueError("empty partition part")
        letters = {blocks[i].letter for i in part}
        if len(letters) != 1:
            raise ValueError("a partition part mixes letters")
        for i in part:
            if i in seen:
                raise ValueError("partition parts overlap")
            seen.add(i)
        for i, j in zip(part, part[1:]):
            equalities.append((blocks[i].expr, blocks[j].expr))
    positivity = {p for b in blocks for p in b.expr.params()}
    return DiophSystem(
        tuple(equalities),
        frozenset(positivity),
        tuple(sorted(occurrences.items())) if occurrences is not None else None,
        eq_size,
    )


# --- parametric block compression ----------------------------------------------

ONE = LinExpr.const_of(1)


def block_comp_param(
    eq: Equation,
    registry: AlphabetRegistry,
    pss: Mapping[int, PssEntry],
    empties: frozenset[int],
    partition: Sequence[Sequence[int]],
    witness_override: Mapping[Param, int] | None = None,
) -> tuple[Equation, AlphabetRegistry, list[TransformRecord], DiophSystem, dict[Param, int]]:
    """Parametric block compression (cut, equalise lengths, replace runs).

    Blocks left out of the partition are guessed to have length exactly one
    (an ``expr = 1`` equality is added) and stay explicit; every part of the
    partition is replaced by one fresh letter.  An unsatisfiable system
    raises RejectedBranch.
    """
    lhs_tokens, rhs_tokens, protos = pref_suff_parametric(eq, pss, empties)
    blocks = collect_blocks_of_eq(lhs_tokens, rhs_tokens)
    return _block_comp_from_blocks(
        eq, registry, (lhs_tokens, rhs_tokens), blocks, protos, partition, witness_override
    )


def _block_comp_from_blocks(
    eq: Equation,
    registry: AlphabetRegistry,
    token_sides: tuple[tuple[Token, ...], tuple[Token, ...]],
    blocks: list[ParamBlock],
    protos: list[PrefSuffRec],
    partition: Sequence[Sequence[int]],
    witness_override: Mapping[Param, int] | None = None,
) -> tuple[Equation, AlphabetRegistry, list[TransformRecord], DiophSystem, dict[Param, int]]:
    occurrences = {vid: eq.occurrences_of(vid) for vid in eq.variables()}
    eq_size = len(token_sides[0]) + len(token_sides[1])
    system = word_to_diophantine(blocks, partition, occurrences, eq_size)

    covered = {i for part in partition for i in part}
    omitted = [i for i in range(len(blocks)) if i not in covered]
    extra = []
    for i in omitted:
        expr = blocks[i].expr
        if expr == ONE:
            continue
        extra.append((expr, ONE))
    if extra:
        system = replace(system, equalities=system.equalities + tuple(extra))

    witness = dioph_satisfiable(system)
    if witness is None:
        raise RejectedBranch("block equalities are unsatisfiable")
    if witness_override is not None:
        witness = dict(witness_override)
        for p in system.params():
            if p not in witness:
                raise ValueError(f"witness override misses {p.label()}")
        if not system.satisfied_by(witness):
            raise ValueError("witness override does not satisfy the system")

    records: list[TransformRecord] = []
    for proto in protos:
        left_len = witness.get(proto.left_param)
        right_len = witness.get(proto.right_param) if proto.right_param is not None else 0
        records.append(
            replace(proto, left_len=left_len, right_len=None if proto.is_block else right_len)
        )

    fresh_of_block: dict[int, int] = {}
    for part in partition:
        lead = blocks[part[0]]
        length = lead.expr.evaluate(witness)
        registry, fresh = registry.with_block(lead.letter, length)
        records.append(BlockRecParam(fresh, lead.letter, lead.expr, length))
        for i in part:
            fresh_of_block[i] = fresh

    by_side: dict[int, dict[int, int]] = {0: {}, 1: {}}
    for i, b in enumerate(blocks):
        by_side[b.side][b.start] = i

    def render(side_idx: int) -> Side:
        tokens = token_sides[side_idx]
        out: list[int] = []
        pos = 0
        while pos < len(tokens):
            tok = tokens[pos]
            if tok[0] == "var":
                out.append(var_sym(tok[1]))
                pos += 1
                continue
            i = by_side[side_idx][pos]
            block = blocks[i]
            fresh = fresh_of_block.get(i)
            if fresh is not None:
                out.append(fresh)
            else:
                value = block.expr.evaluate(witness)
                assert value == 1, "an omitted block must have length one"
                out.extend([block.letter] * value)
            pos = block.end
        return tuple(out)

    new_eq = Equation(render(0), render(1))
    return new_eq, registry, records, system, witness
