"""Symbols, equations, the letter registry (an SLP), and substitutions.

Symbols are plain ints so equations hash and compare fast:

* a letter is its non-negative registry id;
* a variable with id ``v`` is encoded as ``-(v + 1)``.

Letter ids and variable ids are therefore disjoint dense namespaces.
Input letters are always registered before any derived letter, so
``lid < registry.input_count`` iff the letter came from the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


Symbol = int
Side = tuple[Symbol, ...]


def var_sym(var_id: int) -> Symbol:
    return -(var_id + 1)


def is_var(sym: Symbol) -> bool:
    return sym < 0


def sym_var_id(sym: Symbol) -> int:
    return -sym - 1


class RegistryError(Exception):
    """Unknown letter id: the registry and the equation disagree."""


class EquationSyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


# --- provenance -------------------------------------------------------------

@dataclass(frozen=True)
class InputChar:
    name: str


@dataclass(frozen=True)
class PairOf:
    a: int
    b: int


@dataclass(frozen=True)
class BlockOf:
    letter: int
    count: int  # arbitrary-precision natural, >= 1


@dataclass(frozen=True)
class TooLong:
    length: int


Provenance = InputChar | PairOf | BlockOf


class AlphabetRegistry:
    """Append-only map letter-id -> provenance, shared copy-on-write.

    Every entry stores its expansion length, so lengths are O(1) even for
    blocks like a^(2**40).  Extension returns a new registry; existing ones
    are never mutated and are safe to share between search branches.
    """

    __slots__ = ("_entries", "_input_count")

    def __init__(self, entries: tuple = (), input_count: int = 0):
        self._entries = entries
        self._input_count = input_count

    @classmethod
    def from_input(cls, names: Iterable[str]) -> "AlphabetRegistry":
        entries = tuple((InputChar(n), 1) for n in names)
        return cls(entries, len(entries))

    @property
    def input_count(self) -> int:
        return self._input_count

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, lid: int) -> bool:
        return 0 <= lid < len(self._entries)

    def provenance(self, lid: int) -> Provenance:
        if not (0 <= lid < len(self._entries)):
            raise RegistryError(f"unknown letter id {lid}")
        return self._entries[lid][0]

    def is_input(self, lid: int) -> bool:
        return 0 <= lid < self._input_count

    def with_pair(self, a: int, b: int) -> tuple["AlphabetRegistry", int]:
        n = len(self._entries)
        if not (0 <= a < n and 0 <= b < n):
            raise RegistryError("pair provenance must reference existing letters")
        length = self._entries[a][1] + self._entries[b][1]
        reg = AlphabetRegistry(self._entries + ((PairOf(a, b), length),), self._input_count)
        return reg, n

    def with_block(self, letter: int, count: int) -> tuple["AlphabetRegistry", int]:
        n = len(self._entries)
        if not 0 <= letter < n:
            raise RegistryError("block provenance must reference an existing letter")
        if count < 1:
            raise ValueError("block count must be >= 1")
        length = count * self._entries[letter][1]
        reg = AlphabetRegistry(self._entries + ((BlockOf(letter, count), length),), self._input_count)
        return reg, n

    def length_of(self, lid: int) -> int:
        if not (0 <= lid < len(self._entries)):
            raise RegistryError(f"unknown letter id {lid}")
        return self._entries[lid][1]

    def creation_order(self) -> Iterator[int]:
        return iter(range(len(self._entries)))


def expansion_length(letter: int, registry: AlphabetRegistry) -> int:
    """Length of the full expansion of ``letter`` over input letters."""
    return registry.length_of(letter)


def expand(letter: int, registry: AlphabetRegistry, cap: int) -> tuple[int, ...] | TooLong:
    """Expand a letter to input letters, or report its exact length if > cap."""
    total = registry.length_of(letter)
    if total > cap:
        return TooLong(total)
    out: list[int] = []
    stack = [letter]
    while stack:
        lid = stack.pop()
        prov = registry.provenance(lid)
        if isinstance(prov, InputChar):
            out.append(lid)
        elif isinstance(prov, PairOf):
            stack.append(prov.b)
            stack.append(prov.a)
        else:
            stack.extend([prov.letter] * prov.count)
    return tuple(out)


def expand_word(word: Iterable[int], registry: AlphabetRegistry, cap: int) -> tuple[int, ...] | TooLong:
    total = sum(registry.length_of(l) for l in word)
    if total > cap:
        return TooLong(total)
    out: list[int] = []
    for l in word:
        piece = expand(l, registry, cap)
        assert not isinstance(piece, TooLong)
        out.extend(piece)
    return tuple(out)


# --- equations ---------------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    lhs: Side
    rhs: Side

    def __len__(self) -> int:
        return len(self.lhs) + len(self.rhs)

    def sides(self) -> tuple[Side, Side]:
        return self.lhs, self.rhs

    def variables(self) -> tuple[int, ...]:
        seen: dict[int, None] = {}
        for sym in self.lhs + self.rhs:
            if is_var(sym):
                seen.setdefault(sym_var_id(sym), None)
        return tuple(seen)

    def letters(self) -> tuple[int, ...]:
        seen: dict[int, None] = {}
        for sym in self.lhs + self.rhs:
            if not is_var(sym):
                seen.setdefault(sym, None)
        return tuple(sorted(seen))

    def var_occurrences(self) -> int:
        return sum(1 for sym in self.lhs + self.rhs if is_var(sym))

    def occurrences_of(self, var_id: int) -> int:
        v = var_sym(var_id)
        return (self.lhs + self.rhs).count(v)

    def is_trivial(self) -> bool:
        return len(self.lhs) <= 1 and len(self.rhs) <= 1

    def remove_vars(self, var_ids) -> "Equation":
        gone = {var_sym(v) for v in var_ids}
        return Equation(
            tuple(s for s in self.lhs if s not in gone),
            tuple(s for s in self.rhs if s not in gone),
        )


Substitution = dict[int, tuple[int, ...]]


def substitute(side: Side, sub: Substitution) -> tuple[int, ...]:
    out: list[int] = []
    for sym in side:
        if is_var(sym):
            out.extend(sub[sym_var_id(sym)])
        else:
            out.append(sym)
    return tuple(out)


def canonical_form(eq: Equation, registry: AlphabetRegistry) -> tuple[Equation, dict[int, int]]:
    """Renumber derived letters by first occurrence across lhs then rhs.

    Input letters and variables are untouched.  Two equations are equal after
    canonicalization iff they differ only by a bijective renaming of derived
    letters.  Canonical derived ids start at ``registry.input_count`` and are
    pure labels: they need not exist in the registry.
    """
    key = canonical_key(eq, registry.input_count)
    renaming: dict[int, int] = {}
    nxt = registry.input_count
    for sym in eq.lhs + eq.rhs:
        if not is_var(sym) and not registry.is_input(sym) and sym not in renaming:
            renaming[sym] = nxt
            nxt += 1
    return Equation(key[0], key[1]), renaming


def canonical_key(eq: Equation, input_count: int) -> tuple[Side, Side]:
    """Hot-path version of canonical_form returning bare tuples."""
    renaming: dict[int, int] = {}
    nxt = input_count

    def walk(side: Side) -> Side:
        nonlocal nxt
        out = []
        for sym in side:
            if sym >= input_count:  # derived letter (variables are negative)
                new = renaming.get(sym)
                if new is None:
                    new = renaming[sym] = nxt
                    nxt += 1
                out.append(new)
            else:
                out.append(sym)
        return tuple(out)

    return walk(eq.lhs), walk(eq.rhs)


# --- parsing and printing ----------------------------------------------------

@dataclass
class Problem:
    """A parsed equation together with its name tables."""

    equation: Equation
    registry: AlphabetRegistry
    letter_ids: dict[str, int]
    var_ids: dict[str, int]
    source: str

    def letter_name(self, lid: int) -> str:
        if self.registry.is_input(lid):
            prov = self.registry.provenance(lid)
            assert isinstance(prov, InputChar)
            return prov.name
        return f"#{lid}"

    def var_name(self, vid: int) -> str:
        for name, v in self.var_ids.items():
            if v == vid:
                return name
        return f"?{vid}"

    def format_side(self, side: Side) -> str:
        return " ".join(
            self.var_name(sym_var_id(s)) if is_var(s) else self.letter_name(s) for s in side
        )

    def format_equation(self, eq: Equation | None = None) -> str:
        eq = eq or self.equation
        return f"{self.format_side(eq.lhs)} = {self.format_side(eq.rhs)}"


def parse_equation(text: str) -> Problem:
    """One-line grammar: lowercase = letters, uppercase = variables, one '='."""
    if text.count("=") != 1:
        raise EquationSyntaxError("equation must contain exactly one '='")
    letters: dict[str, None] = {}
    variables: dict[str, None] = {}
    for pos, ch in enumerate(text):
        if ch == "=" or ch.isspace():
            continue
        if "a" <= ch <= "z":
            letters.setdefault(ch, None)
        elif "A" <= ch <= "Z":
            variables.setdefault(ch, None)
        else:
            raise EquationSyntaxError(f"unexpected character {ch!r}", pos)
    letter_ids = {name: i for i, name in enumerate(sorted(letters))}
    var_ids = {name: i for i, name in enumerate(sorted(variables))}
    registry = AlphabetRegistry.from_input(sorted(letters))

    def side_of(chunk: str) -> Side:
        out = []
        for ch in chunk:
            if ch.isspace():
                continue
            if "a" <= ch <= "z":
                out.append(letter_ids[ch])
            else:
                out.append(var_sym(var_ids[ch]))
        return tuple(out)

    left, right = text.split("=")
    eq = Equation(side_of(left), side_of(right))
    return Problem(eq, registry, letter_ids, var_ids, text.strip())


def parse_equation_json(obj: dict) -> Problem:
    """Extended form for large alphabets: explicit symbol lists.

    ``{"letters": [...], "variables": [...], "lhs": [...], "rhs": [...]}``
    where the sides list symbol names.
    """
    for field in ("letters", "variables", "lhs", "rhs"):
        if field not in obj or not isinstance(obj[field], list):
            raise EquationSyntaxError(f"JSON equation needs a {field!r} list")
    letters = [str(x) for x in obj["letters"]]
    variables = [str(x) for x in obj["variables"]]
    if len(set(letters)) != len(letters) or len(set(variables)) != len(variables):
        raise EquationSyntaxError("duplicate symbol names")
    if set(letters) & set(variables):
        raise EquationSyntaxError("letter and variable names must be disjoint")
    letter_ids = {name: i for i, name in enumerate(letters)}
    var_ids = {name: i for i, name in enumerate(variables)}
    registry = AlphabetRegistry.from_input(letters)

    def side_of(names: list, which: str) -> Side:
        out = []
        for i, name in enumerate(names):
            name = str(name)
            if name in letter_ids:
                out.append(letter_ids[name])
            elif name in var_ids:
                out.append(var_sym(var_ids[name]))
            else:
                raise EquationSyntaxError(f"unknown symbol {name!r} in {which}", i)
        return tuple(out)

    eq = Equation(side_of(obj["lhs"], "lhs"), side_of(obj["rhs"], "rhs"))
    return Problem(eq, registry, letter_ids, var_ids, "<json>")
