"""Relative presentations: parsing, printing, symmetrization and Ω-sets."""
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from loguru import logger

from app.core.exceptions import (
    IdentityLetterError,
    UnknownSymbolError,
    WordSyntaxError,
)
from app.services.words import (
    CyclicSubgroup,
    Gen,
    Letter,
    Sub,
    Word,
    free_reduce,
    invert_word,
    rotations,
    syllable_value,
    syllables,
)


@dataclass(frozen=True)
class RelPresentation:
    """
    G = ⟨X, {H_λ} | 𝓡⟩. The symmetrized relator set (all cyclic shifts of
    every R and R⁻¹) is computed once at construction.
    """
    generator_names: tuple[str, ...]
    slots: tuple[CyclicSubgroup, ...]
    relators: tuple[Word, ...] = ()
    dehn_slope: Optional[Fraction] = None
    symmetrized: tuple[Word, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symmetrized: list[Word] = []
        seen: set = set()
        for relator in self.relators:
            if not relator:
                continue
            for w in (tuple(relator), invert_word(relator, self.slots)):
                for rot in rotations(w):
                    if rot not in seen:
                        seen.add(rot)
                        symmetrized.append(rot)
        object.__setattr__(self, "symmetrized", tuple(symmetrized))

    @property
    def max_relator_length(self) -> int:
        """M = max ‖R‖ over 𝓡 (0 for an empty relator set)."""
        return max((len(r) for r in self.relators), default=0)

    @property
    def max_sub_letters(self) -> int:
        return max((sum(type(letter) is Sub for letter in r) for r in self.relators), default=0)

    def generator_index(self, name: str) -> int:
        try:
            return self.generator_names.index(name)
        except ValueError:
            raise UnknownSymbolError(f"unknown generator '{name}'") from None

    def slot_index(self, name: str) -> int:
        for i, slot in enumerate(self.slots):
            if slot.name == name:
                return i
        raise UnknownSymbolError(f"unknown subgroup '{name}'")

    def parse(self, text: str) -> Word:
        return parse_word(text, self)

    def format(self, word: Word) -> str:
        return format_word(word, self)

    def reduce(self, word: Iterable[Letter]) -> Word:
        return free_reduce(word, self.slots)

    def invert(self, word: Word) -> Word:
        return invert_word(word, self.slots)

    def with_relators(self, relators: Sequence[Word]) -> "RelPresentation":
        return RelPresentation(self.generator_names, self.slots, tuple(relators), self.dehn_slope)


_TOKEN = re.compile(
    r"@(?P<sub>[A-Za-z_][A-Za-z0-9_]*)\((?P<expr>[^()]*)\)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?:\^(?P<exp>[+-]?\d+))?"
    r"|(?P<one>1)"
)


def parse_word(text: str, pres: RelPresentation) -> Word:
    """
    Parses the whitespace-separated word grammar: `name`, `name^k` (k ≠ 0)
    and `@Sub(expr)`. A lone `1` denotes the empty word.

    Raises:
        WordSyntaxError: malformed token (with character position).
        UnknownSymbolError: undeclared generator or subgroup name.
        IdentityLetterError: a subgroup token evaluating to the identity.
    """
    letters: list[Letter] = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        match = _TOKEN.match(text, pos)
        if not match:
            raise WordSyntaxError(f"unexpected character {text[pos]!r}", pos)
        end = match.end()
        if end < n and not text[end].isspace():
            raise WordSyntaxError("tokens must be separated by whitespace", end)
        if match.group("sub") is not None:
            slot_index = pres.slot_index(match.group("sub"))
            slot = pres.slots[slot_index]
            element = slot.parse(match.group("expr"))
            if slot.is_identity(element):
                raise IdentityLetterError(f"subgroup token {match.group(0)!r} at position {pos} is the identity")
            letters.append(Sub(slot_index, element))
        elif match.group("name") is not None:
            index = pres.generator_index(match.group("name"))
            exp = int(match.group("exp") or 1)
            if exp == 0:
                raise WordSyntaxError("generator exponent must be nonzero", pos)
            sign = 1 if exp > 0 else -1
            letters.extend(Gen(index, sign) for _ in range(abs(exp)))
        pos = end
    return tuple(letters)


def format_word(word: Word, pres: RelPresentation) -> str:
    """Prints a word in the grammar of `parse_word`; runs of one generator letter print as powers."""
    tokens: list[str] = []
    i = 0
    while i < len(word):
        letter = word[i]
        if type(letter) is Sub:
            slot = pres.slots[letter.slot]
            tokens.append(f"@{slot.name}({slot.format(letter.element)})")
            i += 1
            continue
        j = i
        while j < len(word) and word[j] == letter:
            j += 1
        exp = letter.sign * (j - i)
        name = pres.generator_names[letter.index]
        tokens.append(name if exp == 1 else f"{name}^{exp}")
        i = j
    return " ".join(tokens)


# ---------------------------------------------------------------------------
# Ω-sets and reducedness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaSets:
    """Per-slot Ω_λ: values of H_λ-syllables of the symmetrized relators."""
    sets: tuple[frozenset, ...]

    def __getitem__(self, slot: int) -> frozenset:
        return self.sets[slot]

    def is_empty(self) -> bool:
        return not any(self.sets)


def compute_omega(pres: RelPresentation) -> OmegaSets:
    values: list[set] = [set() for _ in pres.slots]
    for relator in pres.symmetrized:
        for syl in syllables(relator):
            if syl.slot is None:
                continue
            value = syllable_value(relator, syl, pres.slots)
            if not pres.slots[syl.slot].is_identity(value):
                values[syl.slot].add(value)
    for slot, found in zip(pres.slots, values):
        found |= {slot.invert(h) for h in found}
    return OmegaSets(tuple(frozenset(v) for v in values))


@dataclass(frozen=True)
class RelatorViolation:
    relator_index: int
    relator: str
    kind: str  # "multi-letter syllable" | "not F-reduced"
    detail: str


def check_reduced(pres: RelPresentation) -> list[RelatorViolation]:
    """Empty iff every relator is F-reduced with single-letter H-syllables."""
    violations: list[RelatorViolation] = []
    for index, relator in enumerate(pres.relators):
        text = format_word(relator, pres)
        found = False
        for syl in syllables(relator):
            if syl.slot is not None and len(syl) > 1:
                found = True
                violations.append(RelatorViolation(
                    index, text, "multi-letter syllable",
                    format_word(relator[syl.start:syl.stop], pres),
                ))
        if not found and free_reduce(relator, pres.slots) != tuple(relator):
            violations.append(RelatorViolation(index, text, "not F-reduced", text))
    return violations


@lru_cache(maxsize=65536)
def omega_length(slot: CyclicSubgroup, omega: frozenset, handle: int, cap: int) -> Optional[int]:
    """
    |h|_{Ω_λ} by breadth-first search inside the subgroup over Ω_λ.

    Returns None when the search exhausts `cap` nodes (inconclusive) or
    when Ω_λ does not reach h.
    """
    if slot.is_identity(handle):
        return 0
    if not omega:
        return None
    steps = sorted(omega, key=slot.sort_key)
    seen = {slot.identity}
    frontier = deque([(slot.identity, 0)])
    while frontier:
        current, dist = frontier.popleft()
        for step in steps:
            nxt = slot.multiply(current, step)
            if nxt == handle:
                return dist + 1
            if nxt not in seen:
                if len(seen) >= cap:
                    logger.debug(f"Ω-BFS in {slot.name} hit cap {cap} looking for {slot.format(handle)}")
                    return None
                seen.add(nxt)
                frontier.append((nxt, dist + 1))
    return None


@dataclass(frozen=True)
class OmegaGenerationReport:
    """Handles of a subgroup ball that Ω_λ did not reach within the BFS cap (inconclusive, never a disproof)."""
    slot: str
    checked: int
    unreached: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.unreached


def omega_generation_check(pres: RelPresentation, omega: OmegaSets, radius: int, cap: int) -> list[OmegaGenerationReport]:
    """Checks that every handle of exponent ≤ `radius` is a product of Ω_λ elements, for every slot with nonempty Ω_λ."""
    reports = []
    for index, slot in enumerate(pres.slots):
        if not omega[index]:
            continue
        handles, _ = slot.ball(radius)
        unreached = tuple(h for h in handles if omega_length(slot, omega[index], h, cap) is None)
        if unreached:
            logger.info(f"Ω-generation check in {slot.name}: {len(unreached)} of {len(handles)} handles unreached within cap {cap}")
        reports.append(OmegaGenerationReport(slot.name, len(handles), unreached))
    return reports
