"""
Alphabets and words over X ∪ 𝓗.

A word is a flat tuple of letters: `Gen(index, sign)` for a generator letter
and `Sub(slot, element)` for a single letter of the subgroup in slot `slot`.
Subgroup elements are opaque handles owned by the slot.
"""
import re
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Optional, Sequence, Union

from app.core.exceptions import UnknownSymbolError


@dataclass(frozen=True, slots=True)
class Gen:
    index: int
    sign: int = 1

    def inverse(self) -> "Gen":
        return Gen(self.index, -self.sign)


@dataclass(frozen=True, slots=True)
class Sub:
    slot: int
    element: Hashable


Letter = Union[Gen, Sub]
Word = tuple  # tuple[Letter, ...]

_POWER = re.compile(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?:\^(?P<exp>[+-]?\d+))?$")


@dataclass(frozen=True)
class CyclicSubgroup:
    """
    A cyclic subgroup slot with integer handles.

    `order == 0` means infinite cyclic; otherwise handles are residues mod `order`.
    `generator` is the internal generator name used inside `@Name(...)` tokens.
    """
    name: str
    generator: str
    order: int = 0

    identity = 0

    def normalize(self, k: int) -> int:
        return k % self.order if self.order else k

    def multiply(self, h1: int, h2: int) -> int:
        return self.normalize(h1 + h2)

    def invert(self, h: int) -> int:
        return self.normalize(-h)

    def power(self, h: int, n: int) -> int:
        return self.normalize(h * n)

    def is_identity(self, h: int) -> bool:
        return self.normalize(h) == 0

    def exponent(self, h: int) -> int:
        """Signed exponent closest to zero; the abelianization value of the handle."""
        h = self.normalize(h)
        if self.order and h > self.order // 2:
            return h - self.order
        return h

    def parse(self, expr: str) -> int:
        total = 0
        for token in expr.split():
            if token == "1":
                continue
            match = _POWER.match(token)
            if not match or match.group("name") != self.generator:
                raise UnknownSymbolError(f"'{token}' is not a power of {self.generator} in subgroup {self.name}")
            total += int(match.group("exp") or 1)
        return self.normalize(total)

    def format(self, h: int) -> str:
        k = self.exponent(h)
        if k == 0:
            return "1"
        return self.generator if k == 1 else f"{self.generator}^{k}"

    def sort_key(self, h: int) -> tuple:
        k = self.exponent(h)
        return (abs(k), k < 0)

    def ball(self, radius: int) -> tuple[list[int], bool]:
        """Non-identity handles of exponent at most `radius`, ordered 1, -1, 2, -2, ...; flag set when the subgroup is exhausted."""
        handles: list[int] = []
        seen = {0}
        for k in range(1, radius + 1):
            for h in (self.normalize(k), self.normalize(-k)):
                if h not in seen:
                    seen.add(h)
                    handles.append(h)
        exhausted = bool(self.order) and len(seen) == self.order
        return handles, exhausted


# ---------------------------------------------------------------------------
# Free-product arithmetic on words
# ---------------------------------------------------------------------------

def interacts(left: Letter, right: Letter) -> bool:
    """True when two adjacent letters cancel or merge under free reduction."""
    if type(left) is Gen:
        return type(right) is Gen and left.index == right.index and left.sign == -right.sign
    return type(right) is Sub and left.slot == right.slot


def free_reduce(word: Iterable[Letter], slots: Sequence[CyclicSubgroup]) -> Word:
    """
    Normal form in the free product F = (∗ H̃_λ) ∗ F(X).

    Adjacent subgroup letters of one slot are multiplied, identity results
    are deleted and inverse generator letters cancel, to a fixpoint.
    """
    stack: list = []
    for letter in word:
        if stack:
            top = stack[-1]
            if type(letter) is Gen:
                if type(top) is Gen and top.index == letter.index and top.sign == -letter.sign:
                    stack.pop()
                    continue
            elif type(top) is Sub and top.slot == letter.slot:
                slot = slots[letter.slot]
                merged = slot.multiply(top.element, letter.element)
                stack.pop()
                if not slot.is_identity(merged):
                    stack.append(Sub(letter.slot, merged))
                continue
        if type(letter) is Sub and slots[letter.slot].is_identity(letter.element):
            continue
        stack.append(letter)
    return tuple(stack)


def invert_letter(letter: Letter, slots: Sequence[CyclicSubgroup]) -> Letter:
    if type(letter) is Gen:
        return Gen(letter.index, -letter.sign)
    return Sub(letter.slot, slots[letter.slot].invert(letter.element))


def invert_word(word: Word, slots: Sequence[CyclicSubgroup]) -> Word:
    """Letter-wise formal inverse."""
    return tuple(invert_letter(letter, slots) for letter in reversed(word))


def is_reduced(word: Word, slots: Sequence[CyclicSubgroup]) -> bool:
    return free_reduce(word, slots) == tuple(word)


def is_cyclically_reduced(word: Word, slots: Sequence[CyclicSubgroup]) -> bool:
    if not is_reduced(word, slots):
        return False
    return len(word) < 2 or not interacts(word[-1], word[0])


def rotations(word: Word) -> Iterator[Word]:
    for i in range(max(len(word), 1)):
        yield word[i:] + word[:i]


def letter_key(letter: Letter, slots: Sequence[CyclicSubgroup]) -> tuple:
    if type(letter) is Gen:
        return (0, letter.index, -letter.sign)
    return (1, letter.slot, slots[letter.slot].sort_key(letter.element))


def cyclic_class_key(word: Word, slots: Sequence[CyclicSubgroup]) -> tuple:
    """Canonical key of the class of `word` under cyclic shifts and inversion."""
    candidates = []
    for w in (tuple(word), invert_word(word, slots)):
        for rot in rotations(w):
            candidates.append(tuple(letter_key(letter, slots) for letter in rot))
    return min(candidates)


@dataclass(frozen=True)
class Syllable:
    """A maximal run of generator letters (slot None) or an H_λ-syllable (slot λ)."""
    start: int
    stop: int
    slot: Optional[int]

    def __len__(self) -> int:
        return self.stop - self.start


def syllables(word: Word) -> tuple[Syllable, ...]:
    """Ordered partition of letter indices into maximal Gen-runs and H_λ-syllables."""
    parts: list[Syllable] = []
    start = 0
    for i in range(1, len(word) + 1):
        if i == len(word) or _syllable_slot(word[i]) != _syllable_slot(word[start]):
            parts.append(Syllable(start, i, _syllable_slot(word[start])))
            start = i
    return tuple(parts)


def _syllable_slot(letter: Letter) -> Optional[int]:
    return letter.slot if type(letter) is Sub else None


def syllable_value(word: Word, syllable: Syllable, slots: Sequence[CyclicSubgroup]) -> int:
    slot = slots[syllable.slot]
    value = slot.identity
    for letter in word[syllable.start:syllable.stop]:
        value = slot.multiply(value, letter.element)
    return value

