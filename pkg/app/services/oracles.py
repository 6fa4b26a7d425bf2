"""
Exact group oracles for the example zoo.

Each oracle owns a canonical element representation (hashable, equal iff the
elements are equal), the images of the generating set X, and one embedding
per subgroup slot. Closed formulas for |g|_X and |g|_{X∪𝓗} are only used
while the generating set is the standard one they were derived for.
"""
import threading
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Hashable, Optional, Sequence

from loguru import logger

from app.core.config import settings
from app.core.exceptions import (
    CapabilityAbsentError,
    CapExceededError,
    ForeignLetterError,
    GroupConfigError,
)
from app.services.words import CyclicSubgroup, Gen, Letter, Sub, Word

Element = Hashable


class GroupOracle(ABC):
    kind = "abstract"

    def __init__(self, slots: Sequence[CyclicSubgroup]):
        self.slots: tuple[CyclicSubgroup, ...] = tuple(slots)
        self.generator_names: tuple[str, ...] = ()
        self.generators: tuple[Element, ...] = ()
        self._lock = threading.Lock()
        self._reset_ball()

    # --- group structure, per concrete group ---

    @property
    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def multiply(self, g: Element, h: Element) -> Element: ...

    @abstractmethod
    def invert(self, g: Element) -> Element: ...

    @abstractmethod
    def embed(self, slot: int, handle: int) -> Element:
        """Image of a subgroup handle in G."""

    @abstractmethod
    def member(self, slot: int, g: Element) -> Optional[int]:
        """The subgroup handle of g when g ∈ H_λ, else None."""

    @abstractmethod
    def coset_key(self, slot: int, g: Element) -> Hashable:
        """Key of the left coset gH_λ."""

    @abstractmethod
    def format_element(self, g: Element) -> str: ...

    # --- optional closed forms ---

    def _x_length_formula(self, g: Element) -> Optional[int]:
        return None

    def _relative_length_formula(self, g: Element) -> Optional[int]:
        return None

    def infinite_order_reason(self, g: Element) -> Optional[str]:
        """A short certificate that g has infinite order, when the group structure provides one."""
        return None

    # --- generating set ---

    def set_generators(self, names: Sequence[str], elements: Sequence[Element]) -> None:
        self.generator_names = tuple(names)
        self.generators = tuple(elements)
        self._reset_ball()

    def add_generator(self, name: str, element: Element) -> None:
        self.set_generators(self.generator_names + (name,), self.generators + (element,))

    def _reset_ball(self) -> None:
        self._layers: list[list[Element]] = [[self.identity]]
        self._parent: dict = {self.identity: None}
        self._depth: dict = {self.identity: 0}

    @property
    def has_exact_relative_length(self) -> bool:
        return self._relative_length_formula(self.identity) is not None

    # --- generic derived operations ---

    def letter_element(self, letter: Letter) -> Element:
        if type(letter) is Gen:
            if not 0 <= letter.index < len(self.generators):
                raise ForeignLetterError(f"generator index {letter.index} is not in X")
            g = self.generators[letter.index]
            return g if letter.sign > 0 else self.invert(g)
        if type(letter) is Sub and 0 <= letter.slot < len(self.slots):
            return self.embed(letter.slot, letter.element)
        raise ForeignLetterError(f"letter {letter!r} is not in the alphabet of this group")

    def normal_form(self, word: Word) -> Element:
        g = self.identity
        for letter in word:
            g = self.multiply(g, self.letter_element(letter))
        return g

    def is_identity(self, g: Element) -> bool:
        return g == self.identity

    def power(self, g: Element, n: int) -> Element:
        base = g if n >= 0 else self.invert(g)
        result = self.identity
        for _ in range(abs(n)):
            result = self.multiply(result, base)
        return result

    def conjugate(self, g: Element, t: Element) -> Element:
        """g^t = t⁻¹ g t."""
        return self.multiply(self.multiply(self.invert(t), g), t)

    def x_length(self, g: Element, cap: Optional[int] = None) -> int:
        """|g|_X, by closed formula when available, otherwise by growing the X-ball until g appears."""
        formula = self._x_length_formula(g)
        if formula is not None:
            return formula
        cap = cap or settings.MAX_BALL_VERTICES
        with self._lock:
            while g not in self._depth:
                if not self._grow_layer(cap):
                    raise GroupConfigError(f"{self.format_element(g)} is not generated by X = {list(self.generator_names)}")
            return self._depth[g]

    def x_geodesic_word(self, g: Element, cap: Optional[int] = None) -> Word:
        """An X-geodesic word for g, read off the breadth-first tree of the ball."""
        cap = cap or settings.MAX_BALL_VERTICES
        with self._lock:
            while g not in self._parent:
                if not self._grow_layer(cap):
                    raise GroupConfigError(f"{self.format_element(g)} is not generated by X = {list(self.generator_names)}")
            letters = []
            current = g
            while self._parent[current] is not None:
                previous, letter = self._parent[current]
                letters.append(letter)
                current = previous
        return tuple(reversed(letters))

    def enumerate_x_ball(self, radius: int, cap: Optional[int] = None) -> list[Element]:
        """
        Elements with |g|_X ≤ radius, breadth-first by X-length, ties by printable form.

        Raises:
            CapExceededError: the ball would exceed `cap` vertices.
        """
        cap = cap or settings.MAX_BALL_VERTICES
        with self._lock:
            while len(self._layers) <= radius:
                if not self._grow_layer(cap):
                    break
            return [g for layer in self._layers[:radius + 1] for g in layer]

    def _grow_layer(self, cap: int) -> bool:
        if not self.generators:
            raise GroupConfigError("X is empty; the X-ball cannot be enumerated")
        frontier = self._layers[-1]
        if not frontier:
            return False
        depth = len(self._layers)
        found: dict = {}
        for g in frontier:
            for index, element in enumerate(self.generators):
                for sign in (1, -1):
                    h = self.multiply(g, element if sign > 0 else self.invert(element))
                    if h in self._depth or h in found:
                        continue
                    found[h] = (g, Gen(index, sign))
        total = len(self._depth) + len(found)
        if total > cap:
            raise CapExceededError("MAX_BALL_VERTICES", cap, f"X-ball of radius {depth} in {self.kind}")
        layer = sorted(found, key=self.format_element)
        for h in layer:
            self._depth[h] = depth
            self._parent[h] = found[h]
        self._layers.append(layer)
        logger.debug(f"{self.kind}: X-sphere of radius {depth} has {len(layer)} elements ({total} in ball)")
        return bool(layer)

    def relative_length_exact(self, g: Element) -> int:
        """
        Exact |g|_{X∪𝓗}.

        Raises:
            CapabilityAbsentError: the oracle has no closed formula for the current generating set.
        """
        value = self._relative_length_formula(g)
        if value is None:
            raise CapabilityAbsentError(f"{self.kind} has no exact relative length for generators {list(self.generator_names)}")
        return value


# ---------------------------------------------------------------------------
# Free groups, optionally relative to cyclic subgroups ⟨w⟩
# ---------------------------------------------------------------------------

def _reduce_letters(letters) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def _format_signed_letters(letters: Sequence[int], names: Sequence[str]) -> str:
    if not letters:
        return "1"
    tokens = []
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        exp = (j - i) * (1 if letters[i] > 0 else -1)
        name = names[abs(letters[i]) - 1]
        tokens.append(name if exp == 1 else f"{name}^{exp}")
        i = j
    return " ".join(tokens)


def is_proper_power(w: Sequence[int]) -> bool:
    n = len(w)
    return any(n % d == 0 and tuple(w) == tuple(w[:d]) * (n // d) for d in range(1, n))


class FreeGroupOracle(GroupOracle):
    """
    F(basis) with elements as reduced tuples of ±(i+1). Slot λ is ⟨w_λ⟩ for
    a cyclically reduced, non-proper-power w_λ.
    """
    kind = "free"

    def __init__(self, basis: Sequence[str], slot_words: Sequence[Sequence[int]], slots: Sequence[CyclicSubgroup]):
        self.basis = tuple(basis)
        self.slot_words = []
        for w in slot_words:
            w = tuple(w)
            if not w or _reduce_letters(w) != w or w[0] == -w[-1]:
                raise GroupConfigError(f"subgroup word {_format_signed_letters(w, self.basis)} must be nonempty and cyclically reduced")
            if is_proper_power(w):
                raise GroupConfigError(f"subgroup word {_format_signed_letters(w, self.basis)} is a proper power; ⟨w⟩ is not malnormal")
            self.slot_words.append(w)
        super().__init__(slots)

    @property
    def identity(self):
        return ()

    def multiply(self, g, h):
        k = 0
        while k < len(g) and k < len(h) and g[-1 - k] == -h[k]:
            k += 1
        return g[:len(g) - k] + h[k:]

    def invert(self, g):
        return tuple(-x for x in reversed(g))

    def embed(self, slot, handle):
        return self.power(self.slot_words[slot], handle)

    def member(self, slot, g):
        w = self.slot_words[slot]
        if len(g) % len(w):
            return None
        k = len(g) // len(w)
        if g == w * k:
            return k
        if g == self.invert(w) * k:
            return -k
        return None

    def coset_key(self, slot, g):
        # Minimal (length, letters) representative of gH over the candidate exponents
        # where the cancellation between g and w^k peaks.
        w = self.slot_words[slot]
        g_inv = self.invert(g)
        candidates = {0}
        for sign, period in ((1, w), (-1, self.invert(w))):
            c = 0
            while c < len(g_inv) and g_inv[c] == period[c % len(period)]:
                c += 1
            candidates.add(sign * (c // len(period)))
            candidates.add(sign * -(-c // len(period)))
        reps = [self.multiply(g, self.power(w, k)) for k in candidates]
        return min(reps, key=lambda r: (len(r), r))

    def format_element(self, g):
        return _format_signed_letters(g, self.basis)

    def _is_standard(self) -> bool:
        return self.generators == tuple((i + 1,) for i in range(len(self.basis)))

    def _x_length_formula(self, g):
        return len(g) if self._is_standard() else None

    def _relative_length_formula(self, g):
        if not self._is_standard():
            return None
        if not self.slot_words:
            return len(g)
        if len(self.slot_words) == 1 and len(self.slot_words[0]) == 1:
            x = abs(self.slot_words[0][0])
            length = 0
            for i, letter in enumerate(g):
                if abs(letter) != x or i == 0 or abs(g[i - 1]) != x:
                    length += 1
            return length
        return None

    def infinite_order_reason(self, g):
        return None if not g else "free groups are torsion-free"


# ---------------------------------------------------------------------------
# ℤ² = ⟨a, b | [a, b]⟩ relative to H = ⟨a⟩
# ---------------------------------------------------------------------------

class ZZOracle(GroupOracle):
    """Elements (m, n) = aᵐbⁿ."""
    kind = "zz"

    @property
    def identity(self):
        return (0, 0)

    def multiply(self, g, h):
        return (g[0] + h[0], g[1] + h[1])

    def invert(self, g):
        return (-g[0], -g[1])

    def embed(self, slot, handle):
        return (handle, 0)

    def member(self, slot, g):
        return g[0] if g[1] == 0 else None

    def coset_key(self, slot, g):
        return g[1]

    def format_element(self, g):
        m, n = g
        parts = [_power_token("a", m), _power_token("b", n)]
        return " ".join(p for p in parts if p) or "1"

    def _x_length_formula(self, g):
        if set(self.generators) == {(1, 0), (0, 1)} and len(self.generators) == 2:
            return abs(g[0]) + abs(g[1])
        return None

    def _relative_length_formula(self, g):
        if (0, 1) in self.generators and set(self.generators) <= {(1, 0), (0, 1)}:
            return abs(g[1]) + (1 if g[0] else 0)
        return None

    def infinite_order_reason(self, g):
        return None if g == (0, 0) else "ℤ² is torsion-free"


def _power_token(name: str, exp) -> str:
    if exp == 0:
        return ""
    return name if exp == 1 else f"{name}^{exp}"


# ---------------------------------------------------------------------------
# Baumslag–Solitar BS(1, n) = ⟨a, t | t⁻¹at = aⁿ⟩ relative to H = ⟨a⟩
# ---------------------------------------------------------------------------

class BaumslagSolitarOracle(GroupOracle):
    """
    Elements (e, q) stand for the affine matrix [[nᵉ, q], [0, 1]] with q ∈ ℤ[1/n].
    a = (0, 1) and t = (-1, 0), so that t⁻¹at = aⁿ.
    """
    kind = "bs"

    def __init__(self, n: int, slots: Sequence[CyclicSubgroup]):
        if n < 2:
            raise GroupConfigError(f"BS(1,n) needs n ≥ 2, got {n}")
        self.n = n
        super().__init__(slots)

    @property
    def identity(self):
        return (0, Fraction(0))

    def _scale(self, e: int) -> Fraction:
        return Fraction(self.n) ** e

    def multiply(self, g, h):
        return (g[0] + h[0], g[1] + self._scale(g[0]) * h[1])

    def invert(self, g):
        return (-g[0], -g[1] * self._scale(-g[0]))

    def embed(self, slot, handle):
        return (0, Fraction(handle))

    def member(self, slot, g):
        if g[0] == 0 and g[1].denominator == 1:
            return int(g[1])
        return None

    def coset_key(self, slot, g):
        return (g[0], g[1] % self._scale(g[0]))

    def normal_form_exponents(self, g) -> tuple[int, int, int]:
        """(p, k, r) with g = tᵖ aᵏ t⁻ʳ, p ≥ 0 minimal and r ≥ 0."""
        e, q = g
        p = max(0, -e)
        while (q * self._scale(p)).denominator != 1:
            p += 1
        return p, int(q * self._scale(p)), e + p

    def format_element(self, g):
        p, k, r = self.normal_form_exponents(g)
        parts = [_power_token("t", p), _power_token("a", k), _power_token("t", -r)]
        return " ".join(x for x in parts if x) or "1"

    def infinite_order_reason(self, g):
        if g == self.identity:
            return None
        return "BS(1,n) is torsion-free"


# ---------------------------------------------------------------------------
# Free products of cyclic groups, relative to the factors
# ---------------------------------------------------------------------------

class FreeProductOracle(GroupOracle):
    """
    ∗ C_{n_i} with order 0 meaning ℤ. Elements are tuples of (factor, exponent)
    syllables with consecutive factors distinct and exponents nonzero
    (reduced mod n_i for finite factors).
    """
    kind = "free_product"

    def __init__(self, factor_names: Sequence[str], orders: Sequence[int], slots: Sequence[CyclicSubgroup]):
        if any(n == 1 or n < 0 for n in orders):
            raise GroupConfigError(f"free product factor orders must be 0 (infinite) or ≥ 2, got {list(orders)}")
        self.factor_names = tuple(factor_names)
        self.orders = tuple(orders)
        super().__init__(slots)

    @property
    def identity(self):
        return ()

    def _norm(self, factor: int, e: int) -> int:
        n = self.orders[factor]
        return e % n if n else e

    def multiply(self, g, h):
        result = list(g)
        for factor, e in h:
            if result and result[-1][0] == factor:
                merged = self._norm(factor, result[-1][1] + e)
                result.pop()
                if merged:
                    result.append((factor, merged))
            else:
                result.append((factor, e))
        return tuple(result)

    def invert(self, g):
        return tuple((f, self._norm(f, -e)) for f, e in reversed(g))

    def embed(self, slot, handle):
        e = self._norm(slot, handle)
        return ((slot, e),) if e else ()

    def member(self, slot, g):
        if not g:
            return 0
        if len(g) == 1 and g[0][0] == slot:
            return g[0][1]
        return None

    def coset_key(self, slot, g):
        if g and g[-1][0] == slot:
            return g[:-1]
        return g

    def _signed(self, factor: int, e: int) -> int:
        n = self.orders[factor]
        return e - n if n and e > n // 2 else e

    def format_element(self, g):
        if not g:
            return "1"
        return " ".join(_power_token(self.factor_names[f], self._signed(f, e)) for f, e in g)

    def _is_standard(self) -> bool:
        return self.generators == tuple(((i, 1),) for i in range(len(self.orders)))

    def _x_length_formula(self, g):
        if not self._is_standard():
            return None
        return sum(abs(self._signed(f, e)) for f, e in g)

    def _relative_length_formula(self, g):
        return len(g) if self._is_standard() else None

    def cyclic_core(self, g) -> tuple:
        """Cyclically reduced conjugate of g."""
        core = list(g)
        while len(core) >= 2 and core[0][0] == core[-1][0]:
            factor = core[0][0]
            merged = self._norm(factor, core[0][1] + core[-1][1])
            core = core[1:-1]
            if merged:
                core = [(factor, merged)] + core
        return tuple(core)

    def infinite_order_reason(self, g):
        core = self.cyclic_core(g)
        if len(core) >= 2:
            return "cyclically reduced free-product normal form has at least two syllables"
        if len(core) == 1 and self.orders[core[0][0]] == 0:
            return f"conjugate into the infinite cyclic factor {self.factor_names[core[0][0]]}"
        return None
