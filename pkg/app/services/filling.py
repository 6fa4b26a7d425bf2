"""
Relative area by relator-insertion search over F-normal forms.

A state is a null word in F-normal form. One move inserts a symmetrized
relator at a position and free-reduces, so a move sequence of length k is an
expression W =_F ∏ f_i⁻¹ R_i f_i with k factors. The search is A* over that
move graph with two admissible lower bounds (Ω-mass of isolated components
and abelianization), so the first goal popped has minimal area within the
caps. Moves are restricted to insertions whose relator cancels or merges with
a neighbouring letter; results record that restriction.
"""
import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Union

from loguru import logger

from app.core.config import settings
from app.core.exceptions import PreconditionError
from app.services.graph import Path
from app.services.oracles import GroupOracle
from app.services.paths import ComponentReport
from app.services.presentation import RelPresentation, compute_omega, format_word, omega_length
from app.services.words import (
    Gen,
    Letter,
    Sub,
    Word,
    cyclic_class_key,
    free_reduce,
    interacts,
    syllable_value,
    syllables,
)


@dataclass(frozen=True)
class CertificateStep:
    relator: int   # index into the symmetrized relator set
    position: int  # insertion position in the current F-normal form


@dataclass(frozen=True)
class AreaCertificate:
    start: Word
    steps: tuple[CertificateStep, ...]
    final: Word = ()

    @property
    def area(self) -> int:
        return len(self.steps)


@dataclass
class AreaFound:
    area: int
    certificate: AreaCertificate
    expanded: int
    interacting_only: bool = True


@dataclass
class AreaNotFound:
    max_area: int
    lower_bound: int
    expanded: int
    reason: str  # "max_area" | "max_length" | "max_states" | "infeasible"
    interacting_only: bool = True


AreaResult = Union[AreaFound, AreaNotFound]


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class AreaLowerBound:
    """
    Admissible lower bound on the relative area of a null word: the maximum of
    the Ω-mass bound and the abelianization bounds. None marks a word no
    relator sequence can fill.
    """

    def __init__(self, pres: RelPresentation, oracle: GroupOracle, omega_cap: Optional[int] = None):
        self.pres = pres
        self.oracle = oracle
        self.omega = compute_omega(pres)
        self.omega_cap = omega_cap or settings.OMEGA_BFS_CAP
        self.sub_per_relator = pres.max_sub_letters
        n_gens, n_slots = len(pres.generator_names), len(pres.slots)
        self.gen_step = [0] * n_gens
        self.slot_step = [0] * n_slots
        for relator in pres.relators:
            gen_sum, slot_sum = self._exponent_sums(relator)
            for i in range(n_gens):
                self.gen_step[i] = max(self.gen_step[i], abs(gen_sum[i]))
            for s in range(n_slots):
                self.slot_step[s] = max(self.slot_step[s], self._residue_size(s, slot_sum[s]))

    def _exponent_sums(self, word: Word) -> tuple[List[int], List[int]]:
        gen_sum = [0] * len(self.pres.generator_names)
        slot_sum = [0] * len(self.pres.slots)
        for letter in word:
            if type(letter) is Gen:
                gen_sum[letter.index] += letter.sign
            else:
                slot_sum[letter.slot] += self.pres.slots[letter.slot].exponent(letter.element)
        return gen_sum, slot_sum

    def _residue_size(self, slot: int, total: int) -> int:
        order = self.pres.slots[slot].order
        if not order:
            return abs(total)
        r = total % order
        return min(r, order - r)

    def omega_mass(self, word: Word) -> int:
        """Σ of Ω_λ-lengths of isolated components of the cycle read from 1; unreachable values count 0."""
        oracle = self.oracle
        vertices = Path.build(oracle, oracle.identity, word).vertices
        parts = []
        counts: Dict[object, int] = {}
        for syl in syllables(word):
            if syl.slot is None:
                continue
            key = (syl.slot, oracle.coset_key(syl.slot, vertices[syl.start]))
            counts[key] = counts.get(key, 0) + 1
            parts.append((key, syl))
        total = 0
        for key, syl in parts:
            if counts[key] != 1:
                continue
            slot = self.pres.slots[syl.slot]
            value = syllable_value(word, syl, self.pres.slots)
            length = omega_length(slot, self.omega[syl.slot], value, self.omega_cap)
            total += length or 0
        return total

    def __call__(self, word: Word) -> Optional[int]:
        if not word:
            return 0
        bound = 1
        gen_sum, slot_sum = self._exponent_sums(word)
        for total, step in zip(gen_sum, self.gen_step):
            if total:
                if not step:
                    return None
                bound = max(bound, _ceil_div(abs(total), step))
        for s, total in enumerate(slot_sum):
            size = self._residue_size(s, total)
            if size:
                if not self.slot_step[s]:
                    return None
                bound = max(bound, _ceil_div(size, self.slot_step[s]))
        if self.sub_per_relator:
            bound = max(bound, _ceil_div(self.omega_mass(word), self.sub_per_relator))
        return bound


def _moves(pres: RelPresentation, word: Word, interacting_only: bool) -> Iterator[tuple[int, int, Word]]:
    for index, relator in enumerate(pres.symmetrized):
        for position in range(len(word) + 1):
            if interacting_only:
                left = position > 0 and interacts(word[position - 1], relator[0])
                right = position < len(word) and interacts(relator[-1], word[position])
                if not (left or right):
                    continue
            yield index, position, free_reduce(word[:position] + relator + word[position:], pres.slots)


def rel_area(
    pres: RelPresentation,
    oracle: GroupOracle,
    word: Word,
    max_area: Optional[int] = None,
    max_length: Optional[int] = None,
    max_states: Optional[int] = None,
    interacting_only: bool = True,
    bound: Optional[AreaLowerBound] = None,
) -> AreaResult:
    """
    Minimal number of relator applications reducing `word` to the empty word.

    Args:
        max_area: Largest area searched (settings.DEFAULT_MAX_AREA by default).
        max_length: Cap on intermediate word length (default 2‖w‖ + 2M).
        max_states: Cap on expanded states.

    Returns:
        AreaFound with a replayable certificate, or AreaNotFound naming the cap that bounded the search.

    Raises:
        PreconditionError: a cap is not positive.
    """
    max_area = settings.DEFAULT_MAX_AREA if max_area is None else max_area
    start = free_reduce(word, pres.slots)
    max_length = max_length if max_length is not None else 2 * len(start) + 2 * pres.max_relator_length
    max_states = max_states or settings.MAX_SEARCH_STATES
    if max_area <= 0 or max_length <= 0 or max_states <= 0:
        raise PreconditionError("filling caps must be positive")
    if not start:
        return AreaFound(0, AreaCertificate((), ()), 0, interacting_only)

    bound = bound or AreaLowerBound(pres, oracle)
    h0 = bound(start)
    if h0 is None:
        return AreaNotFound(max_area, 0, 0, "infeasible", interacting_only)
    if h0 > max_area:
        return AreaNotFound(max_area, h0, 0, "max_area", interacting_only)

    logger.debug(f"rel_area: start {format_word(start, pres)} (lower bound {h0}, max_area {max_area}, max_length {max_length})")
    counter = itertools.count()
    best: Dict[Word, int] = {start: 0}
    parent: Dict[Word, tuple[Word, int, int]] = {}
    heuristic: Dict[Word, int] = {start: h0}
    frontier = [(h0, 0, next(counter), start)]
    expanded = 0
    length_cut = False

    while frontier:
        _, neg_g, _, state = heapq.heappop(frontier)
        g = -neg_g
        if g > best.get(state, g):
            continue
        if not state:
            steps = []
            node = state
            while node in parent:
                previous, relator, position = parent[node]
                steps.append(CertificateStep(relator, position))
                node = previous
            certificate = AreaCertificate(start, tuple(reversed(steps)))
            logger.debug(f"rel_area: area {g} after {expanded} expansions")
            return AreaFound(g, certificate, expanded, interacting_only)
        expanded += 1
        if expanded > max_states:
            logger.info(f"rel_area: state cap {max_states} reached for {format_word(start, pres)}")
            return AreaNotFound(max_area, h0, expanded, "max_states", interacting_only)
        for relator, position, nxt in _moves(pres, state, interacting_only):
            if len(nxt) > max_length:
                length_cut = True
                continue
            g_next = g + 1
            if g_next >= best.get(nxt, math.inf):
                continue
            h = heuristic.get(nxt)
            if h is None:
                if nxt in heuristic:
                    continue
                h = bound(nxt)
                heuristic[nxt] = h
                if h is None:
                    continue
            if g_next + h > max_area:
                continue
            best[nxt] = g_next
            parent[nxt] = (state, relator, position)
            heapq.heappush(frontier, (g_next + h, -g_next, next(counter), nxt))

    if length_cut:
        return AreaNotFound(max_area, h0, expanded, "max_length", interacting_only)
    return AreaNotFound(max_area, max_area + 1, expanded, "max_area", interacting_only)


def verify_certificate(pres: RelPresentation, word: Word, certificate: AreaCertificate) -> bool:
    """Replays the steps exactly; true iff start = free_reduce(w) and the replay ends empty."""
    if certificate.start != free_reduce(word, pres.slots):
        return False
    current = certificate.start
    for step in certificate.steps:
        if not 0 <= step.relator < len(pres.symmetrized):
            return False
        if not 0 <= step.position <= len(current):
            return False
        relator = pres.symmetrized[step.relator]
        current = free_reduce(current[:step.position] + relator + current[step.position:], pres.slots)
    return current == () and certificate.final == ()


# ---------------------------------------------------------------------------
# Dehn-function scans
# ---------------------------------------------------------------------------

@dataclass
class DehnRow:
    n: int
    area: int
    status: str  # "exact" | "lower-bound" | "cap-hit" | "unbounded-evidence"
    words: int
    witness: Optional[str] = None


@dataclass
class DehnTable:
    rows: List[DehnRow]
    caps: Dict[str, object] = field(default_factory=dict)

    def slope_estimate(self) -> Optional[Fraction]:
        """L̂ = max over exact rows with n ≥ 1 of δ̂(n)/n."""
        ratios = [Fraction(row.area, row.n) for row in self.rows if row.status == "exact" and row.n > 0]
        return max(ratios) if ratios else None


def scan_alphabet(pres: RelPresentation, sub_radius: int) -> tuple[List[Letter], bool]:
    """Generator letters, then Sub letters with handles in each slot's ball; flag set when every slot ball was exhausted."""
    letters: List[Letter] = [Gen(i, sign) for i in range(len(pres.generator_names)) for sign in (1, -1)]
    exhausted = True
    for index, slot in enumerate(pres.slots):
        handles, done = slot.ball(sub_radius)
        exhausted = exhausted and done
        letters.extend(Sub(index, h) for h in handles)
    return letters, exhausted


def null_words(pres: RelPresentation, oracle: GroupOracle, length: int, letters: Sequence[Letter]) -> List[Word]:
    """Cyclically reduced null words of exactly `length` letters, one per cyclic-shift-and-inverse class."""
    seen = set()
    found: List[Word] = []
    images = {letter: oracle.letter_element(letter) for letter in letters}
    prune = oracle.has_exact_relative_length
    stack = [((), oracle.identity)]
    while stack:
        word, element = stack.pop()
        if len(word) == length:
            if oracle.is_identity(element) and (length < 2 or not interacts(word[-1], word[0])):
                key = cyclic_class_key(word, pres.slots)
                if key not in seen:
                    seen.add(key)
                    found.append(word)
            continue
        remaining = length - len(word) - 1
        for letter in reversed(letters):
            if word and interacts(word[-1], letter):
                continue
            nxt = oracle.multiply(element, images[letter])
            # every letter has relative length 1, so a prefix too far from 1 cannot close up
            if prune and oracle.relative_length_exact(nxt) > remaining:
                continue
            stack.append((word + (letter,), nxt))
    return found


def dehn_scan(
    pres: RelPresentation,
    oracle: GroupOracle,
    n_max: int,
    max_area: Optional[int] = None,
    sub_radius: Optional[int] = None,
    max_states: Optional[int] = None,
    threshold: Optional[int] = None,
) -> DehnTable:
    """
    δ̂(n) for n = 0..n_max over null words of length ≤ n whose Sub letters lie in
    the per-slot ball of radius `sub_radius`.

    Row status, highest precedence first: "unbounded-evidence" (δ̂ above the
    threshold while some subgroup ball is not exhausted, so a larger ball can
    still raise it), "lower-bound" (some word exceeded the search caps), "cap-hit"
    (some subgroup ball was not exhausted), "exact".
    """
    max_area = max_area or settings.DEFAULT_MAX_AREA
    sub_radius = settings.DEFAULT_RADIUS if sub_radius is None else sub_radius
    threshold = settings.DEHN_UNBOUNDED_THRESHOLD if threshold is None else threshold
    letters, exhausted = scan_alphabet(pres, sub_radius)
    bound = AreaLowerBound(pres, oracle)
    caps = {"max_area": max_area, "sub_radius": sub_radius, "threshold": threshold, "max_states": max_states or settings.MAX_SEARCH_STATES}
    logger.info(f"dehn_scan: n_max={n_max}, {len(letters)} letters, caps {caps}")

    rows = [DehnRow(0, 0, "exact", 0)]
    area, witness, lower = 0, None, False
    for n in range(1, n_max + 1):
        words = null_words(pres, oracle, n, letters)
        for word in words:
            result = rel_area(pres, oracle, word, max_area=max_area, max_states=max_states, bound=bound)
            if isinstance(result, AreaFound):
                value = result.area
            else:
                lower = True
                value = result.lower_bound
            if value > area:
                area, witness = value, format_word(word, pres)
        if area > threshold and not exhausted:
            status = "unbounded-evidence"
        elif lower:
            status = "lower-bound"
        elif not exhausted:
            status = "cap-hit"
        else:
            status = "exact"
        rows.append(DehnRow(n, area, status, len(words), witness))
        logger.debug(f"dehn_scan: n={n} δ̂={area} status={status} over {len(words)} null words")
    logger.info(f"dehn_scan: done, δ̂({n_max}) = {area}")
    return DehnTable(rows, caps)


# ---------------------------------------------------------------------------
# Component bounds on filled cycles
# ---------------------------------------------------------------------------

@dataclass
class OmegaBoundResult:
    total: int
    bound: int
    holds: bool
    inconclusive: List[int]

    @property
    def slack(self) -> int:
        return self.bound - self.total


def omega_bound_check(pres: RelPresentation, cycle: Path, report: ComponentReport, area: int, cap: Optional[int] = None) -> OmegaBoundResult:
    """Σ |φ(p_i)|_{Ω_λ} over isolated components p_i of the cycle, against M·area."""
    if cycle.start != cycle.end:
        raise PreconditionError("omega_bound_check needs a closed cycle")
    omega = compute_omega(pres)
    cap = cap or settings.OMEGA_BFS_CAP
    total = 0
    inconclusive = []
    for index, (component, isolated) in enumerate(zip(report.components, report.isolated)):
        if not isolated:
            continue
        length = omega_length(pres.slots[component.slot], omega[component.slot], component.value, cap)
        if length is None:
            inconclusive.append(index)
        else:
            total += length
    bound = pres.max_relator_length * area
    return OmegaBoundResult(total, bound, total <= bound and not inconclusive, inconclusive)


@dataclass
class XSpanBoundResult:
    total: int
    bound: Fraction
    holds: bool


def x_span_bound_check(pres: RelPresentation, cycle: Path, report: ComponentReport, slope: Fraction) -> XSpanBoundResult:
    """Σ x_span over isolated components ≤ M·L̂·l(q)."""
    total = sum(c.x_span for c, isolated in zip(report.components, report.isolated) if isolated)
    bound = pres.max_relator_length * Fraction(slope) * len(cycle)
    return XSpanBoundResult(total, bound, total <= bound)
