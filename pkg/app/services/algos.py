"""
Bounded decision procedures: word problem, membership, parabolicity,
conjugacy and its symmetric geodesic pairs, translation numbers, orders,
roots, power conjugacy and atomic cycles.

Every radius is a caller-supplied search bound. Answers are tri-state: a
witness that re-verifies through the oracle, a certified negative where the
oracle provides one, or "not found within" the stated caps. Search order is
the X-ball BFS order followed by declaration order, so witnesses are
reproducible.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from loguru import logger

from app.core.config import settings
from app.core.exceptions import ExactnessUnavailableError, OutsideTruncationError, PreconditionError
from app.services.filling import AreaCertificate, AreaFound, DehnTable, null_words, rel_area, scan_alphabet, verify_certificate
from app.services.graph import Path, RelativeMetric
from app.services.oracles import Element, GroupOracle
from app.services.paths import components, connectivity_key
from app.services.presentation import RelPresentation, compute_omega, format_word
from app.services.words import Gen, Sub, Word, free_reduce


@dataclass
class NotFound:
    """No witness within the caps; `reason` names the bound that limited the search."""
    radius: int
    searched: int
    reason: str = "radius"


# ---------------------------------------------------------------------------
# Word problem and membership
# ---------------------------------------------------------------------------

@dataclass
class WordProblemResult:
    status: str  # "trivial" | "nontrivial" | "unknown"
    area: Optional[int] = None
    certificate: Optional[AreaCertificate] = None
    normal_form: Optional[str] = None
    reason: Optional[str] = None
    lower_bound: Optional[int] = None


def generic_word_problem(
    pres: RelPresentation,
    oracle: GroupOracle,
    word: Word,
    max_area: Optional[int] = None,
    max_length: Optional[int] = None,
    max_states: Optional[int] = None,
) -> WordProblemResult:
    """
    Decides w = 1 by filling search, with the oracle's normal form as the
    refutation. A found certificate is replayed before it is returned.
    """
    element = oracle.normal_form(word)
    if not oracle.is_identity(element):
        return WordProblemResult("nontrivial", normal_form=oracle.format_element(element))
    result = rel_area(pres, oracle, word, max_area=max_area, max_length=max_length, max_states=max_states)
    if isinstance(result, AreaFound):
        if not verify_certificate(pres, word, result.certificate):
            raise RuntimeError(f"area certificate for {format_word(word, pres)} failed to replay")
        return WordProblemResult("trivial", area=result.area, certificate=result.certificate)
    return WordProblemResult("unknown", reason=result.reason, lower_bound=result.lower_bound)


@dataclass
class MembershipResult:
    status: str  # "in" | "not-in" | "unknown"
    slot: str
    handle: Optional[str] = None
    mode: str = "oracle"
    radius: Optional[int] = None


def _omega_ball_search(pres: RelPresentation, oracle: GroupOracle, slot: int, g: Element, radius: int, cap: int) -> tuple[Optional[int], bool]:
    """Breadth-first over products of at most `radius` elements of Ω_λ; returns the handle equal to g and whether the ball was completed."""
    sub = pres.slots[slot]
    steps = sorted(compute_omega(pres)[slot], key=sub.sort_key)
    if oracle.is_identity(g):
        return sub.identity, True
    seen = {sub.identity}
    frontier = [sub.identity]
    for _ in range(radius):
        nxt = []
        for current in frontier:
            for step in steps:
                h = sub.multiply(current, step)
                if h in seen:
                    continue
                if oracle.embed(slot, h) == g:
                    return h, True
                if len(seen) >= cap:
                    return None, False
                seen.add(h)
                nxt.append(h)
        frontier = nxt
    return None, True


def membership(
    pres: RelPresentation,
    oracle: GroupOracle,
    slot: int,
    g: Element,
    mode: str = "oracle",
    table: Optional[DehnTable] = None,
    radius: Optional[int] = None,
) -> MembershipResult:
    """
    g ∈ H_λ. The oracle mode asks the group oracle directly. The "omega"
    mode enumerates the H_λ-ball over Ω_λ: up to M·L̂·(|g|_X + 1) when an
    all-exact DehnTable is supplied (a negative answer is then definite),
    otherwise up to the caller's radius (a negative answer is "unknown").
    """
    sub = pres.slots[slot]
    if mode == "oracle":
        h = oracle.member(slot, g)
        if h is None:
            return MembershipResult("not-in", sub.name)
        return MembershipResult("in", sub.name, sub.format(h))
    if mode != "omega":
        raise PreconditionError(f"unknown membership mode {mode!r}")

    definite = False
    slope = table.slope_estimate() if table else None
    if slope is not None and all(row.status == "exact" for row in table.rows):
        radius = int(pres.max_relator_length * slope * (oracle.x_length(g) + 1))
        definite = True
    radius = settings.DEFAULT_RADIUS if radius is None else radius
    h, completed = _omega_ball_search(pres, oracle, slot, g, radius, settings.OMEGA_BFS_CAP)
    if h is not None:
        return MembershipResult("in", sub.name, sub.format(h), mode, radius)
    status = "not-in" if definite and completed else "unknown"
    return MembershipResult(status, sub.name, None, mode, radius)


# ---------------------------------------------------------------------------
# Parabolicity and conjugacy
# ---------------------------------------------------------------------------

@dataclass
class ParabolicWitness:
    t: Element
    slot: int
    image: int
    radius: int


def is_parabolic(oracle: GroupOracle, g: Element, radius: int):
    """First t in the X-ball (BFS order) and slot λ with g^t ∈ H_λ, or NotFound."""
    if radius < 0:
        raise PreconditionError("radius must be non-negative")
    ball = oracle.enumerate_x_ball(radius)
    for t in ball:
        conjugate = oracle.conjugate(g, t)
        for slot in range(len(oracle.slots)):
            h = oracle.member(slot, conjugate)
            if h is not None:
                return ParabolicWitness(t, slot, h, radius)
    return NotFound(radius, len(ball))


@dataclass
class ConjugacyWitness:
    t: Element
    x_length: int
    verified: bool


def conjugate_search(oracle: GroupOracle, f: Element, g: Element, radius: int):
    """First t in the X-ball with f^t = g."""
    ball = oracle.enumerate_x_ball(radius)
    for t in ball:
        if oracle.conjugate(f, t) == g:
            return ConjugacyWitness(t, oracle.x_length(t), True)
    return NotFound(radius, len(ball))


@dataclass
class SymmetricPair:
    t: Element
    relative_length: int
    p: Path
    q: Path
    synchronous: bool


def min_symmetric_pair(metric: RelativeMetric, f: Element, g: Element, radius: int):
    """
    Among conjugators t in the X-ball, one of least |t|_{X∪𝓗} (ties by printable
    form), with the symmetric pair p = [1, t], q = [f, ft] carrying the same
    geodesic label, so p_-^-1 q_- = f and p_+^-1 q_+ = g.
    """
    oracle = metric.oracle
    ball = oracle.enumerate_x_ball(radius)
    best = None
    for t in ball:
        if oracle.conjugate(f, t) != g:
            continue
        try:
            length = metric.length(t)
        except OutsideTruncationError:
            continue
        if not length.exact:
            continue
        key = (length.value, oracle.format_element(t))
        if best is None or key < best[0]:
            best = (key, t)
    if best is None:
        return NotFound(radius, len(ball))
    (length, _), t = best
    word = metric.geodesic_word(t)
    p = Path.build(oracle, oracle.identity, word)
    q = Path.build(oracle, f, word)
    cp1 = synchronous_components(oracle, p, q)
    return SymmetricPair(t, length, p, q, cp1.synchronous)


@dataclass
class ComponentPairing:
    p_component: int
    q_component: int
    same_range: bool


@dataclass
class SynchronousComponents:
    pairs: List[ComponentPairing]

    @property
    def synchronous(self) -> bool:
        return all(pair.same_range for pair in self.pairs)


def synchronous_components(oracle: GroupOracle, p: Path, q: Path) -> SynchronousComponents:
    """Connected cross-components of p and q, and whether each connected pair occupies the same letter range."""
    comps_q = components(q, oracle)
    keys_q: Dict[object, List[int]] = {}
    for index, comp in enumerate(comps_q):
        keys_q.setdefault(connectivity_key(oracle, comp), []).append(index)
    pairs = []
    for i, comp in enumerate(components(p, oracle)):
        for j in keys_q.get(connectivity_key(oracle, comp), []):
            other = comps_q[j]
            pairs.append(ComponentPairing(i, j, (comp.start, comp.stop) == (other.start, other.stop)))
    return SynchronousComponents(pairs)


@dataclass
class SynchronousReport:
    kappa: int
    witness: Optional[int]
    length: int
    endpoint_distances: tuple[int, int]


def synchronous_check(metric: RelativeMetric, p: Path, q: Path) -> SynchronousReport:
    """
    κ̂ = max of d_X(u, v) over interior synchronous vertex pairs of a symmetric
    pair of geodesics. The endpoint pairs are |f|_X and |g|_X and are
    reported separately.

    Raises:
        PreconditionError: the labels differ or a path is not a certified geodesic.
    """
    if p.word != q.word:
        raise PreconditionError("p and q are not a symmetric pair: labels differ")
    for name, path in (("p", p), ("q", q)):
        d = metric.distance(path.start, path.end)
        if not d.exact or d.value != len(path):
            raise PreconditionError(f"{name} is not a certified geodesic")
    oracle = metric.oracle

    def x_dist(i: int) -> int:
        return oracle.x_length(oracle.multiply(oracle.invert(p.vertices[i]), q.vertices[i]))

    kappa, witness = 0, None
    for i in range(1, len(p)):
        d = x_dist(i)
        if witness is None or d > kappa:
            kappa, witness = d, i
    return SynchronousReport(kappa, witness, len(p), (x_dist(0), x_dist(len(p))))


# ---------------------------------------------------------------------------
# Translation numbers and orders
# ---------------------------------------------------------------------------

@dataclass
class TranslationEstimate:
    g: str
    n: int
    terms: List[Fraction] = field(default_factory=list)
    exact: List[bool] = field(default_factory=list)

    @property
    def value(self) -> Fraction:
        return self.terms[-1]


def translation_number(metric: RelativeMetric, g: Element, n: int) -> TranslationEstimate:
    """τ̂_m = min over k ≤ m of |g^k|_{X∪𝓗}/k, for m = 1..n."""
    if n < 1:
        raise PreconditionError("N must be at least 1")
    oracle = metric.oracle
    estimate = TranslationEstimate(oracle.format_element(g), n)
    power = oracle.identity
    best: Optional[Fraction] = None
    for k in range(1, n + 1):
        power = oracle.multiply(power, g)
        try:
            length = metric.length(power)
        except OutsideTruncationError as e:
            raise ExactnessUnavailableError(f"|g^{k}| is outside the window: {e}") from e
        ratio = Fraction(length.value, k)
        best = ratio if best is None else min(best, ratio)
        estimate.terms.append(best)
        estimate.exact.append(length.exact)
    return estimate


@dataclass
class ScalingRow:
    k: int
    power_estimate: Fraction
    scaled_estimate: Fraction

    @property
    def gap(self) -> Fraction:
        return self.power_estimate - self.scaled_estimate


def translation_scaling(metric: RelativeMetric, g: Element, n: int, powers: Sequence[int] = (2, 3)) -> List[ScalingRow]:
    """τ̂_N(g^k) against k·τ̂_{kN}(g); the first is never below the second."""
    rows = []
    for k in powers:
        lhs = translation_number(metric, metric.oracle.power(g, k), n).value
        rhs = k * translation_number(metric, g, k * n).value
        rows.append(ScalingRow(k, lhs, rhs))
    return rows


@dataclass
class OrderResult:
    kind: str  # "finite" | "infinite" | "unknown"
    order: Optional[int] = None
    reason: Optional[str] = None
    cap: Optional[int] = None


def element_order(oracle: GroupOracle, g: Element, cap: int = 64) -> OrderResult:
    if oracle.is_identity(g):
        return OrderResult("finite", 1)
    reason = oracle.infinite_order_reason(g)
    if reason:
        return OrderResult("infinite", reason=reason)
    power = g
    for n in range(2, cap + 1):
        power = oracle.multiply(power, g)
        if oracle.is_identity(power):
            return OrderResult("finite", n)
    return OrderResult("unknown", cap=cap)


@dataclass
class FiniteOrderReport:
    radius: int
    parabolic: List[int]
    hyperbolic: List[int]
    unknown: int


def finite_order_scan(oracle: GroupOracle, radius: int, cap: int = 64) -> FiniteOrderReport:
    """Orders > 1 of finite-order elements in the X-ball, split by whether is_parabolic finds a witness at the same radius."""
    parabolic, hyperbolic = set(), set()
    unknown = 0
    for g in oracle.enumerate_x_ball(radius):
        result = element_order(oracle, g, cap)
        if result.kind == "unknown":
            unknown += 1
        if result.kind != "finite" or result.order == 1:
            continue
        if isinstance(is_parabolic(oracle, g, radius), ParabolicWitness):
            parabolic.add(result.order)
        else:
            hyperbolic.add(result.order)
    return FiniteOrderReport(radius, sorted(parabolic), sorted(hyperbolic), unknown)


# ---------------------------------------------------------------------------
# Roots and power conjugacy
# ---------------------------------------------------------------------------

@dataclass
class RootFound:
    f: Element
    n: int
    t: Element


def root_search(oracle: GroupOracle, g: Element, radius: int, n_max: int):
    """First f ≠ 1 in the X-ball and n in 2..n_max with f^n conjugate to g (conjugator in the same ball)."""
    if n_max < 2:
        raise PreconditionError("n_max must be at least 2")
    ball = oracle.enumerate_x_ball(radius)
    if oracle.is_identity(g):
        return NotFound(radius, 0, "identity has no nontrivial root by convention")
    for f in ball:
        if oracle.is_identity(f):
            continue
        power = f
        for n in range(2, n_max + 1):
            power = oracle.multiply(power, f)
            found = conjugate_search(oracle, power, g, radius)
            if isinstance(found, ConjugacyWitness):
                logger.debug(f"root_search: {oracle.format_element(f)}^{n} ~ {oracle.format_element(g)}")
                return RootFound(f, n, found.t)
    return NotFound(radius, len(ball), "caps")


@dataclass
class PowerConjugacyFound:
    k: int
    l: int
    t: Element


def _exponent_pairs(k_max: int) -> List[tuple[int, int]]:
    values = [k for m in range(1, k_max + 1) for k in (m, -m)]
    pairs = [(k, l) for k in values for l in values]
    return sorted(pairs, key=lambda p: (abs(p[0]) + abs(p[1]), abs(p[0]), p[0] < 0, abs(p[1]), p[1] < 0))


def power_conjugacy_search(oracle: GroupOracle, f: Element, g: Element, k_max: int, radius: int):
    """
    The pair (k, l), least |k| + |l| first, with f^k conjugate to g^l. Powers
    that is_parabolic finds conjugate into a subgroup at the same radius are
    skipped, so the search stays with hyperbolic elements.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be at least 1")
    hyperbolic: Dict[tuple[int, int], bool] = {}

    def is_hyperbolic(which: int, base: Element, k: int) -> bool:
        key = (which, k)
        if key not in hyperbolic:
            hyperbolic[key] = isinstance(is_parabolic(oracle, oracle.power(base, k), radius), NotFound)
        return hyperbolic[key]

    searched = 0
    for k, l in _exponent_pairs(k_max):
        if not is_hyperbolic(0, f, k) or not is_hyperbolic(1, g, l):
            continue
        searched += 1
        found = conjugate_search(oracle, oracle.power(f, k), oracle.power(g, l), radius)
        if isinstance(found, ConjugacyWitness):
            return PowerConjugacyFound(k, l, found.t)
    reason = "caps" if searched else "parabolic powers only"
    return NotFound(radius, searched, reason)


# ---------------------------------------------------------------------------
# Atomic cycles
# ---------------------------------------------------------------------------

@dataclass
class AtomicCycle:
    word: Word
    label: str
    essential: bool


@dataclass
class AtomicSet:
    max_len: int
    sub_radius: int
    cycles: List[AtomicCycle]
    uncertified: int = 0
    capped: bool = True

    @property
    def essential(self) -> List[AtomicCycle]:
        return [c for c in self.cycles if c.essential]


def _identifications(pres: RelPresentation) -> Dict[int, Sub]:
    """Generators that a two-letter relator `@λ(h) x^±1` identifies with a subgroup letter."""
    found: Dict[int, Sub] = {}
    for relator in pres.relators:
        if len(relator) != 2:
            continue
        gens = [letter for letter in relator if type(letter) is Gen]
        subs = [letter for letter in relator if type(letter) is Sub]
        if len(gens) != 1 or len(subs) != 1:
            continue
        gen, sub = gens[0], subs[0]
        slot = pres.slots[sub.slot]
        # relator reads sub·gen^sign = 1, so gen = sub^(-sign)
        handle = sub.element if gen.sign < 0 else slot.invert(sub.element)
        found.setdefault(gen.index, Sub(sub.slot, handle))
    return found


def is_f_trivial(pres: RelPresentation, word: Word) -> bool:
    """True when the word reduces to 1 once identified generators are replaced by their subgroup letters."""
    identify = _identifications(pres)
    rewritten = []
    for letter in word:
        if type(letter) is Gen and letter.index in identify:
            sub = identify[letter.index]
            if letter.sign < 0:
                sub = Sub(sub.slot, pres.slots[sub.slot].invert(sub.element))
            rewritten.append(sub)
        else:
            rewritten.append(letter)
    return not free_reduce(rewritten, pres.slots)


def _is_atomic(metric: RelativeMetric, path: Path) -> bool:
    n = len(path)
    half = n // 2
    for i in range(n):
        for m in range(1, half + 1):
            u = path.vertices[i]
            v = path.vertices[(i + m) % n]
            d = metric.distance(u, v)
            if not d.exact:
                raise ExactnessUnavailableError("uncertified subpath distance")
            if d.value != m:
                return False
    return True


def enumerate_atomic_cycles(metric: RelativeMetric, max_len: int, sub_radius: Optional[int] = None) -> AtomicSet:
    """
    Reduced null words of length ≤ max_len (Sub letters from each slot's ball of
    radius `sub_radius`), one per cyclic-shift-and-inverse class, whose every
    cyclic subpath of at most half the length is a geodesic. Each is tagged
    essential unless it is F-trivial.
    """
    pres, oracle = metric.pres, metric.oracle
    sub_radius = settings.DEFAULT_RADIUS if sub_radius is None else sub_radius
    letters, exhausted = scan_alphabet(pres, sub_radius)
    result = AtomicSet(max_len, sub_radius, [], capped=not exhausted)
    for length in range(1, max_len + 1):
        for word in null_words(pres, oracle, length, letters):
            path = Path.build(oracle, oracle.identity, word)
            try:
                if not _is_atomic(metric, path):
                    continue
            except (ExactnessUnavailableError, OutsideTruncationError):
                result.uncertified += 1
                continue
            result.cycles.append(AtomicCycle(word, format_word(word, pres), not is_f_trivial(pres, word)))
    logger.info(
        f"enumerate_atomic_cycles: {len(result.cycles)} atomic cycles up to length {max_len}, "
        f"{len(result.essential)} essential, {result.uncertified} uncertified"
    )
    return result
