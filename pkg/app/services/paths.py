"""
Component calculus on paths in Γ(G, X∪𝓗).

A component is the subpath read along one H_λ-syllable. Two components are
connected when their endpoints lie in one left coset of H_λ, which is tested
by hashing (λ, coset_key(λ, s_-)).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence

from app.core.exceptions import ExactnessUnavailableError
from app.services.graph import Path, RelativeMetric
from app.services.oracles import Element, GroupOracle
from app.services.words import Sub, Syllable, Word, syllable_value, syllables


@dataclass(frozen=True)
class Component:
    slot: int
    start: int
    stop: int
    s_minus: Element
    s_plus: Element
    value: int
    x_span: int


@dataclass
class ComponentReport:
    components: List[Component]
    classes: List[List[int]]
    isolated: List[bool]
    backtracking: bool
    phase_vertices: List[int]
    keys: List[Hashable] = field(default_factory=list)


def components(path: Path, oracle: GroupOracle) -> List[Component]:
    found = []
    for syl in syllables(path.word):
        if syl.slot is None:
            continue
        value = syllable_value(path.word, syl, oracle.slots)
        s_minus, s_plus = path.vertices[syl.start], path.vertices[syl.stop]
        x_span = oracle.x_length(oracle.multiply(oracle.invert(s_minus), s_plus))
        found.append(Component(syl.slot, syl.start, syl.stop, s_minus, s_plus, value, x_span))
    return found


def connectivity_key(oracle: GroupOracle, component: Component) -> Hashable:
    return (component.slot, oracle.coset_key(component.slot, component.s_minus))


def analyze(path: Path, oracle: GroupOracle) -> ComponentReport:
    """Components, connectivity classes, isolation, backtracking and phase vertices of a path."""
    comps = components(path, oracle)
    keys = [connectivity_key(oracle, c) for c in comps]
    by_key: Dict[Hashable, List[int]] = {}
    for index, key in enumerate(keys):
        by_key.setdefault(key, []).append(index)
    classes = list(by_key.values())
    isolated = [len(by_key[key]) == 1 for key in keys]
    inner = {v for c in comps for v in range(c.start + 1, c.stop)}
    phase = [v for v in range(len(path.vertices)) if v not in inner]
    return ComponentReport(comps, classes, isolated, any(len(c) > 1 for c in classes), phase, keys)


def pooled_classes(oracle: GroupOracle, paths: Sequence[Path]) -> Dict[Hashable, List[tuple[int, int]]]:
    """Cross-path connectivity: (path index, component index) pairs grouped by (λ, coset)."""
    pooled: Dict[Hashable, List[tuple[int, int]]] = {}
    for p_index, path in enumerate(paths):
        for c_index, comp in enumerate(components(path, oracle)):
            pooled.setdefault(connectivity_key(oracle, comp), []).append((p_index, c_index))
    return pooled


def _merge_components(word: Word, oracle: GroupOracle) -> Word:
    """One Sub letter per non-identity component; identity-valued components are left as they are."""
    rebuilt: List = []
    for syl in syllables(word):
        if syl.slot is None or len(syl) == 1:
            rebuilt.extend(word[syl.start:syl.stop])
            continue
        value = syllable_value(word, syl, oracle.slots)
        if oracle.slots[syl.slot].is_identity(value):
            rebuilt.extend(word[syl.start:syl.stop])
        else:
            rebuilt.append(Sub(syl.slot, value))
    return tuple(rebuilt)


def _identity_components(word: Word, oracle: GroupOracle) -> List[Syllable]:
    return [
        syl for syl in syllables(word)
        if syl.slot is not None and oracle.slots[syl.slot].is_identity(syllable_value(word, syl, oracle.slots))
    ]


def locally_minimal(path: Path, oracle: GroupOracle) -> Path:
    """
    Replaces every component by one letter of equal value.

    An identity-valued component has no one-letter form. It is deleted only
    when the connectivity-class count and backtracking status of the result
    match those of the input; otherwise it is kept unchanged and the output
    is not reducible any further. Endpoints and the set of phase vertices are
    preserved.
    """
    reference = analyze(path, oracle)
    target = (len(reference.classes), reference.backtracking)
    word = _merge_components(path.word, oracle)
    tried = 0
    while True:
        candidates = _identity_components(word, oracle)
        if tried >= len(candidates):
            break
        syl = candidates[tried]
        shorter = _merge_components(word[:syl.start] + word[syl.stop:], oracle)
        trial = analyze(Path.build(oracle, path.base, shorter), oracle)
        if (len(trial.classes), trial.backtracking) == target:
            word, tried = shorter, 0
        else:
            tried += 1
    if word == path.word:
        return path
    return Path.build(oracle, path.base, word)


@dataclass
class PathClass:
    is_geodesic: bool
    lam: Fraction
    c: Fraction
    is_quasi_geodesic: bool
    local_k: int
    delta: Optional[Fraction] = None
    lemma_lambda: Optional[Fraction] = None
    lemma_c: Optional[Fraction] = None
    lemma_holds: Optional[bool] = None


def _exact_distance(metric: RelativeMetric, g: Element, h: Element) -> int:
    result = metric.distance(g, h)
    if not result.exact:
        raise ExactnessUnavailableError(
            f"distance {metric.oracle.format_element(g)} → {metric.oracle.format_element(h)} is only bounded by {result.value}"
        )
    return result.value


def is_quasi_geodesic(path: Path, metric: RelativeMetric, lam: Fraction, c: Fraction) -> bool:
    """l(q) ≤ λ·dist(q_-, q_+) + c for every subpath q."""
    n = len(path)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if j - i > lam * _exact_distance(metric, path.vertices[i], path.vertices[j]) + c:
                return False
    return True


def classify(path: Path, metric: RelativeMetric, lam, c, delta=None) -> PathClass:
    """
    Geodesic and quasi-geodesic status of a path, its maximal k with every
    subpath of length ≤ k geodesic, and the k-local bound check when k > 8δ.

    Raises:
        ExactnessUnavailableError: some subpath distance is not certified.
    """
    lam, c = Fraction(lam), Fraction(c)
    n = len(path)
    geodesic_upto = n
    for length in range(1, n + 1):
        if any(_exact_distance(metric, path.vertices[i], path.vertices[i + length]) != length for i in range(n - length + 1)):
            geodesic_upto = length - 1
            break
    result = PathClass(
        is_geodesic=geodesic_upto == n,
        lam=lam,
        c=c,
        is_quasi_geodesic=is_quasi_geodesic(path, metric, lam, c),
        local_k=geodesic_upto,
    )
    if delta is not None:
        delta = Fraction(delta)
        result.delta = delta
        k = geodesic_upto
        if k > 8 * delta:
            result.lemma_lambda = (k + 4 * delta) / (k - 4 * delta)
            result.lemma_c = 2 * delta
            result.lemma_holds = is_quasi_geodesic(path, metric, result.lemma_lambda, result.lemma_c)
    return result


def k_similar(p: Path, q: Path, oracle: GroupOracle, k: int) -> bool:
    """max(d_X(p_-, q_-), d_X(p_+, q_+)) ≤ k."""
    d_start = oracle.x_length(oracle.multiply(oracle.invert(p.start), q.start))
    d_end = oracle.x_length(oracle.multiply(oracle.invert(p.end), q.end))
    return max(d_start, d_end) <= k
