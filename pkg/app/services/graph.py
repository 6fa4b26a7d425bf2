"""
The relative Cayley graph Γ(G, X∪𝓗) as an implicit object.

Distances are computed for g⁻¹h from the identity (left-invariance). A value
is certified exact by a closed formula, by the direct edge tests (0 and 1),
or when a truncated-graph bound of 2 follows a failed edge test; every other
truncated-graph value is an upper bound only.
"""
import threading
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional

import networkx as nx
from loguru import logger

from app.core.config import settings
from app.core.exceptions import ExactnessUnavailableError, OutsideTruncationError
from app.services.oracles import Element, GroupOracle
from app.services.presentation import RelPresentation
from app.services.words import Gen, Letter, Sub, Word


@dataclass(frozen=True)
class Path:
    """A based edge path; vertices[i] is the vertex after reading word[:i]."""
    base: Element
    word: Word
    vertices: tuple

    @classmethod
    def build(cls, oracle: GroupOracle, base: Element, word: Word) -> "Path":
        vertices = [base]
        for letter in word:
            vertices.append(oracle.multiply(vertices[-1], oracle.letter_element(letter)))
        return cls(base, tuple(word), tuple(vertices))

    @property
    def start(self) -> Element:
        return self.vertices[0]

    @property
    def end(self) -> Element:
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.word)

    def subpath(self, i: int, j: int) -> "Path":
        return Path(self.vertices[i], self.word[i:j], self.vertices[i:j + 1])


@dataclass(frozen=True)
class DistanceResult:
    value: int
    exact: bool
    radius: int


class TruncatedGraph:
    """
    The subgraph of Γ(G, X∪𝓗) induced on the X-ball of radius R, with coset
    cliques stored as partitions of the vertex list.
    """

    def __init__(self, oracle: GroupOracle, radius: int, vertices: List[Element]):
        self.oracle = oracle
        self.radius = radius
        self.vertices = vertices
        self.index: Dict[Element, int] = {g: i for i, g in enumerate(vertices)}
        self.x_edges: List[tuple[int, Gen, int]] = []
        self.cosets: List[Dict[object, List[int]]] = []
        self.vertex_coset: List[List[object]] = []
        self._bounds: Optional[List[int]] = None

        for i, g in enumerate(vertices):
            for gen_index, element in enumerate(oracle.generators):
                h = oracle.multiply(g, element)
                j = self.index.get(h)
                if j is not None:
                    self.x_edges.append((i, Gen(gen_index, 1), j))
        for slot in range(len(oracle.slots)):
            partition: Dict[object, List[int]] = {}
            keys = []
            for i, g in enumerate(vertices):
                key = oracle.coset_key(slot, g)
                partition.setdefault(key, []).append(i)
                keys.append(key)
            self.cosets.append(partition)
            self.vertex_coset.append(keys)

        self._adjacency: List[List[int]] = [[] for _ in vertices]
        for i, _, j in self.x_edges:
            self._adjacency[i].append(j)
            self._adjacency[j].append(i)

    def __contains__(self, g: Element) -> bool:
        return g in self.index

    def bounds_from_identity(self) -> List[int]:
        """Breadth-first distances from 1 inside the window; each coset clique is expanded once."""
        if self._bounds is not None:
            return self._bounds
        n = len(self.vertices)
        dist = [-1] * n
        start = self.index[self.oracle.identity]
        dist[start] = 0
        expanded = [set() for _ in self.cosets]
        queue = deque([start])
        while queue:
            i = queue.popleft()
            step = dist[i] + 1
            neighbours = list(self._adjacency[i])
            for slot, partition in enumerate(self.cosets):
                key = self.vertex_coset[slot][i]
                if key not in expanded[slot]:
                    expanded[slot].add(key)
                    neighbours.extend(partition[key])
            for j in neighbours:
                if dist[j] < 0:
                    dist[j] = step
                    queue.append(j)
        self._bounds = dist
        return dist


def truncate(pres: RelPresentation, oracle: GroupOracle, radius: int, cap: Optional[int] = None) -> TruncatedGraph:
    """
    Materializes the X-ball of radius R with its X-edges and coset cliques.

    Raises:
        CapExceededError: the ball exceeds the vertex cap.
    """
    vertices = oracle.enumerate_x_ball(radius, cap or settings.MAX_BALL_VERTICES)
    graph = TruncatedGraph(oracle, radius, vertices)
    logger.debug(f"truncated Γ at radius {radius}: {len(vertices)} vertices, {len(graph.x_edges)} X-edges")
    return graph


class RelativeMetric:
    """
    dist_{X∪𝓗} for one group, with a lazily built truncation window and
    memoized lengths and geodesic words.
    """

    def __init__(self, pres: RelPresentation, oracle: GroupOracle, radius: Optional[int] = None, cap: Optional[int] = None):
        self.pres = pres
        self.oracle = oracle
        self.radius = settings.DEFAULT_RADIUS if radius is None else radius
        self.cap = cap or settings.MAX_BALL_VERTICES
        self._graph: Optional[TruncatedGraph] = None
        self._lengths: Dict[Element, DistanceResult] = {}
        self._geodesics: Dict[Element, Word] = {}
        self._lock = threading.RLock()

    @property
    def graph(self) -> TruncatedGraph:
        with self._lock:
            if self._graph is None:
                self._graph = truncate(self.pres, self.oracle, self.radius, self.cap)
            return self._graph

    def _edge_length(self, g: Element) -> Optional[int]:
        oracle = self.oracle
        if oracle.is_identity(g):
            return 0
        if g in oracle.generators or oracle.invert(g) in oracle.generators:
            return 1
        if any(oracle.member(slot, g) is not None for slot in range(len(oracle.slots))):
            return 1
        return None

    def length(self, g: Element) -> DistanceResult:
        """|g|_{X∪𝓗} with its exactness flag."""
        with self._lock:
            cached = self._lengths.get(g)
        if cached is not None:
            return cached
        oracle = self.oracle
        if oracle.has_exact_relative_length:
            result = DistanceResult(oracle.relative_length_exact(g), True, self.radius)
        elif not oracle.slots:
            result = DistanceResult(oracle.x_length(g, self.cap), True, self.radius)
        else:
            edge = self._edge_length(g)
            if edge is not None:
                result = DistanceResult(edge, True, self.radius)
            else:
                graph = self.graph
                if g not in graph:
                    raise OutsideTruncationError(f"{oracle.format_element(g)} lies outside the X-ball of radius {self.radius}")
                bound = graph.bounds_from_identity()[graph.index[g]]
                result = DistanceResult(bound, bound <= 2, self.radius)
        with self._lock:
            self._lengths[g] = result
        return result

    def upper_bound(self, g: Element) -> Optional[int]:
        """An upper bound for |g|_{X∪𝓗}, or None when g is outside the window."""
        try:
            return self.length(g).value
        except OutsideTruncationError:
            return None

    def distance(self, g: Element, h: Element) -> DistanceResult:
        return self.length(self.oracle.multiply(self.oracle.invert(g), h))

    def candidate_letters(self, remaining: Element) -> List[Letter]:
        """
        Letters in geodesic tie-break order: X letters (declaration order, + before -),
        then H letters by slot and by handle (1, -1, 2, -2, ...). Handles come from the
        subgroup ball plus the coset exits of `remaining` one X letter before its end.
        """
        oracle = self.oracle
        letters: List[Letter] = [Gen(i, sign) for i in range(len(oracle.generators)) for sign in (1, -1)]
        tails = [oracle.identity] + [g for g in oracle.generators] + [oracle.invert(g) for g in oracle.generators]
        for slot_index, slot in enumerate(oracle.slots):
            handles, _ = slot.ball(settings.SUBGROUP_ENUM_CAP)
            found = set(handles)
            for tail in tails:
                h = oracle.member(slot_index, oracle.multiply(remaining, oracle.invert(tail)))
                if h is not None and not slot.is_identity(h) and h not in found:
                    found.add(h)
                    handles.append(h)
            letters.extend(Sub(slot_index, h) for h in sorted(handles, key=slot.sort_key))
        return letters

    def geodesic_word(self, g: Element) -> Word:
        """
        A deterministic geodesic word from 1 to g by greedy descent on certified distances.

        Raises:
            ExactnessUnavailableError: |g|_{X∪𝓗} is not certified, or no descent step is visible in the window.
        """
        with self._lock:
            cached = self._geodesics.get(g)
        if cached is not None:
            return cached
        start = self.length(g)
        if not start.exact:
            raise ExactnessUnavailableError(
                f"|{self.oracle.format_element(g)}|_(X∪H) is only bounded by {start.value} at radius {self.radius}"
            )
        oracle = self.oracle
        word: list = []
        remaining = g
        n = start.value
        while n > 0:
            for letter in self.candidate_letters(remaining):
                rest = oracle.multiply(oracle.invert(oracle.letter_element(letter)), remaining)
                bound = self.upper_bound(rest)
                if bound is not None and bound <= n - 1:
                    word.append(letter)
                    remaining = rest
                    n -= 1
                    break
            else:
                raise ExactnessUnavailableError(
                    f"no geodesic step towards {oracle.format_element(remaining)} is visible at radius {self.radius}"
                )
        result = tuple(word)
        with self._lock:
            self._geodesics[g] = result
        return result


def rel_distance(metric: RelativeMetric, g: Element, h: Element) -> DistanceResult:
    """dist_{X∪𝓗}(g, h) = |g⁻¹h|_{X∪𝓗}."""
    return metric.distance(g, h)


def rel_geodesic(metric: RelativeMetric, g: Element, h: Element) -> Path:
    """The tie-broken geodesic from g to h; every component of it is a single letter."""
    oracle = metric.oracle
    word = metric.geodesic_word(oracle.multiply(oracle.invert(g), h))
    return Path.build(oracle, g, word)


# ---------------------------------------------------------------------------
# Coned-off Cayley graph
# ---------------------------------------------------------------------------

def coned_off(graph: TruncatedGraph) -> nx.Graph:
    """
    The truncated coned-off Cayley graph: X-edges of weight 1 and one cone
    vertex per coset meeting the window, joined to its members by half edges.
    """
    cone = nx.Graph()
    cone.add_nodes_from(("v", i) for i in range(len(graph.vertices)))
    for i, _, j in graph.x_edges:
        if i != j:
            cone.add_edge(("v", i), ("v", j), weight=1.0)
    for slot, partition in enumerate(graph.cosets):
        for key, members in partition.items():
            apex = ("c", slot, key)
            for i in members:
                cone.add_edge(apex, ("v", i), weight=0.5)
    return cone


def coned_off_distance(graph: TruncatedGraph, g: Element, h: Element, cone: Optional[nx.Graph] = None) -> float:
    """Weighted distance between two window vertices in the coned-off graph."""
    if g not in graph or h not in graph:
        raise OutsideTruncationError("coned-off distance needs both endpoints inside the window")
    cone = cone if cone is not None else coned_off(graph)
    return nx.shortest_path_length(cone, ("v", graph.index[g]), ("v", graph.index[h]), weight="weight")

