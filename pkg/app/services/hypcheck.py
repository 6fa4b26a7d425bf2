"""
Empirical estimators for thin triangles, coset penetration and quasi-convexity.

Every estimator reports measured extrema over seeded samples (or exhaustive
scans of a small ball); none of them evaluates theoretical constants.
Triangles are taken with one vertex at 1, which loses nothing by
left-invariance.
"""
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import networkx as nx
from loguru import logger

from app.core.config import settings
from app.core.exceptions import ExactnessUnavailableError, OutsideTruncationError, PreconditionError
from app.services.graph import Path, RelativeMetric, TruncatedGraph, coned_off, rel_geodesic
from app.services.oracles import Element, GroupOracle
from app.services.paths import analyze, components, connectivity_key, is_quasi_geodesic, k_similar
from app.services.presentation import format_word


def sample_indices(total: int, sample: Optional[int], seed: int) -> List[int]:
    """All of range(total) when `sample` is None or covers it; otherwise a seeded prefix of a shuffle (nested in `sample`)."""
    order = list(range(total))
    if sample is None or sample >= total:
        return order
    random.Random(seed).shuffle(order)
    return sorted(order[:sample])


def _ball_pairs(oracle: GroupOracle, radius: int) -> tuple[list, list]:
    ball = oracle.enumerate_x_ball(radius)
    pairs = [(i, j) for i in range(len(ball)) for j in range(i, len(ball))]
    return ball, pairs


def _exact(metric: RelativeMetric, g: Element, h: Element) -> int:
    result = metric.distance(g, h)
    if not result.exact:
        raise ExactnessUnavailableError("uncertified distance")
    return result.value


def _x_distance(oracle: GroupOracle, g: Element, h: Element) -> int:
    return oracle.x_length(oracle.multiply(oracle.invert(g), h))


# ---------------------------------------------------------------------------
# Triangles
# ---------------------------------------------------------------------------

@dataclass
class TriangleReport:
    vertices: tuple[str, str, str]
    sides: tuple[str, str, str]
    a: Fraction
    b: Fraction
    c: Fraction
    rips: int
    xi: int
    nu: int


@dataclass
class DeltaReport:
    delta: int
    xi: int
    nu: int
    triangles: int
    skipped: int
    exhaustive: bool
    radius: int
    worst: List[TriangleReport] = field(default_factory=list)


def _side_defect(metric: RelativeMetric, side: Path, others: Sequence[Path]) -> int:
    targets = [v for other in others for v in other.vertices]
    return max((min(_exact(metric, v, u) for u in targets) for v in side.vertices), default=0)


def _side_x_defect(oracle: GroupOracle, side: Path, others: Sequence[Path]) -> int:
    targets = [v for other in others for v in other.vertices]
    return max((min(_x_distance(oracle, v, u) for u in targets) for v in side.vertices), default=0)


def _reverse(path: Path) -> Path:
    return Path(path.end, (), tuple(reversed(path.vertices)))


def _corner_thinness(metric: RelativeMetric, left: Path, right: Path, reach: Fraction) -> int:
    """Largest distance between conjugate points on two sides leaving one corner, up to the internal point."""
    worst = 0
    last = int(reach)
    for t in range(last + 1):
        if t >= len(left.vertices) or t >= len(right.vertices):
            break
        d = _exact(metric, left.vertices[t], right.vertices[t])
        if t == last and reach != last:
            d += 1  # snap of the internal point to the nearest vertices
        worst = max(worst, d)
    return worst


def triangle_report(metric: RelativeMetric, y: Element, z: Element) -> TriangleReport:
    """
    The geodesic triangle (1, y, z) with the deterministic sides from rel_geodesic.

    Raises:
        ExactnessUnavailableError: some side or vertex distance is not certified.
    """
    oracle = metric.oracle
    x = oracle.identity
    xy, xz, yz = rel_geodesic(metric, x, y), rel_geodesic(metric, x, z), rel_geodesic(metric, y, z)
    d_xy, d_xz, d_yz = len(xy), len(xz), len(yz)
    a = Fraction(d_xy + d_xz - d_yz, 2)
    b = Fraction(d_xy + d_yz - d_xz, 2)
    c = Fraction(d_xz + d_yz - d_xy, 2)
    sides = (xy, xz, yz)
    rips = max(_side_defect(metric, s, [o for o in sides if o is not s]) for s in sides)
    nu = max(_side_x_defect(oracle, s, [o for o in sides if o is not s]) for s in sides)
    yx, zx, zy = _reverse(xy), _reverse(xz), _reverse(yz)
    xi = max(
        _corner_thinness(metric, xy, xz, a),
        _corner_thinness(metric, yx, yz, b),
        _corner_thinness(metric, zx, zy, c),
    )
    pres = metric.pres
    return TriangleReport(
        vertices=(oracle.format_element(x), oracle.format_element(y), oracle.format_element(z)),
        sides=tuple(format_word(s.word, pres) for s in sides),
        a=a, b=b, c=c, rips=rips, xi=xi, nu=nu,
    )


def estimate_delta(metric: RelativeMetric, radius: int, sample: Optional[int] = None, seed: Optional[int] = None, keep: int = 3) -> DeltaReport:
    """
    δ̂, ξ̂ and ν̂ over geodesic triangles (1, y, z) with y, z in the X-ball of radius R.
    Triangles with an uncertified distance are skipped and counted.
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    oracle = metric.oracle
    ball, pairs = _ball_pairs(oracle, radius)
    chosen = sample_indices(len(pairs), sample, seed)
    logger.info(f"estimate_delta: {len(chosen)} of {len(pairs)} triangles at radius {radius}")
    report = DeltaReport(0, 0, 0, 0, 0, len(chosen) == len(pairs), radius)
    reports: List[TriangleReport] = []
    for index in chosen:
        i, j = pairs[index]
        try:
            tri = triangle_report(metric, ball[i], ball[j])
        except (ExactnessUnavailableError, OutsideTruncationError):
            report.skipped += 1
            continue
        report.triangles += 1
        report.delta = max(report.delta, tri.rips)
        report.xi = max(report.xi, tri.xi)
        report.nu = max(report.nu, tri.nu)
        reports.append(tri)
    reports.sort(key=lambda t: (-t.rips, -t.nu))
    report.worst = reports[:keep]
    logger.info(f"estimate_delta: δ̂={report.delta} ξ̂={report.xi} ν̂={report.nu} ({report.skipped} skipped)")
    return report


@dataclass
class NuReport:
    nu: int
    triangles: int
    skipped: int
    radius: int
    witness: Optional[TriangleReport] = None
    quadrilaterals: int = 0
    quad_nu: int = 0
    quad_within_bound: Optional[bool] = None


def nu_scan(metric: RelativeMetric, radius: int, sample: Optional[int] = None, seed: Optional[int] = None, quadrilaterals: int = 0) -> NuReport:
    """
    ν̂ = max over sampled geodesic triangles of the X-distance from a side vertex
    to the other two sides; optionally the same measure over geodesic
    quadrilaterals (1, y, z, w), compared against 2ν̂.
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    oracle = metric.oracle
    ball, pairs = _ball_pairs(oracle, radius)
    chosen = sample_indices(len(pairs), sample, seed)
    report = NuReport(0, 0, 0, radius)
    for index in chosen:
        i, j = pairs[index]
        try:
            tri = triangle_report(metric, ball[i], ball[j])
        except (ExactnessUnavailableError, OutsideTruncationError):
            report.skipped += 1
            continue
        report.triangles += 1
        if report.witness is None or tri.nu > report.nu:
            report.nu, report.witness = tri.nu, tri
    if quadrilaterals:
        rng = random.Random(seed)
        for _ in range(quadrilaterals):
            y, z, w = (ball[rng.randrange(len(ball))] for _ in range(3))
            try:
                sides = [
                    rel_geodesic(metric, oracle.identity, y),
                    rel_geodesic(metric, y, z),
                    rel_geodesic(metric, z, w),
                    rel_geodesic(metric, w, oracle.identity),
                ]
            except (ExactnessUnavailableError, OutsideTruncationError):
                continue
            report.quadrilaterals += 1
            value = max(_side_x_defect(oracle, s, [o for o in sides if o is not s]) for s in sides)
            report.quad_nu = max(report.quad_nu, value)
        report.quad_within_bound = report.quad_nu <= 2 * report.nu
    logger.info(f"nu_scan: ν̂={report.nu} over {report.triangles} triangles, quadrilateral ν={report.quad_nu}")
    return report


# ---------------------------------------------------------------------------
# Bounded coset penetration
# ---------------------------------------------------------------------------

@dataclass
class BcpViolation:
    condition: int
    direction: str  # "p->q" | "q->p"
    component: Optional[int]
    value: int
    detail: str


@dataclass
class BcpReport:
    mode: str
    lam: Fraction
    c: Fraction
    k: int
    threshold: Optional[int]
    margins: Dict[str, int]
    epsilon: int
    violations: List[BcpViolation]
    preconditions: List[str]

    @property
    def passed(self) -> bool:
        return not self.preconditions and not self.violations


def _bcp_direction(oracle: GroupOracle, p: Path, q: Path, label: str, mode: str) -> tuple[Dict[int, int], List[BcpViolation]]:
    comps_p, comps_q = components(p, oracle), components(q, oracle)
    keys_q: Dict[object, List[int]] = {}
    for index, comp in enumerate(comps_q):
        keys_q.setdefault(connectivity_key(oracle, comp), []).append(index)

    margins = {1: 0, 2: 0, 3: 0}
    witnesses: List[BcpViolation] = []
    for index, comp in enumerate(comps_p):
        partners = keys_q.get(connectivity_key(oracle, comp), [])
        if not partners:
            if comp.x_span > margins[1]:
                margins[1] = comp.x_span
            witnesses.append(BcpViolation(1, label, index, comp.x_span, f"component {index} has no connected component in the other path"))
            continue
        for partner in partners:
            other = comps_q[partner]
            value = max(_x_distance(oracle, comp.s_minus, other.s_minus), _x_distance(oracle, comp.s_plus, other.s_plus))
            margins[2] = max(margins[2], value)
            witnesses.append(BcpViolation(2, label, index, value, f"component {index} vs component {partner} endpoints"))
    if mode == "tbcp":
        phase_p = analyze(p, oracle).phase_vertices
        phase_q = [q.vertices[v] for v in analyze(q, oracle).phase_vertices]
        for v in phase_p:
            value = min(_x_distance(oracle, p.vertices[v], u) for u in phase_q)
            margins[3] = max(margins[3], value)
            witnesses.append(BcpViolation(3, label, None, value, f"phase vertex {v}"))
    return margins, witnesses


def bcp_check(
    metric: RelativeMetric,
    p: Path,
    q: Path,
    lam=1,
    c=0,
    k: int = 1,
    threshold: Optional[int] = None,
    mode: str = "tbcp",
) -> BcpReport:
    """
    Checks the coset-penetration conditions for a pair of paths.

    `mode="tbcp"` checks the three conditions (unpartnered component spans,
    endpoint distances of connected pairs, phase-vertex distances) in both
    directions; `mode="farb"` checks the first two under the Farb precondition
    p_- = q_- and d_X(p_+, q_+) ≤ 1. Margins are the smallest threshold each
    condition passes at, and ε̂ is their maximum.
    """
    if mode not in ("tbcp", "farb"):
        raise PreconditionError(f"unknown BCP mode {mode!r}")
    oracle = metric.oracle
    lam, c = Fraction(lam), Fraction(c)
    preconditions: List[str] = []
    for name, path in (("p", p), ("q", q)):
        try:
            if not is_quasi_geodesic(path, metric, lam, c):
                preconditions.append(f"{name} is not a ({lam},{c})-quasi-geodesic")
        except ExactnessUnavailableError:
            preconditions.append(f"{name}: subpath distances are not certified")
        if analyze(path, oracle).backtracking:
            preconditions.append(f"{name} backtracks")
    if mode == "farb":
        if p.start != q.start:
            preconditions.append("Farb form needs p_- = q_-")
        if _x_distance(oracle, p.end, q.end) > 1:
            preconditions.append("Farb form needs d_X(p_+, q_+) ≤ 1")
    elif not k_similar(p, q, oracle, k):
        preconditions.append(f"p and q are not {k}-similar")

    margins = {"1": 0, "2": 0}
    if mode == "tbcp":
        margins["3"] = 0
    violations: List[BcpViolation] = []
    for first, second, label in ((p, q, "p->q"), (q, p, "q->p")):
        found, witnesses = _bcp_direction(oracle, first, second, label, mode)
        for condition, value in found.items():
            if str(condition) in margins:
                margins[str(condition)] = max(margins[str(condition)], value)
        if threshold is not None:
            violations.extend(w for w in witnesses if w.value > threshold)
    epsilon = max(margins.values())
    return BcpReport(mode, lam, c, k, threshold, margins, epsilon, violations, preconditions)


@dataclass
class BcpScanReport:
    pairs: int
    epsilon: int
    failures: int
    worst: Optional[tuple[str, str, str, str]] = None


def bcp_scan(metric: RelativeMetric, radius: int, pairs: int, k: int = 2, seed: Optional[int] = None) -> BcpScanReport:
    """
    Seeded pairs of exact geodesics p = [1, g], q = [s, g·t] with |s|_X, |t|_X ≤ k,
    checked with bcp_check at λ = 1, c = 0. ε̂ is the largest measured margin.
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    oracle = metric.oracle
    ball = oracle.enumerate_x_ball(radius)
    shifts = oracle.enumerate_x_ball(k)
    rng = random.Random(seed)
    report = BcpScanReport(0, 0, 0)
    attempts = 0
    while report.pairs < pairs and attempts < 20 * pairs:
        attempts += 1
        g = ball[rng.randrange(len(ball))]
        s = shifts[rng.randrange(len(shifts))]
        t = shifts[rng.randrange(len(shifts))]
        try:
            p = rel_geodesic(metric, oracle.identity, g)
            q = rel_geodesic(metric, s, oracle.multiply(g, t))
            result = bcp_check(metric, p, q, 1, 0, k)
        except (ExactnessUnavailableError, OutsideTruncationError):
            continue
        report.pairs += 1
        if result.preconditions:
            report.failures += 1
            continue
        if report.worst is None or result.epsilon > report.epsilon:
            report.epsilon = result.epsilon
            report.worst = (
                oracle.format_element(p.start), format_word(p.word, metric.pres),
                oracle.format_element(q.start), format_word(q.word, metric.pres),
            )
    logger.info(f"bcp_scan: ε̂={report.epsilon} over {report.pairs} pairs ({report.failures} precondition failures)")
    return report


# ---------------------------------------------------------------------------
# Quasi-convexity and the coned-off graph
# ---------------------------------------------------------------------------

@dataclass
class QcReport:
    generators: List[str]
    sample: int
    sigma: int
    subgroup_size: int
    capped: bool
    skipped: int = 0


def subgroup_ball(oracle: GroupOracle, generators: Sequence[Element], radius: int, cap: int) -> tuple[List[Element], bool]:
    """Elements of ⟨generators⟩ of word length ≤ radius in those generators, breadth first; flag set when `cap` cut it short."""
    steps = list(generators) + [oracle.invert(g) for g in generators]
    seen = {oracle.identity: 0}
    order = [oracle.identity]
    frontier = [oracle.identity]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in steps:
                h = oracle.multiply(g, s)
                if h not in seen:
                    if len(seen) >= cap:
                        return order, True
                    seen[h] = 1
                    order.append(h)
                    nxt.append(h)
        frontier = nxt
    return order, False


def quasiconvexity_scan(
    metric: RelativeMetric,
    generators: Sequence[Element],
    radius: int,
    sample: Optional[int] = None,
    seed: Optional[int] = None,
    cap: Optional[int] = None,
) -> QcReport:
    """σ̂ = max over sampled r in the subgroup ball and vertices v of [1, r] of min_w d_X(v, w) over the enumerated subgroup."""
    seed = settings.DEFAULT_SEED if seed is None else seed
    oracle = metric.oracle
    members, capped = subgroup_ball(oracle, generators, radius, cap or settings.MAX_BALL_VERTICES)
    chosen = sample_indices(len(members), sample, seed)
    sigma, skipped = 0, 0
    for index in chosen:
        try:
            path = rel_geodesic(metric, oracle.identity, members[index])
        except (ExactnessUnavailableError, OutsideTruncationError):
            skipped += 1
            continue
        for v in path.vertices:
            sigma = max(sigma, min(_x_distance(oracle, v, w) for w in members))
    return QcReport([oracle.format_element(g) for g in generators], len(chosen), sigma, len(members), capped, skipped)


def four_point_delta(graph: TruncatedGraph, sample: int = 200, seed: Optional[int] = None) -> Fraction:
    """Largest Gromov four-point defect over sampled vertex quadruples of the truncated coned-off graph."""
    seed = settings.DEFAULT_SEED if seed is None else seed
    cone = coned_off(graph)
    rng = random.Random(seed)
    n = len(graph.vertices)
    if n < 4:
        return Fraction(0)
    cache: Dict[int, Dict] = {}

    def dist(i: int, j: int) -> Fraction:
        if i not in cache:
            cache[i] = nx.single_source_dijkstra_path_length(cone, ("v", i), weight="weight")
        return Fraction(cache[i][("v", j)]).limit_denominator(2)

    worst = Fraction(0)
    for _ in range(sample):
        a, b, c, d = rng.sample(range(n), 4)
        sums = sorted([dist(a, b) + dist(c, d), dist(a, c) + dist(b, d), dist(a, d) + dist(b, c)], reverse=True)
        worst = max(worst, (sums[0] - sums[1]) / 2)
    return worst
