"""
Dispatches a CommandSpec to the toolkit and shapes the JSON report.

Both the `rhgt` command line and the HTTP endpoint go through run_command,
so a report is the same whichever surface produced it. Exit codes: 0 for a
definite answer, 2 when the answer is limited by a cap or an uncertified
distance, 1 for input errors and failed verifications.
"""
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path as FilePath
from typing import Any, Callable, Dict, Optional, Tuple

from loguru import logger

from app.core.config import settings
from app.core.exceptions import (
    CapExceededError,
    ExactnessUnavailableError,
    OutsideTruncationError,
    PreconditionError,
)
from app.schemas.command import CommandSpec
from app.schemas.reports import CommandReport
from app.services import algos, filling, hypcheck
from app.services.graph import Path, RelativeMetric, rel_geodesic
from app.services.oracles import Element, GroupOracle
from app.services.paths import analyze
from app.services.presentation import (
    RelPresentation,
    check_reduced,
    compute_omega,
    format_word,
    omega_generation_check,
    parse_word,
)
from app.services.words import Word, free_reduce
from app.services.zoo import build_group
from app.storage.file_handler import (
    BaselineStore,
    certificate_to_dict,
    load_group,
    read_certificate,
    read_dehn_csv,
    write_dehn_csv,
)

Result = Tuple[str, Dict[str, Any]]

DEFINITE, UNKNOWN = "definite", "unknown"


@dataclass
class GroupContext:
    name: str
    pres: RelPresentation
    oracle: GroupOracle
    metric: RelativeMetric

    def word(self, text: str) -> Word:
        return parse_word(text, self.pres)

    def element(self, text: str) -> Element:
        return self.oracle.normal_form(self.word(text))

    def fmt(self, g: Element) -> str:
        return self.oracle.format_element(g)

    def fmt_word(self, word: Word) -> str:
        return format_word(word, self.pres)


def _num(value) -> Any:
    """Fractions print as integers when whole and as "p/q" strings otherwise."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return value


def _require(spec: CommandSpec, *names: str) -> None:
    missing = [name for name in names if getattr(spec, name) is None]
    if missing:
        flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        raise PreconditionError(f"{spec.command} needs {flags}")


def _radius(spec: CommandSpec) -> int:
    return settings.DEFAULT_RADIUS if spec.radius is None else spec.radius


def _given(value: Optional[int], default: int) -> int:
    return default if value is None else value


_HANDLERS: Dict[str, Callable[[GroupContext, CommandSpec], Result]] = {}


def _command(name: str):
    def register(func):
        _HANDLERS[name] = func
        return func
    return register


# ---------------------------------------------------------------------------
# Words, metric and presentation
# ---------------------------------------------------------------------------

@_command("length")
def _length(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    g = ctx.element(spec.word)
    result = ctx.metric.length(g)
    return (DEFINITE if result.exact else UNKNOWN), {
        "element": ctx.fmt(g),
        "length": result.value,
        "exact": result.exact,
        "x_length": ctx.oracle.x_length(g),
        "radius": result.radius,
    }


@_command("geodesic")
def _geodesic(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    g = ctx.element(spec.word)
    path = rel_geodesic(ctx.metric, ctx.oracle.identity, g)
    report = analyze(path, ctx.oracle)
    return DEFINITE, {
        "element": ctx.fmt(g),
        "geodesic": ctx.fmt_word(path.word),
        "length": len(path),
        "all_isolated": all(report.isolated),
    }


def _component_rows(ctx: GroupContext, path: Path) -> Dict[str, Any]:
    report = analyze(path, ctx.oracle)
    rows = []
    for index, (comp, isolated) in enumerate(zip(report.components, report.isolated)):
        slot = ctx.pres.slots[comp.slot]
        rows.append({
            "index": index,
            "subgroup": slot.name,
            "letters": [comp.start, comp.stop],
            "value": slot.format(comp.value),
            "x_span": comp.x_span,
            "isolated": isolated,
        })
    return {
        "components": rows,
        "classes": report.classes,
        "backtracking": report.backtracking,
        "phase_vertices": report.phase_vertices,
    }


@_command("components")
def _components(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    word = ctx.word(spec.word)
    path = Path.build(ctx.oracle, ctx.oracle.identity, word)
    return DEFINITE, {"word": ctx.fmt_word(word), **_component_rows(ctx, path)}


@_command("reduce")
def _reduce(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    word = ctx.word(spec.word)
    g = ctx.oracle.normal_form(word)
    return DEFINITE, {
        "reduced": ctx.fmt_word(free_reduce(word, ctx.pres.slots)),
        "element": ctx.fmt(g),
        "is_identity": ctx.oracle.is_identity(g),
    }


@_command("omega")
def _omega(ctx: GroupContext, spec: CommandSpec) -> Result:
    pres = ctx.pres
    omega = compute_omega(pres)
    generation = omega_generation_check(pres, omega, _radius(spec), settings.OMEGA_BFS_CAP)
    return DEFINITE, {
        "generators": list(pres.generator_names),
        "relators": [ctx.fmt_word(r) for r in pres.relators],
        "omega": {slot.name: [slot.format(h) for h in sorted(omega[i], key=slot.sort_key)] for i, slot in enumerate(pres.slots)},
        "violations": [{"relator": v.relator_index, "kind": v.kind, "detail": v.detail} for v in check_reduced(pres)],
        "generation": [{"subgroup": r.slot, "checked": r.checked, "unreached": len(r.unreached)} for r in generation],
    }


# ---------------------------------------------------------------------------
# Filling
# ---------------------------------------------------------------------------

def _verify_certificate(ctx: GroupContext, spec: CommandSpec) -> Result:
    certificate = read_certificate(spec.verify, ctx.pres)
    word = ctx.word(spec.word) if spec.word is not None else certificate.start
    ok = filling.verify_certificate(ctx.pres, word, certificate)
    return DEFINITE, {"verified": ok, "area": certificate.area}


@_command("area")
def _area(ctx: GroupContext, spec: CommandSpec) -> Result:
    if spec.verify:
        return _verify_certificate(ctx, spec)
    _require(spec, "word")
    word = ctx.word(spec.word)
    result = filling.rel_area(ctx.pres, ctx.oracle, word, max_area=spec.max_area, max_length=spec.max_len)
    if isinstance(result, filling.AreaFound):
        return DEFINITE, {
            "area": result.area,
            "certificate": certificate_to_dict(result.certificate, ctx.pres),
            "expanded": result.expanded,
            "interacting_only": result.interacting_only,
        }
    return UNKNOWN, {
        "area": None,
        "lower_bound": result.lower_bound,
        "max_area": result.max_area,
        "reason": result.reason,
        "expanded": result.expanded,
        "interacting_only": result.interacting_only,
    }


@_command("dehn-scan")
def _dehn_scan(ctx: GroupContext, spec: CommandSpec) -> Result:
    table = filling.dehn_scan(ctx.pres, ctx.oracle, _given(spec.n, 4), max_area=spec.max_area, sub_radius=spec.radius, threshold=spec.threshold)
    if spec.csv:
        write_dehn_csv(spec.csv, table)
    settled = all(row.status in ("exact", "unbounded-evidence") for row in table.rows)
    return (DEFINITE if settled else UNKNOWN), {
        "rows": [{"n": r.n, "area": r.area, "status": r.status, "words": r.words, "witness": r.witness} for r in table.rows],
        "caps": table.caps,
        "slope": _num(table.slope_estimate()),
    }


# ---------------------------------------------------------------------------
# Geometry estimators
# ---------------------------------------------------------------------------

def _triangle(tri: hypcheck.TriangleReport) -> Dict[str, Any]:
    return {
        "vertices": list(tri.vertices),
        "sides": list(tri.sides),
        "a": _num(tri.a), "b": _num(tri.b), "c": _num(tri.c),
        "rips": tri.rips, "xi": tri.xi, "nu": tri.nu,
    }


@_command("delta")
def _delta(ctx: GroupContext, spec: CommandSpec) -> Result:
    radius = _radius(spec)
    report = hypcheck.estimate_delta(ctx.metric, radius, spec.sample, spec.seed)
    four = hypcheck.four_point_delta(ctx.metric.graph, _given(spec.sample, 200), spec.seed)
    return (DEFINITE if not report.skipped else UNKNOWN), {
        "delta": report.delta,
        "xi": report.xi,
        "nu": report.nu,
        "triangles": report.triangles,
        "skipped": report.skipped,
        "exhaustive": report.exhaustive,
        "radius": radius,
        "worst": [_triangle(t) for t in report.worst],
        "four_point_delta": _num(four),
    }


@_command("nu")
def _nu(ctx: GroupContext, spec: CommandSpec) -> Result:
    radius = _radius(spec)
    report = hypcheck.nu_scan(ctx.metric, radius, spec.sample, spec.seed, quadrilaterals=spec.quads)
    return (DEFINITE if not report.skipped else UNKNOWN), {
        "nu": report.nu,
        "triangles": report.triangles,
        "skipped": report.skipped,
        "radius": radius,
        "witness": _triangle(report.witness) if report.witness else None,
        "quadrilaterals": report.quadrilaterals,
        "quad_nu": report.quad_nu,
        "quad_within_bound": report.quad_within_bound,
    }


@_command("bcp")
def _bcp(ctx: GroupContext, spec: CommandSpec) -> Result:
    if spec.f is None:
        scan = hypcheck.bcp_scan(ctx.metric, _radius(spec), _given(spec.sample, 100), _given(spec.k, 2), spec.seed)
        result = {"pairs": scan.pairs, "epsilon": scan.epsilon, "failures": scan.failures, "worst": list(scan.worst) if scan.worst else None}
        if spec.baseline:
            check = BaselineStore().check(spec.baseline, scan.epsilon)
            result.update({"baseline": check.baseline, "baseline_created": check.created, "regressed": check.regressed})
        return DEFINITE, result
    _require(spec, "g")
    identity = ctx.oracle.identity
    p = Path.build(ctx.oracle, identity, ctx.word(spec.f))
    q = Path.build(ctx.oracle, identity, ctx.word(spec.g))
    report = hypcheck.bcp_check(ctx.metric, p, q, k=_given(spec.k, 1), threshold=spec.threshold, mode=spec.mode or "tbcp")
    return DEFINITE, {
        "mode": report.mode,
        "k": report.k,
        "threshold": report.threshold,
        "margins": report.margins,
        "epsilon": report.epsilon,
        "passed": report.passed,
        "preconditions": report.preconditions,
        "violations": [
            {"condition": v.condition, "direction": v.direction, "component": v.component, "value": v.value, "detail": v.detail}
            for v in report.violations
        ],
    }


@_command("qconvex")
def _qconvex(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    generators = [ctx.element(text) for text in spec.word.split(",") if text.strip()]
    report = hypcheck.quasiconvexity_scan(ctx.metric, generators, _radius(spec), spec.sample, spec.seed)
    return (UNKNOWN if report.capped or report.skipped else DEFINITE), {
        "generators": report.generators,
        "sigma": report.sigma,
        "sample": report.sample,
        "subgroup_size": report.subgroup_size,
        "capped": report.capped,
        "skipped": report.skipped,
    }


# ---------------------------------------------------------------------------
# Decision procedures
# ---------------------------------------------------------------------------

@_command("wp")
def _wp(ctx: GroupContext, spec: CommandSpec) -> Result:
    if spec.verify:
        return _verify_certificate(ctx, spec)
    _require(spec, "word")
    result = algos.generic_word_problem(ctx.pres, ctx.oracle, ctx.word(spec.word), max_area=spec.max_area, max_length=spec.max_len)
    body = {"answer": result.status, "area": result.area, "normal_form": result.normal_form, "reason": result.reason, "lower_bound": result.lower_bound}
    if result.certificate is not None:
        body["certificate"] = certificate_to_dict(result.certificate, ctx.pres)
    return (UNKNOWN if result.status == "unknown" else DEFINITE), body


@_command("member")
def _member(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    if not ctx.pres.slots:
        raise PreconditionError("the group has no subgroup collection")
    slot = ctx.pres.slot_index(spec.subgroup) if spec.subgroup else 0
    table = read_dehn_csv(spec.csv) if spec.csv else None
    result = algos.membership(ctx.pres, ctx.oracle, slot, ctx.element(spec.word), mode=spec.mode or "oracle", table=table, radius=spec.radius)
    return (UNKNOWN if result.status == "unknown" else DEFINITE), {
        "answer": result.status,
        "subgroup": result.slot,
        "handle": result.handle,
        "mode": result.mode,
        "radius": result.radius,
    }


def _not_found(result: algos.NotFound) -> Result:
    return UNKNOWN, {"found": False, "radius": result.radius, "searched": result.searched, "reason": result.reason}


@_command("parabolic")
def _parabolic(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    g = ctx.element(spec.word)
    oracle = ctx.oracle
    if spec.verify:
        conjugate = oracle.conjugate(g, ctx.element(spec.verify))
        hits = [i for i in range(len(oracle.slots)) if oracle.member(i, conjugate) is not None]
        return DEFINITE, {"verified": bool(hits), "subgroup": ctx.pres.slots[hits[0]].name if hits else None}
    result = algos.is_parabolic(oracle, g, _radius(spec))
    if isinstance(result, algos.NotFound):
        return _not_found(result)
    slot = ctx.pres.slots[result.slot]
    return DEFINITE, {"found": True, "t": ctx.fmt(result.t), "subgroup": slot.name, "image": slot.format(result.image), "radius": result.radius}


@_command("conjugate")
def _conjugate(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "f", "g")
    f, g = ctx.element(spec.f), ctx.element(spec.g)
    if spec.verify:
        return DEFINITE, {"verified": ctx.oracle.conjugate(f, ctx.element(spec.verify)) == g}
    result = algos.conjugate_search(ctx.oracle, f, g, _radius(spec))
    if isinstance(result, algos.NotFound):
        return _not_found(result)
    return DEFINITE, {"found": True, "t": ctx.fmt(result.t), "x_length": result.x_length, "verified": result.verified}


@_command("sympair")
def _sympair(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "f", "g")
    f, g = ctx.element(spec.f), ctx.element(spec.g)
    if spec.verify:
        return DEFINITE, {"verified": ctx.oracle.conjugate(f, ctx.element(spec.verify)) == g}
    result = algos.min_symmetric_pair(ctx.metric, f, g, _radius(spec))
    if isinstance(result, algos.NotFound):
        return _not_found(result)
    sync = algos.synchronous_check(ctx.metric, result.p, result.q)
    return DEFINITE, {
        "found": True,
        "t": ctx.fmt(result.t),
        "relative_length": result.relative_length,
        "label": ctx.fmt_word(result.p.word),
        "p_start": ctx.fmt(result.p.start),
        "q_start": ctx.fmt(result.q.start),
        "synchronous_components": result.synchronous,
        "kappa": sync.kappa,
        "endpoint_distances": list(sync.endpoint_distances),
    }


@_command("translation")
def _translation(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    g = ctx.element(spec.word)
    n = _given(spec.n, 8)
    estimate = algos.translation_number(ctx.metric, g, n)
    scaling = algos.translation_scaling(ctx.metric, g, n, powers=(2,))
    return (DEFINITE if all(estimate.exact) else UNKNOWN), {
        "element": estimate.g,
        "n": n,
        "terms": [_num(t) for t in estimate.terms],
        "exact": estimate.exact,
        "value": _num(estimate.value),
        "scaling": [{"k": r.k, "power": _num(r.power_estimate), "scaled": _num(r.scaled_estimate)} for r in scaling],
    }


@_command("order")
def _order(ctx: GroupContext, spec: CommandSpec) -> Result:
    cap = _given(spec.n, 64)
    if spec.word is None:
        scan = algos.finite_order_scan(ctx.oracle, _radius(spec), cap)
        return DEFINITE, {"radius": scan.radius, "parabolic_orders": scan.parabolic, "hyperbolic_orders": scan.hyperbolic, "unknown": scan.unknown}
    g = ctx.element(spec.word)
    result = algos.element_order(ctx.oracle, g, cap)
    return (UNKNOWN if result.kind == "unknown" else DEFINITE), {
        "element": ctx.fmt(g),
        "kind": result.kind,
        "order": result.order,
        "reason": result.reason,
        "cap": result.cap,
    }


@_command("root")
def _root(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "word")
    g = ctx.element(spec.word)
    oracle = ctx.oracle
    if spec.verify:
        _require(spec, "k")
        found = algos.conjugate_search(oracle, oracle.power(ctx.element(spec.verify), spec.k), g, _radius(spec))
        return DEFINITE, {"verified": isinstance(found, algos.ConjugacyWitness)}
    result = algos.root_search(oracle, g, _radius(spec), _given(spec.n, 4))
    if isinstance(result, algos.NotFound):
        return _not_found(result)
    return DEFINITE, {"found": True, "f": ctx.fmt(result.f), "n": result.n, "t": ctx.fmt(result.t)}


@_command("powerconj")
def _powerconj(ctx: GroupContext, spec: CommandSpec) -> Result:
    _require(spec, "f", "g")
    f, g = ctx.element(spec.f), ctx.element(spec.g)
    oracle = ctx.oracle
    if spec.verify:
        _require(spec, "k", "l")
        t = ctx.element(spec.verify)
        return DEFINITE, {"verified": oracle.conjugate(oracle.power(f, spec.k), t) == oracle.power(g, spec.l)}
    result = algos.power_conjugacy_search(oracle, f, g, _given(spec.n, 3), _radius(spec))
    if isinstance(result, algos.NotFound):
        return _not_found(result)
    return DEFINITE, {"found": True, "k": result.k, "l": result.l, "t": ctx.fmt(result.t)}


@_command("atomic")
def _atomic(ctx: GroupContext, spec: CommandSpec) -> Result:
    result = algos.enumerate_atomic_cycles(ctx.metric, _given(spec.max_len, 4), spec.radius)
    return (UNKNOWN if result.uncertified else DEFINITE), {
        "max_len": result.max_len,
        "sub_radius": result.sub_radius,
        "cycles": [{"label": c.label, "length": len(c.word), "essential": c.essential} for c in result.cycles],
        "essential": len(result.essential),
        "uncertified": result.uncertified,
        "capped": result.capped,
    }


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def load_context(spec: CommandSpec) -> GroupContext:
    if spec.group_config is not None:
        pres, oracle = build_group(spec.group_config)
        name = spec.group_config.kind
    else:
        pres, oracle = load_group(spec.group)
        name = FilePath(spec.group).stem
    return GroupContext(name, pres, oracle, RelativeMetric(pres, oracle, radius=spec.radius))


def run_command(spec: CommandSpec) -> CommandReport:
    """
    Runs one command.

    Args:
        spec: The validated command.

    Returns:
        The report; `exit_code` is 0 (definite), 2 (cap-limited or unknown) or 1 (failed verification).

    Raises:
        RhgtError: invalid input (group file, word syntax, missing arguments).
    """
    logger.info(f"rhgt {spec.command} on {spec.group or 'inline group'}")

    # 1. Load the group
    ctx = load_context(spec)

    # 2. Run the command; cap and exactness limits become "unknown" answers
    handler = _HANDLERS[spec.command]
    try:
        status, result = handler(ctx, spec)
    except (CapExceededError, ExactnessUnavailableError, OutsideTruncationError) as e:
        logger.info(f"{spec.command} stopped at a cap: {e}")
        status, result = UNKNOWN, {"reason": str(e), "limit": type(e).__name__}

    # 3. Shape the report
    if result.get("verified") is False:
        exit_code = 1
    else:
        exit_code = 0 if status == DEFINITE else 2
    return CommandReport(command=spec.command, group=ctx.name, status=status, exit_code=exit_code, **result)


def dump_report(report: CommandReport, out: str = "json") -> str:
    data = report.model_dump()
    if out == "json":
        return json.dumps(data, sort_keys=True)
    lines = []
    for key in sorted(data):
        value = data[key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)
