"""
Builds (RelPresentation, GroupOracle) pairs from group definition files.

Every built-in kind supplies its oracle, its subgroup slots, the elements
that may be named as generators, and a default presentation. The shared
tail then adds extra generators, validates every relator against the oracle
and enlarges X by Ω (the convention X = X' ∪ Ω with relators ω x_ω⁻¹).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

from loguru import logger

from app.core.exceptions import GroupConfigError, RhgtError
from app.schemas.group_config import GroupConfig, SubgroupSpec
from app.services.oracles import (
    BaumslagSolitarOracle,
    Element,
    FreeGroupOracle,
    FreeProductOracle,
    GroupOracle,
    ZZOracle,
)
from app.services.presentation import (
    RelPresentation,
    check_reduced,
    compute_omega,
    format_word,
    parse_word,
)
from app.services.words import CyclicSubgroup, Gen, Sub, invert_word

DEFAULT_BASIS = ("x", "y", "z", "u", "v", "w")
DEFAULT_FACTORS = ("s", "u", "v", "p", "q", "r")
KNOWN_OPTIONS = {"rank", "orders", "n", "enlarge", "extra_generators", "dehn_slope", "base"}


@dataclass
class _BaseGroup:
    oracle: GroupOracle
    named: Dict[str, Element]
    generators: List[str]
    relators: List[str] = field(default_factory=list)


def _single_generator_name(word_text: str) -> str | None:
    tokens = word_text.split()
    if len(tokens) == 1 and "^" not in tokens[0] and not tokens[0].startswith("@"):
        return tokens[0]
    return None


def _build_free(cfg: GroupConfig, with_subgroups: bool) -> _BaseGroup:
    rank = int(cfg.options.get("rank", len(cfg.generators) or 2))
    basis = tuple(cfg.generators) or DEFAULT_BASIS[:rank]
    if len(basis) != rank:
        raise GroupConfigError(f"rank {rank} does not match generators {list(basis)}")
    basis_pres = RelPresentation(basis, ())
    specs = cfg.subgroups
    if not with_subgroups and specs:
        raise GroupConfigError("kind 'free' has no subgroup collection; use 'free_rel_cyclic'")
    if with_subgroups and not specs:
        specs = {"H": SubgroupSpec(params={"word": basis[0]})}

    slots, slot_words, relators = [], [], []
    for name, spec in specs.items():
        word_text = spec.params.get("word")
        if not word_text:
            raise GroupConfigError(f"subgroup {name} needs params.word")
        generator = spec.params.get("generator") or _single_generator_name(word_text)
        if not generator:
            raise GroupConfigError(f"subgroup {name} needs params.generator when its word is not a single generator")
        letters = parse_word(word_text, basis_pres)
        slot_words.append([(g.index + 1) * g.sign for g in letters])
        slots.append(CyclicSubgroup(name, generator, 0))
        inverse = format_word(invert_word(letters, ()), basis_pres)
        relators.append(f"@{name}({generator}) {inverse}")

    oracle = FreeGroupOracle(basis, slot_words, slots)
    named = {name: (i + 1,) for i, name in enumerate(basis)}
    return _BaseGroup(oracle, named, list(basis), relators)


def _build_free_product(cfg: GroupConfig) -> _BaseGroup:
    orders = [int(n) for n in cfg.options.get("orders", [2, 3])]
    factors = tuple(cfg.generators) or DEFAULT_FACTORS[:len(orders)]
    if len(factors) != len(orders):
        raise GroupConfigError(f"{len(orders)} factor orders but generators {list(factors)}")
    names = list(cfg.subgroups) or [chr(ord("A") + i) for i in range(len(orders))]
    if len(names) != len(orders):
        raise GroupConfigError(f"free_product declares {len(names)} subgroups for {len(orders)} factors")
    for name, factor in zip(names, factors):
        spec = cfg.subgroups.get(name)
        if spec and spec.params.get("generator", factor) != factor:
            raise GroupConfigError(f"subgroup {name} must be generated by factor {factor}")
    slots = [CyclicSubgroup(name, factor, n) for name, factor, n in zip(names, factors, orders)]
    oracle = FreeProductOracle(factors, orders, slots)
    named = {factor: ((i, 1),) for i, factor in enumerate(factors)}
    relators = [f"@{name}({factor}) {factor}^-1" for name, factor in zip(names, factors)]
    return _BaseGroup(oracle, named, list(factors), relators)


def _single_slot(cfg: GroupConfig, generator: str) -> CyclicSubgroup:
    names = list(cfg.subgroups) or ["H"]
    if len(names) != 1:
        raise GroupConfigError(f"kind {cfg.kind} has exactly one subgroup, got {names}")
    spec = cfg.subgroups.get(names[0])
    if spec and spec.params.get("generator", generator) != generator:
        raise GroupConfigError(f"subgroup {names[0]} of {cfg.kind} is generated by {generator}")
    return CyclicSubgroup(names[0], generator, 0)


def _build_zz(cfg: GroupConfig) -> _BaseGroup:
    slot = _single_slot(cfg, "a")
    oracle = ZZOracle([slot])
    return _BaseGroup(oracle, {"a": (1, 0), "b": (0, 1)}, ["b"], [f"@{slot.name}(a^-1) b^-1 @{slot.name}(a) b"])


def _build_bs(cfg: GroupConfig) -> _BaseGroup:
    n = int(cfg.options.get("n", 2))
    slot = _single_slot(cfg, "a")
    oracle = BaumslagSolitarOracle(n, [slot])
    named = {"a": (0, Fraction(1)), "t": (-1, Fraction(0))}
    return _BaseGroup(oracle, named, ["t"], [f"t^-1 @{slot.name}(a) t @{slot.name}(a^-{n})"])


def _build_base(cfg: GroupConfig) -> _BaseGroup:
    if cfg.kind == "free":
        return _build_free(cfg, with_subgroups=False)
    if cfg.kind == "free_rel_cyclic":
        return _build_free(cfg, with_subgroups=True)
    if cfg.kind == "free_product":
        return _build_free_product(cfg)
    if cfg.kind == "zz":
        return _build_zz(cfg)
    if cfg.kind == "bs":
        return _build_bs(cfg)
    if cfg.kind == "relpres":
        base_kind = cfg.options.get("base")
        if not base_kind or base_kind == "relpres":
            raise GroupConfigError("relpres needs options.base naming a built-in kind")
        if not cfg.generators or not cfg.relators:
            raise GroupConfigError("relpres needs explicit generators and relators")
        base_options = {k: v for k, v in cfg.options.items() if k not in ("base", "extra_generators", "enlarge", "dehn_slope")}
        base_cfg = GroupConfig(kind=base_kind, subgroups=cfg.subgroups, options=base_options)
        return _build_base(base_cfg)
    raise GroupConfigError(f"unsupported group kind {cfg.kind!r}")


def enlarge_presentation(pres: RelPresentation, oracle: GroupOracle) -> RelPresentation:
    """
    Adds one generator x_ω and one relator `@λ(ω) x_ω^-1` per Ω element (up to
    inversion) that no generator already represents. The oracle's generating
    set is extended in step.
    """
    omega = compute_omega(pres)
    names = list(pres.generator_names)
    relators = list(pres.relators)
    for index, slot in enumerate(pres.slots):
        for h in sorted(omega[index], key=slot.sort_key):
            k = slot.exponent(h)
            if k < 0:
                continue
            element = oracle.embed(index, h)
            if element in oracle.generators or oracle.invert(element) in oracle.generators:
                continue
            name = slot.generator if k == 1 else f"{slot.generator}{k}"
            while name in names:
                name = f"{name}_"
            names.append(name)
            oracle.add_generator(name, element)
            relators.append((Sub(index, h), Gen(len(names) - 1, -1)))
            logger.debug(f"enlarged X by {name} = @{slot.name}({slot.format(h)})")
    return RelPresentation(tuple(names), pres.slots, tuple(relators), pres.dehn_slope)


def _check_options(options: Dict[str, Any]) -> None:
    unknown = set(options) - KNOWN_OPTIONS
    if unknown:
        raise GroupConfigError(f"unknown options {sorted(unknown)}")


def build_group(cfg: GroupConfig) -> tuple[RelPresentation, GroupOracle]:
    """
    Builds the presentation and oracle for a group definition.

    Args:
        cfg: The parsed group file.

    Returns:
        The relative presentation (enlarged unless `options.enlarge` is false) and its oracle.

    Raises:
        GroupConfigError: unsupported kind, bad parameters, or a relator that is not null in G.
    """
    _check_options(cfg.options)
    base = _build_base(cfg)
    oracle = base.oracle
    slots = tuple(oracle.slots)

    # 1. Generating set X'
    names = list(cfg.generators) or base.generators
    elements = []
    for name in names:
        if name not in base.named:
            raise GroupConfigError(f"generator {name!r} is not an element of the {cfg.kind} base group")
        elements.append(base.named[name])
    oracle.set_generators(names, elements)

    # 2. Extra generators, each a word over the generators declared so far
    for name, word_text in cfg.options.get("extra_generators", {}).items():
        if name in oracle.generator_names:
            raise GroupConfigError(f"extra generator {name!r} clashes with an existing generator")
        interim = RelPresentation(oracle.generator_names, slots)
        try:
            oracle.add_generator(name, oracle.normal_form(parse_word(word_text, interim)))
        except RhgtError as e:
            raise GroupConfigError(f"extra generator {name!r}: {e}") from e

    # 3. Relators, validated against the oracle
    interim = RelPresentation(oracle.generator_names, slots)
    relator_texts = cfg.relators or base.relators
    relators = []
    for text in relator_texts:
        try:
            relator = parse_word(text, interim)
        except RhgtError as e:
            raise GroupConfigError(f"relator {text!r}: {e}") from e
        if not oracle.is_identity(oracle.normal_form(relator)):
            raise GroupConfigError(f"relator {text!r} is not the identity in {cfg.kind}")
        relators.append(relator)

    slope = cfg.options.get("dehn_slope")
    pres = RelPresentation(oracle.generator_names, slots, tuple(relators), Fraction(str(slope)) if slope is not None else None)

    # 4. X = X' ∪ Ω
    if cfg.options.get("enlarge", True):
        pres = enlarge_presentation(pres, oracle)

    violations = check_reduced(pres)
    if violations:
        details = "; ".join(f"relator {v.relator_index} ({v.kind}: {v.detail})" for v in violations)
        raise GroupConfigError(f"presentation is not reduced: {details}")

    logger.info(f"built {cfg.kind} group: X={list(pres.generator_names)}, subgroups={[s.name for s in slots]}, {len(pres.relators)} relators")
    return pres, oracle
