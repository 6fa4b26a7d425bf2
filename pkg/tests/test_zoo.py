from fractions import Fraction

import pytest

from app.core.exceptions import CapabilityAbsentError, GroupConfigError
from app.schemas.group_config import GroupConfig, SubgroupSpec
from app.services.zoo import build_group


def test_zz_is_enlarged_by_a(zz):
    assert zz.pres.generator_names == ("b", "a")
    assert len(zz.pres.relators) == 2
    assert zz.oracle.generators == ((0, 1), (1, 0))


def test_bs12_enlargement_names(bs12):
    assert bs12.pres.generator_names == ("t", "a", "a2")


def test_enlargement_can_be_switched_off():
    pres, oracle = build_group(GroupConfig(kind="zz", options={"enlarge": False}))
    assert pres.generator_names == ("b",)
    assert len(pres.relators) == 1


def test_no_enlargement_when_omega_is_in_x(f2relx, fp23):
    assert f2relx.pres.generator_names == ("x", "y")
    assert fp23.pres.generator_names == ("s", "u")


def test_free_group_has_no_subgroups(f2):
    assert f2.pres.slots == ()
    assert f2.pres.relators == ()


def test_relator_must_be_null():
    with pytest.raises(GroupConfigError):
        build_group(GroupConfig(kind="zz", relators=["b @H(a) b^-1"]))


def test_unknown_option_is_rejected():
    with pytest.raises(GroupConfigError):
        build_group(GroupConfig(kind="zz", options={"colour": "blue"}))


def test_proper_power_subgroup_word_is_rejected():
    cfg = GroupConfig(
        kind="free_rel_cyclic",
        generators=["x", "y"],
        subgroups={"H": SubgroupSpec(params={"word": "x^2", "generator": "c"})},
    )
    with pytest.raises(GroupConfigError):
        build_group(cfg)


def test_relpres_needs_a_base():
    with pytest.raises(GroupConfigError):
        build_group(GroupConfig(kind="relpres", generators=["b"], relators=["@H(a^-1) b^-1 @H(a) b"]))


def test_zz_oracle_formulas(zz):
    oracle = zz.oracle
    assert oracle.x_length((3, -2)) == 5
    assert oracle.relative_length_exact((3, -2)) == 3
    assert oracle.relative_length_exact((0, -2)) == 2
    assert oracle.format_element((1, 1)) == "a b"
    assert oracle.format_element((0, 0)) == "1"


def test_bs_conjugation_doubles(bs12):
    g = bs12.element("t^-1 @H(a) t")
    assert g == bs12.oracle.embed(0, 2)
    assert bs12.fmt(g) == "a^2"
    assert bs12.fmt(bs12.element("t a t^-1")) == "t a t^-1"
    assert bs12.element("t a t^-1") == (0, Fraction(1, 2))


def test_bs_has_no_closed_relative_length(bs12):
    assert not bs12.oracle.has_exact_relative_length
    with pytest.raises(CapabilityAbsentError):
        bs12.oracle.relative_length_exact(bs12.oracle.identity)


def test_free_product_orders(fp23):
    oracle = fp23.oracle
    assert oracle.is_identity(fp23.element("s s"))
    assert oracle.is_identity(fp23.element("u u u"))
    assert fp23.fmt(fp23.element("u u")) == "u^-1"
    assert oracle.infinite_order_reason(fp23.element("s u")) is not None
    assert oracle.infinite_order_reason(fp23.element("u")) is None


def test_free_group_cosets(f2relx):
    oracle = f2relx.oracle
    assert oracle.coset_key(0, f2relx.element("y")) == oracle.coset_key(0, f2relx.element("y x^3"))
    assert oracle.coset_key(0, f2relx.element("y")) != oracle.coset_key(0, f2relx.element("x y"))
    assert oracle.member(0, f2relx.element("x^-4")) == -4
    assert oracle.member(0, f2relx.element("x y")) is None


def test_x_ball_is_breadth_first_and_sorted(f2):
    ball = f2.oracle.enumerate_x_ball(1)
    assert [f2.fmt(g) for g in ball] == ["1", "x", "x^-1", "y", "y^-1"]
    assert len(f2.oracle.enumerate_x_ball(2)) == 17


def test_extra_generators_disable_closed_formulas():
    cfg = GroupConfig(
        kind="free_rel_cyclic",
        generators=["x", "y"],
        subgroups={"H": SubgroupSpec(params={"word": "x", "generator": "x"})},
        options={"extra_generators": {"z": "x y"}},
    )
    pres, oracle = build_group(cfg)
    assert pres.generator_names == ("x", "y", "z")
    assert not oracle.has_exact_relative_length
    assert oracle.x_length((1, 2)) == 1
