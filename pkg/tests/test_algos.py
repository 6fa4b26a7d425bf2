from fractions import Fraction

import pytest

from app.core.exceptions import PreconditionError
from app.services.algos import (
    ConjugacyWitness,
    NotFound,
    ParabolicWitness,
    PowerConjugacyFound,
    RootFound,
    SymmetricPair,
    conjugate_search,
    element_order,
    enumerate_atomic_cycles,
    finite_order_scan,
    generic_word_problem,
    is_f_trivial,
    is_parabolic,
    membership,
    min_symmetric_pair,
    power_conjugacy_search,
    root_search,
    synchronous_check,
    translation_number,
    translation_scaling,
)
from app.services.filling import DehnRow, DehnTable, verify_certificate
from app.services.graph import Path
from app.services.words import cyclic_class_key


# --- word problem and membership ---

def test_word_problem_trivial_with_certificate(zz):
    word = zz.word("@H(a^-2) b^-1 @H(a^2) b")
    result = generic_word_problem(zz.pres, zz.oracle, word)
    assert (result.status, result.area) == ("trivial", 2)
    assert verify_certificate(zz.pres, word, result.certificate)


def test_word_problem_nontrivial(zz):
    result = generic_word_problem(zz.pres, zz.oracle, zz.word("@H(a) b"))
    assert result.status == "nontrivial"
    assert result.normal_form == "a b"


def test_word_problem_unknown_within_caps(zz):
    result = generic_word_problem(zz.pres, zz.oracle, zz.word("@H(a^-4) b^-1 @H(a^4) b"), max_area=2)
    assert result.status == "unknown"
    assert (result.reason, result.lower_bound) == ("max_area", 4)


def test_oracle_membership(zz):
    inside = membership(zz.pres, zz.oracle, 0, zz.element("b @H(a^5) b^-1"))
    assert (inside.status, inside.handle) == ("in", "a^5")
    assert membership(zz.pres, zz.oracle, 0, zz.element("b")).status == "not-in"


def test_omega_membership(bs12):
    found = membership(bs12.pres, bs12.oracle, 0, bs12.element("@H(a^4)"), mode="omega")
    assert (found.status, found.handle) == ("in", "a^4")

    t = bs12.element("t")
    assert membership(bs12.pres, bs12.oracle, 0, t, mode="omega").status == "unknown"

    table = DehnTable([DehnRow(0, 0, "exact", 0), DehnRow(1, 1, "exact", 2)])
    definite = membership(bs12.pres, bs12.oracle, 0, t, mode="omega", table=table)
    assert definite.status == "not-in"
    assert definite.radius == 8


def test_membership_mode_is_validated(zz):
    with pytest.raises(PreconditionError):
        membership(zz.pres, zz.oracle, 0, zz.element("b"), mode="guess")


# --- parabolicity and conjugacy ---

def test_parabolic_conjugator(f2relx):
    result = is_parabolic(f2relx.oracle, f2relx.element("y x^5 y^-1"), 1)
    assert isinstance(result, ParabolicWitness)
    assert f2relx.fmt(result.t) == "y"
    assert result.image == 5
    g = f2relx.element("y x^5 y^-1")
    assert f2relx.oracle.embed(result.slot, result.image) == f2relx.oracle.conjugate(g, result.t)


def test_hyperbolic_element_is_not_parabolic(f2relx):
    result = is_parabolic(f2relx.oracle, f2relx.element("y"), 3)
    assert isinstance(result, NotFound)
    assert result.searched == len(f2relx.oracle.enumerate_x_ball(3))


def test_malnormality_of_the_peripheral_subgroup(f2relx, zz):
    oracle = f2relx.oracle
    for g in oracle.enumerate_x_ball(2):
        if oracle.member(0, g) is not None:
            continue
        for k in range(1, 5):
            assert oracle.member(0, oracle.conjugate(oracle.embed(0, k), g)) is None
    # ⟨a⟩ is normal in ℤ², so it is far from malnormal
    assert zz.oracle.member(0, zz.oracle.conjugate(zz.oracle.embed(0, 1), zz.element("b"))) == 1


def test_conjugate_search(f2relx):
    result = conjugate_search(f2relx.oracle, f2relx.element("x y"), f2relx.element("y x"), 1)
    assert isinstance(result, ConjugacyWitness)
    assert f2relx.fmt(result.t) == "x"
    assert result.x_length == 1
    assert isinstance(conjugate_search(f2relx.oracle, f2relx.element("x"), f2relx.element("y"), 2), NotFound)


def _cyclic_reducer():
    """Cyclic reduction through sympy's free groups, independent of the toolkit's oracle."""
    free_groups = pytest.importorskip("sympy.combinatorics.free_groups")
    F, x, y = free_groups.free_group("x, y")
    gens = (x, y)

    def reduce(g) -> tuple:
        w = F.identity
        for letter in g:
            w = w * gens[abs(letter) - 1] ** (1 if letter > 0 else -1)
        return tuple(w.identity_cyclic_reduction().letter_form)

    return reduce


def _assert_conjugacy_agrees(f2, radius: int, search_radius: int) -> None:
    reduce = _cyclic_reducer()
    ball = f2.oracle.enumerate_x_ball(radius)
    cyclic = {g: reduce(g) for g in ball}
    for f in ball:
        word = cyclic[f]
        rotations = {word[i:] + word[:i] for i in range(max(len(word), 1))}
        for g in ball:
            found = isinstance(conjugate_search(f2.oracle, f, g, search_radius), ConjugacyWitness)
            assert found == (cyclic[g] in rotations), (f2.fmt(f), f2.fmt(g))


def test_conjugacy_agrees_with_cyclic_reduction(f2):
    _assert_conjugacy_agrees(f2, 2, 2)


@pytest.mark.slow
def test_conjugacy_agrees_with_cyclic_reduction_at_radius_three(f2):
    _assert_conjugacy_agrees(f2, 3, 4)


def test_minimal_symmetric_pair(f2relx):
    f, g = f2relx.element("x y"), f2relx.element("y x")
    pair = min_symmetric_pair(f2relx.metric, f, g, 2)
    assert isinstance(pair, SymmetricPair)
    assert f2relx.fmt(pair.t) == "x"
    assert pair.relative_length == 1
    assert pair.p.word == pair.q.word
    oracle = f2relx.oracle
    assert oracle.multiply(oracle.invert(pair.p.start), pair.q.start) == f
    assert oracle.multiply(oracle.invert(pair.p.end), pair.q.end) == g
    assert pair.synchronous

    report = synchronous_check(f2relx.metric, pair.p, pair.q)
    assert report.kappa == 0
    assert report.endpoint_distances == (2, 2)


def test_synchronous_check_needs_equal_labels(f2relx):
    oracle = f2relx.oracle
    p = Path.build(oracle, oracle.identity, f2relx.word("x"))
    q = Path.build(oracle, oracle.identity, f2relx.word("y"))
    with pytest.raises(PreconditionError):
        synchronous_check(f2relx.metric, p, q)


def test_synchronous_check_needs_geodesics(f2relx):
    oracle = f2relx.oracle
    p = Path.build(oracle, oracle.identity, f2relx.word("x x"))
    with pytest.raises(PreconditionError):
        synchronous_check(f2relx.metric, p, p)


# --- translation numbers and orders ---

def test_translation_numbers(f2relx):
    assert translation_number(f2relx.metric, f2relx.element("x y"), 4).value == 2
    estimate = translation_number(f2relx.metric, f2relx.element("x"), 4)
    assert estimate.value == Fraction(1, 4)
    assert estimate.terms == [1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]
    assert all(estimate.exact)


def test_translation_scaling_never_goes_below(f2relx):
    rows = translation_scaling(f2relx.metric, f2relx.element("x y^2"), 3)
    assert [row.k for row in rows] == [2, 3]
    assert all(row.gap >= 0 for row in rows)


def test_translation_needs_positive_n(f2relx):
    with pytest.raises(PreconditionError):
        translation_number(f2relx.metric, f2relx.element("x"), 0)


def test_element_orders(fp23):
    assert element_order(fp23.oracle, fp23.element("s u")).kind == "infinite"
    assert (element_order(fp23.oracle, fp23.element("u")).kind, element_order(fp23.oracle, fp23.element("u")).order) == ("finite", 3)
    assert element_order(fp23.oracle, fp23.element("s")).order == 2
    assert element_order(fp23.oracle, fp23.oracle.identity).order == 1


def test_finite_orders_are_parabolic(fp23):
    report = finite_order_scan(fp23.oracle, 2)
    assert report.parabolic == [2, 3]
    assert report.hyperbolic == []
    assert report.unknown == 0


# --- roots and power conjugacy ---

def test_root_of_a_cube(f2relx):
    result = root_search(f2relx.oracle, f2relx.element("x y x y x y"), 2, 4)
    assert isinstance(result, RootFound)
    assert (f2relx.fmt(result.f), result.n, f2relx.fmt(result.t)) == ("x y", 3, "1")


def test_primitive_element_has_no_root(f2relx):
    assert isinstance(root_search(f2relx.oracle, f2relx.element("x y"), 2, 4), NotFound)
    assert isinstance(root_search(f2relx.oracle, f2relx.oracle.identity, 2, 4), NotFound)
    with pytest.raises(PreconditionError):
        root_search(f2relx.oracle, f2relx.element("x y"), 2, 1)


def test_power_conjugacy(f2relx):
    result = power_conjugacy_search(f2relx.oracle, f2relx.element("x y"), f2relx.element("y x"), 2, 1)
    assert isinstance(result, PowerConjugacyFound)
    assert (result.k, result.l, f2relx.fmt(result.t)) == (1, 1, "x")


def test_power_conjugacy_skips_parabolic_powers(f2relx):
    result = power_conjugacy_search(f2relx.oracle, f2relx.element("x"), f2relx.element("x"), 2, 1)
    assert isinstance(result, NotFound)
    assert result.reason == "parabolic powers only"


# --- atomic cycles ---

def test_atomic_cycles_of_free_product_are_f_trivial(fp23):
    atoms = enumerate_atomic_cycles(fp23.metric, 3)
    assert atoms.cycles
    assert atoms.essential == []
    assert not atoms.capped


def test_commutator_cycle_is_essential(zz):
    atoms = enumerate_atomic_cycles(zz.metric, 4, sub_radius=2)
    slots = zz.pres.slots
    target = cyclic_class_key(zz.word("@H(a) b @H(a^-1) b^-1"), slots)
    essential = {cyclic_class_key(c.word, slots) for c in atoms.essential}
    assert target in essential
    assert atoms.capped


def test_identified_generators_make_cycles_f_trivial(zz):
    assert is_f_trivial(zz.pres, zz.word("a @H(a^-1)"))
    assert not is_f_trivial(zz.pres, zz.word("@H(a) b @H(a^-1) b^-1"))


def test_translation_number_of_a_hyperbolic_element_is_stable(f2relx):
    estimate = translation_number(f2relx.metric, f2relx.element("x y"), 16)
    assert estimate.terms == [2] * 16
    assert all(estimate.exact)
