from app.core.config import settings
from app.services.presentation import (
    RelPresentation,
    check_reduced,
    compute_omega,
    omega_generation_check,
    omega_length,
    parse_word,
)
from app.services.words import invert_word, rotations


def test_symmetrized_set_is_closed(bs12):
    pres = bs12.pres
    symmetrized = set(pres.symmetrized)
    for relator in pres.symmetrized:
        assert invert_word(relator, pres.slots) in symmetrized
        for rotation in rotations(relator):
            assert rotation in symmetrized


def test_max_relator_length(zz, fp23):
    assert zz.pres.max_relator_length == 4
    assert fp23.pres.max_relator_length == 2
    assert RelPresentation(("x",), ()).max_relator_length == 0


def test_omega_of_zz(zz):
    assert compute_omega(zz.pres)[0] == frozenset({1, -1})


def test_omega_of_bs12(bs12):
    assert compute_omega(bs12.pres)[0] == frozenset({1, -1, 2, -2})


def test_free_group_has_empty_omega(f2):
    assert compute_omega(f2.pres).is_empty()


def test_shipped_presentations_are_reduced(zz, bs12, f2relx, fp23):
    for group in (zz, bs12, f2relx, fp23):
        assert check_reduced(group.pres) == []


def test_multi_letter_syllable_is_flagged(zz):
    relator = parse_word("@H(a) @H(a) b^-1 @H(a^-2) b", zz.pres)
    pres = zz.pres.with_relators([relator])
    violations = check_reduced(pres)
    assert [v.kind for v in violations] == ["multi-letter syllable"]
    assert violations[0].detail == "@H(a) @H(a)"


def test_unreduced_relator_is_flagged(zz):
    relator = parse_word("b b^-1 @H(a) a^-1", zz.pres)
    violations = check_reduced(zz.pres.with_relators([relator]))
    assert [v.kind for v in violations] == ["not F-reduced"]


def test_omega_length_in_infinite_cyclic(zz):
    slot = zz.pres.slots[0]
    omega = compute_omega(zz.pres)[0]
    assert omega_length(slot, omega, 0, settings.OMEGA_BFS_CAP) == 0
    assert omega_length(slot, omega, 5, settings.OMEGA_BFS_CAP) == 5
    assert omega_length(slot, omega, -3, settings.OMEGA_BFS_CAP) == 3


def test_omega_length_uses_larger_steps(bs12):
    slot = bs12.pres.slots[0]
    omega = compute_omega(bs12.pres)[0]
    assert omega_length(slot, omega, 4, settings.OMEGA_BFS_CAP) == 2
    assert omega_length(slot, omega, 5, settings.OMEGA_BFS_CAP) == 3


def test_omega_length_is_inconclusive_past_the_cap(zz):
    slot = zz.pres.slots[0]
    omega = compute_omega(zz.pres)[0]
    assert omega_length(slot, omega, 50, 10) is None


def test_omega_generates_the_subgroup(bs12, fp23):
    for group in (bs12, fp23):
        reports = omega_generation_check(group.pres, compute_omega(group.pres), 4, settings.OMEGA_BFS_CAP)
        assert reports
        assert all(report.ok for report in reports)
