from fractions import Fraction

import pytest

from app.core.exceptions import ExactnessUnavailableError
from app.services.graph import Path, rel_geodesic
from app.services.paths import analyze, classify, is_quasi_geodesic, k_similar, locally_minimal, pooled_classes


def _path(group, text, base=None):
    base = group.oracle.identity if base is None else base
    return Path.build(group.oracle, base, group.word(text))


def test_baumslag_solitar_components(bs12):
    report = analyze(_path(bs12, "@H(a^2) t^-1 @H(a) t @H(a^3)"), bs12.oracle)
    assert [(c.start, c.stop) for c in report.components] == [(0, 1), (2, 3), (4, 5)]
    assert sorted(report.classes) == [[0, 2], [1]]
    assert report.isolated == [False, True, False]
    assert report.backtracking
    assert report.components[1].x_span == 1


def test_phase_vertices_skip_syllable_interiors(zz):
    report = analyze(_path(zz, "b @H(a^2) @H(a^3) b^-1"), zz.oracle)
    assert report.phase_vertices == [0, 1, 3, 4]
    assert len(report.components) == 1
    assert report.components[0].value == 5


def test_geodesics_have_isolated_components(zz, f2relx):
    for group in (zz, f2relx):
        for g in group.oracle.enumerate_x_ball(3):
            path = rel_geodesic(group.metric, group.oracle.identity, g)
            report = analyze(path, group.oracle)
            assert all(report.isolated)
            assert all(c.stop - c.start == 1 for c in report.components)


def test_locally_minimal_keeps_phase_vertices(zz):
    path = _path(zz, "b @H(a^2) @H(a^3) b^-1")
    minimal = locally_minimal(path, zz.oracle)
    assert zz.fmt_word(minimal.word) == "b @H(a^5) b^-1"
    before = [path.vertices[v] for v in analyze(path, zz.oracle).phase_vertices]
    after = [minimal.vertices[v] for v in analyze(minimal, zz.oracle).phase_vertices]
    assert before == after


def test_locally_minimal_merges_a_two_letter_component(f2relx):
    minimal = locally_minimal(_path(f2relx, "@H(x) @H(x^2) y"), f2relx.oracle)
    assert f2relx.fmt_word(minimal.word) == "@H(x^3) y"


def test_locally_minimal_keeps_an_identity_component_that_backtracks(zz):
    path = _path(zz, "@H(a) b b^-1 @H(a) @H(a^-1)")
    assert analyze(path, zz.oracle).backtracking
    minimal = locally_minimal(path, zz.oracle)
    assert minimal.word == path.word
    assert analyze(minimal, zz.oracle).backtracking


def test_locally_minimal_keeps_a_lone_identity_component(zz):
    path = _path(zz, "b @H(a^2) @H(a^-2) b^-1")
    minimal = locally_minimal(path, zz.oracle)
    assert minimal.word == path.word
    assert len(analyze(minimal, zz.oracle).classes) == 1


def test_locally_minimal_drops_a_redundant_identity_component(zz):
    path = _path(zz, "@H(a) b b^-1 @H(a^2) @H(a^-2) b b^-1 @H(a)")
    minimal = locally_minimal(path, zz.oracle)
    assert minimal.word == zz.word("@H(a) b b^-1 b b^-1 @H(a)")


@pytest.mark.parametrize("text", [
    "b @H(a^2) @H(a^3) b^-1",
    "@H(a) b b^-1 @H(a) @H(a^-1)",
    "b @H(a^2) @H(a^-2) b^-1",
    "@H(a) b b^-1 @H(a^2) @H(a^-2) b b^-1 @H(a)",
    "@H(a) b @H(a^3) b^-1",
])
def test_locally_minimal_preserves_component_structure(zz, text):
    path = _path(zz, text)
    minimal = locally_minimal(path, zz.oracle)
    before, after = analyze(path, zz.oracle), analyze(minimal, zz.oracle)
    assert len(after.classes) == len(before.classes)
    assert after.backtracking == before.backtracking
    assert (minimal.start, minimal.end) == (path.start, path.end)
    assert {path.vertices[v] for v in before.phase_vertices} == {minimal.vertices[v] for v in after.phase_vertices}
    assert locally_minimal(minimal, zz.oracle).word == minimal.word


def test_locally_minimal_leaves_single_letter_components(bs12):
    path = _path(bs12, "@H(a^2) t^-1 @H(a) t @H(a^3)")
    assert locally_minimal(path, bs12.oracle) is path


def test_pooled_classes_across_paths(zz):
    pooled = pooled_classes(zz.oracle, [_path(zz, "@H(a^2)"), _path(zz, "@H(a^3)"), _path(zz, "b @H(a)")])
    sizes = sorted(len(members) for members in pooled.values())
    assert sizes == [1, 2]


def test_quasi_geodesic_constants(zz):
    path = _path(zz, "a a")
    assert not is_quasi_geodesic(path, zz.metric, Fraction(1), Fraction(0))
    assert is_quasi_geodesic(path, zz.metric, Fraction(2), Fraction(0))
    assert is_quasi_geodesic(path, zz.metric, Fraction(1), Fraction(1))


def test_classify_geodesic(zz):
    result = classify(_path(zz, "b @H(a^5)"), zz.metric, 1, 0)
    assert result.is_geodesic
    assert result.local_k == 2


def test_classify_local_bound_check(zz):
    result = classify(_path(zz, "a a"), zz.metric, 2, 0, delta=0)
    assert not result.is_geodesic
    assert result.is_quasi_geodesic
    assert result.local_k == 1
    assert (result.lemma_lambda, result.lemma_c) == (1, 0)
    assert result.lemma_holds is False


def test_classify_needs_certified_distances(bs12):
    with pytest.raises(ExactnessUnavailableError):
        classify(_path(bs12, "t a t^-1"), bs12.metric, 1, 0)


def test_k_similar(zz):
    p = _path(zz, "b")
    q = _path(zz, "b", base=zz.element("a"))
    assert k_similar(p, q, zz.oracle, 1)
    assert not k_similar(p, q, zz.oracle, 0)
