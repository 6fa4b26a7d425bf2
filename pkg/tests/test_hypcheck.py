import pytest

from app.core.exceptions import PreconditionError
from app.services.graph import Path, truncate
from app.services.hypcheck import (
    bcp_check,
    bcp_scan,
    estimate_delta,
    four_point_delta,
    nu_scan,
    quasiconvexity_scan,
    sample_indices,
    triangle_report,
)


def _path(group, text):
    return Path.build(group.oracle, group.oracle.identity, group.word(text))


def test_sample_indices_are_nested_and_seeded():
    assert sample_indices(10, None, 0) == list(range(10))
    assert sample_indices(10, 20, 0) == list(range(10))
    small, large = sample_indices(100, 5, 7), sample_indices(100, 10, 7)
    assert set(small) <= set(large)
    assert sample_indices(100, 5, 7) == small


def test_free_group_triangles_are_tripods(f2):
    report = estimate_delta(f2.metric, 2)
    assert (report.delta, report.xi, report.nu) == (0, 0, 0)
    assert report.skipped == 0
    assert report.exhaustive
    assert report.triangles == 17 * 18 // 2


def test_triangle_report_gromov_products(f2):
    tri = triangle_report(f2.metric, f2.element("x"), f2.element("y"))
    assert tri.sides == ("x", "y", "x^-1 y")
    assert (tri.a, tri.b, tri.c) == (0, 1, 1)
    assert tri.rips == 0


def test_zz_delta_is_sampled_reproducibly(zz):
    first = estimate_delta(zz.metric, 2, sample=30, seed=3)
    second = estimate_delta(zz.metric, 2, sample=30, seed=3)
    assert first.triangles + first.skipped == 30
    assert not first.exhaustive
    assert (first.delta, first.xi, first.nu) == (second.delta, second.xi, second.nu)


def test_nu_and_quadrilaterals_in_a_tree(f2):
    report = nu_scan(f2.metric, 2, quadrilaterals=5)
    assert report.nu == 0
    assert report.quadrilaterals == 5
    assert report.quad_nu == 0
    assert report.quad_within_bound


def test_four_point_delta_of_a_tree(f2):
    assert four_point_delta(truncate(f2.pres, f2.oracle, 2), sample=50) == 0


def test_bcp_counterexample_in_zz(zz):
    p, q = _path(zz, "@H(a^10)"), _path(zz, "b @H(a^10)")
    report = bcp_check(zz.metric, p, q, k=1)
    assert report.preconditions == []
    assert report.margins == {"1": 10, "2": 0, "3": 1}
    assert report.epsilon == 10


def test_bcp_threshold_reports_violations(zz):
    p, q = _path(zz, "@H(a^10)"), _path(zz, "b @H(a^10)")
    report = bcp_check(zz.metric, p, q, k=1, threshold=5)
    assert not report.passed
    assert {(v.condition, v.direction) for v in report.violations} == {(1, "p->q"), (1, "q->p")}


def test_bcp_farb_form(zz):
    p, q = _path(zz, "@H(a^10)"), _path(zz, "b @H(a^10)")
    report = bcp_check(zz.metric, p, q, mode="farb")
    assert report.preconditions == []
    assert set(report.margins) == {"1", "2"}


def test_bcp_preconditions_are_reported(zz):
    p, q = _path(zz, "@H(a^10)"), _path(zz, "b @H(a^10)")
    report = bcp_check(zz.metric, p, q, k=0)
    assert report.preconditions == ["p and q are not 0-similar"]
    assert not report.passed

    backtracking = _path(zz, "@H(a) b b^-1 @H(a)")
    report = bcp_check(zz.metric, backtracking, backtracking, k=1)
    assert any("backtracks" in item for item in report.preconditions)


def test_bcp_connected_components_in_free_group(f2relx):
    p, q = _path(f2relx, "@H(x^3) y"), _path(f2relx, "x @H(x^2) y")
    report = bcp_check(f2relx.metric, p, q, lam=2, k=1)
    assert report.preconditions == []
    assert report.margins == {"1": 0, "2": 1, "3": 1}


def test_bcp_mode_is_validated(zz):
    p = _path(zz, "b")
    with pytest.raises(PreconditionError):
        bcp_check(zz.metric, p, p, mode="strict")


def test_bcp_scan_is_reproducible(f2relx):
    first = bcp_scan(f2relx.metric, 2, 10, k=1, seed=5)
    second = bcp_scan(f2relx.metric, 2, 10, k=1, seed=5)
    assert first.pairs == 10
    assert (first.epsilon, first.failures, first.worst) == (second.epsilon, second.failures, second.worst)


def test_quasiconvexity_of_cyclic_subgroups(zz, f2relx):
    diagonal = quasiconvexity_scan(zz.metric, [zz.element("a b")], 2)
    assert diagonal.sigma == 2
    assert diagonal.subgroup_size == 5
    assert not diagonal.capped

    parabolic = quasiconvexity_scan(f2relx.metric, [f2relx.element("x")], 3)
    assert parabolic.sigma == 0
    assert parabolic.generators == ["x"]


def test_quasiconvexity_cap(zz):
    report = quasiconvexity_scan(zz.metric, [zz.element("b")], 10, cap=4)
    assert report.capped
    assert report.subgroup_size == 4
    assert report.sigma == 0


@pytest.mark.parametrize("n", [10, 20, 40])
def test_bcp_violation_grows_with_the_power(zz, n):
    p, q = _path(zz, f"@H(a^{n})"), _path(zz, f"b @H(a^{n})")
    report = bcp_check(zz.metric, p, q, k=1, threshold=5)
    assert report.margins["1"] == n
    assert any(v.condition == 1 for v in report.violations)


@pytest.mark.slow
def test_bcp_baseline_on_a_hundred_pairs(f2relx, baseline_dir):
    from app.storage.file_handler import BaselineStore

    store = BaselineStore()
    first = bcp_scan(f2relx.metric, 3, 100, k=2, seed=0)
    assert first.pairs == 100
    assert store.check("f2relx-bcp", first.epsilon).created
    again = bcp_scan(f2relx.metric, 3, 100, k=2, seed=0)
    assert not store.check("f2relx-bcp", again.epsilon).regressed
