import json

import pytest

from app.cli import main

COMMUTATOR = "@H(a^-2) b^-1 @H(a^2) b"


@pytest.fixture
def group(groups_dir):
    def path(name: str) -> str:
        return str(groups_dir / f"{name}.json")
    return path


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _report(capsys, *argv):
    code, out, _ = _run(capsys, *argv)
    return code, json.loads(out)


def test_length_report(capsys, group):
    code, report = _report(capsys, "length", "--group", group("zz"), "--word", "b @H(a^5) b^-1")
    assert code == 0
    assert report["schema_version"] == "1"
    assert (report["command"], report["group"], report["status"]) == ("length", "zz", "definite")
    assert (report["length"], report["exact"]) == (1, True)


def test_area_unknown_within_caps(capsys, group):
    code, report = _report(capsys, "area", "--group", group("zz"), "-w", "@H(a^-4) b^-1 @H(a^4) b", "--max-area", "2")
    assert code == 2
    assert report["status"] == "unknown"
    assert (report["reason"], report["lower_bound"]) == ("max_area", 4)


def test_word_problem_certificate_round_trip(capsys, group, tmp_path):
    code, out, _ = _run(capsys, "wp", "--group", group("zz"), "--word", COMMUTATOR)
    assert code == 0
    report = json.loads(out)
    assert (report["answer"], report["area"]) == ("trivial", 2)

    path = tmp_path / "wp.json"
    path.write_text(out, encoding="utf-8")
    code, verified = _report(capsys, "area", "--group", group("zz"), "--verify", str(path))
    assert code == 0
    assert verified["verified"] is True

    report["certificate"]["steps"] = report["certificate"]["steps"][:-1]
    path.write_text(json.dumps(report), encoding="utf-8")
    code, verified = _report(capsys, "area", "--group", group("zz"), "--verify", str(path))
    assert code == 1
    assert verified["verified"] is False


def test_bad_word_is_an_input_error(capsys, group):
    code, out, err = _run(capsys, "length", "--group", group("zz"), "--word", "b^")
    assert code == 1
    assert out == ""
    assert "WordSyntaxError" in err


def test_missing_group_flag(capsys):
    code, _, _ = _run(capsys, "length", "--word", "b")
    assert code == 1


def test_missing_group_file(capsys, tmp_path):
    code, _, err = _run(capsys, "length", "--group", str(tmp_path / "absent.json"), "--word", "b")
    assert code == 1
    assert "GroupConfigError" in err


def test_help(capsys):
    code, out, _ = _run(capsys, "--help")
    assert code == 0
    assert "dehn-scan" in out


def test_dehn_scan_writes_csv(capsys, group, tmp_path):
    path = tmp_path / "dehn.csv"
    code, report = _report(capsys, "dehn-scan", "--group", group("fp23"), "--N", "2", "--csv", str(path))
    assert code == 0
    assert [row["n"] for row in report["rows"]] == [0, 1, 2]
    assert path.read_text(encoding="utf-8").splitlines()[0] == "n,area,status"


def test_text_output(capsys, group):
    code, out, _ = _run(capsys, "reduce", "--group", group("zz"), "--word", "b b^-1", "--out", "text")
    assert code == 0
    assert "status: definite" in out.splitlines()
    assert "is_identity: True" in out.splitlines()


def test_conjugacy_not_found_is_unknown(capsys, group):
    code, report = _report(capsys, "conjugate", "--group", group("f2"), "--f", "x", "--g", "y", "--radius", "2")
    assert code == 2
    assert report["found"] is False


def test_bcp_scan_baseline(capsys, group, baseline_dir):
    argv = ["bcp", "--group", group("f2relx"), "--sample", "10", "--k", "1", "--seed", "5", "--baseline", "f2relx-eps"]
    code, first = _report(capsys, *argv)
    assert code == 0
    assert first["pairs"] == 10
    assert first["baseline_created"] is True
    assert (baseline_dir / "f2relx-eps.json").exists()

    code, second = _report(capsys, *argv)
    assert code == 0
    assert second["baseline_created"] is False
    assert second["regressed"] is False


def test_bcp_preconditions_are_not_failures(capsys, group):
    code, report = _report(capsys, "bcp", "--group", group("zz"), "--f", "@H(a^10)", "--g", "b @H(a^10)", "--k", "0")
    assert code == 0
    assert report["preconditions"] == ["p and q are not 0-similar"]
    assert report["passed"] is False


def test_symmetric_pair(capsys, group):
    code, report = _report(capsys, "sympair", "--group", group("f2relx"), "--f", "x y", "--g", "y x", "--radius", "2")
    assert code == 0
    assert report["t"] == "x"
    assert report["kappa"] == 0
