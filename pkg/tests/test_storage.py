import json

import pytest

from app.core.exceptions import GroupConfigError, RhgtError
from app.schemas.group_config import GroupConfig, SubgroupSpec
from app.services.filling import DehnRow, DehnTable, rel_area, verify_certificate
from app.storage.file_handler import (
    BaselineStore,
    certificate_from_dict,
    certificate_to_dict,
    load_group,
    load_group_config,
    read_certificate,
    read_dehn_csv,
    save_group_config,
    write_certificate,
    write_dehn_csv,
)


# --- group files ---

def test_missing_group_file(tmp_path):
    with pytest.raises(GroupConfigError):
        load_group_config(tmp_path / "absent.json")


def test_group_file_must_be_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{kind: zz", encoding="utf-8")
    with pytest.raises(GroupConfigError):
        load_group_config(path)


def test_group_file_rejects_unknown_fields(tmp_path):
    path = tmp_path / "extra.json"
    path.write_text(json.dumps({"kind": "zz", "colour": "blue"}), encoding="utf-8")
    with pytest.raises(GroupConfigError):
        load_group_config(path)

    path.write_text(json.dumps({"kind": "heisenberg"}), encoding="utf-8")
    with pytest.raises(GroupConfigError):
        load_group_config(path)


def test_group_config_round_trip(tmp_path):
    cfg = GroupConfig(
        kind="free_rel_cyclic",
        generators=["x", "y"],
        subgroups={"H": SubgroupSpec(params={"word": "x", "generator": "x"})},
    )
    path = tmp_path / "f2relx.json"
    save_group_config(path, cfg)
    assert load_group_config(path) == cfg
    pres, _ = load_group(path)
    assert pres.generator_names == ("x", "y")


def test_shipped_groups_load(groups_dir):
    for path in sorted(groups_dir.glob("*.json")):
        pres, oracle = load_group(path)
        assert pres.generator_names
        assert oracle.is_identity(oracle.identity)


# --- certificates ---

def _certificate(zz):
    word = zz.word("@H(a^-2) b^-1 @H(a^2) b")
    return word, rel_area(zz.pres, zz.oracle, word).certificate


def test_certificate_file_round_trip(zz, tmp_path):
    word, certificate = _certificate(zz)
    path = tmp_path / "cert.json"
    write_certificate(path, certificate, zz.pres)
    loaded = read_certificate(path, zz.pres)
    assert loaded.start == certificate.start
    assert loaded.steps == certificate.steps
    assert json.loads(path.read_text(encoding="utf-8"))["final"] == ""
    assert loaded.area == 2
    assert verify_certificate(zz.pres, word, loaded)


def test_certificate_embedded_in_a_report(zz):
    word, certificate = _certificate(zz)
    report = {"command": "wp", "status": "trivial", "certificate": certificate_to_dict(certificate, zz.pres)}
    loaded = certificate_from_dict(report, zz.pres)
    assert verify_certificate(zz.pres, word, loaded)


def test_malformed_certificates(zz, tmp_path):
    with pytest.raises(RhgtError):
        certificate_from_dict({"start": "b", "steps": [{"relator": 0}], "final": ""}, zz.pres)

    path = tmp_path / "cert.json"
    path.write_text("not json", encoding="utf-8")
    with pytest.raises(RhgtError):
        read_certificate(path, zz.pres)
    with pytest.raises(RhgtError):
        read_certificate(tmp_path / "absent.json", zz.pres)


def test_certificate_final_word_must_be_empty(zz):
    _, certificate = _certificate(zz)
    data = certificate_to_dict(certificate, zz.pres)
    assert data["final"] == ""

    missing = {k: v for k, v in data.items() if k != "final"}
    with pytest.raises(RhgtError):
        certificate_from_dict(missing, zz.pres)
    with pytest.raises(RhgtError):
        certificate_from_dict({**data, "final": "b"}, zz.pres)


# --- Dehn tables ---

def test_dehn_csv_round_trip(tmp_path):
    table = DehnTable([DehnRow(0, 0, "exact", 1), DehnRow(1, 0, "exact", 2), DehnRow(2, 3, "cap-hit", 5)])
    path = tmp_path / "dehn.csv"
    write_dehn_csv(path, table)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "n,area,status"
    loaded = read_dehn_csv(path)
    assert [(r.n, r.area, r.status) for r in loaded.rows] == [(0, 0, "exact"), (1, 0, "exact"), (2, 3, "cap-hit")]


# --- baselines ---

def test_baseline_is_recorded_once(tmp_path):
    store = BaselineStore(tmp_path / "baselines")
    assert store.get("delta-zz") is None

    first = store.check("delta-zz", 2)
    assert first.created and not first.regressed
    assert store.get("delta-zz") == 2

    better = store.check("delta-zz", 1)
    assert not better.created and not better.regressed
    worse = store.check("delta-zz", 3)
    assert worse.regressed
    assert worse.baseline == 2
    assert store.get("delta-zz") == 2


def test_baseline_directory_follows_settings(baseline_dir):
    store = BaselineStore()
    store.check("eps", 4)
    assert (baseline_dir / "eps.json").exists()
