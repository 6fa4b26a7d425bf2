import csv
import json
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import GroupConfigError, RhgtError
from app.schemas.group_config import GroupConfig
from app.services.filling import AreaCertificate, CertificateStep, DehnRow, DehnTable
from app.services.oracles import GroupOracle
from app.services.presentation import RelPresentation, format_word, parse_word
from app.services.zoo import build_group


def load_group_config(path: str | FilePath) -> GroupConfig:
    """
    Reads and validates a group definition file.

    Raises:
        GroupConfigError: the file is missing, is not JSON, or has unknown or invalid fields.
    """
    path = FilePath(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise GroupConfigError(f"cannot read group file {path}: {e}") from e
    try:
        return GroupConfig.model_validate_json(text)
    except ValidationError as e:
        raise GroupConfigError(f"invalid group file {path}: {e}") from e


def load_group(path: str | FilePath) -> tuple[RelPresentation, GroupOracle]:
    cfg = load_group_config(path)
    logger.debug(f"Loaded group file {path} ({cfg.kind})")
    return build_group(cfg)


def save_group_config(path: str | FilePath, cfg: GroupConfig) -> None:
    FilePath(path).write_text(cfg.model_dump_json(indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# Area certificates
# ---------------------------------------------------------------------------

def certificate_to_dict(certificate: AreaCertificate, pres: RelPresentation) -> Dict[str, Any]:
    return {
        "start": format_word(certificate.start, pres),
        "area": certificate.area,
        "steps": [{"relator": s.relator, "position": s.position} for s in certificate.steps],
        # a filling always ends on the empty word
        "final": format_word(certificate.final, pres) if certificate.final else "",
    }


def certificate_from_dict(data: Dict[str, Any], pres: RelPresentation) -> AreaCertificate:
    """
    Accepts a bare certificate or a command report that carries one under "certificate".

    Raises:
        RhgtError: a field is missing or malformed, or `final` is not the empty word.
    """
    if "certificate" in data and isinstance(data["certificate"], dict):
        data = data["certificate"]
    if "final" not in data:
        raise RhgtError("malformed certificate: missing 'final'")
    if data["final"] != "":
        raise RhgtError(f"malformed certificate: final word {data['final']!r} is not empty")
    try:
        start = parse_word(data["start"], pres)
        steps = tuple(CertificateStep(int(s["relator"]), int(s["position"])) for s in data["steps"])
    except (KeyError, TypeError, ValueError) as e:
        raise RhgtError(f"malformed certificate: {e}") from e
    return AreaCertificate(start, steps)


def write_certificate(path: str | FilePath, certificate: AreaCertificate, pres: RelPresentation) -> None:
    FilePath(path).write_text(json.dumps(certificate_to_dict(certificate, pres), sort_keys=True, indent=2), encoding="utf-8")
    logger.info(f"Wrote area-{certificate.area} certificate to {path}")


def read_certificate(path: str | FilePath, pres: RelPresentation) -> AreaCertificate:
    try:
        data = json.loads(FilePath(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise RhgtError(f"cannot read certificate {path}: {e}") from e
    return certificate_from_dict(data, pres)


# ---------------------------------------------------------------------------
# Dehn tables
# ---------------------------------------------------------------------------

DEHN_FIELDS = ["n", "area", "status"]


def write_dehn_csv(path: str | FilePath, table: DehnTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=DEHN_FIELDS)
        writer.writeheader()
        for row in table.rows:
            writer.writerow({"n": row.n, "area": row.area, "status": row.status})
    logger.info(f"Wrote {len(table.rows)} Dehn rows to {path}")


def read_dehn_csv(path: str | FilePath) -> DehnTable:
    rows: List[DehnRow] = []
    with open(path, newline="", encoding="utf-8") as handle:
        for record in csv.DictReader(handle):
            rows.append(DehnRow(int(record["n"]), int(record["area"]), record["status"], 0))
    return DehnTable(rows)


# ---------------------------------------------------------------------------
# Regression baselines
# ---------------------------------------------------------------------------

@dataclass
class BaselineCheck:
    name: str
    value: float
    baseline: float
    created: bool

    @property
    def regressed(self) -> bool:
        return self.value > self.baseline


class BaselineStore:
    """
    One JSON file per baseline name. The first recorded value becomes the
    baseline; later values are compared against it and never overwrite it.
    """

    def __init__(self, directory: Optional[str | FilePath] = None):
        self.directory = FilePath(directory or settings.BASELINE_DIR)

    def _path(self, name: str) -> FilePath:
        return self.directory / f"{name}.json"

    def get(self, name: str) -> Optional[float]:
        path = self._path(name)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["value"]

    def check(self, name: str, value: float) -> BaselineCheck:
        baseline = self.get(name)
        if baseline is None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._path(name).write_text(json.dumps({"name": name, "value": value}, sort_keys=True), encoding="utf-8")
            logger.info(f"Recorded baseline {name} = {value}")
            return BaselineCheck(name, value, value, True)
        result = BaselineCheck(name, value, baseline, False)
        if result.regressed:
            logger.warning(f"Baseline {name} regressed: {value} > {baseline}")
        return result
