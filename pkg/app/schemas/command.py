from typing import Literal, Optional, get_args

from pydantic import BaseModel, ConfigDict, model_validator

from app.schemas.group_config import GroupConfig

CommandName = Literal[
    "length", "geodesic", "components", "reduce", "omega",
    "area", "dehn-scan",
    "delta", "nu", "bcp", "qconvex",
    "wp", "member", "parabolic", "conjugate", "sympair",
    "translation", "order", "root", "powerconj", "atomic",
]

COMMANDS: tuple[str, ...] = get_args(CommandName)


class CommandSpec(BaseModel):
    """
    One toolkit run. The CLI builds it from flags and the HTTP surface accepts
    it as a body; dumping it is enough to reproduce the run.
    """
    model_config = ConfigDict(extra="forbid")

    command: CommandName
    group: Optional[str] = None
    group_config: Optional[GroupConfig] = None

    word: Optional[str] = None
    f: Optional[str] = None
    g: Optional[str] = None

    radius: Optional[int] = None
    max_area: Optional[int] = None
    max_len: Optional[int] = None
    n: Optional[int] = None
    sample: Optional[int] = None
    seed: Optional[int] = None
    k: Optional[int] = None
    l: Optional[int] = None

    subgroup: Optional[str] = None
    mode: Optional[str] = None
    threshold: Optional[int] = None
    quads: int = 0
    verify: Optional[str] = None
    csv: Optional[str] = None
    baseline: Optional[str] = None
    out: Literal["json", "text"] = "json"

    @model_validator(mode="after")
    def _one_group(self) -> "CommandSpec":
        if (self.group is None) == (self.group_config is None):
            raise ValueError("exactly one of group (a file path) and group_config must be given")
        return self
