from typing import Literal

from pydantic import BaseModel, ConfigDict

SCHEMA_VERSION = "1"


class CommandReport(BaseModel):
    """
    The JSON report of one command. Result fields are command specific and
    sit next to the envelope fields at the top level.
    """
    model_config = ConfigDict(extra="allow")

    schema_version: str = SCHEMA_VERSION
    command: str
    group: str
    status: Literal["definite", "unknown"]
    exit_code: int

