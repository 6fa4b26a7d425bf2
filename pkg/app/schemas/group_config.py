from typing import Any, Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field

GroupKind = Literal["free", "free_rel_cyclic", "free_product", "zz", "bs", "relpres"]


class SubgroupSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cyclic"] = "cyclic"
    params: Dict[str, Any] = Field(default_factory=dict)


class GroupConfig(BaseModel):
    """
    A group definition file. Empty `generators`, `subgroups` and `relators`
    select the defaults of the built-in kind; `relpres` requires all three
    and names its base kind in `options.base`.
    """
    model_config = ConfigDict(extra="forbid")

    kind: GroupKind
    generators: List[str] = Field(default_factory=list)
    subgroups: Dict[str, SubgroupSpec] = Field(default_factory=dict)
    relators: List[str] = Field(default_factory=list)
    options: Dict[str, Any] = Field(default_factory=dict)
