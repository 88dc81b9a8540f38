"""Resource guards and runtime configuration"""

import os
from functools import lru_cache
from typing import Optional

from pydantic import BaseModel, Field

ENV_PREFIX = "TREECLASP_"


class Settings(BaseModel):
    """Resource guards; the construction itself places no size limits"""

    max_degree: int = Field(8, ge=1, description="Largest tree degree enumerated by dim")
    max_colors: int = Field(6, ge=1, description="Largest number of colors accepted by dim")
    max_derived_depth: int = Field(3, ge=1, description="Deepest derived-series level for Fox calculus")
    max_c_level: int = Field(6, ge=1, description="Largest n accepted by c_tree")
    max_x_legs: int = Field(12, ge=0, description="Most X-colored legs per monomial in glue")
    max_brute_legs: int = Field(12, ge=0, description="Most X-colored legs per monomial in brute_glue")
    max_alternation_arms: int = Field(9, ge=1, description="Most arms for inclusion-exclusion alternation")

    @classmethod
    def from_env(cls, environ: Optional[dict] = None) -> "Settings":
        environ = os.environ if environ is None else environ
        values = {}
        for name in cls.model_fields:
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = int(raw)
        return cls(**values)

    def override(self, **changes) -> "Settings":
        """Copy with the non-None keyword values replaced"""
        changes = {k: v for k, v in changes.items() if v is not None}
        return self.model_copy(update=changes) if changes else self


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
