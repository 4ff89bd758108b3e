"""Request bodies for the study service."""

from __future__ import annotations

from pydantic import BaseModel, Field

SERVICE_SCHEMA_VERSION = 1


class LineupSpecIn(BaseModel):
    data: list[float] = Field(min_length=3)
    design: str = "standard"
    hypothesis: str = "scaled_normal"
    m: int = 20
    seed: int = Field(default=0, ge=0, lt=2**64)
    allow_multiple_select: bool = False


class EvaluationIn(BaseModel):
    observer_id: str = Field(min_length=1, max_length=200)
    selected_panels: list[int] = Field(min_length=1)
    reasons: list[str] = []
    free_text: str = Field(default="", max_length=2000)


class SessionIn(BaseModel):
    observer_id: str = Field(min_length=1, max_length=200)
