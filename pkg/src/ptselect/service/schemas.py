"""Pydantic request models for the HTTP service.

Response bodies are emitted as canonical JSON (sorted keys, no whitespace)
so that identical requests with identical seeds produce byte-identical
bytes; see docs/formats.md for their schemas.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class RecommendRequest(BaseModel):
    covariates: list[float] = Field(..., description="length-r covariate vector")
    weights: list[float] = Field(..., description="J nonnegative response weights")
    rho: float | None = Field(None, description="footrule exponent; engine default if omitted")
    seed: int | None = Field(None, description="tie-break seed; server-generated and echoed if omitted")


class RecommendBatchRequest(BaseModel):
    rows: list[list[float]] = Field(..., description="m covariate vectors")
    weights: list[float]
    rho: float | None = None
    seed: int | None = None
