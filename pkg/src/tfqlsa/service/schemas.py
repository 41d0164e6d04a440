"""Request and response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..schedule import DEFAULT_C_Q, DEFAULT_C_R

Pair = list[float]
Mode = Literal["exact-expm", "trotter-exact-data", "trotter-fixedpoint"]


class InstanceModel(BaseModel):
    """Same shape as an instance file; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    n: int
    a_terms: list[list[list[list[Pair]]]]
    b_terms: list[list[list[Pair]]]
    kappa: Optional[float] = None


class _Request(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstanceModel


class SolveRequest(_Request):
    eps: float = Field(0.2, gt=0, lt=1)
    mode: Mode = "exact-expm"
    p_bits: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0)
    repeats: int = Field(1, ge=1)
    c_q: float = Field(DEFAULT_C_Q, gt=0)
    c_r: float = Field(DEFAULT_C_R, gt=0)


class StatsRequest(_Request):
    eps: float = Field(0.2, gt=0, lt=1)
    p_bits: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0)
    repeats: int = Field(1, ge=1)
    c_q: float = Field(DEFAULT_C_Q, gt=0)
    c_r: float = Field(DEFAULT_C_R, gt=0)


class VerifyRequest(_Request):
    n_s: int = Field(5, ge=1, le=200)
    seed: int = Field(0, ge=0)


class Check(BaseModel):
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


class VerifyResponse(BaseModel):
    version: int
    passed: bool
    counts: dict
    checks: list[Check]


class StatsResponse(BaseModel):
    version: int
    kappa: float
    p_bits: int
    repeats: list[dict]
    multiplier_calls: int
    depth_units: int


class SolveResponse(BaseModel):
    """A versioned solve report (see ``SolveReport``)."""

    model_config = ConfigDict(extra="allow")

    version: int
    summary: dict
