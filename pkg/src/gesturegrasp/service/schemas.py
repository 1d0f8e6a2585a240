"""Request/response models for the HTTP surface."""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class KeypointsModel(BaseModel):
    chirality: Literal["L", "R"]
    joints: list[list[float]] = Field(min_length=21, max_length=21)


class CanonRequest(BaseModel):
    keypoints: KeypointsModel


class CanonResponse(BaseModel):
    chirality: str
    joints: list[list[float]]
    span: float
    rotation: list[list[float]]


class RetrieveRequest(BaseModel):
    bank: str  # bank directory path as seen by the server
    keypoints: KeypointsModel
    embedding: list[float]
    k: int = 5


class Stage1Match(BaseModel):
    entry_id: str
    similarity: float


class RetrieveResponse(BaseModel):
    entry_id: str
    gesture_similarity: float
    embedding_similarity: float
    rank_stage1: int
    stage1: list[Stage1Match]
    stage1_truncated: bool
    contact: list[float]
    feature_ref: str
    image_dims: list[int]


class RotRequest(BaseModel):
    keypoints: KeypointsModel


class RotResponse(BaseModel):
    rotation: list[list[float]]


class PipelineRequest(BaseModel):
    config: dict
    base_dir: str | None = None  # resolves relative paths server-side
    include_timings: bool = False


class PipelineResponse(BaseModel):
    report: dict


class ValidateRequest(BaseModel):
    bank: str


class FindingModel(BaseModel):
    entry_id: str | None
    message: str


class ValidateResponse(BaseModel):
    ok: bool
    findings: list[FindingModel]
    warnings: list[str]


class ErrorResponse(BaseModel):
    error: str
    message: str
    stage: str | None = None
