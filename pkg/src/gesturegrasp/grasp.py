"""Grasp pose model, attention weighting, and constrained selection.

A grasp is G = (t, R, w): translation in meters (camera frame), a
rotation, and a binary open/closed command. Selection penalizes the
Frobenius deviation ||I - R_h^T R_i||_F against the hand-derived
rotation, optionally re-weighting candidate scores by a Gaussian
attention term centered on the target contact pixel.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyCandidates,
    NoValidDepth,
    NonUnitQuaternion,
    ParseError,
    ScoreOutOfRange,
)
from .geometry import CameraIntrinsics, PixelPoint, Rotation3, as_vec3, backproject, project
from .pointing import REFINE_RADIUS, DepthScene, _nearest_valid_cell


@dataclass(frozen=True)
class GraspPose:
    t: np.ndarray
    R: Rotation3
    w: int  # 1 = open (pre-grasp), 0 = closed

    def __post_init__(self):
        object.__setattr__(self, "t", as_vec3(self.t))
        if self.w not in (0, 1):
            raise ValueError(f"gripper command must be 0 or 1, got {self.w}")


@dataclass(frozen=True)
class GraspCandidate:
    pose: GraspPose
    score: float

    def __post_init__(self):
        s = float(self.score)
        if not (0.0 <= s <= 1.0):
            raise ScoreOutOfRange(f"score {s} outside [0, 1]")
        object.__setattr__(self, "score", s)


@dataclass(frozen=True)
class SelectionParams:
    lam: float = 0.1
    sigma: float = 30.0
    attention: str = "off"  # "off" | "weight"

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.attention not in ("off", "weight"):
            raise ValueError(f"unknown attention mode {self.attention!r}")


@dataclass(frozen=True)
class CandidateScore:
    """Audit row: every term entering one candidate's effective score."""

    index: int
    score: float
    deviation: float
    attention: float
    effective: float


@dataclass(frozen=True)
class GraspSelection:
    index: int
    candidate: GraspCandidate
    scores: tuple[CandidateScore, ...]


def frobenius_deviation(r_h: Rotation3, r_i: Rotation3) -> float:
    """||I - R_h^T R_i||_F, equal to 2*sqrt(2)*|sin(theta/2)|."""
    rel = r_h.transpose() @ r_i
    return float(np.linalg.norm(np.eye(3) - rel.matrix, ord="fro"))


def gaussian_attention_weight(
    candidate: GraspCandidate,
    c_t: PixelPoint,
    intrinsics: CameraIntrinsics,
    sigma: float,
) -> float:
    """exp(-||project(t) - c_t||^2 / (2 sigma^2)), in (0, 1]."""
    proj = project(candidate.pose.t, intrinsics)
    du = proj.u - c_t.u
    dv = proj.v - c_t.v
    return math.exp(-(du * du + dv * dv) / (2.0 * sigma * sigma))


def select_grasp(
    candidates: list[GraspCandidate],
    r_h: Rotation3,
    c_t: PixelPoint,
    intrinsics: CameraIntrinsics,
    params: SelectionParams,
) -> GraspSelection:
    """Pick argmax of (weighted) score minus lambda * rotation deviation.

    Ties resolve to the lowest candidate index. The full per-candidate
    breakdown is returned so reports can audit the decision.
    """
    if not candidates:
        raise EmptyCandidates("no grasp candidates to select from")
    rows = []
    for i, cand in enumerate(candidates):
        dev = frobenius_deviation(r_h, cand.pose.R)
        if params.attention == "weight":
            att = gaussian_attention_weight(cand, c_t, intrinsics, params.sigma)
        else:
            att = 1.0
        eff = cand.score * att - params.lam * dev
        rows.append(CandidateScore(i, cand.score, dev, att, eff))
    best = max(range(len(rows)), key=lambda i: (rows[i].effective, -i))
    return GraspSelection(best, candidates[best], tuple(rows))


def direct_grasp(
    c_t: PixelPoint,
    scene: DepthScene,
    r_h: Rotation3,
    standoff: float = 0.0,
) -> GraspPose:
    """Build a grasp at the contact pixel without an external generator.

    Depth is read at c_t's cell, falling back to the nearest valid cell
    within the refinement radius. The pose backs off along the approach
    axis (third column of R_h) by `standoff` meters and opens the
    gripper.
    """
    col = int(math.floor(c_t.u + 0.5))
    row = int(math.floor(c_t.v + 0.5))
    if not (0 <= col < scene.width and 0 <= row < scene.height):
        raise NoValidDepth(f"contact pixel ({c_t.u}, {c_t.v}) outside image")
    cell = _nearest_valid_cell(scene.valid_mask(), row, col)
    if cell is None:
        raise NoValidDepth(
            f"no valid depth within {REFINE_RADIUS} px of ({c_t.u}, {c_t.v})"
        )
    depth = float(scene.depth[cell])
    t = backproject(c_t, depth, scene.intrinsics)
    approach = r_h.matrix[:, 2]
    return GraspPose(t - standoff * approach, r_h, 1)


def quaternion_wxyz_to_rotation(quat) -> Rotation3:
    """Unit quaternion (w, x, y, z) to Rotation3; normalizes if close."""
    q = np.asarray(quat, dtype=float).reshape(-1)
    if q.shape != (4,) or not np.all(np.isfinite(q)):
        raise ParseError(f"quaternion must be 4 finite reals, got {quat!r}")
    norm = float(np.linalg.norm(q))
    if abs(norm - 1.0) > 1e-3:
        raise NonUnitQuaternion(f"quaternion norm {norm} deviates from 1 by > 1e-3")
    return Rotation3.from_quaternion(*(q / norm))


def load_candidates(path) -> list[GraspCandidate]:
    """Read grasp candidates from a JSONL file.

    One object per line: {"t": [x, y, z], "quat": [w, x, y, z],
    "score": s}. Quaternions must be unit within 1e-3; scores in [0, 1].
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read candidates file {path}: {exc}") from exc
    candidates = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid record: {exc}") from exc
        if not isinstance(rec, dict) or not {"t", "quat", "score"} <= rec.keys():
            raise ParseError(f"{path}:{lineno}: expected keys t, quat, score")
        try:
            t = as_vec3(rec["t"])
        except Exception as exc:
            raise ParseError(f"{path}:{lineno}: bad translation: {exc}") from exc
        rot = quaternion_wxyz_to_rotation(rec["quat"])
        score = rec["score"]
        if not isinstance(score, (int, float)) or not math.isfinite(score):
            raise ParseError(f"{path}:{lineno}: score must be a finite number")
        candidates.append(GraspCandidate(GraspPose(t, rot, 1), float(score)))
    return candidates


def save_candidates(path, candidates: list[GraspCandidate]) -> None:
    """Write candidates in the JSONL format load_candidates reads."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for cand in candidates:
        quat = rotation_to_quaternion_wxyz(cand.pose.R)
        lines.append(json.dumps({
            "t": [float(v) for v in cand.pose.t],
            "quat": [float(v) for v in quat],
            "score": cand.score,
        }))
    path.write_text("\n".join(lines) + "\n")


def rotation_to_quaternion_wxyz(rot: Rotation3) -> np.ndarray:
    """Rotation matrix to unit quaternion (w, x, y, z), w >= 0."""
    m = rot.matrix
    trace = float(np.trace(m))
    if trace > 0:
        s = math.sqrt(trace + 1.0) * 2.0
        q = np.array([
            0.25 * s,
            (m[2, 1] - m[1, 2]) / s,
            (m[0, 2] - m[2, 0]) / s,
            (m[1, 0] - m[0, 1]) / s,
        ])
    else:
        i = int(np.argmax(np.diag(m)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(1.0 + m[i, i] - m[j, j] - m[k, k], 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (m[k, j] - m[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + k] = (m[k, i] + m[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)
