"""Hand keypoint schema, canonical alignment, and gesture similarity.

The 21-joint layout follows the standard hand-skeleton ordering (wrist
plus four joints per finger). Canonical alignment pins the wrist at the
origin, the index-finger MCP at (1, 0, 0), and the pinky MCP into the
z = 0 half-plane with positive y, making the representation invariant
to rigid motion and uniform scale.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateHand, ZeroVector

# joint indices in the 21-keypoint layout
WRIST = 0
THUMB_CMC, THUMB_MCP, THUMB_IP, THUMB_TIP = 1, 2, 3, 4
INDEX_MCP, INDEX_PIP, INDEX_DIP, INDEX_TIP = 5, 6, 7, 8
MIDDLE_MCP, MIDDLE_PIP, MIDDLE_DIP, MIDDLE_TIP = 9, 10, 11, 12
RING_MCP, RING_PIP, RING_DIP, RING_TIP = 13, 14, 15, 16
PINKY_MCP, PINKY_PIP, PINKY_DIP, PINKY_TIP = 17, 18, 19, 20

NUM_JOINTS = 21
INDEX_FINGER = (INDEX_MCP, INDEX_PIP, INDEX_DIP, INDEX_TIP)
# anatomical landmarks anchoring the canonical frame
ALIGNMENT_REFS = (WRIST, INDEX_MCP, PINKY_MCP)
# landmarks defining the gripper frame (thumb MCP, index MCP, index tip)
GRIPPER_REFS = (THUMB_MCP, INDEX_MCP, INDEX_TIP)

# regularizer used in the alignment normalizations
_ALIGN_EPS = 1e-8
# wrist-to-index-MCP spans below this are rejected as degenerate
_MIN_SPAN = 1e-3

# physical sanity bound on hand extent, enforced at bank ingestion
MAX_HAND_SPAN = 0.5


class Chirality(str, Enum):
    LEFT = "L"
    RIGHT = "R"


def _check_joints(joints) -> np.ndarray:
    j = np.asarray(joints, dtype=np.float64)
    if j.shape != (NUM_JOINTS, 3):
        raise ValueError(f"expected ({NUM_JOINTS}, 3) joints, got {j.shape}")
    if not np.all(np.isfinite(j)):
        raise ValueError("joints contain non-finite values")
    j = j.copy()
    j.flags.writeable = False
    return j


def max_pairwise_distance(joints: np.ndarray) -> float:
    diffs = joints[:, None, :] - joints[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(axis=2)).max())


@dataclass(frozen=True)
class HandKeypoints:
    """21 named 3D joints in the camera frame (meters) plus chirality."""

    joints: np.ndarray
    chirality: Chirality

    def __post_init__(self):
        object.__setattr__(self, "joints", _check_joints(self.joints))
        object.__setattr__(self, "chirality", Chirality(self.chirality))

    def joint(self, index: int) -> np.ndarray:
        return self.joints[index]


@dataclass(frozen=True)
class CanonicalGesture:
    """Joints in the wrist-anchored, index-aligned, scale-free frame."""

    joints: np.ndarray
    chirality: Chirality

    def __post_init__(self):
        j = _check_joints(self.joints)
        if np.any(j[WRIST] != 0.0):
            raise ValueError("canonical wrist must be exactly at the origin")
        if np.max(np.abs(j[INDEX_MCP] - (1.0, 0.0, 0.0))) > 1e-6:
            raise ValueError("canonical index MCP must be (1, 0, 0) within 1e-6")
        if abs(j[PINKY_MCP][2]) > 1e-6 or j[PINKY_MCP][1] <= 0:
            raise ValueError("canonical pinky MCP must lie in z=0 with y > 0")
        object.__setattr__(self, "joints", j)
        object.__setattr__(self, "chirality", Chirality(self.chirality))

    def flattened(self) -> np.ndarray:
        """63-dim row-major (joint-major, xyz) vector."""
        return self.joints.reshape(-1)


def alignment_rotation(joints: np.ndarray) -> tuple[np.ndarray, float]:
    """Rotation (rows x̄, ȳ, z̄) and scale for the canonical frame.

    x̄ follows wrist→index-MCP, z̄ the normal of the wrist/index/pinky
    plane; the 1e-8 regularizer keeps the two normalizations bounded.
    """
    l_x = joints[INDEX_MCP] - joints[WRIST]
    span = float(np.linalg.norm(l_x))
    v_z = np.cross(l_x, joints[PINKY_MCP] - joints[WRIST])
    if float(np.linalg.norm(v_z)) <= 1e-8:
        raise DegenerateHand("wrist/index/pinky landmarks are collinear")
    if span < _MIN_SPAN:
        raise DegenerateHand(f"wrist-to-index span {span:.2e} m below 1 mm")
    z_bar = v_z / (np.linalg.norm(v_z) + _ALIGN_EPS)
    x_bar = l_x / (span + _ALIGN_EPS)
    y_bar = np.cross(z_bar, x_bar)
    return np.stack([x_bar, y_bar, z_bar]), span


def canonicalize(g: HandKeypoints) -> CanonicalGesture:
    """Translate to the wrist, rotate into the hand frame, divide by scale."""
    r_align, span = alignment_rotation(g.joints)
    centered = g.joints - g.joints[WRIST]
    aligned = centered @ r_align.T
    return CanonicalGesture(aligned / span, g.chirality)


def gesture_similarity(a: CanonicalGesture, b: CanonicalGesture) -> float:
    """Cosine of the flattened 63-dim joint vectors, clamped to [-1, 1].

    Same-chirality comparison is the caller's responsibility (retrieval
    filters before scoring).
    """
    va, vb = a.flattened(), b.flattened()
    if np.array_equal(va, vb):
        return 1.0
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na < 1e-12 or nb < 1e-12:
        raise ZeroVector("flattened gesture vector has near-zero norm")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))
