"""Gesture-conditioned grasp selection toolkit.

Two hand gestures drive the pipeline: a pointing gesture picks the
target region in a depth image, a grasp gesture retrieves a memory
entry whose contact point is transferred onto the live view via dense
feature matching, and the hand pose maps to a gripper rotation that
re-ranks candidate grasps.
"""

__version__ = "0.1.0"

from .errors import GestureGraspError, StageFailure
from .gesture import (
    CanonicalGesture,
    Chirality,
    HandKeypoints,
    canonicalize,
    gesture_similarity,
)
from .geometry import CameraIntrinsics, PixelPoint, Ray, Rotation3, Sim3
from .grasp import (
    GraspCandidate,
    GraspPose,
    GraspSelection,
    SelectionParams,
    direct_grasp,
    frobenius_deviation,
    select_grasp,
)
from .gripper import hand_to_gripper_rotation
from .memory import MemoryBank, MemoryEntry, ingest_entry, load_bank, save_bank, validate_bank
from .metrics import compute_dtm, eval_batch
from .pipeline import AblationFlags, PipelineConfig, PipelineParams, PipelineReport, run_pipeline
from .pointing import DepthScene, PointingResult, locate_target
from .retrieval import RetrievalResult, retrieve, retrieve_topk_gestures, select_entry
from .transfer import Correspondence, FeatureMap, transfer_contact

__all__ = [
    "__version__",
    "GestureGraspError",
    "StageFailure",
    "CanonicalGesture",
    "Chirality",
    "HandKeypoints",
    "canonicalize",
    "gesture_similarity",
    "CameraIntrinsics",
    "PixelPoint",
    "Ray",
    "Rotation3",
    "Sim3",
    "GraspCandidate",
    "GraspPose",
    "GraspSelection",
    "SelectionParams",
    "direct_grasp",
    "frobenius_deviation",
    "select_grasp",
    "hand_to_gripper_rotation",
    "MemoryBank",
    "MemoryEntry",
    "ingest_entry",
    "load_bank",
    "save_bank",
    "validate_bank",
    "compute_dtm",
    "eval_batch",
    "AblationFlags",
    "PipelineConfig",
    "PipelineParams",
    "PipelineReport",
    "run_pipeline",
    "DepthScene",
    "PointingResult",
    "locate_target",
    "RetrievalResult",
    "retrieve",
    "retrieve_topk_gestures",
    "select_entry",
    "Correspondence",
    "FeatureMap",
    "transfer_contact",
]
