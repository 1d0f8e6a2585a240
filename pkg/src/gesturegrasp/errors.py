"""Exception types raised by the pipeline stages.

Every failure mode that callers are expected to branch on gets its own
class; all inherit from GestureGraspError so the CLI and service can map
them uniformly to diagnostics.
"""


class GestureGraspError(Exception):
    """Base class for all library errors."""


# geometry
class NonPositiveDepth(GestureGraspError):
    """Point or depth value lies at or behind the camera plane."""


class DegenerateInput(GestureGraspError):
    """Fewer than two distinct points supplied to the line fitter."""


class NotARotation(GestureGraspError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


# pointing
class AllOutOfFrame(GestureGraspError):
    """Every keypoint projects outside the image bounds."""


class DegenerateGesture(GestureGraspError):
    """Index-finger keypoints nearly coincident; no pointing direction."""


class NoIntersection(GestureGraspError):
    """Pointing ray passes no valid depth cell within epsilon."""


class SizeExceedsImage(GestureGraspError):
    """Requested crop size larger than the image's smaller dimension."""


# gesture
class DegenerateHand(GestureGraspError):
    """Reference landmarks collinear or wrist-to-index span below 1 mm."""


class ZeroVector(GestureGraspError):
    """Flattened gesture vector has (near-)zero norm."""


# memory bank
class DuplicateId(GestureGraspError):
    """Entry id already present in the bank."""


class DimensionMismatch(GestureGraspError):
    """Embedding length differs from the bank's embedding dimension."""


class InvalidEntry(GestureGraspError):
    """Record violates a memory-entry invariant."""


class CorruptManifest(GestureGraspError):
    """Bank manifest missing, unparsable, or missing required fields."""


class MissingTensorFile(GestureGraspError):
    """Manifest references a tensor file that does not exist."""


class MagicMismatch(GestureGraspError):
    """Tensor file does not start with the GGT1 magic bytes."""


class CorruptTensor(GestureGraspError):
    """Tensor file header or payload truncated or inconsistent."""


# retrieval
class EmptyBank(GestureGraspError):
    """Retrieval attempted against a bank with no entries."""


class NoChiralityMatch(GestureGraspError):
    """No bank entry shares the query gesture's chirality."""


# transfer
class OutOfBounds(GestureGraspError):
    """Pixel lies outside the feature map's source image."""


class ChannelMismatch(GestureGraspError):
    """Source and target feature maps have different channel counts."""


class ZeroQueryFeature(GestureGraspError):
    """Sampled query feature has near-zero norm; cosine undefined."""


# gripper
class DegenerateTriangle(GestureGraspError):
    """Thumb/index landmarks collinear; gripper frame undefined."""


# grasp
class EmptyCandidates(GestureGraspError):
    """Grasp selection attempted over an empty candidate list."""


class NoValidDepth(GestureGraspError):
    """No valid depth cell at or near the requested contact pixel."""


class ParseError(GestureGraspError):
    """Input record file failed to parse."""


class NonUnitQuaternion(GestureGraspError):
    """Candidate quaternion norm deviates from 1 by more than 1e-3."""


class ScoreOutOfRange(GestureGraspError):
    """Candidate confidence score outside [0, 1]."""


# metrics
class EmptyMask(GestureGraspError):
    """Ground-truth mask contains no set pixels."""


# synth
class MarginUnsatisfiable(GestureGraspError):
    """Could not plant correspondences with the required cosine margin."""


class StageFailure(GestureGraspError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
