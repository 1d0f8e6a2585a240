"""Pointing-gesture target localization.

Refines hand keypoints against the depth map, fits the index-finger
pointing ray, intersects it with the back-projected depth cells, and
crops the target region around the hit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllOutOfFrame,
    DegenerateGesture,
    NoIntersection,
    SizeExceedsImage,
)
from .gesture import INDEX_FINGER, INDEX_TIP, WRIST, HandKeypoints, max_pairwise_distance
from .geometry import (
    CameraIntrinsics,
    PixelPoint,
    Ray,
    backproject,
    fit_line_ransac,
    project,
)

# valid depth cells must fall inside this range (meters)
MAX_DEPTH = 100.0
# nearest-valid-cell search radius for keypoint refinement (pixels)
REFINE_RADIUS = 5
# ray-parameter band around the origin excluded from intersection (meters)
DEFAULT_MIN_RAY_T = 0.05


@dataclass(frozen=True)
class DepthScene:
    """Depth grid (row-major, meters) plus pinhole intrinsics.

    Cells that are non-positive or NaN are invalid.
    """

    depth: np.ndarray
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        d = np.asarray(self.depth, dtype=np.float64)
        k = self.intrinsics
        if d.shape != (k.height, k.width):
            raise ValueError(
                f"depth grid {d.shape} does not match intrinsics "
                f"({k.height}, {k.width})"
            )
        finite = d[np.isfinite(d)]
        if finite.size and float(finite.max()) >= MAX_DEPTH:
            raise ValueError(f"valid depth must stay below {MAX_DEPTH} m")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "depth", d)

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height

    def valid_mask(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.isfinite(self.depth) & (self.depth > 0)

    def valid_points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Back-projections of all valid cells, row-major.

        Returns (points (M, 3), rows, cols).
        """
        k = self.intrinsics
        rows, cols = np.nonzero(self.valid_mask())
        z = self.depth[rows, cols]
        x = (cols - k.cx) * z / k.fx
        y = (rows - k.cy) * z / k.fy
        return np.stack([x, y, z], axis=1), rows, cols


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned pixel rectangle, top-left (u0, v0), size (w, h)."""

    u0: int
    v0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("crop size must be positive")
        if self.u0 < 0 or self.v0 < 0:
            raise ValueError("crop origin must be non-negative")


@dataclass(frozen=True)
class PointingResult:
    ray: Ray
    target3d: np.ndarray
    target2d: PixelPoint
    crop: CropRect
    inlier_count: int


def refine_keypoints(raw: HandKeypoints, scene: DepthScene) -> tuple[HandKeypoints, np.ndarray]:
    """Snap keypoints to the stereo depth along their viewing rays.

    Each joint is projected into the image and re-backprojected at the
    depth of the nearest valid cell (searched within REFINE_RADIUS px).
    Joints projecting out of frame or into invalid regions keep their
    raw value and are flagged unrefined.

    Returns (refined keypoints, per-joint refined flags).
    """
    k = scene.intrinsics
    valid = scene.valid_mask()
    refined = raw.joints.copy()
    flags = np.zeros(len(refined), dtype=bool)
    any_in_frame = False
    for i, joint in enumerate(raw.joints):
        pix = project(joint, k)
        col = int(math.floor(pix.u + 0.5))
        row = int(math.floor(pix.v + 0.5))
        if not (0 <= col < k.width and 0 <= row < k.height):
            continue
        any_in_frame = True
        cell = _nearest_valid_cell(valid, row, col)
        if cell is None:
            continue
        depth = float(scene.depth[cell])
        refined[i] = backproject(pix, depth, k)
        flags[i] = True
    if not any_in_frame:
        raise AllOutOfFrame("every keypoint projects outside the image")
    return HandKeypoints(refined, raw.chirality), flags


def _nearest_valid_cell(valid: np.ndarray, row: int, col: int):
    """Nearest valid cell within REFINE_RADIUS px; ties row-major."""
    h, w = valid.shape
    best = None
    best_key = None
    for dv in range(-REFINE_RADIUS, REFINE_RADIUS + 1):
        r = row + dv
        if not 0 <= r < h:
            continue
        for du in range(-REFINE_RADIUS, REFINE_RADIUS + 1):
            c = col + du
            if not 0 <= c < w or not valid[r, c]:
                continue
            d2 = du * du + dv * dv
            if d2 > REFINE_RADIUS * REFINE_RADIUS:
                continue
            key = (d2, r, c)
            if best_key is None or key < best_key:
                best_key = key
                best = (r, c)
    return best


def estimate_pointing_ray(
    refined: HandKeypoints,
    threshold: float = 0.01,
    iterations: int = 100,
) -> tuple[Ray, np.ndarray]:
    """Fit the pointing ray through the four index-finger keypoints.

    RANSAC (exhaustive pairs at this count) rejects outlier joints; the
    ray origin is the wrist joint projected onto the fitted line and the
    direction points from the wrist side toward the fingertip side.
    """
    pts = refined.joints[list(INDEX_FINGER)]
    if max_pairwise_distance(pts) < 1e-3:
        raise DegenerateGesture("index-finger keypoints nearly coincident")
    ray, flags = fit_line_ransac(pts, inlier_threshold=threshold, iterations=iterations)
    wrist = refined.joints[WRIST]
    d = ray.direction
    origin = ray.origin + float(np.dot(wrist - ray.origin, d)) * d
    toward = pts[flags].mean(axis=0) - origin
    if float(np.linalg.norm(toward)) < 1e-12:
        toward = refined.joints[INDEX_TIP] - origin
    if float(np.dot(d, toward)) < 0:
        d = -d
    return Ray(origin, d), flags


def intersect_ray_depth(
    ray: Ray,
    scene: DepthScene,
    epsilon: float,
    min_ray_t: float = DEFAULT_MIN_RAY_T,
) -> tuple[np.ndarray, PixelPoint]:
    """First back-projected depth cell within epsilon of the ray.

    Candidates are valid cells whose orthogonal distance to the ray is
    below epsilon and whose ray parameter exceeds min_ray_t (excluding
    the pointing hand itself); the smallest-parameter candidate wins,
    ties broken row-major.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    points, _, _ = scene.valid_points()
    if len(points) == 0:
        raise NoIntersection("scene has no valid depth cells")
    rel = points - ray.origin
    t = rel @ ray.direction
    dist = np.linalg.norm(rel - np.outer(t, ray.direction), axis=1)
    mask = (t > min_ray_t) & (dist < epsilon)
    if not np.any(mask):
        raise NoIntersection(
            f"no depth cell within {epsilon} m of the ray beyond t={min_ray_t}"
        )
    idx = np.flatnonzero(mask)
    # argmin over row-major candidates: first minimum wins ties
    best = idx[int(np.argmin(t[idx]))]
    target = points[best]
    return target, project(target, scene.intrinsics)


def crop_region(center: PixelPoint, size: int, width: int, height: int) -> CropRect:
    """Square crop centered at the rounded center, translated to fit."""
    if size <= 0:
        raise ValueError("crop size must be positive")
    if size > min(width, height):
        raise SizeExceedsImage(
            f"crop {size} exceeds image min dimension {min(width, height)}"
        )
    cu = int(math.floor(center.u + 0.5))
    cv = int(math.floor(center.v + 0.5))
    u0 = min(max(cu - size // 2, 0), width - size)
    v0 = min(max(cv - size // 2, 0), height - size)
    return CropRect(u0, v0, size, size)


def locate_target(
    raw: HandKeypoints,
    scene: DepthScene,
    epsilon: float = 0.01,
    crop_size: int = 224,
    ransac_threshold: float = 0.01,
    ransac_iterations: int = 100,
    min_ray_t: float = DEFAULT_MIN_RAY_T,
) -> tuple[PointingResult, np.ndarray]:
    """Full pointing stage: refine, fit ray, intersect, crop.

    Returns (result, per-joint refined flags).
    """
    refined, refined_flags = refine_keypoints(raw, scene)
    ray, inliers = estimate_pointing_ray(
        refined, threshold=ransac_threshold, iterations=ransac_iterations
    )
    target3d, target2d = intersect_ray_depth(ray, scene, epsilon, min_ray_t=min_ray_t)
    crop = crop_region(target2d, crop_size, scene.width, scene.height)
    result = PointingResult(
        ray=ray,
        target3d=target3d,
        target2d=target2d,
        crop=crop,
        inlier_count=int(inliers.sum()),
    )
    return result, refined_flags
