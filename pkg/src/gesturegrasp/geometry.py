"""Camera model, 3D primitives, rotations, and RANSAC line fitting.

3D points are plain float64 numpy arrays of shape (3,) in the camera
frame (x right, y down, z forward), meters. Pixel coordinates are
continuous with (0, 0) at the top-left pixel center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateInput, NonPositiveDepth, NotARotation


def as_vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite 3-vector: {v}")
    return v


def unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return v / n


@dataclass(frozen=True)
class PixelPoint:
    """Continuous pixel coordinates; (0, 0) is the top-left pixel center."""

    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"non-finite pixel point ({self.u}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=np.float64)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model without distortion."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True)
class Ray:
    """Half-line o + t*d with unit direction d."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vec3(self.origin))
        d = as_vec3(self.direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("ray direction must be unit length")
        object.__setattr__(self, "direction", d)

    @classmethod
    def through(cls, origin, toward) -> "Ray":
        """Ray from `origin` toward the point `toward`."""
        o = as_vec3(origin)
        return cls(o, unit(as_vec3(toward) - o))

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


class Rotation3:
    """3x3 rotation matrix wrapper enforcing SO(3) membership.

    Inputs orthonormal within `tol` (Frobenius) are accepted; anything
    already orthonormal within 1e-9 is stored verbatim, otherwise the
    nearest rotation (via SVD polar projection) is stored so downstream
    code can rely on a 1e-9 invariant.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix, tol: float = 1e-6):
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise NotARotation(f"expected finite 3x3 matrix, got shape {m.shape}")
        err = float(np.linalg.norm(m.T @ m - np.eye(3)))
        det = float(np.linalg.det(m))
        if err > tol or abs(det - 1.0) > max(tol, 1e-4):
            raise NotARotation(
                f"matrix not in SO(3): orthonormality error {err:.3e}, det {det:.6f}"
            )
        if err > 1e-9:
            u, _, vt = np.linalg.svd(m)
            m = u @ vt
            if np.linalg.det(m) < 0:  # cannot happen for det(m) near +1
                raise NotARotation("projection produced a reflection")
        m = m.copy()
        m.flags.writeable = False
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3))

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation3":
        """Rodrigues formula."""
        a = unit(as_vec3(axis))
        x, y, z = a
        c, s = math.cos(angle), math.sin(angle)
        cc = 1.0 - c
        m = np.array(
            [
                [x * x * cc + c, x * y * cc - z * s, x * z * cc + y * s],
                [y * x * cc + z * s, y * y * cc + c, y * z * cc - x * s],
                [z * x * cc - y * s, z * y * cc + x * s, z * z * cc + c],
            ]
        )
        return cls(m)

    @classmethod
    def from_quaternion(cls, w: float, x: float, y: float, z: float) -> "Rotation3":
        """Unit quaternion (w, x, y, z) to matrix; caller normalizes."""
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n == 0.0:
            raise NotARotation("zero quaternion")
        w, x, y, z = w / n, x / n, y / n, z / n
        m = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        return cls(m)

    def transpose(self) -> "Rotation3":
        return Rotation3(self._m.T)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Rotate one (3,) point or an (N, 3) stack."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self._m.T

    def __matmul__(self, other: "Rotation3") -> "Rotation3":
        return Rotation3(self._m @ other._m)

    def allclose(self, other: "Rotation3", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self._m, other._m, atol=atol, rtol=0.0))

    def __repr__(self):
        rows = "; ".join(" ".join(f"{x:.6f}" for x in row) for row in self._m)
        return f"Rotation3([{rows}])"


@dataclass(frozen=True)
class Sim3:
    """Similarity transform p -> scale * R(p) + translation."""

    rotation: Rotation3
    scale: float
    translation: np.ndarray

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "translation", as_vec3(self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * self.rotation.apply(points) + self.translation


def project(point: np.ndarray, k: CameraIntrinsics) -> PixelPoint:
    """Pinhole projection of a camera-frame point."""
    p = as_vec3(point)
    if p[2] <= 0:
        raise NonPositiveDepth(f"point depth {p[2]:.6f} m is not positive")
    return PixelPoint(k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy)


def backproject(pixel: PixelPoint, depth: float, k: CameraIntrinsics) -> np.ndarray:
    """Inverse pinhole projection at a known depth (z, meters)."""
    if depth <= 0:
        raise NonPositiveDepth(f"depth {depth:.6f} m is not positive")
    return np.array(
        [
            (pixel.u - k.cx) * depth / k.fx,
            (pixel.v - k.cy) * depth / k.fy,
            depth,
        ]
    )


def pixel_in_image(pixel: PixelPoint, width: int, height: int) -> bool:
    """True when the continuous pixel lies inside the image area.

    The image spans [-0.5, width - 0.5] x [-0.5, height - 0.5] under the
    pixel-center-at-integer convention; bounds are inclusive.
    """
    return (
        -0.5 <= pixel.u <= width - 0.5 and -0.5 <= pixel.v <= height - 0.5
    )


def point_line_distances(points: np.ndarray, origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Orthogonal distances from (N, 3) points to the infinite line."""
    rel = points - origin
    t = rel @ direction
    return np.linalg.norm(rel - np.outer(t, direction), axis=1)


def _canonical_sign(d: np.ndarray) -> np.ndarray:
    # deterministic sign: largest-magnitude component made positive
    k = int(np.argmax(np.abs(d)))
    return -d if d[k] < 0 else d


def _principal_axis(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares line through points: (centroid, unit direction)."""
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    return centroid, _canonical_sign(vt[0])


def fit_line_ransac(
    points,
    inlier_threshold: float = 0.01,
    iterations: int = 100,
    seed: int = 0,
) -> tuple[Ray, np.ndarray]:
    """RANSAC 3D line fit with least-squares refinement.

    Up to 5 points all point pairs are enumerated (deterministic and
    optimal for finger-scale input); larger sets are sampled with the
    seeded generator. Consensus ties are broken by lower inlier residual
    sum, then by candidate order. The returned ray has origin at the
    inlier centroid and direction along the principal axis of the
    inliers (sign canonicalized, not semantically oriented).

    Returns (ray, inlier flags).
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if inlier_threshold <= 0:
        raise ValueError("inlier_threshold must be positive")
    n = len(pts)
    if n < 2 or len(np.unique(pts, axis=0)) < 2:
        raise DegenerateInput("need at least 2 distinct points")

    if n <= 5:
        pairs = list(combinations(range(n), 2))
    else:
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(max(1, iterations)):
            i, j = rng.choice(n, size=2, replace=False)
            pairs.append((int(i), int(j)))

    best = None  # (inlier_count, -residual_sum), flags
    for i, j in pairs:
        delta = pts[j] - pts[i]
        norm = np.linalg.norm(delta)
        if norm < 1e-12:
            continue
        d = delta / norm
        dist = point_line_distances(pts, pts[i], d)
        flags = dist < inlier_threshold
        score = (int(flags.sum()), -float(np.sum(dist[flags] ** 2)))
        if best is None or score > best[0]:
            best = (score, flags)
    if best is None:
        raise DegenerateInput("all candidate point pairs coincident")

    flags = best[1]
    centroid, direction = _principal_axis(pts[flags])
    return Ray(centroid, direction), flags
