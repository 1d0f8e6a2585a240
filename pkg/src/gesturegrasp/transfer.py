"""Dense-feature contact-point transfer.

Maps a contact pixel on the source image to the target image by cosine
nearest-neighbor over a dense feature grid. Pixel-to-grid mapping uses
the cell-center convention: grid_x = (u + 0.5) * w / width - 0.5 and
its inverse u = (col + 0.5) * width / w - 0.5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChannelMismatch, OutOfBounds, ZeroQueryFeature
from .geometry import PixelPoint, pixel_in_image


@dataclass(frozen=True)
class FeatureMap:
    """(h, w, d) descriptor grid extracted from an image of image_dims."""

    data: np.ndarray
    image_dims: tuple[int, int]  # (width, height) of the source image

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 3 or min(d.shape) < 1:
            raise ValueError(f"feature map must be (h, w, d), got {d.shape}")
        if np.any(np.isnan(d)):
            raise ValueError("feature map contains NaN")
        if not np.any(np.linalg.norm(d.reshape(-1, d.shape[2]), axis=1) > 0):
            raise ValueError("feature map has no nonzero cell")
        w, h = self.image_dims
        if w <= 0 or h <= 0:
            raise ValueError("image_dims must be positive")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "image_dims", (int(w), int(h)))

    @property
    def h(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]

    @property
    def d(self) -> int:
        return self.data.shape[2]

    def cell_center_pixel(self, row: int, col: int) -> PixelPoint:
        width, height = self.image_dims
        return PixelPoint(
            (col + 0.5) * width / self.w - 0.5,
            (row + 0.5) * height / self.h - 0.5,
        )


@dataclass(frozen=True)
class Correspondence:
    target_pixel: PixelPoint
    similarity: float
    target_cell: tuple[int, int]  # (row, col)


def sample_feature(fmap: FeatureMap, pixel: PixelPoint) -> np.ndarray:
    """Bilinear feature lookup at a continuous pixel, edge-clamped."""
    width, height = fmap.image_dims
    if not pixel_in_image(pixel, width, height):
        raise OutOfBounds(
            f"pixel ({pixel.u}, {pixel.v}) outside image {width}x{height}"
        )
    gx = (pixel.u + 0.5) * fmap.w / width - 0.5
    gy = (pixel.v + 0.5) * fmap.h / height - 0.5
    gx = min(max(gx, 0.0), fmap.w - 1.0)
    gy = min(max(gy, 0.0), fmap.h - 1.0)
    x0 = int(math.floor(gx))
    y0 = int(math.floor(gy))
    x1 = min(x0 + 1, fmap.w - 1)
    y1 = min(y0 + 1, fmap.h - 1)
    tx = gx - x0
    ty = gy - y0
    data = fmap.data.astype(np.float64, copy=False)
    top = (1.0 - tx) * data[y0, x0] + tx * data[y0, x1]
    bottom = (1.0 - tx) * data[y1, x0] + tx * data[y1, x1]
    return (1.0 - ty) * top + ty * bottom


def cell_similarities(fmap: FeatureMap, feature: np.ndarray) -> np.ndarray:
    """Cosine of `feature` against every cell; zero-norm cells get -1."""
    flat = fmap.data.reshape(-1, fmap.d).astype(np.float64, copy=False)
    fnorm = float(np.linalg.norm(feature))
    norms = np.linalg.norm(flat, axis=1)
    sims = np.full(len(flat), -1.0)
    nz = norms > 1e-12
    sims[nz] = (flat[nz] @ feature) / (norms[nz] * fnorm)
    return sims.reshape(fmap.h, fmap.w)


def transfer_contact(
    src: FeatureMap,
    c_src: PixelPoint,
    tgt: FeatureMap,
    window_radius: int | None = None,
) -> Correspondence:
    """Transfer the source contact pixel to the target image.

    Samples the source feature at the contact, scores every target cell
    by cosine similarity, and returns the argmax cell (row-major
    tie-break) mapped back to target pixel coordinates. The optional
    window restricts candidates to cells within a Chebyshev radius of
    the proportionally mapped contact location; default is a full scan.
    """
    if src.d != tgt.d:
        raise ChannelMismatch(f"source d={src.d}, target d={tgt.d}")
    feature = sample_feature(src, c_src)
    if float(np.linalg.norm(feature)) < 1e-12:
        raise ZeroQueryFeature("sampled contact feature has near-zero norm")
    sims = cell_similarities(tgt, feature)
    if window_radius is not None:
        sims = _apply_window(sims, src, c_src, tgt, window_radius)
    best = int(np.argmax(sims))  # first max in row-major order
    row, col = divmod(best, tgt.w)
    return Correspondence(
        target_pixel=tgt.cell_center_pixel(row, col),
        similarity=float(np.clip(sims[row, col], -1.0, 1.0)),
        target_cell=(row, col),
    )


def _apply_window(sims, src, c_src, tgt, radius):
    if radius < 0:
        raise ValueError("window_radius must be >= 0")
    src_w, src_h = src.image_dims
    # proportional location of the contact, mapped into the target grid
    gx = (c_src.u + 0.5) / src_w * tgt.w - 0.5
    gy = (c_src.v + 0.5) / src_h * tgt.h - 0.5
    cc = min(max(int(math.floor(gx + 0.5)), 0), tgt.w - 1)
    cr = min(max(int(math.floor(gy + 0.5)), 0), tgt.h - 1)
    rows = np.arange(tgt.h)[:, None]
    cols = np.arange(tgt.w)[None, :]
    outside = np.maximum(np.abs(rows - cr), np.abs(cols - cc)) > radius
    windowed = sims.copy()
    windowed[outside] = -np.inf
    return windowed
