"""Text and image record formats shared by the CLI, service, and bank.

All small numeric records are JSON (floats round-trip bit-exactly via
repr); tensors live in GGT1 files; masks are binary PGM (P5) with
nonzero = in-mask.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from . import tensorio
from .errors import ParseError
from .gesture import Chirality, HandKeypoints
from .geometry import CameraIntrinsics


def _load_json(path, kind: str) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"{kind} file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{kind} file {path}: {exc}") from exc


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- keypoints
def keypoints_to_record(kp: HandKeypoints, frame_id: str | None = None) -> dict:
    record = {
        "chirality": kp.chirality.value,
        "joints": [[float(c) for c in row] for row in kp.joints],
    }
    if frame_id is not None:
        record["frame_id"] = frame_id
    return record


def keypoints_from_record(record: dict) -> HandKeypoints:
    try:
        return HandKeypoints(np.array(record["joints"], dtype=np.float64),
                             Chirality(record["chirality"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"bad keypoint record: {exc}") from exc


def save_keypoints(path, kp: HandKeypoints, frame_id: str | None = None) -> None:
    write_json(path, keypoints_to_record(kp, frame_id))


def load_keypoints(path) -> HandKeypoints:
    return keypoints_from_record(_load_json(path, "keypoints"))


# ---------------------------------------------------------------- embeddings
def save_embedding(path, vector) -> None:
    write_json(path, {"embedding": [float(x) for x in np.asarray(vector).reshape(-1)]})


def load_embedding(path) -> np.ndarray:
    record = _load_json(path, "embedding")
    try:
        vec = np.array(record["embedding"], dtype=np.float64)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"bad embedding record: {exc}") from exc
    if vec.ndim != 1 or vec.size == 0 or not np.all(np.isfinite(vec)):
        raise ParseError(f"embedding must be a non-empty finite vector: {path}")
    return vec


# ---------------------------------------------------------------- depth scenes
def save_scene(path, depth: np.ndarray, intrinsics: CameraIntrinsics,
               depth_ref: str = "depth.ggt") -> None:
    """Scene JSON with a relative GGT1 depth reference alongside it."""
    path = Path(path)
    tensorio.write_tensor(path.parent / depth_ref, depth)
    write_json(path, {
        "intrinsics": {
            "fx": intrinsics.fx, "fy": intrinsics.fy,
            "cx": intrinsics.cx, "cy": intrinsics.cy,
            "width": intrinsics.width, "height": intrinsics.height,
        },
        "depth_ref": depth_ref,
    })


def load_scene(path):
    from .pointing import DepthScene

    path = Path(path)
    record = _load_json(path, "scene")
    try:
        k = record["intrinsics"]
        intrinsics = CameraIntrinsics(
            fx=float(k["fx"]), fy=float(k["fy"]),
            cx=float(k["cx"]), cy=float(k["cy"]),
            width=int(k["width"]), height=int(k["height"]),
        )
        depth_ref = record["depth_ref"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"bad scene record {path}: {exc}") from exc
    depth = tensorio.read_tensor(path.parent / depth_ref, expected_rank=2)
    return DepthScene(depth, intrinsics)


# ---------------------------------------------------------------- masks (PGM P5)
def save_mask(path, mask: np.ndarray) -> None:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = mask.shape
    data = np.where(mask.astype(bool), 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def load_mask(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"mask file not found: {path}")
    blob = path.read_bytes()
    m = re.match(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", blob)
    if not m:
        raise ParseError(f"not a binary PGM (P5) file: {path}")
    w, h, maxval = (int(m.group(i)) for i in (1, 2, 3))
    if maxval > 255:
        raise ParseError(f"16-bit PGM not supported: {path}")
    if len(blob) - m.end() < w * h:
        raise ParseError(f"truncated PGM payload: {path}")
    pixels = np.frombuffer(blob, dtype=np.uint8, count=w * h, offset=m.end())
    return pixels.reshape(h, w) > 0
