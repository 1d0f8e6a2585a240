"""End-to-end pipeline: point, retrieve, transfer, rotate, select.

The pipeline is a pure function of a config (paths + parameters +
ablation flags); reports serialize deterministically so byte-identical
output across runs is a testable property. Timings are measured but
excluded from the canonical serialization.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import fileio
from .errors import GestureGraspError, StageFailure
from .geometry import PixelPoint, Rotation3
from .grasp import (
    GraspPose,
    SelectionParams,
    direct_grasp,
    load_candidates,
    rotation_to_quaternion_wxyz,
    select_grasp,
)
from .gripper import hand_to_gripper_rotation
from .memory import load_bank
from .pointing import CropRect, locate_target
from .retrieval import retrieve_topk_gestures, select_entry
from .tensorio import read_tensor
from .transfer import FeatureMap, transfer_contact


@dataclass(frozen=True)
class PipelineParams:
    k: int = 5
    epsilon: float = 0.01
    crop_size: int = 224
    lam: float = 0.1
    sigma: float = 30.0
    standoff: float = 0.0
    attention: str = "off"
    min_ray_t: float = 0.05
    ransac_threshold: float = 0.01
    ransac_iterations: int = 100

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.crop_size < 1:
            raise ValueError("crop_size must be >= 1")
        # remaining ranges are validated by SelectionParams
        SelectionParams(self.lam, self.sigma, self.attention)


@dataclass(frozen=True)
class AblationFlags:
    no_pointing: bool = False
    no_transfer: bool = False
    no_rotation: bool = False
    no_grasp_model: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    bank: Path
    pointing_keypoints: Path
    grasp_keypoints: Path
    scene: Path
    query_embedding: Path
    query_features: Path
    candidates: Path | None = None
    mask: Path | None = None
    params: PipelineParams = field(default_factory=PipelineParams)
    ablations: AblationFlags = field(default_factory=AblationFlags)
    seed: int = 0

    def __post_init__(self):
        for name in ("bank", "pointing_keypoints", "grasp_keypoints",
                     "scene", "query_embedding", "query_features"):
            object.__setattr__(self, name, Path(getattr(self, name)))
        for name in ("candidates", "mask"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, Path(value))
        if self.ablations.no_grasp_model and self.candidates is not None:
            raise ValueError("no_grasp_model excludes a candidates file")
        if not self.ablations.no_grasp_model and self.candidates is None:
            raise ValueError("candidates file required unless no_grasp_model")
        if self.ablations.no_pointing and self.ablations.no_transfer:
            raise ValueError(
                "no_pointing and no_transfer together leave no contact source"
            )

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "PipelineConfig":
        base = Path(base_dir) if base_dir is not None else Path(".")

        def path_of(key, required=True):
            value = data.get(key)
            if value is None:
                if required:
                    raise ValueError(f"config missing {key!r}")
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p

        raw_params = dict(data.get("params", {}))
        if "lambda" in raw_params:
            raw_params["lam"] = raw_params.pop("lambda")
        params = PipelineParams(**raw_params)
        ablations = AblationFlags(**data.get("ablations", {}))
        no_model = ablations.no_grasp_model
        return cls(
            bank=path_of("bank"),
            pointing_keypoints=path_of("pointing_keypoints"),
            grasp_keypoints=path_of("grasp_keypoints"),
            scene=path_of("scene"),
            query_embedding=path_of("query_embedding"),
            query_features=path_of("query_features"),
            candidates=path_of("candidates", required=not no_model),
            mask=path_of("mask", required=False),
            params=params,
            ablations=ablations,
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        return cls.from_dict(fileio._load_json(path, "pipeline config"), path.parent)


@dataclass(frozen=True)
class PipelineReport:
    """Stage outputs plus wall-clock timings (never in canonical form)."""

    data: dict
    timings: dict

    def to_json(self, include_timings: bool = False) -> str:
        payload = dict(self.data)
        if include_timings:
            payload["timings"] = self.timings
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


class _StageClock:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except StageFailure:
            raise
        except (GestureGraspError, ValueError, OSError) as exc:
            raise StageFailure(stage, exc) from exc
        finally:
            self.timings[stage] = time.perf_counter() - start
        return result


def _load_inputs(config: PipelineConfig):
    bank = load_bank(config.bank)
    pointing_kp = fileio.load_keypoints(config.pointing_keypoints)
    grasp_kp = fileio.load_keypoints(config.grasp_keypoints)
    scene = fileio.load_scene(config.scene)
    embedding = fileio.load_embedding(config.query_embedding)
    features = read_tensor(config.query_features, expected_rank=3)
    return bank, pointing_kp, grasp_kp, scene, embedding, features


def _point_stage(config, pointing_kp, scene):
    p = config.params
    if config.ablations.no_pointing:
        return None, CropRect(0, 0, scene.width, scene.height)
    result, _ = locate_target(
        pointing_kp,
        scene,
        epsilon=p.epsilon,
        crop_size=p.crop_size,
        ransac_threshold=p.ransac_threshold,
        ransac_iterations=p.ransac_iterations,
        min_ray_t=p.min_ray_t,
    )
    return result, result.crop


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Execute every stage, honoring ablations; stage errors are tagged."""
    clock = _StageClock()
    bank, pointing_kp, grasp_kp, scene, embedding, features = clock.run(
        "load", _load_inputs, config
    )
    pointing, crop = clock.run("point", _point_stage, config, pointing_kp, scene)

    def _retrieve():
        matches = retrieve_topk_gestures(grasp_kp, bank, config.params.k)
        return matches, select_entry(bank, matches, embedding)

    matches, retrieval = clock.run("retrieve", _retrieve)
    entry = bank.get(retrieval.entry_id)

    def _transfer():
        if config.ablations.no_transfer:
            contact = pointing.target2d
            return None, (contact.u, contact.v)
        src_map = bank.feature_map(entry)
        tgt_map = FeatureMap(features, (crop.w, crop.h))
        corr = transfer_contact(src_map, entry.contact, tgt_map)
        return corr, (crop.u0 + corr.target_pixel.u, crop.v0 + corr.target_pixel.v)

    correspondence, contact_full = clock.run("transfer", _transfer)

    def _rotate():
        if config.ablations.no_rotation:
            return None
        return hand_to_gripper_rotation(grasp_kp)

    rotation = clock.run("rotate", _rotate)

    def _grasp():
        effective_r = rotation if rotation is not None else Rotation3.identity()
        c_t = PixelPoint(*contact_full)
        if config.ablations.no_grasp_model:
            pose = direct_grasp(c_t, scene, effective_r, config.params.standoff)
            return None, pose
        params = SelectionParams(
            lam=0.0 if config.ablations.no_rotation else config.params.lam,
            sigma=config.params.sigma,
            attention=config.params.attention,
        )
        candidates = load_candidates(config.candidates)
        selection = select_grasp(
            candidates, effective_r, c_t, scene.intrinsics, params
        )
        return selection, selection.candidate.pose

    selection, pose = clock.run("grasp", _grasp)

    data = {
        "seed": config.seed,
        "pointing": _pointing_payload(pointing, crop),
        "retrieval": {
            "entry_id": retrieval.entry_id,
            "gesture_similarity": retrieval.gesture_similarity,
            "embedding_similarity": retrieval.embedding_similarity,
            "rank_stage1": retrieval.rank_stage1,
            "stage1_truncated": matches.truncated,
        },
        "transfer": _transfer_payload(correspondence),
        "contact": [float(contact_full[0]), float(contact_full[1])],
        "rotation": None if rotation is None else _matrix_payload(rotation),
        "grasp": _grasp_payload(selection, pose),
    }
    return PipelineReport(data, clock.timings)


def _pointing_payload(pointing, crop):
    payload = {"crop": [crop.u0, crop.v0, crop.w, crop.h]}
    if pointing is None:
        payload["skipped"] = True
        return payload
    payload.update(
        origin=[float(x) for x in pointing.ray.origin],
        direction=[float(x) for x in pointing.ray.direction],
        target3d=[float(x) for x in pointing.target3d],
        target2d=[pointing.target2d.u, pointing.target2d.v],
        inlier_count=int(pointing.inlier_count),
    )
    return payload


def _transfer_payload(corr):
    if corr is None:
        return {"skipped": True}
    return {
        "target_cell": [int(i) for i in corr.target_cell],
        "similarity": float(corr.similarity),
        "crop_pixel": [corr.target_pixel.u, corr.target_pixel.v],
    }


def _matrix_payload(rotation: Rotation3) -> list:
    return [[float(x) for x in row] for row in rotation.matrix]


def _grasp_payload(selection, pose: GraspPose) -> dict:
    quat = rotation_to_quaternion_wxyz(pose.R)
    payload = {
        "mode": "direct" if selection is None else "select",
        "pose": {
            "t": [float(x) for x in pose.t],
            "quat": [float(x) for x in quat],
            "w": int(pose.w),
        },
    }
    if selection is not None:
        payload["index"] = int(selection.index)
        payload["score"] = float(selection.candidate.score)
        payload["breakdown"] = [
            {
                "index": int(row.index),
                "score": float(row.score),
                "deviation": float(row.deviation),
                "attention": float(row.attention),
                "effective": float(row.effective),
            }
            for row in selection.scores
        ]
    return payload
