"""Shared request handlers.

The CLI calls these in-process; the FastAPI app wraps them over HTTP.
Inputs and outputs are plain JSON-able dicts so both surfaces stay in
lockstep. Package errors propagate and are mapped by each caller.
"""
from __future__ import annotations

import numpy as np

from .. import fileio
from ..gesture import alignment_rotation, canonicalize
from ..gripper import hand_to_gripper_rotation
from ..memory import load_bank, validate_bank
from ..pipeline import PipelineConfig, run_pipeline
from ..retrieval import retrieve_topk_gestures, select_entry


def _matrix(m: np.ndarray) -> list:
    return [[float(x) for x in row] for row in m]


def canon_handler(record: dict) -> dict:
    kp = fileio.keypoints_from_record(record)
    rotation, span = alignment_rotation(kp.joints)
    canonical = canonicalize(kp)
    return {
        "chirality": canonical.chirality.value,
        "joints": [[float(x) for x in row] for row in canonical.joints],
        "span": span,
        "rotation": _matrix(rotation),
    }


def retrieve_handler(bank_path, record: dict, embedding, k: int = 5) -> dict:
    bank = load_bank(bank_path)
    kp = fileio.keypoints_from_record(record)
    matches = retrieve_topk_gestures(kp, bank, k)
    result = select_entry(bank, matches, np.asarray(embedding, dtype=np.float64))
    entry = bank.get(result.entry_id)
    return {
        "entry_id": result.entry_id,
        "gesture_similarity": result.gesture_similarity,
        "embedding_similarity": result.embedding_similarity,
        "rank_stage1": result.rank_stage1,
        "stage1": [
            {"entry_id": i, "similarity": s} for i, s in matches.matches
        ],
        "stage1_truncated": matches.truncated,
        "contact": [entry.contact.u, entry.contact.v],
        "feature_ref": entry.feature_ref,
        "image_dims": list(entry.image_dims),
    }


def rot_handler(record: dict) -> dict:
    kp = fileio.keypoints_from_record(record)
    return {"rotation": _matrix(hand_to_gripper_rotation(kp).matrix)}


def pipeline_handler(config: PipelineConfig, include_timings: bool = False) -> dict:
    report = run_pipeline(config)
    payload = dict(report.data)
    if include_timings:
        payload["timings"] = report.timings
    return {"report": payload}


def validate_handler(bank_path) -> dict:
    report = validate_bank(load_bank(bank_path))
    return {
        "ok": report.ok,
        "findings": [
            {"entry_id": f.entry_id, "message": f.message} for f in report.findings
        ],
        "warnings": list(report.warnings),
    }
