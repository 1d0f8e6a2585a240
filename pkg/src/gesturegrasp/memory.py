"""Affordance memory bank: entries, validation, and persistence.

On disk a bank is a directory holding `manifest.jsonl` (one record per
entry, insertion order) plus one binary tensor file per feature map.
Small numerics live in the text manifest at full 64-bit precision, so a
save/load round trip is bit-exact.
"""
from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    CorruptManifest,
    CorruptTensor,
    DimensionMismatch,
    DuplicateId,
    InvalidEntry,
    MagicMismatch,
    MissingTensorFile,
)
from .gesture import (
    MAX_HAND_SPAN,
    CanonicalGesture,
    Chirality,
    HandKeypoints,
    canonicalize,
    max_pairwise_distance,
)
from .geometry import PixelPoint, pixel_in_image
from .tensorio import read_header, read_tensor
from .transfer import FeatureMap

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class MemoryEntry:
    """One (gesture, source image, contact point) triplet plus caches."""

    id: str
    gesture: HandKeypoints
    canonical: CanonicalGesture
    embedding: np.ndarray
    feature_ref: str
    contact: PixelPoint
    image_dims: tuple[int, int]  # (width, height) of the source image
    image_ref: str | None = None
    category: str | None = None

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise InvalidEntry("entry id must be a non-empty string")
        emb = np.asarray(self.embedding, dtype=np.float64).reshape(-1)
        if emb.size == 0 or not np.all(np.isfinite(emb)):
            raise InvalidEntry(f"entry {self.id}: embedding must be finite and non-empty")
        if float(np.linalg.norm(emb)) <= 0.0:
            raise InvalidEntry(f"entry {self.id}: embedding norm must be > 0")
        emb = emb.copy()
        emb.flags.writeable = False
        object.__setattr__(self, "embedding", emb)
        w, h = self.image_dims
        if w <= 0 or h <= 0:
            raise InvalidEntry(f"entry {self.id}: image_dims must be positive")
        object.__setattr__(self, "image_dims", (int(w), int(h)))
        if not pixel_in_image(self.contact, w, h):
            raise InvalidEntry(
                f"entry {self.id}: contact ({self.contact.u}, {self.contact.v}) "
                f"outside image {w}x{h}"
            )


@dataclass(frozen=True)
class MemoryBank:
    entries: tuple[MemoryEntry, ...] = ()
    embedding_dim: int | None = None
    feature_dim: int | None = None
    root: Path | None = None  # directory feature_ref paths resolve against

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def get(self, entry_id: str) -> MemoryEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(entry_id)

    def feature_map(self, entry: MemoryEntry) -> FeatureMap:
        """Load the entry's feature tensor from disk."""
        if self.root is None:
            raise MissingTensorFile(
                f"entry {entry.id}: bank has no root directory to resolve "
                f"{entry.feature_ref!r}"
            )
        data = read_tensor(self.root / entry.feature_ref, expected_rank=3)
        return FeatureMap(data, entry.image_dims)


@dataclass(frozen=True)
class Finding:
    entry_id: str | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings


def entry_from_record(record: dict, entry_id_hint: str = "?") -> MemoryEntry:
    """Build a validated MemoryEntry from a raw manifest-style record."""
    if not isinstance(record, dict):
        raise InvalidEntry(f"entry {entry_id_hint}: record must be an object")
    required = {"id", "chirality", "joints", "embedding", "contact",
                "image_dims", "feature_ref"}
    missing = required - record.keys()
    if missing:
        raise InvalidEntry(
            f"entry {record.get('id', entry_id_hint)}: missing fields {sorted(missing)}"
        )
    entry_id = record["id"]
    try:
        chirality = Chirality(record["chirality"])
    except ValueError as exc:
        raise InvalidEntry(f"entry {entry_id}: {exc}") from exc
    joints = np.asarray(record["joints"], dtype=np.float64)
    gesture = HandKeypoints(joints, chirality)
    span = max_pairwise_distance(gesture.joints)
    if span >= MAX_HAND_SPAN:
        raise InvalidEntry(
            f"entry {entry_id}: hand span {span:.3f} m exceeds {MAX_HAND_SPAN} m"
        )
    canonical = canonicalize(gesture)
    contact = record["contact"]
    if not (isinstance(contact, (list, tuple)) and len(contact) == 2):
        raise InvalidEntry(f"entry {entry_id}: contact must be [u, v]")
    dims = record["image_dims"]
    if not (isinstance(dims, (list, tuple)) and len(dims) == 2):
        raise InvalidEntry(f"entry {entry_id}: image_dims must be [width, height]")
    return MemoryEntry(
        id=entry_id,
        gesture=gesture,
        canonical=canonical,
        embedding=np.asarray(record["embedding"], dtype=np.float64),
        feature_ref=str(record["feature_ref"]),
        contact=PixelPoint(float(contact[0]), float(contact[1])),
        image_dims=(int(dims[0]), int(dims[1])),
        image_ref=record.get("image_ref"),
        category=record.get("category"),
    )


def entry_to_record(entry: MemoryEntry) -> dict:
    record = {
        "id": entry.id,
        "chirality": entry.gesture.chirality.value,
        "joints": [[float(x) for x in row] for row in entry.gesture.joints],
        "embedding": [float(x) for x in entry.embedding],
        "contact": [entry.contact.u, entry.contact.v],
        "image_dims": list(entry.image_dims),
        "feature_ref": entry.feature_ref,
    }
    if entry.image_ref is not None:
        record["image_ref"] = entry.image_ref
    if entry.category is not None:
        record["category"] = entry.category
    return record


def ingest_entry(bank: MemoryBank, record: dict) -> MemoryBank:
    """Validate a raw record and append it, returning the grown bank."""
    entry = entry_from_record(record)
    if entry.id in {e.id for e in bank.entries}:
        raise DuplicateId(f"entry id {entry.id!r} already in bank")
    if bank.embedding_dim is not None and entry.embedding.size != bank.embedding_dim:
        raise DimensionMismatch(
            f"entry {entry.id}: embedding length {entry.embedding.size} "
            f"!= bank dim {bank.embedding_dim}"
        )
    feature_dim = bank.feature_dim
    if bank.root is not None:
        tensor_path = bank.root / entry.feature_ref
        if tensor_path.exists():
            dims = read_header(tensor_path)
            if len(dims) != 3:
                raise CorruptTensor(
                    f"entry {entry.id}: feature tensor rank {len(dims)}, expected 3"
                )
            if feature_dim is not None and dims[2] != feature_dim:
                raise DimensionMismatch(
                    f"entry {entry.id}: feature depth {dims[2]} != bank dim {feature_dim}"
                )
            feature_dim = dims[2]
    return replace(
        bank,
        entries=bank.entries + (entry,),
        embedding_dim=bank.embedding_dim or int(entry.embedding.size),
        feature_dim=feature_dim,
    )


def save_bank(bank: MemoryBank, directory) -> None:
    """Write manifest.jsonl plus referenced tensor/image files.

    Referenced files are copied from the bank's current root when it has
    one and the destination differs; refs stay relative.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(entry_to_record(e)) for e in bank.entries]
    (directory / MANIFEST_NAME).write_text(
        "\n".join(lines) + ("\n" if lines else "")
    )
    for entry in bank.entries:
        for ref in (entry.feature_ref, entry.image_ref):
            if ref is None:
                continue
            dst = directory / ref
            if bank.root is None:
                if not dst.exists():
                    raise MissingTensorFile(
                        f"entry {entry.id}: no source for {ref!r} (bank has no root)"
                    )
                continue
            src = bank.root / ref
            if src.resolve() == dst.resolve():
                continue
            if not src.exists():
                raise MissingTensorFile(f"entry {entry.id}: missing file {src}")
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src, dst)


def load_bank(directory) -> MemoryBank:
    """Read a bank directory; validates records and tensor headers."""
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    if not manifest.is_file():
        raise CorruptManifest(f"no {MANIFEST_NAME} in {directory}")
    bank = MemoryBank(root=directory)
    for lineno, line in enumerate(manifest.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptManifest(f"{manifest}:{lineno}: {exc}") from exc
        try:
            bank = ingest_entry(bank, record)
        except (MissingTensorFile, MagicMismatch, CorruptTensor):
            raise
        except Exception as exc:
            raise CorruptManifest(f"{manifest}:{lineno}: {exc}") from exc
        entry = bank.entries[-1]
        tensor_path = directory / entry.feature_ref
        if not tensor_path.is_file():
            raise MissingTensorFile(f"entry {entry.id}: missing {tensor_path}")
        read_header(tensor_path)  # raises MagicMismatch / CorruptTensor
    return bank


def validate_bank(bank: MemoryBank) -> ValidationReport:
    """Re-check every bank invariant without mutating anything."""
    findings: list[Finding] = []
    warnings: list[str] = []
    if not bank.entries:
        warnings.append("empty")
    seen: set[str] = set()
    for entry in bank.entries:
        if entry.id in seen:
            findings.append(Finding(entry.id, "duplicate id"))
        seen.add(entry.id)
        findings.extend(_validate_entry(bank, entry))
    return ValidationReport(tuple(findings), tuple(warnings))


def _validate_entry(bank: MemoryBank, entry: MemoryEntry) -> list[Finding]:
    out = []
    emb = np.asarray(entry.embedding, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(emb)) or float(np.linalg.norm(emb)) <= 0.0:
        out.append(Finding(entry.id, "embedding not finite with positive norm"))
    if bank.embedding_dim is not None and emb.size != bank.embedding_dim:
        out.append(Finding(
            entry.id,
            f"embedding length {emb.size} != bank dim {bank.embedding_dim}",
        ))
    w, h = entry.image_dims
    if w <= 0 or h <= 0:
        out.append(Finding(entry.id, "non-positive image_dims"))
    elif not pixel_in_image(entry.contact, w, h):
        out.append(Finding(entry.id, "contact outside image_dims"))
    span = max_pairwise_distance(entry.gesture.joints)
    if span >= MAX_HAND_SPAN:
        out.append(Finding(entry.id, f"hand span {span:.3f} m exceeds {MAX_HAND_SPAN} m"))
    try:
        fresh = canonicalize(entry.gesture)
    except Exception as exc:
        out.append(Finding(entry.id, f"gesture fails canonicalization: {exc}"))
    else:
        if not np.allclose(fresh.joints, entry.canonical.joints, atol=1e-9, rtol=0.0):
            out.append(Finding(entry.id, "cached canonical gesture is stale"))
    if bank.root is not None:
        tensor_path = bank.root / entry.feature_ref
        if not tensor_path.is_file():
            out.append(Finding(entry.id, f"missing feature tensor {entry.feature_ref!r}"))
        else:
            try:
                dims = read_header(tensor_path)
            except Exception as exc:
                out.append(Finding(entry.id, f"unreadable feature tensor: {exc}"))
            else:
                if len(dims) != 3:
                    out.append(Finding(
                        entry.id, f"feature tensor rank {len(dims)}, expected 3"
                    ))
                elif bank.feature_dim is not None and dims[2] != bank.feature_dim:
                    out.append(Finding(
                        entry.id,
                        f"feature depth {dims[2]} != bank dim {bank.feature_dim}",
                    ))
    return out
