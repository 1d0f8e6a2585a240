"""Two-stage retrieval: gesture top-K, then embedding re-ranking.

Stage 1 canonicalizes the query hand and scores cosine similarity
against every same-chirality entry's cached canonical gesture. Stage 2
re-ranks the survivors by embedding cosine. All ties break toward the
ascending entry id so results are permutation-invariant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyBank, NoChiralityMatch, ZeroVector
from .gesture import HandKeypoints, canonicalize, gesture_similarity
from .memory import MemoryBank, MemoryEntry

DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class TopKResult:
    """Stage-1 output: (entry_id, similarity) best-first."""

    matches: tuple[tuple[str, float], ...]
    truncated: bool  # fewer same-chirality entries than requested K


@dataclass(frozen=True)
class RetrievalResult:
    entry_id: str
    gesture_similarity: float
    embedding_similarity: float
    rank_stage1: int  # 1-based position in the stage-1 list


def retrieve_topk_gestures(
    query: HandKeypoints, bank: MemoryBank, k: int = DEFAULT_TOP_K
) -> TopKResult:
    """Top-K same-chirality entries by canonical-gesture cosine."""
    if k < 1:
        raise ValueError("K must be >= 1")
    if not bank.entries:
        raise EmptyBank("memory bank has no entries")
    peers = [e for e in bank.entries if e.gesture.chirality == query.chirality]
    if not peers:
        raise NoChiralityMatch(
            f"no {query.chirality.value}-handed entries in bank"
        )
    canon = canonicalize(query)
    scored = [
        (entry.id, gesture_similarity(canon, entry.canonical)) for entry in peers
    ]
    scored.sort(key=lambda m: (-m[1], m[0]))
    return TopKResult(tuple(scored[:k]), truncated=len(peers) < k)


def _embedding_cosine(query: np.ndarray, entry: MemoryEntry) -> float:
    emb = entry.embedding
    if emb.size != query.size:
        raise DimensionMismatch(
            f"entry {entry.id}: embedding length {emb.size} != query {query.size}"
        )
    denom = float(np.linalg.norm(query)) * float(np.linalg.norm(emb))
    return float(np.clip(float(query @ emb) / denom, -1.0, 1.0))


def select_entry(
    bank: MemoryBank,
    matches: TopKResult,
    query_embedding,
) -> RetrievalResult:
    """Stage 2: pick the match whose embedding best fits the query."""
    if not matches.matches:
        raise EmptyBank("no stage-1 candidates to re-rank")
    query = np.asarray(query_embedding, dtype=np.float64).reshape(-1)
    if float(np.linalg.norm(query)) < 1e-12:
        raise ZeroVector("query embedding has near-zero norm")
    best: RetrievalResult | None = None
    for rank, (entry_id, gsim) in enumerate(matches.matches, start=1):
        esim = _embedding_cosine(query, bank.get(entry_id))
        if best is None or (-esim, entry_id) < (-best.embedding_similarity, best.entry_id):
            best = RetrievalResult(entry_id, gsim, esim, rank)
    return best


def retrieve(
    query: HandKeypoints,
    query_embedding,
    bank: MemoryBank,
    k: int = DEFAULT_TOP_K,
) -> RetrievalResult:
    """Full two-stage retrieval; stage-1 rank is recorded in the result."""
    return select_entry(bank, retrieve_topk_gestures(query, bank, k), query_embedding)
