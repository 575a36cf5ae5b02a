"""Schema-aware near-duplicate removal over question embeddings.

Each schema group is scanned greedily in lineage order: an instance stays
iff its maximum cosine against everything already kept is at or below the
threshold. Groups are independent, so identical questions under two
schemas both survive.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import requests

from .errors import StructuralError, TransportError
from .instances import QueryInstance, stage_rank

FALLBACK_DIM = 4096
_EMPTY_AXIS = 0


@dataclass(frozen=True)
class QuestionVector:
    instance_id: str
    vector: np.ndarray
    source: str  # external-embedder | lexical-fallback


@dataclass(frozen=True)
class RemovalRecord:
    removed_id: str
    kept_id: str
    similarity: float


@dataclass
class HttpEmbeddingBackend:
    endpoint: str
    model: str
    api_key: str = ""
    timeout_s: float = 60.0

    def embed(self, texts: list[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(
                self.endpoint,
                json={"model": self.model, "input": texts},
                headers=headers,
                timeout=self.timeout_s,
            )
            response.raise_for_status()
            data = response.json()
            return [item["embedding"] for item in data["data"]]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise TransportError(f"embedding backend failed: {exc}")


def word_trigrams(text: str) -> list[str]:
    """Character trigrams taken within each lowercased word."""
    grams: list[str] = []
    for word in "".join(
        c if c.isalnum() else " " for c in text.lower()
    ).split():
        if len(word) < 3:
            grams.append(word)
        else:
            grams.extend(word[i : i + 3] for i in range(len(word) - 2))
    return grams


def _bucket(gram: str, dim: int) -> int:
    digest = hashlib.md5(gram.encode("utf-8")).hexdigest()
    return int(digest[:8], 16) % dim


def lexical_vector(text: str, dim: int = FALLBACK_DIM) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    grams = word_trigrams(text)
    if not grams:
        vec[_EMPTY_AXIS] = 1.0  # reserved axis for zero-content questions
        return vec
    for gram in grams:
        vec[_bucket(gram, dim)] += 1.0
    return vec / np.linalg.norm(vec)


def embed_questions(
    questions: list[str],
    embedder: HttpEmbeddingBackend | None = None,
    instance_ids: list[str] | None = None,
    dim: int = FALLBACK_DIM,
) -> list[QuestionVector]:
    """One unit vector per question; lexical trigram fallback without a backend."""
    ids = instance_ids or [str(i) for i in range(len(questions))]
    if len(ids) != len(questions):
        raise StructuralError("instance ids and questions are misaligned")
    if embedder is not None:
        raw = embedder.embed(questions)
        out = []
        for qid, emb in zip(ids, raw):
            vec = np.asarray(emb, dtype=np.float64)
            norm = np.linalg.norm(vec)
            if norm == 0:
                vec = np.zeros(len(vec))
                vec[_EMPTY_AXIS] = 1.0
            else:
                vec = vec / norm
            out.append(QuestionVector(qid, vec, "external-embedder"))
        return out
    return [
        QuestionVector(qid, lexical_vector(q, dim), "lexical-fallback")
        for qid, q in zip(ids, questions)
    ]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))


def dedup_schema_group(
    instances: list[QueryInstance],
    vectors: list[QuestionVector],
    tau: float,
) -> tuple[list[QueryInstance], list[RemovalRecord]]:
    """Greedy first-kept-wins scan over one schema group."""
    if len(instances) != len(vectors):
        raise StructuralError("instances and vectors are misaligned")
    schema_ids = {inst.schema_id for inst in instances}
    if len(schema_ids) > 1:
        raise StructuralError(f"group spans multiple schemas: {sorted(schema_ids)}")
    for inst, vec in zip(instances, vectors):
        if inst.id != vec.instance_id:
            raise StructuralError("instances and vectors are misaligned")

    order = sorted(range(len(instances)),
                   key=lambda i: (stage_rank(instances[i].stage), instances[i].id))
    by_vec = {i: vectors[i].vector for i in order}

    def similarity(i: int, j: int) -> float:
        return cosine(by_vec[i], by_vec[j])

    kept_idx = _greedy_scan(order, similarity, tau)
    kept_set = set(kept_idx)
    removals = []
    for i in order:
        if i in kept_set:
            continue
        nearest = max(kept_idx, key=lambda j: similarity(i, j))
        removals.append(
            RemovalRecord(instances[i].id, instances[nearest].id,
                          round(similarity(i, nearest), 6))
        )
    kept = [instances[i] for i in sorted(kept_set)]
    return kept, removals


def _greedy_scan(order, similarity, tau) -> list[int]:
    """Keep an item iff its max similarity to the kept set is <= tau."""
    kept: list[int] = []
    for i in order:
        if all(similarity(i, j) <= tau for j in kept):
            kept.append(i)
    return kept
