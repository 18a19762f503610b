"""Word embeddings, averaged document vectors, domain relevance and the
nearest-domain-document classifier.

A document embedding is the arithmetic mean of the vectors of its
in-vocabulary tokens (per occurrence); out-of-vocabulary tokens are
skipped rather than zero-filled.  Domain relevance of a question is the
cosine between its embedding and a domain centroid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .textnorm import tokenize


class EmbeddingFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoCoveredTokens(ValueError):
    """Raised when a text has no in-vocabulary tokens; the caller decides policy."""


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class DomainDocument:
    label: str
    centroid: np.ndarray
    word_count: int


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load 'word v1 .. vdim' lines; an optional first line 'count dim' is tolerated.

    Duplicate words keep their first occurrence; inconsistent row widths
    are an error with the offending line number.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    dim = int(parts[1])
                    continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise EmbeddingFormatError("row has no vector components", lineno)
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"expected {dim} components, got {len(values)}", lineno
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"bad vector component: {exc}", lineno) from exc
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError("non-finite vector component", lineno)
            if word not in vectors:
                vectors[word] = vec
    if dim is None or not vectors:
        raise EmbeddingFormatError("no vectors in file")
    return EmbeddingTable(dim=dim, vectors=vectors)


def _covered_vectors(table: EmbeddingTable, text: str) -> list[np.ndarray]:
    return [table.vectors[tok] for tok in tokenize(text) if tok in table.vectors]


def doc_embedding(table: EmbeddingTable, text: str) -> np.ndarray:
    """Mean vector over in-vocabulary token occurrences."""
    vecs = _covered_vectors(table, text)
    if not vecs:
        raise NoCoveredTokens("no covered tokens")
    return np.mean(vecs, axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def relevance(table: EmbeddingTable, question, domain_centroid: np.ndarray) -> float:
    """Cosine between the question's document embedding and the domain centroid."""
    text = question.text if hasattr(question, "text") else question
    return cosine(doc_embedding(table, text), np.asarray(domain_centroid, dtype=np.float64))


def build_domain_documents(
    table: EmbeddingTable, labeled_docs: list[tuple[str, str]]
) -> list[DomainDocument]:
    """One centroid per label, over the concatenation of that label's texts.

    Equivalent to the token-count-weighted mean of the member documents'
    embeddings.  Labels keep first-appearance order.
    """
    texts_by_label: dict[str, list[str]] = {}
    for label, text in labeled_docs:
        texts_by_label.setdefault(label, []).append(text)
    docs = []
    for label, texts in texts_by_label.items():
        vecs = _covered_vectors(table, " ".join(texts))
        if not vecs:
            raise NoCoveredTokens(f"label {label!r} has no covered tokens")
        docs.append(
            DomainDocument(label=label, centroid=np.mean(vecs, axis=0), word_count=len(vecs))
        )
    return docs


def classify(domain_docs: list[DomainDocument], table: EmbeddingTable, text: str) -> str:
    """Label of the nearest domain document by cosine; ties keep list order."""
    if not domain_docs:
        raise ValueError("no domain documents")
    vec = doc_embedding(table, text)
    best_label, best_score = None, -np.inf
    for doc in domain_docs:
        score = cosine(vec, doc.centroid)
        if score > best_score:
            best_label, best_score = doc.label, score
    assert best_label is not None
    return best_label


def save_domain_documents(docs: list[DomainDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {
                        "label": doc.label,
                        "centroid": [float(x) for x in doc.centroid],
                        "word_count": doc.word_count,
                    }
                )
                + "\n"
            )


def load_domain_documents(path: str | Path) -> list[DomainDocument]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            docs.append(
                DomainDocument(
                    label=row["label"],
                    centroid=np.array(row["centroid"], dtype=np.float64),
                    word_count=int(row["word_count"]),
                )
            )
    return docs
