"""Knowledge base loading: a KB is an ordered list of subject/predicate/object triples."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

KB_FORMATS = ("tsv", "jsonl")


class KBFormatError(ValueError):
    """Malformed KB file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        for name in ("subject", "predicate", "object"):
            value = getattr(self, name)
            object.__setattr__(self, name, value.strip())
            if not getattr(self, name):
                raise ValueError(f"triple {name} is empty")


@dataclass(frozen=True)
class KnowledgeBase:
    triples: tuple[Triple, ...]
    predicates: frozenset[str] = field(default_factory=frozenset)
    subjects: frozenset[str] = field(default_factory=frozenset)
    objects: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_triples(cls, triples: list[Triple]) -> "KnowledgeBase":
        """Build a KB from triples, dropping exact duplicates (first occurrence wins)."""
        seen: dict[Triple, None] = {}
        dropped = 0
        for t in triples:
            if t in seen:
                dropped += 1
            else:
                seen[t] = None
        if dropped:
            log.warning("dropped %d duplicate triple(s)", dropped)
        kept = tuple(seen)
        return cls(
            triples=kept,
            predicates=frozenset(t.predicate for t in kept),
            subjects=frozenset(t.subject for t in kept),
            objects=frozenset(t.object for t in kept),
        )


def load_kb(path: str | Path, format: str = "tsv") -> KnowledgeBase:
    """Load a KB file; rejects malformed rows and empty files.

    TSV rows are subject<TAB>predicate<TAB>object; lines starting with '#'
    and blank lines are skipped.  JSON-lines rows are objects with keys
    subject/predicate/object.
    """
    if format not in KB_FORMATS:
        raise ValueError(f"unknown KB format {format!r}, expected one of {KB_FORMATS}")
    triples: list[Triple] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if format == "tsv":
                if line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise KBFormatError(
                        f"expected 3 tab-separated fields, got {len(fields)}", lineno
                    )
                s, p, o = fields
            else:
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise KBFormatError(f"invalid JSON: {exc}", lineno) from exc
                if not isinstance(row, dict):
                    raise KBFormatError("row is not a JSON object", lineno)
                try:
                    s, p, o = row["subject"], row["predicate"], row["object"]
                except KeyError as exc:
                    raise KBFormatError(f"missing key {exc}", lineno) from exc
                if not all(isinstance(v, str) for v in (s, p, o)):
                    raise KBFormatError("subject/predicate/object must be strings", lineno)
            try:
                triples.append(Triple(s, p, o))
            except ValueError as exc:
                raise KBFormatError(str(exc), lineno) from exc
    if not triples:
        raise KBFormatError("empty KB")
    return KnowledgeBase.from_triples(triples)


def save_kb(kb: KnowledgeBase, path: str | Path, format: str = "tsv") -> None:
    if format not in KB_FORMATS:
        raise ValueError(f"unknown KB format {format!r}, expected one of {KB_FORMATS}")
    with open(path, "w", encoding="utf-8") as fh:
        for t in kb.triples:
            if format == "tsv":
                fh.write(f"{t.subject}\t{t.predicate}\t{t.object}\n")
            else:
                fh.write(
                    json.dumps(
                        {"subject": t.subject, "predicate": t.predicate, "object": t.object}
                    )
                    + "\n"
                )


def kb_stats(kb: KnowledgeBase) -> dict[str, int]:
    return {
        "triple_count": len(kb.triples),
        "predicate_count": len(kb.predicates),
        "subject_count": len(kb.subjects),
        "object_count": len(kb.objects),
    }
