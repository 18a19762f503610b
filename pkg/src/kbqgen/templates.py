"""Predicate-keyed question templates and seed question generation.

A template pattern may contain the placeholders #X# (subject slot) and
#Y# (object slot), each at most once.  Applying a template to a triple
with a matching predicate yields one normalized seed question.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .kb import KnowledgeBase, Triple
from .textnorm import normalize

log = logging.getLogger(__name__)

SUBJECT_SLOT = "#X#"
OBJECT_SLOT = "#Y#"
_PLACEHOLDER = re.compile(r"#([A-Za-z]\w*)#")

SEED = "seed"
EXPANDED = "expanded"


class TemplateError(ValueError):
    """Invalid template row; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class QuestionTemplate:
    predicate: str
    pattern: str

    def __post_init__(self):
        if not self.predicate.strip():
            raise TemplateError("empty predicate")
        if not self.pattern.strip():
            raise TemplateError("empty pattern")
        names = _PLACEHOLDER.findall(self.pattern)
        for name in names:
            if f"#{name}#" not in (SUBJECT_SLOT, OBJECT_SLOT):
                raise TemplateError(f"unknown placeholder #{name}#")
        for slot in (SUBJECT_SLOT, OBJECT_SLOT):
            if self.pattern.count(slot) > 1:
                raise TemplateError(f"placeholder {slot} repeated")


@dataclass(frozen=True)
class SeedSource:
    """The (template, triple) pair a seed question was instantiated from."""

    predicate: str
    pattern: str
    subject: str
    object: str


@dataclass(frozen=True)
class Question:
    text: str
    provenance: str = SEED
    generation: int = 0
    source: SeedSource | str | None = None
    rel_score: float | None = None
    flu_score: float | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("question text is empty")
        if self.provenance not in (SEED, EXPANDED):
            raise ValueError(f"bad provenance {self.provenance!r}")
        if (self.provenance == SEED) != (self.generation == 0):
            raise ValueError("provenance 'seed' requires generation 0 and vice versa")


def instantiate(template: QuestionTemplate, triple: Triple) -> str:
    """Normalized question text for one (template, triple) pair."""
    text = template.pattern.replace(SUBJECT_SLOT, triple.subject)
    text = text.replace(OBJECT_SLOT, triple.object)
    return normalize(text)


def load_templates(path: str | Path) -> list[QuestionTemplate]:
    """Read predicate<TAB>pattern rows, in file order.

    A comment line starts with '# ' or is exactly '#'; patterns live in
    column 2 so their placeholders cannot collide with this rule.
    Object-only templates (#Y# without #X#) are legal but logged.
    """
    templates: list[QuestionTemplate] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line == "#" or line.startswith("# "):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise TemplateError(
                    f"expected 2 tab-separated fields, got {len(fields)}", lineno
                )
            try:
                template = QuestionTemplate(fields[0].strip(), fields[1].strip())
            except TemplateError as exc:
                raise TemplateError(str(exc), lineno) from exc
            if OBJECT_SLOT in template.pattern and SUBJECT_SLOT not in template.pattern:
                log.warning("line %d: object-only template %r", lineno, template.pattern)
            templates.append(template)
    return templates


def generate_seeds(kb: KnowledgeBase, templates: list[QuestionTemplate]) -> list[Question]:
    """Apply every matching template to every triple; dedup by normalized text.

    Deterministic: triples in KB order, templates in file order, first
    occurrence of a text wins.
    """
    by_predicate: dict[str, list[QuestionTemplate]] = {}
    for t in templates:
        by_predicate.setdefault(t.predicate, []).append(t)
    seeds: dict[str, Question] = {}
    for triple in kb.triples:
        for template in by_predicate.get(triple.predicate, ()):
            text = instantiate(template, triple)
            if not text or text in seeds:
                continue
            seeds[text] = Question(
                text=text,
                provenance=SEED,
                generation=0,
                source=SeedSource(
                    predicate=template.predicate,
                    pattern=template.pattern,
                    subject=triple.subject,
                    object=triple.object,
                ),
            )
    return list(seeds.values())


def question_to_dict(q: Question) -> dict:
    source: dict | str | None
    if isinstance(q.source, SeedSource):
        source = {
            "predicate": q.source.predicate,
            "pattern": q.source.pattern,
            "subject": q.source.subject,
            "object": q.source.object,
        }
    else:
        source = q.source
    return {
        "text": q.text,
        "provenance": q.provenance,
        "generation": q.generation,
        "source": source,
        "rel_score": q.rel_score,
        "flu_score": q.flu_score,
    }


def question_from_dict(row: dict) -> Question:
    source = row.get("source")
    if isinstance(source, dict):
        source = SeedSource(
            predicate=source["predicate"],
            pattern=source["pattern"],
            subject=source["subject"],
            object=source["object"],
        )
    return Question(
        text=row["text"],
        provenance=row.get("provenance", SEED),
        generation=row.get("generation", 0),
        source=source,
        rel_score=row.get("rel_score"),
        flu_score=row.get("flu_score"),
    )


def save_questions(questions: list[Question], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(question_to_dict(q)) + "\n")


def load_questions(path: str | Path) -> list[Question]:
    questions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                questions.append(question_from_dict(json.loads(line)))
    return questions


def with_scores(q: Question, rel_score: float, flu_score: float) -> Question:
    return replace(q, rel_score=rel_score, flu_score=flu_score)
