"""End-to-end orchestration: seeds, expansion, scoring, selection.

Every stage persists its output under the run directory so a run can be
inspected or replayed; with a warm suggestion cache a re-run writes
byte-identical artifacts.  Thresholds left unset resolve to the 5th
percentile of the seed set's own scores at run start.
"""

from __future__ import annotations

import json
import logging
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import embed, expander, kb as kb_mod, ngram, templates as tmpl
from .templates import Question, with_scores

log = logging.getLogger(__name__)

STAGES = (
    "load_kb",
    "load_templates",
    "generate_seeds",
    "load_embeddings",
    "build_centroid",
    "language_model",
    "expand",
    "score",
    "select",
    "persist",
)

DOMAIN_LABEL = "in_domain"
REL_SENTINEL = -1.0
THRESHOLD_PERCENTILE = 5.0

SEEDS_FILE = "seeds.jsonl"
EXPANDED_FILE = "expanded.jsonl"
SCORED_FILE = "scored.jsonl"
SELECTED_FILE = "selected.jsonl"
CONFIG_FILE = "config.json"
LOG_FILE = "log.txt"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


@contextmanager
def _stage(name: str):
    assert name in STAGES
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class PipelineConfig:
    kb_path: str = ""
    templates_path: str = ""
    lm_path: str = ""
    embeddings_path: str = ""
    out_dir: str = ""
    kb_format: str = "auto"  # auto | tsv | jsonl
    lm_order: int = 4
    lm_min_count: int = 1
    provider: str = "mock"  # mock | http | cached
    provider_corpus: str | None = None
    provider_endpoint: str | None = None
    provider_parser: str = "json_string_array"
    provider_k: int = 10
    cache_path: str | None = None
    t_rel: float | None = None
    t_flu: float | None = None
    top_k: int = 500
    expansion: expander.ExpansionConfig = field(default_factory=expander.ExpansionConfig)

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass
class ScoredQuestionSet:
    questions: list[Question]
    provenance_counts: dict[str, int]


def resolve_kb_format(path: str, kb_format: str) -> str:
    if kb_format != "auto":
        return kb_format
    return "jsonl" if str(path).endswith(".jsonl") else "tsv"


def load_language_model(path: str | Path, order: int, min_count: int) -> ngram.NgramModel:
    """Sniff ARPA vs plain corpus by the leading \\data\\ marker."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                is_arpa = line.strip() == "\\data\\"
                break
        else:
            raise ValueError("empty language model file")
    if is_arpa:
        return ngram.import_arpa(path)
    return ngram.train_ngram(path, order=order, min_count=min_count)


def build_provider(config: PipelineConfig) -> expander.SuggestionProvider:
    if config.provider == "mock":
        if not config.provider_corpus:
            raise ValueError("provider 'mock' requires a suggestion corpus path")
        inner = expander.mock_provider_from_corpus(config.provider_corpus, config.provider_k)
    elif config.provider == "http":
        if not config.provider_endpoint:
            raise ValueError("provider 'http' requires an endpoint template")
        inner = expander.http_provider(
            config.provider_endpoint,
            parser=config.provider_parser,
            rate_limit_ms=config.expansion.rate_limit,
        )
    elif config.provider == "cached":
        if not config.cache_path:
            raise ValueError("provider 'cached' requires a cache path")
        return expander.offline_provider(config.cache_path)
    else:
        raise ValueError(f"unknown provider {config.provider!r}")
    if config.cache_path:
        return expander.cached_provider(inner, config.cache_path)
    return inner


def seed_centroid(table: embed.EmbeddingTable, seeds: list[Question]) -> np.ndarray:
    """In-domain centroid: one domain document over all seed questions."""
    docs = embed.build_domain_documents(
        table, [(DOMAIN_LABEL, " ".join(q.text for q in seeds))]
    )
    return docs[0].centroid


def score_all(
    questions: list[Question],
    model: ngram.NgramModel,
    table: embed.EmbeddingTable,
    domain_centroid: np.ndarray,
) -> list[Question]:
    """Attach relevance and fluency scores to every question.

    Questions whose text has no covered tokens (or a zero-norm embedding)
    get the relevance sentinel -1.0 and a warning instead of an error.
    """
    scored = []
    for q in questions:
        try:
            rel = embed.relevance(table, q, domain_centroid)
        except ValueError as exc:
            log.warning("relevance sentinel for %r: %s", q.text, exc)
            rel = REL_SENTINEL
        flu = ngram.sentence_logprob(model, q).avg
        scored.append(with_scores(q, rel_score=rel, flu_score=flu))
    return scored


def filter_and_select(scored: list[Question], config: PipelineConfig) -> ScoredQuestionSet:
    """Apply both thresholds, rank survivors by fluency, keep the top_k.

    Ties on fluency rank by higher relevance, then input order.  Unset
    thresholds act as negative infinity.
    """
    for q in scored:
        if q.rel_score is None or q.flu_score is None:
            raise ValueError(f"question {q.text!r} is unscored")
    t_rel = -math.inf if config.t_rel is None else config.t_rel
    t_flu = -math.inf if config.t_flu is None else config.t_flu
    rel_pass = [q for q in scored if q.rel_score >= t_rel]
    flu_pass = [q for q in rel_pass if q.flu_score >= t_flu]
    ranked = sorted(flu_pass, key=lambda q: (-q.flu_score, -q.rel_score))
    if len(ranked) < config.top_k:
        log.info("only %d survivors for top_k=%d", len(ranked), config.top_k)
    selected = ranked[: config.top_k]
    counts = {
        "seeds": sum(1 for q in scored if q.provenance == tmpl.SEED),
        "expanded": sum(1 for q in scored if q.provenance == tmpl.EXPANDED),
        "filtered_rel": len(scored) - len(rel_pass),
        "filtered_flu": len(rel_pass) - len(flu_pass),
        "selected": len(selected),
    }
    return ScoredQuestionSet(questions=selected, provenance_counts=counts)


def _percentile(values: list[float]) -> float:
    return float(np.percentile(np.array(values, dtype=np.float64), THRESHOLD_PERCENTILE))


def _config_snapshot(config: PipelineConfig) -> dict:
    # out_dir is excluded so runs into different directories stay
    # byte-comparable.
    snapshot = asdict(config)
    snapshot.pop("out_dir")
    return snapshot


def run_pipeline(config: PipelineConfig) -> ScoredQuestionSet:
    """Execute all stages, persisting artifacts under config.out_dir.

    Raises StageError naming the first failing stage; artifacts written
    before the failure are left in place for inspection.
    """
    if not config.out_dir:
        raise ValueError("out_dir is required")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    handler = logging.FileHandler(out_dir / LOG_FILE, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler.setLevel(logging.INFO)
    pkg_logger = logging.getLogger(__package__)
    previous_level = pkg_logger.level
    pkg_logger.addHandler(handler)
    if previous_level == logging.NOTSET or previous_level > logging.INFO:
        pkg_logger.setLevel(logging.INFO)
    try:
        return _run_stages(config, out_dir)
    finally:
        pkg_logger.removeHandler(handler)
        pkg_logger.setLevel(previous_level)
        handler.close()


def _run_stages(config: PipelineConfig, out_dir: Path) -> ScoredQuestionSet:
    with _stage("load_kb"):
        knowledge = kb_mod.load_kb(
            config.kb_path, resolve_kb_format(config.kb_path, config.kb_format)
        )
        log.info("kb: %s", kb_mod.kb_stats(knowledge))
    with _stage("load_templates"):
        question_templates = tmpl.load_templates(config.templates_path)
        log.info("templates: %d", len(question_templates))
    with _stage("generate_seeds"):
        seeds = tmpl.generate_seeds(knowledge, question_templates)
        if not seeds:
            raise ValueError("no seed questions generated (no template matched a triple)")
        tmpl.save_questions(seeds, out_dir / SEEDS_FILE)
        log.info("seeds: %d", len(seeds))
    with _stage("load_embeddings"):
        table = embed.load_embeddings(config.embeddings_path)
        log.info("embeddings: %d words, dim %d", len(table), table.dim)
    with _stage("build_centroid"):
        centroid = seed_centroid(table, seeds)
    with _stage("language_model"):
        model = load_language_model(config.lm_path, config.lm_order, config.lm_min_count)
        log.info("language model: order %d, vocab %d", model.order, len(model.vocab))
    with _stage("expand"):
        provider = build_provider(config)
        everything = expander.expand(seeds, provider, config.expansion)
        new_questions = everything[len(seeds):]
        tmpl.save_questions(new_questions, out_dir / EXPANDED_FILE)
        log.info("expanded: %d new question(s)", len(new_questions))
    with _stage("score"):
        scored = score_all(everything, model, table, centroid)
        tmpl.save_questions(scored, out_dir / SCORED_FILE)
        seed_scored = [q for q in scored if q.provenance == tmpl.SEED]
        resolved = config
        if config.t_rel is None or config.t_flu is None:
            t_rel = config.t_rel
            if t_rel is None:
                t_rel = _percentile([q.rel_score for q in seed_scored])
            t_flu = config.t_flu
            if t_flu is None:
                t_flu = _percentile([q.flu_score for q in seed_scored])
            resolved = replace(config, t_rel=t_rel, t_flu=t_flu)
            log.info("resolved thresholds: t_rel=%r t_flu=%r", t_rel, t_flu)
    with _stage("select"):
        result = filter_and_select(scored, resolved)
        tmpl.save_questions(result.questions, out_dir / SELECTED_FILE)
        log.info("selection counts: %s", result.provenance_counts)
    with _stage("persist"):
        with open(out_dir / CONFIG_FILE, "w", encoding="utf-8") as fh:
            json.dump(_config_snapshot(resolved), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return result
