"""Command line interface.

Subcommands mirror the pipeline stages and stage their artifacts through
a shared --out-dir: `seeds` writes seeds.jsonl, `expand` reads it and
writes expanded.jsonl, `score` writes scored.jsonl, `select` writes
selected.jsonl, and `pipeline` runs everything.  A --config JSON file may
supply any flag's value; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import embed, kb as kb_mod, pipeline, templates as tmpl
from .expander import HTTP_PARSERS, ExpansionConfig, expand
from .pipeline import (
    EXPANDED_FILE,
    SCORED_FILE,
    SEEDS_FILE,
    SELECTED_FILE,
    STAGES,
    PipelineConfig,
    StageError,
)


def _add_common(parser: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "kb": dict(help="knowledge base file (TSV or JSON-lines)"),
        "kb-format": dict(choices=["auto", "tsv", "jsonl"], help="KB file format"),
        "templates": dict(help="template TSV file"),
        "lm": dict(help="language model: training corpus or ARPA file"),
        "lm-order": dict(type=int, help="n-gram order when training (default 4)"),
        "lm-min-count": dict(type=int, help="vocabulary count threshold (default 1)"),
        "embeddings": dict(help="word vector text file"),
        "provider": dict(choices=["mock", "http", "cached"], help="suggestion provider"),
        "suggestions": dict(help="suggestion corpus for the mock provider"),
        "endpoint": dict(help="HTTP endpoint template with a {query} slot"),
        "parser": dict(choices=list(HTTP_PARSERS), help="HTTP body shape"),
        "cache": dict(help="suggestion cache file (JSON-lines, append-only)"),
        "t-rel": dict(type=float, help="relevance threshold (default: 5th pct of seeds)"),
        "t-flu": dict(type=float, help="fluency threshold (default: 5th pct of seeds)"),
        "top-k": dict(type=int, help="number of questions to keep (default 500)"),
        "max-iter": dict(type=int, help="expansion query budget (default 100)"),
        "per-query-limit": dict(type=int, help="suggestions consumed per query (default 10)"),
        "rate-limit": dict(type=int, help="delay between live provider calls, ms"),
        "seed-order": dict(choices=["fifo", "lifo"], help="frontier queue discipline"),
        "out-dir": dict(help="run directory for stage artifacts"),
    }
    for name in names:
        parser.add_argument(f"--{name}", default=None, **flags[name])


DEFAULTS = {
    "kb_format": "auto",
    "lm_order": 4,
    "lm_min_count": 1,
    "provider": "mock",
    "parser": "json_string_array",
    "top_k": 500,
    "max_iter": 100,
    "per_query_limit": 10,
    "rate_limit": 0,
    "seed_order": "fifo",
}


class Settings:
    """Flag values merged with the --config file and hard defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._file = {}
        config_path = self._args.get("config")
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                loaded = json.load(fh)
            if not isinstance(loaded, dict):
                raise SystemExit(f"config file {config_path} must hold a JSON object")
            self._file = {str(k).replace("-", "_"): v for k, v in loaded.items()}

    def get(self, key: str, required: bool = False):
        value = self._args.get(key)
        if value is None:
            value = self._file.get(key)
        if value is None:
            value = DEFAULTS.get(key)
        if value is None and required:
            raise SystemExit(f"missing required option --{key.replace('_', '-')}")
        return value


def _out_dir(settings: Settings) -> Path:
    out = Path(settings.get("out_dir", required=True))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _expansion_config(settings: Settings) -> ExpansionConfig:
    return ExpansionConfig(
        max_iterations=int(settings.get("max_iter")),
        queue_discipline=settings.get("seed_order"),
        per_query_limit=int(settings.get("per_query_limit")),
        rate_limit=int(settings.get("rate_limit")),
    )


def _pipeline_config(settings: Settings, out_dir: str) -> PipelineConfig:
    t_rel = settings.get("t_rel")
    t_flu = settings.get("t_flu")
    return PipelineConfig(
        kb_path=settings.get("kb", required=True),
        kb_format=settings.get("kb_format"),
        templates_path=settings.get("templates", required=True),
        lm_path=settings.get("lm", required=True),
        lm_order=int(settings.get("lm_order")),
        lm_min_count=int(settings.get("lm_min_count")),
        embeddings_path=settings.get("embeddings", required=True),
        provider=settings.get("provider"),
        provider_corpus=settings.get("suggestions"),
        provider_endpoint=settings.get("endpoint"),
        provider_parser=settings.get("parser"),
        cache_path=settings.get("cache"),
        t_rel=None if t_rel is None else float(t_rel),
        t_flu=None if t_flu is None else float(t_flu),
        top_k=int(settings.get("top_k")),
        expansion=_expansion_config(settings),
        out_dir=out_dir,
    )


def cmd_seeds(settings: Settings) -> int:
    out = _out_dir(settings)
    kb_path = settings.get("kb", required=True)
    knowledge = kb_mod.load_kb(
        kb_path, pipeline.resolve_kb_format(kb_path, settings.get("kb_format"))
    )
    question_templates = tmpl.load_templates(settings.get("templates", required=True))
    seeds = tmpl.generate_seeds(knowledge, question_templates)
    tmpl.save_questions(seeds, out / SEEDS_FILE)
    print(f"{len(seeds)} seed question(s) -> {out / SEEDS_FILE}")
    return 0


def cmd_expand(settings: Settings) -> int:
    out = _out_dir(settings)
    seeds_path = out / SEEDS_FILE
    if not seeds_path.exists():
        raise SystemExit(f"{seeds_path} not found; run the seeds subcommand first")
    seeds = tmpl.load_questions(seeds_path)
    config = _pipeline_config_for_expand(settings, str(out))
    provider = pipeline.build_provider(config)
    everything = expand(seeds, provider, config.expansion)
    new_questions = everything[len(seeds):]
    tmpl.save_questions(new_questions, out / EXPANDED_FILE)
    print(f"{len(new_questions)} expanded question(s) -> {out / EXPANDED_FILE}")
    return 0


def _pipeline_config_for_expand(settings: Settings, out_dir: str) -> PipelineConfig:
    # Standalone expansion does not need KB/LM/embedding paths.
    return PipelineConfig(
        provider=settings.get("provider"),
        provider_corpus=settings.get("suggestions"),
        provider_endpoint=settings.get("endpoint"),
        provider_parser=settings.get("parser"),
        cache_path=settings.get("cache"),
        expansion=_expansion_config(settings),
        out_dir=out_dir,
    )


def cmd_score(settings: Settings) -> int:
    out = _out_dir(settings)
    seeds_path = out / SEEDS_FILE
    if not seeds_path.exists():
        raise SystemExit(f"{seeds_path} not found; run the seeds subcommand first")
    seeds = tmpl.load_questions(seeds_path)
    expanded_path = out / EXPANDED_FILE
    expanded = tmpl.load_questions(expanded_path) if expanded_path.exists() else []
    table = embed.load_embeddings(settings.get("embeddings", required=True))
    centroid = pipeline.seed_centroid(table, seeds)
    model = pipeline.load_language_model(
        settings.get("lm", required=True),
        int(settings.get("lm_order")),
        int(settings.get("lm_min_count")),
    )
    scored = pipeline.score_all(seeds + expanded, model, table, centroid)
    tmpl.save_questions(scored, out / SCORED_FILE)
    print(f"{len(scored)} scored question(s) -> {out / SCORED_FILE}")
    return 0


def cmd_select(settings: Settings) -> int:
    out = _out_dir(settings)
    scored_path = out / SCORED_FILE
    if not scored_path.exists():
        raise SystemExit(f"{scored_path} not found; run the score subcommand first")
    scored = tmpl.load_questions(scored_path)
    t_rel = settings.get("t_rel")
    t_flu = settings.get("t_flu")
    seed_scored = [q for q in scored if q.provenance == tmpl.SEED]
    if t_rel is None and seed_scored:
        t_rel = pipeline._percentile([q.rel_score for q in seed_scored])
    if t_flu is None and seed_scored:
        t_flu = pipeline._percentile([q.flu_score for q in seed_scored])
    config = PipelineConfig(
        t_rel=None if t_rel is None else float(t_rel),
        t_flu=None if t_flu is None else float(t_flu),
        top_k=int(settings.get("top_k")),
        out_dir=str(out),
    )
    result = pipeline.filter_and_select(scored, config)
    tmpl.save_questions(result.questions, out / SELECTED_FILE)
    print(f"{result.provenance_counts} -> {out / SELECTED_FILE}")
    return 0


def cmd_classify(settings: Settings) -> int:
    table = embed.load_embeddings(settings.get("embeddings", required=True))
    train_path = settings.get("train")
    domains_path = settings.get("domains")
    if bool(train_path) == bool(domains_path):
        raise SystemExit("classify needs exactly one of --train or --domains")
    if train_path:
        labeled = []
        with open(train_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip() or line.startswith("#"):
                    continue
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 2:
                    raise SystemExit(f"{train_path}:{lineno}: expected label<TAB>text")
                labeled.append((fields[0], fields[1]))
        docs = embed.build_domain_documents(table, labeled)
    else:
        docs = embed.load_domain_documents(domains_path)
    save_path = settings.get("save_domains")
    if save_path:
        embed.save_domain_documents(docs, save_path)
    input_path = settings.get("input")
    stream = open(input_path, encoding="utf-8") if input_path else sys.stdin
    try:
        for line in stream:
            text = line.strip()
            if text:
                print(embed.classify(docs, table, text))
    finally:
        if input_path:
            stream.close()
    return 0


def cmd_pipeline(settings: Settings) -> int:
    out = _out_dir(settings)
    config = _pipeline_config(settings, str(out))
    result = pipeline.run_pipeline(config)
    print(f"{result.provenance_counts} -> {out / SELECTED_FILE}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbqgen", description="Question generation from a knowledge base of triples"
    )
    parser.add_argument("--config", default=None, help="JSON file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seeds", help="instantiate templates into seed questions")
    _add_common(p, "kb", "kb-format", "templates", "out-dir")

    p = sub.add_parser("expand", help="grow the seed set via a suggestion provider")
    _add_common(
        p, "provider", "suggestions", "endpoint", "parser", "cache",
        "max-iter", "per-query-limit", "rate-limit", "seed-order", "out-dir",
    )

    p = sub.add_parser("score", help="attach relevance and fluency scores")
    _add_common(p, "lm", "lm-order", "lm-min-count", "embeddings", "out-dir")

    p = sub.add_parser("select", help="filter by thresholds and keep the top-k")
    _add_common(p, "t-rel", "t-flu", "top-k", "out-dir")

    p = sub.add_parser("classify", help="nearest-domain-document labels for texts")
    _add_common(p, "embeddings")
    p.add_argument("--train", default=None, help="label<TAB>text training TSV")
    p.add_argument("--domains", default=None, help="prebuilt domain documents (JSON-lines)")
    p.add_argument("--save-domains", default=None, help="write built domain documents here")
    p.add_argument("--input", default=None, help="texts to label, one per line (default stdin)")

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _add_common(
        p, "kb", "kb-format", "templates", "lm", "lm-order", "lm-min-count",
        "embeddings", "provider", "suggestions", "endpoint", "parser", "cache",
        "t-rel", "t-flu", "top-k", "max-iter", "per-query-limit", "rate-limit",
        "seed-order", "out-dir",
    )
    return parser


COMMANDS = {
    "seeds": cmd_seeds,
    "expand": cmd_expand,
    "score": cmd_score,
    "select": cmd_select,
    "classify": cmd_classify,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return COMMANDS[args.command](settings)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 + STAGES.index(exc.stage)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
