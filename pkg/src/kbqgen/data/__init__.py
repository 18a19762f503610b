"""Bundled desk-scale fixtures: a toy power-tool KB, templates, a
suggestion corpus for the mock provider, a language model training
corpus and word vectors trained on it (see scripts/build_fixtures.py).
"""

from pathlib import Path

TOY_KB = "toy_kb.tsv"
TOY_TEMPLATES = "toy_templates.tsv"
SUGGESTIONS = "suggestions.txt"
LM_CORPUS = "lm_corpus.txt"
EMBEDDINGS = "embeddings.txt"


def data_dir() -> Path:
    return Path(__file__).resolve().parent


def path(name: str) -> Path:
    candidate = data_dir() / name
    if not candidate.exists():
        raise FileNotFoundError(f"no bundled data file {name!r}")
    return candidate
