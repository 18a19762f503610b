"""Iterative question expansion through a suggestion provider.

The loop keeps an ordered set E of questions (seeds first) and a frontier
queue; while the queue is non-empty and fewer than max_iterations queries
have been issued, it pops one question, asks the provider for related
questions, and appends unseen ones to both E and the queue.  A provider
is any callable mapping a query string to a list of suggestion strings;
transport problems must surface as ProviderError.
"""

from __future__ import annotations

import json
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable
from urllib.parse import quote

import requests

from .textnorm import normalize, tokenize
from .templates import EXPANDED, Question

log = logging.getLogger(__name__)

SuggestionProvider = Callable[[str], list[str]]

HTTP_PARSERS = ("json_string_array", "json_nested_array")


class ProviderError(RuntimeError):
    """A provider call failed; the expansion loop skips the query."""


@dataclass
class ExpansionConfig:
    max_iterations: int = 100
    queue_discipline: str = "fifo"
    per_query_limit: int = 10
    rate_limit: int = 0  # minimum delay between live calls, milliseconds

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.queue_discipline not in ("fifo", "lifo"):
            raise ValueError("queue_discipline must be 'fifo' or 'lifo'")
        if self.per_query_limit < 1:
            raise ValueError("per_query_limit must be >= 1")
        if self.rate_limit < 0:
            raise ValueError("rate_limit must be >= 0")


@dataclass
class ExpansionState:
    expanded: dict[str, Question] = field(default_factory=dict)
    frontier: deque[Question] = field(default_factory=deque)
    iterations_done: int = 0


def expand(
    seeds: list[Question], provider: SuggestionProvider, config: ExpansionConfig
) -> list[Question]:
    """Grow the seed set; returns E in insertion order, seeds as prefix.

    Each popped query counts toward max_iterations, including ones whose
    provider call fails; failed queries are logged and skipped.  If every
    issued call fails, the result is the seed set and a warning is logged.
    """
    if not seeds:
        raise ValueError("seeds must be non-empty")
    state = ExpansionState()
    for q in seeds:
        key = normalize(q.text)
        if key in state.expanded:
            raise ValueError(f"seeds contain duplicate text {q.text!r}")
        state.expanded[key] = q
        state.frontier.append(q)

    failures = 0
    while state.frontier and state.iterations_done < config.max_iterations:
        state.iterations_done += 1
        if config.queue_discipline == "fifo":
            current = state.frontier.popleft()
        else:
            current = state.frontier.pop()
        try:
            suggestions = provider(current.text)
        except ProviderError as exc:
            failures += 1
            log.warning("query %r failed: %s", current.text, exc)
            continue
        for suggestion in suggestions[: config.per_query_limit]:
            text = normalize(suggestion)
            if not text or text in state.expanded:
                continue
            question = Question(
                text=text,
                provenance=EXPANDED,
                generation=current.generation + 1,
                source=current.text,
            )
            state.expanded[text] = question
            state.frontier.append(question)
    if state.iterations_done and failures == state.iterations_done:
        log.warning("all %d provider queries failed; returning seeds only", failures)
    return list(state.expanded.values())


def mock_provider_from_corpus(corpus_path: str | Path, k: int = 10) -> SuggestionProvider:
    """Deterministic provider: top-k corpus lines by token Jaccard similarity.

    Exact matches of the query are excluded, zero-overlap lines are never
    returned, and ties resolve to the earlier corpus line.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    entries: list[tuple[str, frozenset[str]]] = []
    seen = set()
    with open(corpus_path, encoding="utf-8") as fh:
        for raw in fh:
            text = normalize(raw)
            if text and text not in seen:
                seen.add(text)
                entries.append((text, frozenset(text.split())))

    def provider(query: str) -> list[str]:
        q_text = normalize(query)
        q_tokens = set(tokenize(query))
        if not q_tokens:
            return []
        scored = []
        for index, (text, tokens) in enumerate(entries):
            if text == q_text:
                continue
            overlap = len(q_tokens & tokens)
            if overlap == 0:
                continue
            jaccard = overlap / len(q_tokens | tokens)
            scored.append((-jaccard, index, text))
        scored.sort()
        return [text for _, _, text in scored[:k]]

    return provider


def cached_provider(inner: SuggestionProvider, cache_path: str | Path) -> SuggestionProvider:
    """Replay layer: answers from a JSON-lines cache, appending on miss.

    With a warm cache the inner provider is never called, so pipeline
    replays are offline and deterministic.  Failed inner calls are not
    cached.
    """
    cache_path = Path(cache_path)
    cache: dict[str, list[str]] = {}
    if cache_path.exists():
        with open(cache_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    query, suggestions = record["query"], record["suggestions"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{cache_path}: line {lineno}: bad cache record: {exc}")
                if not isinstance(suggestions, list):
                    raise ValueError(f"{cache_path}: line {lineno}: suggestions not a list")
                cache[query] = [str(s) for s in suggestions]

    def provider(query: str) -> list[str]:
        if query in cache:
            return list(cache[query])
        suggestions = inner(query)
        with open(cache_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"query": query, "suggestions": suggestions}) + "\n")
        cache[query] = suggestions
        return list(suggestions)

    return provider


def offline_provider(cache_path: str | Path) -> SuggestionProvider:
    """Cache-only provider; any query missing from the cache is a failure."""

    def never(query: str) -> list[str]:
        raise ProviderError(f"offline: query {query!r} not in cache")

    return cached_provider(never, cache_path)


def http_provider(
    endpoint_template: str,
    parser: str = "json_string_array",
    rate_limit_ms: int = 0,
    timeout: float = 10.0,
) -> SuggestionProvider:
    """Live provider: GET the endpoint with {query} URL-encoded in.

    Accepted bodies: a JSON array of strings, or the nested two-element
    form [echoed-query, [suggestions...]].  Non-2xx responses and
    unparseable bodies raise ProviderError.  Suggestions come back
    normalized, empties dropped.
    """
    if "{query}" not in endpoint_template:
        raise ValueError("endpoint template must contain a {query} slot")
    if parser not in HTTP_PARSERS:
        raise ValueError(f"unknown parser {parser!r}, expected one of {HTTP_PARSERS}")
    last_call = 0.0

    def provider(query: str) -> list[str]:
        nonlocal last_call
        if rate_limit_ms > 0:
            wait = last_call + rate_limit_ms / 1000.0 - time.monotonic()
            if wait > 0:
                time.sleep(wait)
        url = endpoint_template.replace("{query}", quote(query))
        last_call = time.monotonic()
        try:
            response = requests.get(url, timeout=timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"GET {url} failed: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise ProviderError(f"GET {url} returned status {response.status_code}")
        try:
            body = response.json()
        except ValueError as exc:
            raise ProviderError(f"unparseable body from {url}: {exc}") from exc
        if parser == "json_string_array":
            items = body
        else:
            if not isinstance(body, list) or len(body) < 2:
                raise ProviderError(f"expected [query, [suggestions...]] from {url}")
            items = body[1]
        if not isinstance(items, list) or not all(isinstance(s, str) for s in items):
            raise ProviderError(f"expected an array of strings from {url}")
        return [text for text in (normalize(s) for s in items) if text]

    return provider
