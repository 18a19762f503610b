"""Shared text normalization.

Every component that compares, deduplicates or tokenizes question text
must see the same surface form, so the rules live here: lowercase,
collapse whitespace runs to a single space, strip the ends, and drop one
trailing question mark.
"""

import re

_WHITESPACE = re.compile(r"\s+")


def normalize(text: str) -> str:
    text = _WHITESPACE.sub(" ", text.lower()).strip()
    if text.endswith("?"):
        text = text[:-1].rstrip()
    return text


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of the normalized text (empty list for blank input)."""
    norm = normalize(text)
    return norm.split() if norm else []
