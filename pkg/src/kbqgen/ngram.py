"""Interpolated Kneser-Ney n-gram language model with ARPA import/export.

Training conventions, which the ARPA tables and the scorer share:

- Each sentence is padded with a single <s> and a closing </s>.
- The highest order keeps raw counts; every lower order uses continuation
  counts (number of distinct left-extension words, <s> excluded), except
  that n-grams starting with <s> keep their raw counts since they cannot
  be extended to the left.
- One absolute discount per order, D = n1 / (n1 + 2 * n2) over that
  order's count-of-counts in use; 0.5 when n1 is zero so every order
  always reserves escape mass.
- Words below min_count train as <unk>, and <unk> is always in the
  vocabulary with nonzero probability, so no query scores to -inf.
- Probabilities and backoff weights are stored in log10, ARPA style.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"


class ArpaFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class FluencyScore:
    logprob: float
    length: int
    avg: float


@dataclass
class NgramModel:
    order: int
    vocab: frozenset[str]
    prob_table: dict[tuple[str, ...], float]
    backoff_table: dict[tuple[str, ...], float]

    def map_word(self, word: str) -> str:
        if word in self.vocab:
            return word
        if UNK not in self.vocab:
            raise ValueError(f"out-of-vocabulary word {word!r} and model has no {UNK}")
        return UNK

    def logprob10(self, word: str, context: tuple[str, ...] = ()) -> float:
        """log10 P(word | context) with standard backoff-weight chaining."""
        word = self.map_word(word)
        if self.order > 1:
            ctx = tuple(self.map_word(w) for w in context[-(self.order - 1):])
        else:
            ctx = ()
        acc = 0.0
        while True:
            gram = ctx + (word,)
            if gram in self.prob_table:
                return acc + self.prob_table[gram]
            if not ctx:
                raise ValueError(f"no unigram entry for {word!r}")
            acc += self.backoff_table.get(ctx, 0.0)
            ctx = ctx[1:]


def _read_corpus(corpus_path: str | Path) -> list[list[str]]:
    lines = []
    with open(corpus_path, encoding="utf-8") as fh:
        for raw in fh:
            toks = raw.split()
            if toks:
                lines.append(toks)
    if not lines:
        raise ValueError("empty corpus")
    return lines


def train_ngram(corpus_path: str | Path, order: int = 4, min_count: int = 1) -> NgramModel:
    """Estimate an interpolated Kneser-Ney model from a one-sentence-per-line corpus."""
    if not 1 <= order <= 5:
        raise ValueError("order must be in [1, 5]")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    lines = _read_corpus(corpus_path)

    unigram_raw = Counter(tok for line in lines for tok in line)
    kept = {
        w for w, c in unigram_raw.items() if c >= min_count and w not in (BOS, EOS, UNK)
    }
    mapped = [[tok if tok in kept else UNK for tok in line] for line in lines]

    longest = max(len(line) for line in mapped)
    if order > longest + 1:
        log.warning(
            "order %d exceeds longest sentence + 1 (%d); higher orders are sparse",
            order,
            longest + 1,
        )

    # Raw counts for every order 1..n over <s>-padded lines.
    raw: list[Counter] = [Counter() for _ in range(order + 1)]
    for line in mapped:
        padded = [BOS] + line + [EOS]
        for i in range(len(padded)):
            for m in range(1, order + 1):
                if i + m > len(padded):
                    break
                raw[m][tuple(padded[i : i + m])] += 1

    # Continuation counts: distinct left-extension types, <s> excluded.
    cont: list[dict] = [defaultdict(int) for _ in range(order)]
    for m in range(1, order):
        for gram in raw[m + 1]:
            if gram[0] != BOS:
                cont[m][gram[1:]] += 1

    used: list[dict] = [{} for _ in range(order + 1)]
    for m in range(1, order + 1):
        if m == order:
            used[m] = dict(raw[m])
        else:
            for gram in raw[m]:
                used[m][gram] = raw[m][gram] if gram[0] == BOS else cont[m].get(gram, 0)

    discounts = [0.0] * (order + 1)
    for m in range(1, order + 1):
        counts = [c for g, c in used[m].items() if c > 0 and g != (BOS,)]
        n1 = sum(1 for c in counts if c == 1)
        n2 = sum(1 for c in counts if c == 2)
        discounts[m] = n1 / (n1 + 2 * n2) if n1 > 0 else 0.5

    predicted = sorted(kept) + [UNK, EOS]
    vocab = frozenset(predicted) | {BOS}

    # Linear-space tables during construction avoid log/exp round trips
    # inside the interpolation recursion.
    prob_lin: dict[tuple[str, ...], float] = {}
    bow_lin: dict[tuple[str, ...], float] = {}

    def lookup(word: str, ctx: tuple[str, ...]) -> float:
        acc = 1.0
        while True:
            gram = ctx + (word,)
            if gram in prob_lin:
                return acc * prob_lin[gram]
            assert ctx, f"missing unigram for {word!r}"
            acc *= bow_lin.get(ctx, 1.0)
            ctx = ctx[1:]

    d1 = discounts[1]
    total1 = sum(used[1].get((w,), 0) for w in predicted)
    types1 = sum(1 for w in predicted if used[1].get((w,), 0) > 0)
    gamma1 = d1 * types1 / total1
    uniform = 1.0 / len(predicted)
    for w in predicted:
        c = used[1].get((w,), 0)
        prob_lin[(w,)] = max(c - d1, 0.0) / total1 + gamma1 * uniform

    for m in range(2, order + 1):
        by_ctx: dict[tuple[str, ...], dict[str, int]] = defaultdict(dict)
        for gram, c in used[m].items():
            if c > 0:
                by_ctx[gram[:-1]][gram[-1]] = c
        d = discounts[m]
        for ctx, dist in by_ctx.items():
            total = sum(dist.values())
            types = len(dist)
            gamma = d * types / total
            bow_lin[ctx] = gamma
            for w, c in dist.items():
                prob_lin[ctx + (w,)] = max(c - d, 0.0) / total + gamma * lookup(w, ctx[1:])

    prob_table = {g: math.log10(p) for g, p in prob_lin.items()}
    prob_table[(BOS,)] = -99.0
    backoff_table = {g: math.log10(b) for g, b in bow_lin.items()}
    return NgramModel(
        order=order, vocab=vocab, prob_table=prob_table, backoff_table=backoff_table
    )


def sentence_logprob(model: NgramModel, question) -> FluencyScore:
    """Total log10 probability, word count and their ratio for one question.

    The text is whitespace-tokenized after normalization; </s> is scored
    but boundary symbols do not count toward the length.
    """
    from .textnorm import tokenize

    text = question.text if hasattr(question, "text") else question
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("text is empty after normalization")
    history: tuple[str, ...] = (BOS,)
    total = 0.0
    for word in tokens + [EOS]:
        total += model.logprob10(word, history)
        history = history + (model.map_word(word),)
    length = len(tokens)
    return FluencyScore(logprob=total, length=length, avg=total / length)


def export_arpa(model: NgramModel, path: str | Path) -> None:
    """Write the model in ARPA text format, sections sorted for stable diffs."""
    by_order: dict[int, list[tuple[str, ...]]] = {m: [] for m in range(1, model.order + 1)}
    for gram in model.prob_table:
        by_order[len(gram)].append(gram)
    for grams in by_order.values():
        grams.sort()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        for m in range(1, model.order + 1):
            fh.write(f"ngram {m}={len(by_order[m])}\n")
        fh.write("\n")
        for m in range(1, model.order + 1):
            fh.write(f"\\{m}-grams:\n")
            for gram in by_order[m]:
                line = f"{model.prob_table[gram]:.6f}\t{' '.join(gram)}"
                if gram in model.backoff_table:
                    line += f"\t{model.backoff_table[gram]:.6f}"
                fh.write(line + "\n")
            fh.write("\n")
        fh.write("\\end\\\n")


def import_arpa(path: str | Path) -> NgramModel:
    """Parse an ARPA file back into a model; errors carry line numbers."""
    declared: dict[int, int] = {}
    prob_table: dict[tuple[str, ...], float] = {}
    backoff_table: dict[tuple[str, ...], float] = {}
    with open(path, encoding="utf-8") as fh:
        numbered = enumerate((line.rstrip("\n") for line in fh), start=1)

        lineno = 0
        for lineno, line in numbered:
            if line.strip() == "\\data\\":
                break
            if line.strip():
                raise ArpaFormatError(f"expected \\data\\, got {line!r}", lineno)
        else:
            raise ArpaFormatError("missing \\data\\ header", lineno or None)

        section = None
        for lineno, line in numbered:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("ngram "):
                try:
                    key, value = stripped[len("ngram "):].split("=")
                    declared[int(key)] = int(value)
                except ValueError as exc:
                    raise ArpaFormatError(f"bad ngram count line: {stripped!r}", lineno) from exc
                continue
            section = stripped
            break
        if not declared:
            raise ArpaFormatError("no ngram counts declared", lineno)

        seen: dict[int, int] = {m: 0 for m in declared}
        while section != "\\end\\":
            if section is None:
                raise ArpaFormatError("missing \\end\\", lineno)
            if not (section.startswith("\\") and section.endswith("-grams:")):
                raise ArpaFormatError(f"bad section header {section!r}", lineno)
            try:
                m = int(section[1:].split("-")[0])
            except ValueError as exc:
                raise ArpaFormatError(f"bad section header {section!r}", lineno) from exc
            if m not in declared:
                raise ArpaFormatError(f"section \\{m}-grams: not declared in \\data\\", lineno)
            section = None
            for lineno, line in numbered:
                stripped = line.strip()
                if not stripped:
                    continue
                if stripped.startswith("\\"):
                    section = stripped
                    break
                parts = stripped.split()
                if len(parts) == m + 1:
                    bow = None
                elif len(parts) == m + 2:
                    bow = parts[-1]
                else:
                    raise ArpaFormatError(
                        f"expected {m + 1} or {m + 2} fields, got {len(parts)}", lineno
                    )
                try:
                    prob = float(parts[0])
                    gram = tuple(parts[1 : m + 1])
                    prob_table[gram] = prob
                    if bow is not None:
                        backoff_table[gram] = float(bow)
                except ValueError as exc:
                    raise ArpaFormatError(f"bad numeric field: {exc}", lineno) from exc
                seen[m] += 1
            if section is None:
                raise ArpaFormatError("missing \\end\\", lineno)

    for m, count in declared.items():
        if seen.get(m, 0) != count:
            raise ArpaFormatError(
                f"\\data\\ declares {count} {m}-grams but section has {seen.get(m, 0)}",
                lineno,
            )
    order = max(declared)
    vocab = frozenset(g[0] for g in prob_table if len(g) == 1)
    if not vocab:
        raise ArpaFormatError("no unigram entries")
    return NgramModel(
        order=order, vocab=vocab, prob_table=prob_table, backoff_table=backoff_table
    )
