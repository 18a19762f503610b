#!/usr/bin/env python3
"""Regenerate the bundled desk-scale fixtures.

Produces src/kbqgen/data/lm_corpus.txt (a synthetic DIY/household
question-and-statement corpus) and embeddings.txt (PPMI-SVD word vectors
trained on that corpus, unit-normalized, dim 64).  Deterministic: fixed
RNG seed, stable ordering.

Run from the repo root after `pip install -e .`:

    python scripts/build_fixtures.py
"""

import random
from collections import Counter
from pathlib import Path

import numpy as np

from kbqgen import generate_seeds, load_kb, load_templates
from kbqgen.data import data_dir
from kbqgen.textnorm import tokenize

SEED = 20240811
N_GENERATED = 9000
SUGGESTION_COPIES = 8
SEED_QUESTION_COPIES = 10
EMBED_DIM = 64
EMBED_MIN_COUNT = 3
WINDOW = 5

TOOLS = [
    "jigsaw", "circular saw", "table saw", "miter saw", "router",
    "bench grinder", "orbital sander", "belt sander", "hammer drill",
    "cordless drill", "impact driver", "angle grinder", "lawn mower",
    "hedge trimmer", "chainsaw", "hand saw", "multi tool", "drill press",
    "band saw", "palm sander", "heat gun", "shop vac",
]
MATERIALS = [
    "plywood", "hardwood", "softwood", "pine", "oak", "concrete", "brick",
    "metal", "plastic", "drywall", "tile", "laminate", "mdf", "steel",
    "aluminium", "glass", "wood",
]
PARTS = [
    "blade", "rip fence", "router bit", "grinding wheel", "sanding disc",
    "push stick", "battery pack", "petrol engine", "masonry bit",
    "drill bit", "power cord", "air filter", "spark plug", "chuck",
    "motor", "trigger", "wheel guard", "dust bag", "mains power",
]
ACTIVITIES = [
    "curve cutting", "rip cutting", "cross cutting", "edge shaping",
    "sharpening", "sanding", "masonry drilling", "drilling", "grinding",
    "polishing", "routing", "trimming",
]
VERBS = [
    "use", "change", "replace", "sharpen", "clean", "adjust", "repair",
    "maintain", "store", "choose", "buy", "test", "oil", "balance",
    "install", "remove", "fix", "cut", "sand", "drill", "grind", "paint",
    "measure", "clamp", "square", "charge",
]
PLACES = [
    "workshop", "garage", "deck", "shed", "workbench", "job site",
    "backyard", "basement", "kitchen", "garden",
]

QUESTION_PATTERNS = [
    "how to {verb} a {tool}",
    "how to {verb} the {part} on a {tool}",
    "how to {verb} {material} with a {tool}",
    "what {part} should i buy for my {tool}",
    "can i {verb} {material} with a {tool}",
    "can i cut {material} with a {tool}",
    "what is the best {tool} for cutting {material}",
    "what is the best way to {verb} {material}",
    "how do you {verb} a {tool} at home",
    "how long does the {part} of a {tool} last",
    "do i need a {tool}",
    "do i need a {tool} for {material}",
    "how to do {activity} with a {tool}",
    "why does my {tool} stop working",
    "when should i replace the {part} on my {tool}",
    "is it safe to {verb} {material} in the {place}",
    "how much does a {tool} cost",
    "what size {part} fits a {tool}",
    "how to use a {tool} for {activity}",
    "what {tool} to use for {activity}",
    "how to keep a {part} from slipping",
    "should i buy a {tool} or rent one",
    "how to set up a {tool} in a small {place}",
    "what grit sandpaper for {material}",
    "how to stop {material} from splintering",
]
STATEMENT_PATTERNS = [
    "the {tool} is a power tool for {activity}",
    "a sharp {part} makes clean cuts in {material}",
    "always wear safety glasses when you {verb} {material}",
    "keep the {part} clean and dry in the {place}",
    "a {tool} with a worn {part} can burn the {material}",
    "clamp the {material} to the workbench before cutting",
    "read the manual before you {verb} the {tool}",
    "store the {tool} in the {place} after every job",
    "check the {part} before you start the {tool}",
    "the {part} on my {tool} needs to be replaced",
    "you can {verb} {material} with a {tool} if the {part} is sharp",
    "a dull {part} will scorch {material}",
    "unplug the {tool} before changing the {part}",
    "mark the {material} with a pencil before you cut",
]
FILLER_SENTENCES = [
    "the weather was cold in the morning",
    "she made a cup of tea after lunch",
    "the garden needs water every evening in summer",
    "he rode his bicycle to the market",
    "the children played in the backyard until dark",
    "we painted the fence last weekend",
    "the old ladder leans against the shed wall",
    "dinner was ready when they came home",
    "a good plan saves time and money",
    "the train was late again on monday",
    "she reads a book before going to sleep",
    "the dog slept under the kitchen table",
    "fresh bread smells wonderful in the morning",
    "they walked along the river after the rain",
    "the lamp in the hall flickers at night",
    "he fixed the leaking tap in the bathroom",
    "the compost bin sits behind the greenhouse",
    "a clean workshop is a safe workshop",
    "measure twice and cut once",
    "the hardware store opens at eight",
]


def pick(rng, items):
    return items[rng.randrange(len(items))]


def fill(rng, pattern):
    out = pattern
    for slot, items in (
        ("{tool}", TOOLS),
        ("{part}", PARTS),
        ("{material}", MATERIALS),
        ("{activity}", ACTIVITIES),
        ("{verb}", VERBS),
        ("{place}", PLACES),
    ):
        while slot in out:
            out = out.replace(slot, pick(rng, items), 1)
    return out


def build_corpus(out_path: Path) -> list[str]:
    rng = random.Random(SEED)
    data = data_dir()
    kb = load_kb(data / "toy_kb.tsv", "tsv")
    templates = load_templates(data / "toy_templates.tsv")
    seeds = [q.text for q in generate_seeds(kb, templates)]
    suggestions = [
        line.strip() for line in (data / "suggestions.txt").read_text().splitlines()
        if line.strip()
    ]

    lines: list[str] = []
    lines.extend(s for s in suggestions for _ in range(SUGGESTION_COPIES))
    lines.extend(s for s in seeds for _ in range(SEED_QUESTION_COPIES))
    for _ in range(N_GENERATED):
        roll = rng.random()
        if roll < 0.62:
            lines.append(fill(rng, pick(rng, QUESTION_PATTERNS)))
        elif roll < 0.88:
            lines.append(fill(rng, pick(rng, STATEMENT_PATTERNS)))
        else:
            lines.append(pick(rng, FILLER_SENTENCES))
    rng.shuffle(lines)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{out_path}: {len(lines)} lines, {sum(len(l.split()) for l in lines)} tokens")
    return lines


def build_embeddings(lines: list[str], out_path: Path) -> None:
    token_lines = [line.split() for line in lines]
    counts = Counter(tok for toks in token_lines for tok in toks)
    vocab = sorted(w for w, c in counts.items() if c >= EMBED_MIN_COUNT)
    index = {w: i for i, w in enumerate(vocab)}

    co = np.zeros((len(vocab), len(vocab)), dtype=np.float64)
    for toks in token_lines:
        ids = [index[t] for t in toks if t in index]
        for i, wi in enumerate(ids):
            for j in range(max(0, i - WINDOW), min(len(ids), i + WINDOW + 1)):
                if j != i:
                    co[wi, ids[j]] += 1.0

    total = co.sum()
    row = co.sum(axis=1, keepdims=True)
    col = co.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(co * total / (row * col))
    ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)

    u, s, _ = np.linalg.svd(ppmi, full_matrices=False)
    vectors = u[:, :EMBED_DIM] * np.sqrt(s[:EMBED_DIM])
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    assert norms.min() > 0, "zero-norm embedding row"
    vectors = vectors / norms

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {EMBED_DIM}\n")
        for word, vec in zip(vocab, vectors):
            fh.write(word + " " + " ".join(f"{x:.5f}" for x in vec) + "\n")
    print(f"{out_path}: {len(vocab)} words, dim {EMBED_DIM}")

    # Fixture contract: everything the toy pipeline scores must be covered.
    data = data_dir()
    kb = load_kb(data / "toy_kb.tsv", "tsv")
    templates = load_templates(data / "toy_templates.tsv")
    need = set()
    for q in generate_seeds(kb, templates):
        need.update(tokenize(q.text))
    for line in (data / "suggestions.txt").read_text().splitlines():
        need.update(tokenize(line))
    missing = sorted(w for w in need if w not in index)
    assert not missing, f"fixture words missing from embeddings: {missing}"


def main() -> None:
    data = data_dir()
    lines = build_corpus(data / "lm_corpus.txt")
    build_embeddings(lines, data / "embeddings.txt")


if __name__ == "__main__":
    main()
