#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures under tests/data/.

Everything is seeded, so reruns are byte-identical. The sample corpora are
synthetic sentences built from small per-language word pools; they exist to
exercise loaders, statistics, and the segmentation invariants, not to read
like real prose. The grid fixture is built so that the (2, 3) window is the
unique F1 winner: score traps reward breaking after one word (hurting any
window with min_words = 1) and after four words (hurting max_words >= 4),
while the reference breaks themselves sit on segments of two or three words.
"""

from __future__ import annotations

import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "tests", "data")

POOLS = {
    "en": (
        "the a this that people children school water food house train city "
        "doctor letter garden window morning evening friend family number "
        "street market bridge winter summer music paper story animal teacher "
        "is are was has have goes comes makes takes finds reads writes helps "
        "opens closes buys sells big small new old good warm cold easy hard "
        "red blue green here there now often never with without under over"
    ).split(),
    "es": (
        "el la los las un una este esta gente niños escuela agua comida casa "
        "tren ciudad médico carta jardín ventana mañana tarde amigo familia "
        "número calle mercado puente invierno verano música papel historia "
        "animal maestro es son era tiene van viene hace toma encuentra lee "
        "escribe ayuda abre cierra compra vende grande pequeño nuevo viejo "
        "bueno cálido frío fácil difícil rojo azul verde aquí allí ahora"
    ).split(),
    "eu": (
        "etxea ura haurrak eskola janaria trena hiria medikua gutuna lorategia "
        "leihoa goiza arratsaldea laguna familia zenbakia kalea merkatua "
        "zubia negua uda musika papera istorioa animalia irakaslea da dira "
        "zen dauka doaz dator egiten hartzen aurkitzen irakurtzen idazten "
        "laguntzen irekitzen ixten erosten saltzen handia txikia berria "
        "zaharra ona beroa hotza erraza zaila gorria urdina berdea hemen han"
    ).split(),
}

# sentences per language file and how many get a stranded-period noise token
N_SENTENCES = {"en": 80, "es": 80, "eu": 80}
N_NOISY = {"en": 6, "es": 5, "eu": 4}
SEEDS = {"en": 101, "es": 202, "eu": 303}
MARKER = "<seg>"


def make_sample(lang: str) -> list[str]:
    rng = random.Random(SEEDS[lang])
    pool = POOLS[lang]
    n_total = N_SENTENCES[lang]
    noisy_at = set(rng.sample(range(n_total), N_NOISY[lang]))
    lines = []
    for k in range(n_total):
        length = rng.randint(3, 24)
        words = [rng.choice(pool) for _ in range(length)]
        words[0] = words[0].capitalize()
        if rng.random() < 0.5:
            words[-1] += "."
        if k in noisy_at and length >= 4:
            # strand a sentence-final period mid-sentence
            spot = rng.randint(1, length - 2)
            words[spot] += "."
        gaps: set[int] = set()
        if length >= 6 and rng.random() < 0.45:
            n_breaks = rng.randint(1, min(3, length // 4))
            gaps = set(rng.sample(range(length - 1), n_breaks))
        out = []
        for i, w in enumerate(words):
            out.append(w)
            if i in gaps:
                out.append(MARKER)
        lines.append(" ".join(out))
    return lines


def make_grid_fixture() -> tuple[list[str], list[dict]]:
    """Three sentences with crafted scores; see the module docstring."""

    def rec(prefix: str, n: int, ref_ends: list[int], hot: dict[int, float]):
        words = [f"{prefix}{i}" for i in range(n)]
        gaps = sorted(e - 1 for e in ref_ends[:-1])
        line_toks = []
        for i, w in enumerate(words):
            line_toks.append(w)
            if i in gaps:
                line_toks.append(MARKER)
        scores = [hot.get(i, 0.1) for i in range(n)]
        scores[n - 1] = 1.0
        return " ".join(line_toks), words, scores

    rows = [
        # 2+3+2+3: every reference gap scores 1.0, everything else 0.1
        rec("alpha", 10, [2, 5, 7, 10], {1: 1.0, 4: 1.0, 6: 1.0}),
        # 2+3 with a trap after word one: windows allowing min_words=1 bite
        rec("bravo", 5, [2, 5], {0: 1.0, 1: 0.9}),
        # 3+3 with a trap after word four: windows allowing max_words>=4 bite
        rec("carol", 6, [3, 6], {3: 1.0, 2: 0.9}),
    ]
    lines = [line for line, _, _ in rows]
    records = [
        {"id": str(k), "tokens": words, "scores": scores}
        for k, (_, words, scores) in enumerate(rows, start=1)
    ]
    return lines, records


TREE_SENTENCES = [
    "the dog ran",
    "a b",
    "can not stop",
]

TREE_LINES = [
    "(S (NP (DT the) (NN dog)) (VP (VBD ran)))",
    "(S (X a) (Y b))",
    "(S (MD cannot) (VB stop))",
]


def write(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def main() -> None:
    os.makedirs(DATA, exist_ok=True)
    for lang in POOLS:
        write(os.path.join(DATA, f"sample_{lang}.txt"), make_sample(lang))
    grid_lines, grid_records = make_grid_fixture()
    write(os.path.join(DATA, "grid_corpus.txt"), grid_lines)
    write(
        os.path.join(DATA, "grid_scores.ndjson"),
        [json.dumps(r, ensure_ascii=False) for r in grid_records],
    )
    write(os.path.join(DATA, "trees_corpus.txt"), TREE_SENTENCES)
    write(os.path.join(DATA, "trees.txt"), TREE_LINES)
    print(f"fixtures written to {os.path.normpath(DATA)}")


if __name__ == "__main__":
    main()
