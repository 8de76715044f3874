#!/usr/bin/env python3
"""Writes the bundled 40-abstract fixture with four planted themes.

Each abstract draws most sentences from one theme and a few that link a
concept of its theme to a concept of another, so every stage (bigrams,
selection, concepts, knowledge graph, comparison) has something to find.

    python3 tools/make_fixture.py data/fixtures
"""

import json
import random
import sys
from pathlib import Path

THEMES = {
    "cognition": [
        "cognitive informatics", "intelligence", "reasoning", "logic", "psychology",
        "mind", "theory", "symbolic inference", "perception", "consciousness",
        "memory recall", "knowledge representation",
    ],
    "hardware": [
        "neuromorphic chips", "spiking neurons", "synaptic weights", "memristors",
        "analog circuits", "power consumption", "parallel cores", "silicon",
        "voltage", "crossbar arrays", "transistors", "latency",
    ],
    "learning": [
        "machine learning", "neural networks", "deep learning", "algorithms",
        "training data", "gradient descent", "classification", "backpropagation",
        "language models", "question answering", "feature extraction", "optimization",
    ],
    "enterprise": [
        "business processes", "organizations", "autonomous agents", "customer service",
        "decision support", "analytics", "collaboration", "strategy",
        "workflow automation", "quality management", "stakeholders", "governance",
    ],
}

VERBS = [
    "improve", "enable", "support", "accelerate", "integrate", "drive",
    "require", "shape", "inform", "extend", "transform", "guide",
]

# Only stopwords and linking verbs surround the concepts, so the filler
# forms no topic of its own.
INTRA = [
    "{a} and {b} with {c}.",
    "The {a} of {b} in {c}.",
    "{a} can {verb} {b}.",
    "{a} may {verb} {b} and {c}.",
    "On {a} and {b} for {c}.",
]

CROSS = [
    "{a} may {verb} {b}.",
    "{a} can {verb} {b} with {c}.",
    "From {a} to {b}.",
]


def abstract(rng, theme, others):
    words = THEMES[theme]
    sentences = []
    for _ in range(rng.randint(6, 9)):
        a, b, c = rng.sample(words, 3)
        sentences.append(rng.choice(INTRA).format(a=a, b=b, c=c, verb=rng.choice(VERBS)))
    for _ in range(rng.randint(1, 2)):
        other = rng.choice(others)
        a = rng.choice(words)
        b = rng.choice(THEMES[other])
        if rng.random() < 0.5:
            a, b = b, a
        c = rng.choice(words)
        sentences.append(rng.choice(CROSS).format(a=a, b=b, c=c, verb=rng.choice(VERBS)))
    rng.shuffle(sentences)
    return " ".join(s[0].upper() + s[1:] for s in sentences)


def main(out_dir):
    rng = random.Random(20240401)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(THEMES)
    lines = []
    for i in range(40):
        theme = names[i % 4]
        others = [n for n in names if n != theme]
        rec = {
            "id": f"syn-{i:02d}",
            "title": f"Synthetic abstract {i} on {theme}",
            "abstract": abstract(rng, theme, others),
        }
        lines.append(json.dumps(rec, sort_keys=True))
    (out / "synthetic40.jsonl").write_text("\n".join(lines) + "\n")
    reference = {"themes": [{"name": n, "concepts": THEMES[n]} for n in names]}
    (out / "synthetic40_reference.json").write_text(json.dumps(reference, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures")
