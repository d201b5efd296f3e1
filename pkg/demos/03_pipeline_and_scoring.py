"""End-to-end run of the command-line pipeline in a scratch directory,
followed by scoring a simulated prediction file.

Run with: python demos/03_pipeline_and_scoring.py
"""

import json
import tempfile
from pathlib import Path

from mechnli.cli import main
from mechnli.dataset import read_instances

PHRASES = ("we conclude that", "it was concluded that", "we conclude")


def synthetic_corpus(path: Path, n: int = 30) -> None:
    with path.open("w", encoding="utf-8") as handle:
        for i in range(n):
            phrase = PHRASES[i % len(PHRASES)]
            sentences = [
                f"Compound A{i} was applied to cultured cells in assay {i}.",
                f"Measurements showed a {5 + i % 4} unit shift in marker B{i}.",
                f"Control samples with compound C{i} showed no shift.",
                f"Overall, {phrase} A{i} increases B{i} in this system.",
            ]
            record = {
                "id": f"doc{i:03d}",
                "sentences": sentences,
                "entities": [
                    {"sentence": 0, "start": 9, "end": 9 + len(f"A{i}"),
                     "type": "chemical", "role": None},
                    {"sentence": 3, "start": sentences[3].index(f"A{i}"),
                     "end": sentences[3].index(f"A{i}") + len(f"A{i}"),
                     "type": "chemical", "role": "regulator"},
                    {"sentence": 3, "start": sentences[3].index(f"B{i}"),
                     "end": sentences[3].index(f"B{i}") + len(f"B{i}"),
                     "type": "gene_product", "role": "regulated"},
                ],
            }
            handle.write(json.dumps(record) + "\n")


with tempfile.TemporaryDirectory() as scratch:
    root = Path(scratch)
    corpus = root / "corpus.jsonl"
    synthetic_corpus(corpus)

    main(["extract", "--corpus", str(corpus), "--out", str(root / "pairs.jsonl")])
    main(["perturb", "--pairs", str(root / "pairs.jsonl"),
          "--out", str(root / "groups.jsonl"), "--seed", "7"])
    main(["assemble", "--groups", str(root / "groups.jsonl"),
          "--out", str(root / "dataset.jsonl"), "--seed", "7",
          "--ratios", "0.5,0.25,0.25"])
    main(["stats", "--dataset", str(root / "dataset.jsonl"),
          "--out", str(root / "stats.json")])

    # Simulate a classifier that solves the easy role-swap categories but
    # struggles elsewhere, then score it.
    instances = read_instances(root / "dataset.jsonl")
    with (root / "preds.jsonl").open("w", encoding="utf-8") as handle:
        for k, inst in enumerate(instances):
            if inst.category in ("SEN", "SEP", "Positive") or k % 3 == 0:
                label = inst.label.value
            else:
                label = "entailed"  # wrong for negatives
            handle.write(json.dumps({"id": inst.id, "label": label}) + "\n")

    print()
    main(["eval", "--dataset", str(root / "dataset.jsonl"),
          "--predictions", str(root / "preds.jsonl"),
          "--out", str(root / "report.json"),
          "--histogram-svg", str(root / "consistency.svg")])
