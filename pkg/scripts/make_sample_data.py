#!/usr/bin/env python3
"""Generate a small sample dataset under data/sample/ for CLI demos:
a noisy bitext corpus, a chat corpus, a model-scores file, and a
pipeline config wired to the generated paths."""
import argparse
import json
import random
from pathlib import Path

DE_WORDS = ["hallo", "guten", "tag", "wie", "geht", "es", "ihnen", "danke",
            "bitte", "paket", "bestellung", "morgen", "hilfe", "problem", "gerne"]
EN_WORDS = ["hello", "good", "day", "how", "are", "you", "thanks", "please",
            "parcel", "order", "morning", "help", "problem", "sure", "welcome"]


def make_bitext(rng, n):
    lines = []
    for i in range(n):
        src = " ".join(rng.choices(DE_WORDS, k=rng.randint(1, 12)))
        tgt = " ".join(rng.choices(EN_WORDS, k=rng.randint(1, 12)))
        roll = rng.random()
        if roll < 0.05:
            src = " ".join(["wort"] * 105)            # too long
        elif roll < 0.10 and lines:
            lines.append(rng.choice(lines))           # duplicate
            continue
        elif roll < 0.15:
            tgt = " ".join(rng.choices(EN_WORDS, k=5 * max(len(src.split()), 1)))
        elif roll < 0.20:
            src = "“" + src + "”…"     # needs normalization
        lines.append(f"{src}\t{tgt}\n")
    return lines


def make_chat(rng, n_dialogues):
    lines = []
    for d in range(n_dialogues):
        for t in range(rng.randint(2, 5)):
            lines.append(json.dumps({
                "dialogue_id": f"dlg{d:03d}",
                "turn_index": t,
                "speaker": rng.choice(["agent", "customer"]),
                "src_text": " ".join(rng.choices(DE_WORDS, k=rng.randint(2, 8))),
                "tgt_text": " ".join(rng.choices(EN_WORDS, k=rng.randint(2, 8))),
                "src_lang": "de",
                "tgt_lang": "en",
            }) + "\n")
    return lines


def make_scores(rng, n_models):
    pairwise = [[0.0 if i == j else round(rng.uniform(0.6, 1.0), 4)
                 for j in range(n_models)] for i in range(n_models)]
    return {
        "models": [f"ft{i + 1}" for i in range(n_models)],
        "comet": [round(rng.uniform(0.70, 0.80), 4) for _ in range(n_models)],
        "pairwise": pairwise,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="data/sample")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--pairs", type=int, default=200)
    parser.add_argument("--dialogues", type=int, default=20)
    parser.add_argument("--models", type=int, default=6)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "bitext.tsv").write_text("".join(make_bitext(rng, args.pairs)),
                                    encoding="utf-8")
    (out / "chat.jsonl").write_text("".join(make_chat(rng, args.dialogues)),
                                    encoding="utf-8")
    (out / "scores.json").write_text(json.dumps(make_scores(rng, args.models),
                                                indent=2), encoding="utf-8")
    config = {
        "seed": args.seed,
        "filter": {"input": str(out / "bitext.tsv"),
                   "output": str(out / "bitext.filtered.tsv")},
        "chatprep": {"input": str(out / "chat.jsonl"),
                     "output": str(out / "chat.prepped.tsv"),
                     "n_prev": 2, "mode": "same", "speaker_tags": True},
        "denoise": {"output": str(out / "chat.noised.tsv"),
                    "pair_fraction": 0.3, "token_prob": 0.15},
    }
    (out / "pipeline.json").write_text(json.dumps(config, indent=2),
                                       encoding="utf-8")
    print(f"wrote sample data to {out}/")


if __name__ == "__main__":
    main()
