#!/usr/bin/env python3
"""Generate the toy fixtures under crates/core/tests/data/.

Deterministic: rerunning reproduces the committed files byte for byte.
"""
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
TOY = ROOT / "crates" / "core" / "tests" / "data" / "toy"
MQM = ROOT / "crates" / "core" / "tests" / "data" / "mqm"

WORDS = (
    "the a of and to in is was for on that with as by at from it this be are "
    "have not but had his they were which one you all she there would their we "
    "him been has when who will more no if out so said what up its about into "
    "than them can only other new some could time these two may then do first "
    "any my now such like our over man me even most made after also did many "
    "before must through back years where much your way well down should because "
    "each just those people how too little state good very make world still own "
    "see men work long get here between both life being under never day same "
    "another know while last might us great old year off come since against go "
    "came right used take three harbour quixotic ephemeral lighthouse sonnet "
    "treaty ambassador glacier parliament mosaic violin orchard tapestry nebula "
    "quarantine labyrinth"
).split()
DOMAINS = ["news", "social", "literary", "speech"]
TARGETS = ["de", "ja"]
SYSTEMS = ["human", "sysA", "sysB", "sysC"]
SYSTEM_SKILL = {"human": 0.08, "sysA": 0.05, "sysB": 0.0, "sysC": -0.1}


def sentence(rng, n):
    words = [rng.choice(WORDS) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=False) + "\n")


def toy():
    rng = random.Random(20240917)
    TOY.mkdir(parents=True, exist_ok=True)
    segments = []
    for i in range(50):
        n = rng.randint(3, 24)
        segments.append(
            {
                "segment_id": f"toy{i:03d}",
                "doc_id": f"doc{i // 5:02d}",
                "domain": DOMAINS[i % 4],
                "text": sentence(rng, n),
                "n": n,
                "errors": rng.choice([0, 0, 0, 1, 2]),
                "ease": rng.random(),
            }
        )

    rows = []
    for seg in segments:
        for tgt in TARGETS:
            shared = f"[{tgt}] {seg['text'].lower()}"
            for s, sys_id in enumerate(SYSTEMS):
                q = 0.5 + 0.45 * seg["ease"] + SYSTEM_SKILL[sys_id] - 0.006 * seg["n"] + rng.gauss(0, 0.12)
                score = max(0, min(100, round(q * 100)))
                if q > 0.9:
                    score = 100
                text = shared if (s > 0 and seg["ease"] > 0.7) else f"{shared} ({sys_id} v{s})"
                rows.append(
                    {
                        "segment_id": seg["segment_id"],
                        "doc_id": seg["doc_id"],
                        "source_lang": "en",
                        "target_lang": tgt,
                        "domain": seg["domain"],
                        "source_text": seg["text"],
                        "system_id": sys_id,
                        "is_human": sys_id == "human",
                        "translation": text,
                        "human_score": float(score),
                        "protocol": "ESA",
                        "source_error_count": seg["errors"],
                    }
                )
    write_jsonl(TOY / "testset.jsonl", rows)

    # frequency lexicon; a few rare words are left out and fall back to the floor
    with open(TOY / "lexicon.tsv", "w", encoding="utf-8") as f:
        for rank, w in enumerate(WORDS):
            if w in ("quixotic", "nebula", "labyrinth"):
                continue
            f.write(f"{w}\t{round(7.0 - 4.0 * rank / len(WORDS), 3)}\n")

    # one random projective-ish tree per segment; toy001 has two sentences
    with open(TOY / "parses.conllu", "w", encoding="utf-8") as f:
        for seg in segments:
            tokens = seg["text"].rstrip(".").split() + ["."]
            chunks = [tokens]
            if seg["segment_id"] == "toy001" and len(tokens) > 4:
                chunks = [tokens[:3], tokens[3:]]
            f.write(f"# segment_id = {seg['segment_id']}\n")
            for chunk in chunks:
                f.write(f"# text = {' '.join(chunk)}\n")
                for j, tok in enumerate(chunk, start=1):
                    head = 0 if j == 1 else rng.randint(1, j - 1)
                    rel = "root" if head == 0 else "dep"
                    f.write(f"{j}\t{tok}\t{tok.lower()}\tX\tX\t_\t{head}\t{rel}\t_\t_\n")
                f.write("\n")

    emb = []
    for r in rows:
        vec = [round(rng.gauss(0, 1) / 3, 4) for _ in range(8)]
        emb.append({"segment_id": r["segment_id"], "target_lang": r["target_lang"], "system_id": r["system_id"], "vector": vec})
    write_jsonl(TOY / "embeddings.jsonl", emb)

    # an external quality-like estimator at source level
    with open(TOY / "external_scores.tsv", "w", encoding="utf-8") as f:
        f.write("segment_id\ttarget_lang\tsystem_id\tscore\n")
        for seg in segments:
            f.write(f"{seg['segment_id']}\t*\t*\t{round(seg['ease'] + rng.gauss(0, 0.2), 4)}\n")

    # two crowd systems scored per language; crowd_b misses one cell
    for name, noise in (("crowd_a", 0.15), ("crowd_b", 0.25)):
        with open(TOY / f"{name}.tsv", "w", encoding="utf-8") as f:
            f.write("segment_id\ttarget_lang\tsystem_id\tscore\n")
            for seg in segments:
                for tgt in TARGETS:
                    if name == "crowd_b" and seg["segment_id"] == "toy007" and tgt == "ja":
                        continue
                    f.write(f"{seg['segment_id']}\t{tgt}\t*\t{round(seg['ease'] + rng.gauss(0, noise), 4)}\n")


def mqm():
    rng = random.Random(7)
    MQM.mkdir(parents=True, exist_ok=True)
    header = [
        "segment_id", "doc_id", "source_lang", "target_lang", "domain", "source_text",
        "system_id", "is_human", "translation", "human_score", "protocol",
    ]
    lines = ["\t".join(header)]
    for i in range(6):
        text = sentence(rng, rng.randint(4, 12))
        for sys_id in ("m1", "m2", "m3"):
            penalty = rng.choice([0, 0, -1, -2, -5, -6, -10, -25])
            lines.append("\t".join([
                f"mqm{i}", "d0", "en", "de", "news", text, sys_id, "false",
                f"{sys_id} output {i}", str(float(penalty)), "MQM",
            ]))
    (MQM / "testset.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    toy()
    mqm()
