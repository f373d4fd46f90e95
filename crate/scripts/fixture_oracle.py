#!/usr/bin/env python3
"""Derive expected values for the toy fixture with numpy/scipy.

Writes crates/core/tests/data/toy/manifest.json. Nothing here shares code
with the Rust implementation: counts come from a plain pass over the JSONL,
Kendall tau-b from scipy, Pearson from numpy.
"""
import json
import math
import re
from collections import defaultdict
from pathlib import Path

import numpy as np
from scipy.stats import kendalltau

TOY = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data" / "toy"


def load():
    rows = [json.loads(l) for l in open(TOY / "testset.jsonl", encoding="utf-8") if l.strip()]
    return rows


def dec(rows, estimate):
    """Mean over pairs of the mean over systems of tau_b(estimate, gold)."""
    cells = defaultdict(list)
    for r in rows:
        cells[(r["target_lang"], r["system_id"])].append(r)
    per_lang = defaultdict(list)
    for (tgt, sys_id), rs in sorted(cells.items()):
        hyp = [estimate(r) for r in rs]
        gold = [r["human_score"] for r in rs]
        tau = kendalltau(hyp, gold, variant="b").statistic
        if not math.isnan(tau):
            per_lang[tgt].append(tau)
    return float(np.mean([np.mean(v) for v in per_lang.values()]))


def histogram(scores, width=15.0, anchor=100.0):
    counts = defaultdict(int)
    for s in scores:
        counts[int(math.floor((anchor - s) / width))] += 1
    return {str(k): counts[k] for k in sorted(counts)}


def main():
    rows = load()
    segs = sorted({r["segment_id"] for r in rows})
    text = {r["segment_id"]: r["source_text"] for r in rows}
    length = {s: len(re.findall(r"\w+", text[s])) for s in segs}

    pairs = defaultdict(set)
    for r in rows:
        pairs[f"{r['source_lang']}-{r['target_lang']}"].add(r["system_id"])

    by_pair = defaultdict(list)
    for r in rows:
        by_pair[r["target_lang"]].append(r)

    ext = {}
    for line in list(open(TOY / "external_scores.tsv", encoding="utf-8"))[1:]:
        seg, _, _, v = line.rstrip("\n").split("\t")
        ext[seg] = float(v)

    hist = {}
    for tgt, rs in sorted(by_pair.items()):
        all_scores = [r["human_score"] for r in rs]
        by_sys = defaultdict(list)
        by_seg = defaultdict(list)
        for r in rs:
            by_sys[r["system_id"]].append(r["human_score"])
            by_seg[r["segment_id"]].append(r["human_score"])
        best_mean = max(np.mean(v) for v in by_sys.values())
        top_model = min(k for k, v in by_sys.items() if np.mean(v) == best_mean)
        hist[f"en-{tgt}"] = {
            "all": histogram(all_scores),
            "top_model": histogram(by_sys[top_model]),
            "top_model_id": top_model,
            "top_translation": histogram([max(v) for v in by_seg.values()]),
        }

    manifest = {
        "segments": len(segs),
        "translations": len(rows),
        "pairs": {k: len(v) for k, v in sorted(pairs.items())},
        "domains": {d: sum(1 for s in segs if any(r["domain"] == d and r["segment_id"] == s for r in rows))
                    for d in sorted({r["domain"] for r in rows})},
        "perfect_translations": sum(1 for r in rows if r["human_score"] == 100.0),
        "avg_score": {f"en-{t}": float(np.mean([r["human_score"] for r in rs])) for t, rs in sorted(by_pair.items())},
        "pct_perfect": {f"en-{t}": float(np.mean([r["human_score"] == 100.0 for r in rs])) for t, rs in sorted(by_pair.items())},
        "token_counts": length,
        "dec_text_length": dec(rows, lambda r: -length[r["segment_id"]]),
        "dec_external": dec(rows, lambda r: ext[r["segment_id"]]),
        "pearson_external_vs_length_pooled": float(np.corrcoef([ext[s] for s in segs], [length[s] for s in segs])[0, 1]),
        "histograms": hist,
    }
    with open(TOY / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
