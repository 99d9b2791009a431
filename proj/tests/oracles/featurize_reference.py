"""Straight-line recomputation of the 15 word features for a JSON fixture.

Usage: featurize_reference.py fixture.json
Prints a JSON object {feature_name: value}.
"""
import json
import math
import sys

NAMES = ["ate", "weighted_ate", "top5_ate", "mean_sim", "top5_mean_sim", "max_sim", "std_sim",
         "sim_closest_pos", "sim_closest_neg", "doc_coef", "diff_norm", "top_diff_1", "top_diff_2",
         "top_diff_3", "max_abs_diff"]


def cosine(u, v):
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return max(-1.0, min(1.0, sum(a * b for a, b in zip(u, v)) / (nu * nv)))


def features(fixture):
    recs = sorted(fixture["records"], key=lambda r: (r["treated_id"], r["matched_id"]))
    n = len(recs)
    sims = [cosine(r["treated"], r["matched"]) for r in recs]
    effects = [r["treated_label"] - r["matched_label"] for r in recs]

    ate = sum(effects) / n
    weights = [max(s, 0.0) for s in sims]
    wsum = sum(weights)
    weighted = sum(w * e for w, e in zip(weights, effects)) / wsum if wsum > 0 else 0.0

    # most similar first; equal similarity keeps the lower treated id first
    order = sorted(range(n), key=lambda i: (-sims[i], recs[i]["treated_id"]))[:5]
    top5_ate = sum(effects[i] for i in order) / len(order)
    top5_sim = sum(sims[i] for i in order) / len(order)

    mean_sim = sum(sims) / n
    max_sim = max(sims)
    std_sim = math.sqrt(sum((s - mean_sim) ** 2 for s in sims) / n)
    pos = [s for s, r in zip(sims, recs) if r["matched_label"] == 1]
    neg = [s for s, r in zip(sims, recs) if r["matched_label"] == -1]

    dim = len(recs[0]["treated"])
    diffs = [[t - m for t, m in zip(r["treated"], r["matched"])] for r in recs]
    delta = [sum(d[j] for d in diffs) / n for j in range(dim)]
    mags = sorted((abs(x) for x in delta), reverse=True) + [0.0, 0.0, 0.0]

    return {
        "ate": ate,
        "weighted_ate": weighted,
        "top5_ate": top5_ate,
        "mean_sim": min(mean_sim, max_sim),
        "top5_mean_sim": min(top5_sim, max_sim),
        "max_sim": max_sim,
        "std_sim": std_sim,
        "sim_closest_pos": max(pos) if pos else 0.0,
        "sim_closest_neg": max(neg) if neg else 0.0,
        "doc_coef": fixture["theta"],
        "diff_norm": math.sqrt(sum(x * x for x in delta)),
        "top_diff_1": mags[0],
        "top_diff_2": mags[1],
        "top_diff_3": mags[2],
        "max_abs_diff": max(abs(x) for d in diffs for x in d),
    }


def main():
    with open(sys.argv[1]) as fh:
        fixture = json.load(fh)
    out = features(fixture)
    print(json.dumps({k: out[k] for k in NAMES}, indent=1))


if __name__ == "__main__":
    main()
