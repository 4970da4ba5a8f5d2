#!/usr/bin/env python3
"""Regenerates the bundled fixture graphs under data/.

Output is deterministic; rerunning overwrites the files with identical bytes.
"""

import argparse
import random
from pathlib import Path

GENES = ["brca1", "tp53", "egfr", "kras", "myc", "pten", "braf", "apc", "rb1", "vhl"]
DISEASES = ["asthma", "diabetes", "melanoma", "glioma", "anemia", "lupus", "gout", "rickets", "scurvy", "tetanus"]
DRUGS = ["aspirin", "insulin", "imatinib", "heparin", "warfarin", "lithium", "morphine", "digoxin", "quinine", "codeine"]


def write_tsv(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        for row in rows:
            f.write("\t".join(str(x) for x in row) + "\n")


def planted_fixture(out, rng):
    """30 nodes, 3 types, 5 edge types.

    gene -associated with-> disease and drug -treats-> disease are dense among
    8 core nodes per type. Three rare relations only touch the peripheral
    genes and drugs, and diseases have no out-edges, so nothing extends the
    planted paths.
    """
    nodes, ids = [], {}
    for t, names in (("gene", GENES), ("disease", DISEASES), ("drug", DRUGS)):
        for i, name in enumerate(names):
            nid = len(nodes) + 1
            ids[(t, i)] = nid
            nodes.append((nid, name, t))
    edges, labels = [], []
    core = range(8)
    for src_type, rel in (("gene", "associated with"), ("drug", "treats")):
        for i in core:
            group = i // 4
            # three partners inside the node's community, one across
            inside = [j for j in core if j // 4 == group]
            outside = [j for j in core if j // 4 != group]
            for j in rng.sample(inside, 3) + rng.sample(outside, 1):
                edges.append((ids[(src_type, i)], ids[("disease", j)], rel))
    rare = [
        (("gene", 8), ("drug", 8), "binds"),
        (("gene", 9), ("drug", 9), "binds"),
        (("drug", 8), ("gene", 9), "inhibits"),
        (("drug", 9), ("gene", 8), "inhibits"),
        (("gene", 8), ("gene", 9), "interacts with"),
        (("gene", 9), ("gene", 8), "interacts with"),
    ]
    for s, d, rel in rare:
        edges.append((ids[s], ids[d], rel))
    for (t, i), nid in sorted(ids.items(), key=lambda kv: kv[1]):
        labels.append((nid, "cluster a" if i % 8 < 4 else "cluster b"))
    write_tsv(out / "nodes.tsv", nodes)
    write_tsv(out / "edges.tsv", edges)
    write_tsv(out / "labels.tsv", labels)


def lp_fixture(out, rng, groups=20):
    """Communities of (6 author, 4 venue, 6 topic) nodes.

    Target relation author -studies-> topic stays inside a community, as do
    author -publishes in-> venue and venue -covers-> topic.
    """
    nodes, edges = [], []

    def add(name, t):
        nodes.append((len(nodes) + 1, name, t))
        return len(nodes)

    for g in range(groups):
        authors = [add(f"author {g} {i}", "author") for i in range(6)]
        venues = [add(f"venue {g} {i}", "venue") for i in range(4)]
        topics = [add(f"topic {g} {i}", "topic") for i in range(6)]
        for a in authors:
            for v in rng.sample(venues, 2):
                edges.append((a, v, "publishes in"))
            for t in rng.sample(topics, 4):
                edges.append((a, t, "studies"))
        for v in venues:
            for t in rng.sample(topics, 3):
                edges.append((v, t, "covers"))
    write_tsv(out / "nodes.tsv", nodes)
    write_tsv(out / "edges.tsv", edges)


def hypothesis_fixture(out, core=8, chain=60):
    """A fully connected core plus a sparse chain.

    Every 2-hop path inside the core closes a triangle and uses high-count
    n-gram contexts; chain paths use single-count contexts and rarely close.
    """
    nodes, edges = [], []

    def add(name, t):
        nodes.append((len(nodes) + 1, name, t))
        return len(nodes)

    hub = [add(f"core{i}", "item") for i in range(core)]
    for a in hub:
        for b in hub:
            if a != b:
                edges.append((a, b, "links to"))
    tail = [add(f"chain{i}", "item") for i in range(chain)]
    for a, b in zip(tail, tail[1:]):
        edges.append((a, b, "links to"))
    # Occasional chords close some chain paths too, so the link is not perfect.
    for i in range(0, chain - 2, 10):
        edges.append((tail[i], tail[i + 2], "links to"))
    write_tsv(out / "nodes.tsv", nodes)
    write_tsv(out / "edges.tsv", edges)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    planted_fixture(args.out / "fixture", random.Random(args.seed))
    lp_fixture(args.out / "lp_fixture", random.Random(args.seed + 1))
    hypothesis_fixture(args.out / "hypothesis_fixture")


if __name__ == "__main__":
    main()
