"""Writes the committed engine fixtures.

Vectors are hand-placed in a small space so that the intended similarities
can be read off directly:

n9_like
    Officials of four countries (US, Israel, Iran, Europe). Country NE
    vectors share a common "nationality" direction and the heads are all
    near each other, so without the NE grid every phrase would end up in one
    cluster. The four cn chains keep them apart.

baseline_contrast
    One tight group of four protest-related phrases plus a phrase ("rioters")
    that is close to only two of them. Average linkage dilutes its distance
    to the whole group above 0.7, so the HC baseline leaves it unclustered;
    the staged pipeline keeps it as a border member.

Run from the repository root: python3 fixtures/generate.py
"""

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def cos(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    return dot / math.sqrt(sum(a * a for a in u) * sum(b * b for b in v))


def mean(vs):
    return [sum(x) / len(vs) for x in zip(*vs)]


def mention(mid, doc, text, etype, rp_text, head, comps, nes=()):
    return {
        "mention_id": mid,
        "doc_id": doc,
        "text": text,
        "entity_type": etype,
        "rp_text": rp_text,
        "head": head,
        "components": [{"lemma": l, "role": r} for l, r in comps],
        "ne_components": [{"surface": s, "label": lab} for s, lab in nes],
    }


def write(name, mentions, vectors, relations, dim):
    out = ROOT / name
    out.mkdir(exist_ok=True)
    with open(out / "mentions.jsonl", "w") as f:
        for m in mentions:
            f.write(json.dumps(m, ensure_ascii=False) + "\n")
    with open(out / "embeddings.tsv", "w") as f:
        for tok in sorted(vectors):
            f.write(tok + "\t" + "\t".join(repr(float(x)) for x in vectors[tok]) + "\n")
    with open(out / "ne_relations.jsonl", "w") as f:
        for a, b, t in relations:
            f.write(json.dumps({"a": a, "b": b, "chain_type": t}) + "\n")
    with open(out / "config.json", "w") as f:
        json.dump({"embedding_dim": dim}, f, indent=2)
        f.write("\n")


def n9_like():
    # dims: official, governance, US, Israel, Iran, Europe, public, media
    US = [0.3, 0.22, 1.0, 0, 0, 0, 0.1, 0]
    IL = [0.3, 0.22, 0, 1.0, 0, 0, 0.1, 0]
    IR = [0.3, 0.22, 0, 0, 1.0, 0, 0.1, 0]
    EU = [0.3, 0.22, 0, 0, 0, 1.0, 0.1, 0]
    v = {
        "officials": [1.0, 0.5, 0, 0, 0, 0, 0.1, 0],
        "leaders": [0.9, 0.7, 0, 0, 0, 0, 0.15, 0],
        "diplomats": [0.95, 0.4, 0, 0, 0, 0, 0, 0.1],
        "negotiators": [0.85, 0.35, 0, 0, 0, 0, 0.05, 0.15],
        "government": [0.5, 1.0, 0, 0, 0, 0, 0, 0],
        "regime": [0.4, 0.95, 0, 0, 0, 0, 0, 0.1],
        "senior": [0.6, 0.3, 0, 0, 0, 0, 0, 0.2],
        "official": [0.9, 0.3, 0, 0, 0, 0, 0.3, 0.1],
        "diplomat": [0.85, 0.2, 0, 0, 0, 0, 0.1, 0.4],
        "journalists": [0.1, 0, 0, 0, 0, 0, 0.3, 1.0],
        "fighters": [0.2, 0, 0, 0, 0, 0, 1.0, -0.3],
        "Hezbollah": [0, 0.2, 0, 0.3, 0.3, 0, 0.5, -0.5],
        # aliases in one chain share a vector
        "American": US, "Americans": US, "U.S.": US, "United_States": US,
        "Israeli": IL, "Israel": IL,
        "Iranian": IR, "Iran": IR,
        "European": EU, "EU": EU,
    }
    relations = [
        ("United States", "U.S.", "cn"),
        ("U.S.", "American", "cn"),
        ("American", "Americans", "cn"),
        ("Israel", "Israeli", "cn"),
        ("Iran", "Iranian", "cn"),
        ("Europe", "European", "cn"),
        ("EU", "European", "cn"),
    ]
    nns, nes, nn = "person-nns", "person-nes", "person-nn"
    rows = [
        # (doc, text, type, rp_text, head, [(lemma, role)], [(surface, label)])
        ("d1", "American officials", nes, "American officials", "officials",
         [("American", "amod")], [("American", "NORP")]),
        ("d1", "Israeli officials", nes, "Israeli officials", "officials",
         [("Israeli", "amod")], [("Israeli", "NORP")]),
        ("d1", "U.S. diplomats", nes, "U.S. diplomats", "diplomats",
         [("U.S.", "compound")], [("U.S.", "GPE")]),
        ("d1", "Iranian officials", nes, "Iranian officials", "officials",
         [("Iranian", "amod")], [("Iranian", "NORP")]),
        ("d1", "the Iranian regime", nes, "Iranian regime", "regime",
         [("Iranian", "amod")], [("Iranian", "NORP")]),
        ("d1", "journalists", nn, "journalists", "journalists", [], []),
        ("d2", "U.S. officials", nes, "U.S. officials", "officials",
         [("U.S.", "compound")], [("U.S.", "GPE")]),
        ("d2", "American leaders", nes, "American leaders", "leaders",
         [("American", "amod")], [("American", "NORP")]),
        ("d2", "Israeli leaders", nes, "Israeli leaders", "leaders",
         [("Israeli", "amod")], [("Israeli", "NORP")]),
        ("d2", "Israel's government", nes, "Israel government", "government",
         [("Israel", "nmod")], [("Israel", "GPE")]),
        ("d2", "Iran leaders", nes, "Iran leaders", "leaders",
         [("Iran", "compound")], [("Iran", "GPE")]),
        ("d2", "European diplomats", nes, "European diplomats", "diplomats",
         [("European", "amod")], [("European", "NORP")]),
        ("d2", "EU negotiators", nes, "EU negotiators", "negotiators",
         [("EU", "compound")], [("EU", "ORG")]),
        ("d3", "the American officials", nes, "American officials", "officials",
         [("American", "amod")], [("American", "NORP")]),
        ("d3", "senior Israeli officials", nes, "senior Israeli officials", "officials",
         [("senior", "amod"), ("Israeli", "amod")], [("Israeli", "NORP")]),
        ("d3", "European leaders", nes, "European leaders", "leaders",
         [("European", "amod")], [("European", "NORP")]),
        ("d3", "Iran's government", nes, "Iran government", "government",
         [("Iran", "nmod")], [("Iran", "GPE")]),
        ("d3", "United States negotiators", nes, "United States negotiators", "negotiators",
         [("United States", "compound")], [("United States", "GPE")]),
        ("d3", "Hezbollah fighters", nes, "Hezbollah fighters", "fighters",
         [("Hezbollah", "compound")], [("Hezbollah", "ORG")]),
        ("d3", "EU diplomats", nes, "EU diplomats", "diplomats",
         [("EU", "compound")], [("EU", "ORG")]),
        # non-core phrases: one with an NE, one claimed by every country
        ("d2", "an American diplomat", nn, "American diplomat", "diplomat",
         [("American", "amod")], [("American", "NORP")]),
        ("d3", "a senior official", nn, "senior official", "official",
         [("senior", "amod")], []),
    ]
    mentions = []
    for i, (doc, text, etype, rp, head, comps, nelist) in enumerate(rows):
        mentions.append(mention(f"n9-{i:02d}", doc, text, etype, rp, head,
                                [(head, "head")] + comps, nelist))
    # without the grid these would be near-duplicates
    us = mean([v["American"], v["officials"]])
    il = mean([v["Israeli"], v["officials"]])
    assert cos(us, il) > 0.6, cos(us, il)
    write("n9_like", mentions, v, relations, 8)


def baseline_contrast():
    # dims: protest, crowd, violence, street, police, politics, misc, misc
    v = {
        "protesters": [1.0, 0.45, 0.05, 0.2, 0, 0, 0, 0],
        "demonstrators": [1.0, 0.5, 0.0, 0.1, 0, 0, 0, 0],
        "activists": [1.0, 0.0, 0.0, -0.4, 0, 0.5, 0, 0],
        "marchers": [1.0, 0.0, 0.0, -0.35, 0, 0.4, 0, 0],
        "rioters": [0.2, 1.0, 1.1, 0.3, 0, 0, 0, 0],
        "officers": [0, 0, 0.2, 0.1, 1.0, 0, 0, 0],
        "senators": [0, 0, 0, 0, 0.1, 1.0, 0, 0.4],
    }
    group = ["protesters", "demonstrators", "activists", "marchers"]
    for a in group:
        for b in group:
            assert cos(v[a], v[b]) >= 0.6, (a, b, cos(v[a], v[b]))
    near = [cos(v["rioters"], v[g]) for g in group]
    # close to two members (distance in 0.5-0.7), far from the other two
    assert all(0.4 <= c <= 0.5 for c in near[:2]), near
    assert all(c < 0.1 for c in near[2:]), near
    assert 1 - sum(near) / len(near) > 0.7, near

    nns, nn = "person-nns", "person-nn"
    rows = [
        ("d1", "protesters", nns), ("d1", "the demonstrators", nns),
        ("d2", "activists", nns), ("d2", "marchers", nns),
        ("d2", "rioters", nn), ("d3", "police officers", nn),
        ("d3", "senators", nns), ("d3", "the protesters", nns),
    ]
    mentions = []
    for i, (doc, text, etype) in enumerate(rows):
        head = text.split()[-1]
        comps = [(head, "head")]
        rp = head
        if text == "police officers":
            comps.append(("police", "compound"))
            rp = "police officers"
        mentions.append(mention(f"bc-{i:02d}", doc, text, etype, rp, head, comps))
    write("baseline_contrast", mentions, v, [], 8)


if __name__ == "__main__":
    n9_like()
    baseline_contrast()
