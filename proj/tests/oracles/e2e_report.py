#!/usr/bin/env python3
"""Computes the expected agreement reports for tests/fixtures/e2e/scenario.json.

Works from the committed corpus snapshots and shares no code with the C++
implementation. Rerun after changing the scenario or the corpus fixtures:

    python3 tests/oracles/e2e_report.py > tests/fixtures/e2e/expected_report.json
"""

import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "e2e"
K1, B, CUTOFF = 1.5, 0.75, 10
RETRIEVER = "bm25(k1=1.5,b=0.75,cutoff=10)"
DEPTH, PERSISTENCE = 10, Fraction(9, 10)

WORD = re.compile(rb"[A-Za-z0-9\x80-\xff]+")
LOWER = rb"[a-z\x80-\xff]"
CASE_BREAK = re.compile(rb"(?<=[a-z0-9\x80-\xff])(?=[A-Z])|(?<=[A-Z])(?=[A-Z]" + LOWER + rb")")


def tokens(text):
    out = []
    for word in WORD.findall(text.encode("utf-8")):
        out.extend(part.lower().decode("utf-8") for part in CASE_BREAK.split(word) if part)
    return out


def document(entity):
    if entity["docstring"]:
        return entity["docstring"] + "\n" + entity["code"]
    return entity["code"]


def bm25_top(entities, query):
    docs = [tokens(document(e)) for e in entities]
    n = len(docs)
    avg = sum(len(d) for d in docs) / n
    scored = []
    for e, d in zip(entities, docs):
        score = 0.0
        for term in tokens(query):
            tf = d.count(term)
            if tf == 0:
                continue
            df = sum(1 for other in docs if term in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * len(d) / avg))
        if score > 0:
            scored.append((-score, e["entity_id"], e))
    scored.sort(key=lambda x: (x[0], x[1]))
    return [e for _, _, e in scored[:CUTOFF]]


def mock_grade(query, passage):
    wanted = set(tokens(query))
    have = set(tokens(passage))
    if not wanted:
        return 0
    coverage = Fraction(len(wanted & have), len(wanted))
    for grade, bound in ((0, Fraction(1, 3)), (1, Fraction(2, 3)), (2, Fraction(1))):
        if coverage < bound:
            return grade
    return 3


def kappa(a, b):
    n = len(a)
    po = Fraction(sum(x == y for x, y in zip(a, b)), n)
    pa, pb = Fraction(sum(a), n), Fraction(sum(b), n)
    pe = pa * pb + (1 - pa) * (1 - pb)
    return None if pe == 1 else (po - pe) / (1 - pe)


def sign(x):
    return (x > 0) - (x < 0)


def tau_b(a, b):
    n = len(a)
    conc = disc = ties_a = ties_b = pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            pairs += 1
            sa, sb = sign(a[i] - a[j]), sign(b[i] - b[j])
            ties_a += sa == 0
            ties_b += sb == 0
            conc += sa * sb > 0
            disc += sa * sb < 0
    den = (pairs - ties_a) * (pairs - ties_b)
    return None if den == 0 else (conc - disc) / math.sqrt(den)


def ranks(v):
    return [Fraction(sum(y < x for y in v)) + Fraction(sum(y == x for y in v) + 1, 2) for x in v]


def spearman(a, b):
    ra, rb = ranks(a), ranks(b)
    n = len(a)
    ma, mb = sum(ra) / n, sum(rb) / n
    sab = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    saa = sum((x - ma) ** 2 for x in ra)
    sbb = sum((y - mb) ** 2 for y in rb)
    if saa == 0 or sbb == 0:
        return None
    return float(sab) / math.sqrt(float(saa * sbb))


def rbo(a, b):
    depth = min(DEPTH, max(len(a), len(b)))
    if depth == 0:
        return Fraction(0)
    total = norm = Fraction(0)
    for d in range(1, depth + 1):
        overlap = len(set(a[:d]) & set(b[:d]))
        total += PERSISTENCE ** (d - 1) * Fraction(overlap, d)
        norm += PERSISTENCE ** (d - 1)
    return total / norm


def average_precision(rel):
    hits, total = 0, Fraction(0)
    for r, x in enumerate(rel[:DEPTH], start=1):
        if x:
            hits += 1
            total += Fraction(hits, r)
    return total / hits if hits else Fraction(0)


def relevance_order(pairs):
    return [eid for eid, _ in sorted(pairs, key=lambda p: -p[1])]


def round5(x):
    if x is None:
        return None
    q = Fraction(x) * 100000
    whole = math.floor(abs(q) + Fraction(1, 2))
    return math.copysign(whole, q) / 100000 if whole else 0.0


def percent_agreement(agree, n):
    return ((20000 * agree + n) // (2 * n)) / 100


def report(repo, searches, annotator, judge):
    a_all, b_all = [], []
    rbo_sum, rbo_queries, excluded = Fraction(0), 0, 0
    ap_lists = []
    for s in searches:
        human, model = s["human"], s["judge"]
        snapshot = s["snapshot"]
        touched = any(e in human or e in model for e in snapshot)
        if not touched:
            continue
        ranked_a, ranked_b = [], []
        for eid in snapshot:
            if eid in human and eid in model:
                a_all.append(human[eid])
                b_all.append(model[eid])
                ranked_a.append((eid, human[eid]))
                ranked_b.append((eid, model[eid]))
            else:
                excluded += 1
        if any(e in human for e in snapshot):
            ap_lists.append([human.get(e, 0) for e in snapshot[:DEPTH]])
        if ranked_a:
            rbo_sum += rbo(relevance_order(ranked_a), relevance_order(ranked_b))
            rbo_queries += 1
    cells = {"n00": 0, "n01": 0, "n10": 0, "n11": 0}
    for x, y in zip(a_all, b_all):
        cells[f"n{x}{y}"] += 1
    n = len(a_all)
    aps = [average_precision(r) for r in ap_lists]
    return {
        "repo": repo,
        "retriever": RETRIEVER,
        "source_a": annotator,
        "source_b": judge,
        "cross_tab": {**cells, "N": n, "percent_agreement": percent_agreement(cells["n00"] + cells["n11"], n)},
        "kappa": round5(kappa(a_all, b_all)),
        "kendall_tau": round5(tau_b(a_all, b_all)),
        "spearman_rho": round5(spearman(a_all, b_all)),
        "rbo_at_10": round5(rbo_sum / rbo_queries),
        "map_at_10": round5(sum(aps) / len(aps)),
        "excluded_pairs": excluded,
        "queries": rbo_queries,
        "zero_relevant_queries": sum(1 for r in ap_lists if not any(r)),
    }


def main():
    scenario = json.loads((FIXTURES / "scenario.json").read_text())
    reports = []
    for repo in scenario["repos"]:
        name = repo["name"]
        lines = (FIXTURES / "corpus" / f"{name}.jsonl").read_text().splitlines()
        entities = [json.loads(line) for line in lines]
        searches = []
        for s in scenario["searches"]:
            if s["repo"] != name:
                continue
            query = " ".join(s["query"].split())
            top = bm25_top(entities, query)
            human = {e["entity_id"]: s["labels"][e["function_name"]] for e in top if e["function_name"] in s["labels"]}
            model = {e["entity_id"]: int(mock_grade(query, document(e)) > 0) for e in top}
            searches.append({"snapshot": [e["entity_id"] for e in top], "human": human, "judge": model})
        reports.append(report(name, searches, scenario["annotator"], scenario["judge"]))
    json.dump({"reports": reports}, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
