#!/usr/bin/env python3
"""Write crates/core/fixtures/analysis/.

rubric.csv: 12 raters x 5 tasks for each of two systems, integer scores 1..5 whose per-aspect
sums are chosen so the means land on the target two-decimal values.
pair_*.txt + pair_expected.json: two SCoT documents and their similarity computed here by
brute-force token counting and edit distance.
"""
import csv
import json
import math
import os
import random
import re

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures", "analysis")
N = 60
# per-aspect sums over 60 rows: 208/60 = 3.4667, 200/60 = 3.3333, 197/60 = 3.2833, ...
TARGETS = {
    "MSCoT": (208, 200, 197),
    "COTTON": (167, 154, 150),
}


def scores_with_sum(rng, total):
    vals = [total // N] * N
    for i in range(total - sum(vals)):
        vals[i] += 1
    # spread the mass with sum-preserving +1/-1 moves
    for _ in range(400):
        i, j = rng.randrange(N), rng.randrange(N)
        if i != j and vals[i] < 5 and vals[j] > 1:
            vals[i] += 1
            vals[j] -= 1
    rng.shuffle(vals)
    assert sum(vals) == total and all(1 <= v <= 5 for v in vals)
    return vals


def half_up_2(num, den):
    return (200 * num + den) // (2 * den)


PAIR_A = """Let's think step by step.
Input: a list of numbers
Output: the sum of the numbers
1. set total to 0
2. for each number in the list:
    3. add the number to total
4. return total
"""

PAIR_B = """Let's think step by step.
Input: numbers
Output: the largest number
1. set best to the first number
2. for each number in numbers:
    3. if number is greater than best:
        4. set best to number
5. return best
"""


def content(doc):
    lines = doc.strip().split("\n")
    inp = lines[1].split(":", 1)[1]
    out = lines[2].split(":", 1)[1]
    steps = [re.sub(r"^\s*\d+\.\s*", "", l).rstrip(":") for l in lines[3:]]
    return " ".join([inp, out] + steps)


def counts(text):
    c = {}
    for t in re.split(r"[^0-9A-Za-z]+", text.lower()):
        if t:
            c[t] = c.get(t, 0) + 1
    return c


def lev(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[-1][-1]


def main():
    os.makedirs(ROOT, exist_ok=True)
    rng = random.Random(7)
    with open(os.path.join(ROOT, "rubric.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rater", "task_id", "system", "similarity", "naturalness", "educational_value"])
        for system, sums in TARGETS.items():
            cols = [scores_with_sum(rng, s) for s in sums]
            print(system, [half_up_2(s, N) / 100 for s in sums])
            for k in range(N):
                w.writerow([f"rater{k // 5 + 1:02}", f"task/{k % 5 + 1}", system] + [c[k] for c in cols])

    with open(os.path.join(ROOT, "pair_a.txt"), "w") as f:
        f.write(PAIR_A)
    with open(os.path.join(ROOT, "pair_b.txt"), "w") as f:
        f.write(PAIR_B)
    ca, cb = counts(content(PAIR_A)), counts(content(PAIR_B))
    dot = sum(ca[k] * cb.get(k, 0) for k in ca)
    cos = dot / math.sqrt(sum(v * v for v in ca.values()) * sum(v * v for v in cb.values()))
    fa = "S L( S ) S".split()
    fb = "S L( B( S ) ) S".split()
    struct = 1 - lev(fa, fb) / max(len(fa), len(fb))
    expected = {"lexical": cos, "structural": struct, "fingerprints": [" ".join(fa), " ".join(fb)],
                "blend": 0.5 * cos + 0.5 * struct}
    with open(os.path.join(ROOT, "pair_expected.json"), "w") as f:
        json.dump(expected, f, indent=1)
        f.write("\n")
    print(expected)


if __name__ == "__main__":
    main()
