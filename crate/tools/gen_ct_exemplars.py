#!/usr/bin/env python3
"""Write crates/core/templates/ct_exemplars.json from the below_zero rows of the signature corpus.

Every header there is hand-written and, where a toolchain exists, compile-checked by
gen_sig_corpus.py. The Python -> TypeScript pair is replaced by the published example.
"""
import json
import os

HERE = os.path.dirname(__file__)
CORE = os.path.join(HERE, "..", "crates", "core")

PUBLISHED_INPUT = "def below_zero(operations) -> bool:\n``` You're given a list of (more information)\n'''"
PUBLISHED_OUTPUT = (
    "/**\n * You're an expert TypeScript programmer\n * You're given a list of (more information)\n */\n"
    "const below_zero = function (operations): boolean {"
)


def main():
    headers = {}
    with open(os.path.join(CORE, "fixtures", "sig_corpus.jsonl")) as f:
        for line in f:
            row = json.loads(line)
            if row["ir"]["signature"]["name"] == "below_zero":
                headers[row["language"]] = row["raw_header"]
    assert len(headers) == 12, sorted(headers)
    out = {
        "headers": dict(sorted(headers.items())),
        "pairs": [{"source": "Python", "target": "TypeScript", "input": PUBLISHED_INPUT, "output": PUBLISHED_OUTPUT}],
    }
    with open(os.path.join(CORE, "templates", "ct_exemplars.json"), "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
