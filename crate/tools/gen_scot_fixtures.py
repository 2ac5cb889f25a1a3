#!/usr/bin/env python3
"""Write crates/core/fixtures/scot/{valid,invalid}.

Valid documents are random trees printed with surface noise (renumbering, tabs, blank lines,
preamble casing, else-if sugar). The expected fingerprint is computed here from the tree,
independently of the Rust parser.
"""
import json
import os
import random

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures", "scot")
VERBS = ["set", "add", "append", "compute", "return", "update", "store", "check", "split", "sort", "count", "swap"]
NOUNS = ["the result", "total", "counter", "the list", "balance", "index", "the answer", "max value", "a copy", "the word"]


def phrase(rng):
    return f"{rng.choice(VERBS)} {rng.choice(NOUNS)}"


def tree(rng, depth, budget):
    nodes = []
    for _ in range(rng.randint(1, 3)):
        r = rng.random()
        if depth < 3 and r < 0.25:
            els = tree(rng, depth + 1, budget) if rng.random() < 0.5 else []
            nodes.append(("B", f"if {rng.choice(NOUNS)} is {rng.choice(['empty', 'negative', 'even', 'found'])}",
                          tree(rng, depth + 1, budget), els))
        elif depth < 3 and r < 0.45:
            kw = rng.choice(["for each item in", "while", "for i in range of"])
            nodes.append(("L", f"{kw} {rng.choice(NOUNS)}", tree(rng, depth + 1, budget)))
        else:
            nodes.append(("S", phrase(rng)))
    return nodes


def fingerprint(nodes):
    out = []
    for n in nodes:
        if n[0] == "S":
            out.append("S")
        elif n[0] == "L":
            out += ["L("] + fingerprint(n[2]) + [")"]
        else:
            out += ["B("] + fingerprint(n[2]) + [")"]
            if n[3]:
                out += ["("] + fingerprint(n[3]) + [")"]
    return out


class Printer:
    def __init__(self, rng):
        self.rng = rng
        self.n = 0
        self.lines = []
        self.tab = rng.random() < 0.2

    def line(self, depth, text):
        self.n += self.rng.choice([1, 1, 1, 2]) if self.rng.random() < 0.3 else 1
        pad = "\t" * depth if self.tab else "    " * depth
        num = f"{self.n}. " if self.rng.random() > 0.05 else ""
        trail = " " if self.rng.random() < 0.1 else ""
        self.lines.append(f"{pad}{num}{text}{trail}")
        if self.rng.random() < 0.05:
            self.lines.append("")

    def nodes(self, nodes, depth):
        for n in nodes:
            if n[0] == "S":
                self.line(depth, n[1])
            elif n[0] == "L":
                self.line(depth, n[1] + ":")
                self.nodes(n[2], depth + 1)
            else:
                self.branch(n, depth, "")

    def branch(self, n, depth, prefix):
        self.line(depth, prefix + n[1] + ":")
        self.nodes(n[2], depth + 1)
        els = n[3]
        if not els:
            return
        if len(els) == 1 and els[0][0] == "B" and self.rng.random() < 0.5:
            self.branch(els[0], depth, "else ")
        else:
            self.line(depth, "else:")
            self.nodes(els, depth + 1)


def document(rng, body):
    pre = rng.choice(["Let's think step by step.", "Let's think step by step", "let's think step by step.", "LET'S THINK STEP BY STEP."])
    p = Printer(rng)
    p.nodes(body, 0)
    head = [pre, f"Input: {rng.choice(NOUNS)}", f"Output: {rng.choice(NOUNS)}"]
    if rng.random() < 0.2:
        head.insert(1, "")
    return "\n".join(head + p.lines) + "\n"


CANONICAL = (
    "Let's think step by step.\nInput: a list of operations\nOutput: a boolean\n1. set balance to 0\n"
    "2. for each op in operations:\n    3. add op to balance\n    4. if balance < 0:\n        5. return true\n"
    "6. return false"
)

CANONICAL_AST = {
    "input": "a list of operations",
    "output": "a boolean",
    "body": [
        {"kind": "step", "text": "set balance to 0"},
        {"kind": "loop", "header": "for each op in operations", "body": [
            {"kind": "step", "text": "add op to balance"},
            {"kind": "branch", "condition": "if balance < 0", "then": [{"kind": "step", "text": "return true"}], "else": []},
        ]},
        {"kind": "step", "text": "return false"},
    ],
}

HEAD = "Let's think step by step.\nInput: a list\nOutput: a number\n"
INVALID = {
    "missing_preamble": ("Input: a list\nOutput: a number\n1. return 0\n", "MissingPreamble"),
    "wrong_preamble": ("Let us reason.\nInput: a list\nOutput: a number\n1. return 0\n", "MissingPreamble"),
    "empty_file": ("", "MissingPreamble"),
    "missing_input": ("Let's think step by step.\nOutput: a number\n1. return 0\n", "MissingIOSpec"),
    "missing_output": ("Let's think step by step.\nInput: a list\n1. return 0\n", "MissingIOSpec"),
    "empty_input_text": ("Let's think step by step.\nInput:\nOutput: a number\n1. return 0\n", "MissingIOSpec"),
    "no_steps": (HEAD, "EmptyBody"),
    "empty_branch": (HEAD + "1. if the list is empty:\n2. return 0\n", "EmptyBlock"),
    "empty_loop": (HEAD + "1. for each x in the list:\n", "EmptyBlock"),
    "empty_else": (HEAD + "1. if x:\n    2. return 1\n3. else:\n4. return 0\n", "EmptyBlock"),
    "bad_indent_two_spaces": (HEAD + "1. for each x in the list:\n  2. add x\n", "IndentationError"),
    "bad_indent_unexpected": (HEAD + "1. set total to 0\n    2. add x\n", "IndentationError"),
    "bad_indent_first_step": (HEAD + "    1. set total to 0\n", "IndentationError"),
    "orphan_else": (HEAD + "1. set total to 0\n2. else:\n    3. return 1\n", "OrphanElse"),
    "empty_step": (HEAD + "1. set total to 0\n2.\n", "EmptyStep"),
}


def main():
    rng = random.Random(20240521)
    valid = os.path.join(ROOT, "valid")
    invalid = os.path.join(ROOT, "invalid")
    os.makedirs(valid, exist_ok=True)
    os.makedirs(invalid, exist_ok=True)
    expected = {}
    for i in range(84):
        body = tree(rng, 0, None)
        name = f"doc_{i:03}.txt"
        with open(os.path.join(valid, name), "w") as f:
            f.write(document(rng, body))
        expected[name] = " ".join(fingerprint(body))
    with open(os.path.join(valid, "fingerprints.json"), "w") as f:
        json.dump(expected, f, indent=1, sort_keys=True)
        f.write("\n")
    with open(os.path.join(ROOT, "canonical.txt"), "w") as f:
        f.write(CANONICAL + "\n")
    with open(os.path.join(ROOT, "canonical.ast.json"), "w") as f:
        json.dump(CANONICAL_AST, f, indent=1)
        f.write("\n")
    errors = {}
    for name, (text, err) in INVALID.items():
        with open(os.path.join(invalid, name + ".txt"), "w") as f:
            f.write(text)
        errors[name + ".txt"] = err
    with open(os.path.join(invalid, "expected.json"), "w") as f:
        json.dump(errors, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote 84 valid and {len(INVALID)} invalid documents")


if __name__ == "__main__":
    main()
