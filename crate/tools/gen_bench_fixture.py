#!/usr/bin/env python3
"""Write crates/core/fixtures/eval/{bench8.jsonl,scripted8.json}.

Eight Python tasks with scripted model output: phase 1 is wrong on tasks 2 and 5, phase 2
(with CoT) fixes task 5 only. Every script is executed here and its outcome asserted.
"""
import json
import os
import subprocess
import sys
import tempfile

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures", "eval")

TASKS = {
    1: ("add", "def add(a: int, b: int) -> int:", "assert add(2, 3) == 5", "def add(a, b):\n    return a + b"),
    2: ("double", "def double(x: int) -> int:", "assert double(4) == 8", "def double(x):\n    return x + 2"),
    3: ("neg", "def neg(x: int) -> int:", "assert neg(3) == -3", "def neg(x):\n    return -x"),
    4: ("first", "def first(xs: List[int]) -> int:", "assert first([7, 8]) == 7", "def first(xs):\n    return xs[0]"),
    5: ("last", "def last(xs: List[int]) -> int:", "assert last([7, 8]) == 8", "def last(xs):\n    return xs[0]"),
    6: ("is_even", "def is_even(n: int) -> bool:", "assert is_even(4) and not is_even(3)", "def is_even(n):\n    return n % 2 == 0"),
    7: ("length", "def length(s: str) -> int:", "assert length('abc') == 3", "def length(s):\n    return len(s)"),
    8: ("upper", "def upper(s: str) -> str:", "assert upper('ab') == 'AB'", "def upper(s):\n    return s.upper()"),
}
PHASE2 = {
    2: "def double(x):\n    return x * 3",
    5: "def last(xs):\n    return xs[-1]",
}
DOCS = {
    "add": "Return the sum of a and b.",
    "double": "Return x multiplied by two.",
    "neg": "Return the negation of x.",
    "first": "Return the first element of xs.",
    "last": "Return the last element of xs.",
    "is_even": "Check whether n is even.",
    "length": "Return the number of characters in s.",
    "upper": "Convert s to upper case.",
}


def passes(code, tests):
    with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as f:
        f.write(code + "\n" + tests + "\n")
    r = subprocess.run([sys.executable, f.name], capture_output=True)
    os.unlink(f.name)
    return r.returncode == 0


def main():
    os.makedirs(OUT, exist_ok=True)
    bench, scripts = [], {}
    for i, (name, sig, tests, code1) in TASKS.items():
        tid = f"task/{i}"
        prompt = f"{sig}\n    '''\n    {DOCS[name]}\n    '''"
        bench.append({"task_id": tid, "language": "Python", "prompt": prompt, "tests": tests, "entry_point": name})
        scripts[tid] = {"1": code1}
        assert passes(code1, tests) == (i not in (2, 5)), tid
        if i in PHASE2:
            scripts[tid]["2"] = PHASE2[i]
            assert passes(PHASE2[i], tests) == (i == 5), tid
    with open(os.path.join(OUT, "bench8.jsonl"), "w") as f:
        for b in bench:
            f.write(json.dumps(b) + "\n")
    with open(os.path.join(OUT, "scripted8.json"), "w") as f:
        json.dump(scripts, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
