#!/usr/bin/env python3
"""Write the seed corpus fixtures under crates/core/fixtures/seeds.

seeds20.jsonl   20 Python tasks; three are built to fail the mock quality rules
keep_set.txt    task ids that pass the rules, computed here by hand-coded checks
seeds_dup.jsonl 20 lines with two repeated task ids
bad_schema.jsonl one row missing "tests"

Each kept solution is executed against its tests before writing.
"""
import json
import os
import re

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures", "seeds")

TASKS = [
    ("seed/0", "def below_zero(operations: List[int]) -> bool:",
     "You're given a list of deposit and withdrawal operations on a bank account that starts with zero balance.\n"
     "Detect if at any point the balance falls below zero given the operations, and if so return True.\n"
     "Otherwise return False.",
     "    balance = 0\n    for op in operations:\n        balance += op\n        if balance < 0:\n            return True\n    return False",
     "assert below_zero([1, 2, -4]) is True\nassert below_zero([1, 2]) is False"),
    ("seed/1", "def sum_values(xs: List[int]) -> int:",
     "Return the sum of all values in xs.",
     "    total = 0\n    for x in xs:\n        total += x\n    return total",
     "assert sum_values([1, 2, 3]) == 6\nassert sum_values([]) == 0"),
    ("seed/2", "def count_words(text: str) -> int:",
     "Count the whitespace separated words in text.",
     "    return len(text.split())",
     "assert count_words('a b  c') == 3"),
    ("seed/3", "def is_palindrome(s: str) -> bool:",
     "Check whether s reads the same forwards and backwards.\nReturn True if it does.",
     "    return s == s[::-1]",
     "assert is_palindrome('aba')\nassert not is_palindrome('ab')"),
    ("seed/4", "def max_element(values: List[int]) -> int:",
     "Return the largest element of values.\nThe list values is never empty.",
     "    best = values[0]\n    for v in values:\n        if v > best:\n            best = v\n    return best",
     "assert max_element([3, 9, 2]) == 9"),
    ("seed/5", "def fizz(n: int) -> str:",
     "Return 'Fizz' if n is divisible by three, otherwise the decimal digits of n.",
     "    return 'Fizz' if n % 3 == 0 else str(n)",
     "assert fizz(9) == 'Fizz'\nassert fizz(4) == '4'"),
    ("seed/6", "def average(nums: List[float]) -> float:",
     "Compute the arithmetic mean of nums.",
     "    return sum(nums) / len(nums)",
     "assert average([1.0, 3.0]) == 2.0"),
    ("seed/7", "def reverse_words(sentence: str) -> str:",
     "Reverse the order of the words in sentence.\nWords are separated by single spaces.",
     "    return ' '.join(reversed(sentence.split(' ')))",
     "assert reverse_words('a b c') == 'c b a'"),
    ("seed/8", "def count_vowels(word: str) -> int:",
     "Count how many vowels appear in word.",
     "    return sum(1 for c in word.lower() if c in 'aeiou')",
     "assert count_vowels('Banana') == 3"),
    ("seed/9", "def clamp(x: int, lo: int, hi: int) -> int:",
     "Clamp x into the closed interval from lo to hi.",
     "    return max(lo, min(hi, x))",
     "assert clamp(5, 0, 3) == 3\nassert clamp(-1, 0, 3) == 0"),
    ("seed/10", "def factorial(n: int) -> int:",
     "Return n factorial.\nIf n is zero the result is one.",
     "    result = 1\n    for i in range(2, n + 1):\n        result *= i\n    return result",
     "assert factorial(5) == 120\nassert factorial(0) == 1"),
    ("seed/11", "def unique_sorted(items: List[int]) -> List[int]:",
     "Return the distinct values of items in ascending order.",
     "    return sorted(set(items))",
     "assert unique_sorted([3, 1, 3, 2]) == [1, 2, 3]"),
    ("seed/12", "def gcd(a: int, b: int) -> int:",
     "Return the greatest common divisor of a and b.",
     "    while b:\n        a, b = b, a % b\n    return a",
     "assert gcd(12, 18) == 6"),
    ("seed/13", "def is_prime(n: int) -> bool:",
     "Decide whether n is a prime number.\nReturn False if n is smaller than two.",
     "    if n < 2:\n        return False\n    i = 2\n    while i * i <= n:\n        if n % i == 0:\n            return False\n        i += 1\n    return True",
     "assert is_prime(13)\nassert not is_prime(1)\nassert not is_prime(9)"),
    ("seed/14", "def repeat_string(s: str, times: int) -> str:",
     "Concatenate s with itself the given number of times.",
     "    return s * times",
     "assert repeat_string('ab', 2) == 'abab'"),
    ("seed/15", "def first_negative(values: List[int]) -> Optional[int]:",
     "Return the first negative number in values, or None if there is none.",
     "    for v in values:\n        if v < 0:\n            return v\n    return None",
     "assert first_negative([1, -2, -3]) == -2\nassert first_negative([1]) is None"),
    ("seed/16", "def count_char(text: str, ch: str) -> int:",
     "Count how often ch occurs in text.",
     "    return text.count(ch)",
     "assert count_char('banana', 'a') == 3"),
    # fails: solution is only `pass`
    ("seed/17", "def square_all(xs: List[int]) -> List[int]:",
     "Square every element of xs.",
     "    pass",
     "assert square_all([2]) == [4]"),
    # fails: docstring never names `k`
    ("seed/18", "def rotate(xs: List[int], k: int) -> List[int]:",
     "Rotate xs to the right by the requested amount.",
     "    k %= len(xs)\n    return xs[-k:] + xs[:-k]",
     "assert rotate([1, 2, 3], 1) == [3, 1, 2]"),
    # fails: docstring never names `text`
    ("seed/19", "def capitalize_words(text: str) -> str:",
     "Capitalize the first letter of every word.",
     "    return ' '.join(w.capitalize() for w in text.split(' '))",
     "assert capitalize_words('hi there') == 'Hi There'"),
]


def params(sig):
    inner = sig[sig.index("(") + 1: sig.rindex(")")]
    depth, cur, out = 0, "", []
    for c in inner:
        if c in "[(":
            depth += 1
        elif c in "])":
            depth -= 1
        if c == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += c
    if cur.strip():
        out.append(cur)
    return [p.split(":")[0].strip() for p in out]


def keep(sig, doc, sol):
    body = [l.strip() for l in sol.splitlines()]
    if not any(l and l != "pass" and not l.startswith("#") and not l.startswith("...") for l in body):
        return False
    words = set(re.findall(r"[A-Za-z0-9_]+", doc))
    return all(p in words for p in params(sig))


def row(t):
    tid, sig, doc, sol, tests = t
    return {"task_id": tid, "language": "Python", "docstring": doc, "signature": sig, "solution": sol, "tests": tests}


def main():
    os.makedirs(OUT, exist_ok=True)
    kept = []
    for t in TASKS:
        tid, sig, doc, sol, tests = t
        if keep(sig, doc, sol):
            kept.append(tid)
            src = "from typing import List, Optional, Dict\n" + sig + "\n" + sol + "\n" + tests + "\n"
            exec(compile(src, tid, "exec"), {})
    assert len(kept) == 17, kept
    with open(os.path.join(OUT, "seeds20.jsonl"), "w") as f:
        for t in TASKS:
            f.write(json.dumps(row(t)) + "\n")
    with open(os.path.join(OUT, "keep_set.txt"), "w") as f:
        f.write("\n".join(kept) + "\n")
    with open(os.path.join(OUT, "seeds_dup.jsonl"), "w") as f:
        rows = [row(t) for t in TASKS[:18]] + [row(TASKS[3]), row(TASKS[7])]
        for r in rows:
            f.write(json.dumps(r) + "\n")
    with open(os.path.join(OUT, "bad_schema.jsonl"), "w") as f:
        r = row(TASKS[0])
        f.write(json.dumps(r) + "\n")
        del r["tests"]
        r["task_id"] = "seed/x"
        f.write(json.dumps(r) + "\n")
    print("kept", len(kept))


if __name__ == "__main__":
    main()
