#!/usr/bin/env python3
"""Write crates/core/fixtures/sig_corpus.jsonl.

Every header below is written by hand against the language's own grammar, and so is its
expected IR. When a toolchain is on PATH the header is also compiled with a stub body.
"""
import json
import os
import shutil
import subprocess
import sys
import tempfile

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures", "sig_corpus.jsonl")


def k(kind, *args):
    return {"kind": kind, "args": list(args)}


INT, LONG, FLOAT, DOUBLE, BOOL, STR, CHAR = (k(n) for n in ["Int", "Long", "Float", "Double", "Bool", "Str", "Char"])


def lst(t):
    return k("List", t)


def mp(a, b):
    return k("Map", a, b)


def opt(t):
    return k("Optional", t)


def tup(*ts):
    return k("Tuple", *ts)


def opq(text):
    return {"kind": "Opaque", "args": [], "text": text}


def sig(name, params, ret=None):
    return {"name": name, "params": [{"name": n, "type": t} for n, t in params], "return_type": ret}


def doc(summary=(), params=(), returns=None, examples=None):
    return {
        "summary": list(summary),
        "param_docs": [{"name": n, "text": t} for n, t in params],
        "returns_doc": returns,
        "examples": examples,
    }


NODOC = doc()
S1 = "You're given a list of deposit and withdrawal operations."
S2 = "Detect if the balance ever falls below zero."
P1 = ("operations", "the list of operations")
R1 = "true if the balance falls below zero"

CORPUS = {
    "Python": [
        ('def below_zero(operations: List[int]) -> bool:\n'
         '    """ ' + S1 + '\n    ' + S2 + '\n\n'
         '    Args:\n        operations: the list of operations\n'
         '    Returns:\n        True if the balance falls below zero\n'
         '    >>> below_zero([1, 2, -4, 5])\n    True\n    """',
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], "True if the balance falls below zero", [">>> below_zero([1, 2, -4, 5])", "True"])),
        ("def sum_values(xs: List[int], k: int) -> int:\n"
         "    '''Sum xs plus k.\n\n    Args:\n        xs: values to add\n        k: offset\n"
         "    Returns:\n        the total\n    '''",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], INT),
         doc(["Sum xs plus k."], [("xs", "values to add"), ("k", "offset")], "the total")),
        ("def count_words(text: str) -> Dict[str, int]:\n"
         "    '''\n    Count how often each word occurs.\n\n    Args:\n        text (str): the input\n          text to scan\n    '''",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."], [("text", "the input text to scan")])),
        ("def find_index(items: List[str], target: str) -> Optional[int]:\n"
         "    '''Find the first index of target, or None.'''",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         doc(["Find the first index of target, or None."])),
        ("def min_max(values: List[float]) -> Tuple[float, float]:\n"
         "    '''\n    Return the smallest and largest value.\n    '''",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."])),
        ("def greet(name, widget: Widget):",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "Java": [
        ("/**\n * " + S1 + "\n * " + S2 + "\n *\n * @param operations the list of operations\n"
         " * @return " + R1 + "\n */\npublic static boolean below_zero(List<Integer> operations) {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/** @param xs values to add @param k offset @return the total */\n"
         "public static long sum_values(int[] xs, int k)",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], LONG),
         doc([], [("xs", "values to add"), ("k", "offset")], "the total")),
        ("/**\n * Count how often each word occurs.\n * @param text the input text\n */\n"
         "public static Map<String, Integer> count_words(String text) throws IOException {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."], [("text", "the input text")])),
        ("/** Find the first index of target. */\n"
         "static Optional<Integer> find_index(List<String> items, String target) {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         doc(["Find the first index of target."])),
        ("/**\n * Return the smallest and largest value.\n * @example\n * min_max(new double[]{1, 2})\n */\n"
         "public static double[] min_max(final double[] values) {",
         sig("min_max", [("values", lst(DOUBLE))], lst(DOUBLE)),
         doc(["Return the smallest and largest value."], examples=["min_max(new double[]{1, 2})"])),
        ("public static Object greet(Object name, Widget widget) {",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "CSharp": [
        ("/// <summary>\n/// " + S1 + "\n/// " + S2 + "\n/// </summary>\n"
         "/// <param name=\"operations\">the list of operations</param>\n"
         "/// <returns>" + R1 + "</returns>\npublic static bool below_zero(List<int> operations) {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/// <summary>Sum xs plus k.</summary>\n/// <param name=\"xs\">values to add</param>\n"
         "/// <param name=\"k\">offset</param>\npublic static long sum_values(int[] xs, int k)",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], LONG),
         doc(["Sum xs plus k."], [("xs", "values to add"), ("k", "offset")])),
        ("/// <summary>Count how often each word occurs &amp; report it.</summary>\n"
         "public static Dictionary<string, int> count_words(string text) {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs & report it."])),
        ("/// Find the first index of target.\npublic static int? find_index(List<string> items, string target) {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         doc(["Find the first index of target."])),
        ("/// <summary>\n/// Return the smallest and largest value.\n/// </summary>\n"
         "/// <example>\n/// min_max(new[] { 1.0, 2.0 })\n/// </example>\n"
         "public static (double, double) min_max(double[] values) {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."], examples=["min_max(new[] { 1.0, 2.0 })"])),
        ("public static object greet(object name, Widget widget) {",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "Go": [
        ("// " + S1 + "\n// " + S2 + "\n//\n// Args:\n//     operations: the list of operations\n"
         "// Returns:\n//     " + R1 + "\nfunc below_zero(operations []int) bool {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("// Sum xs plus k.\nfunc sum_values(xs []int, k int) int64 {",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], LONG),
         doc(["Sum xs plus k."])),
        ("// Count how often each word occurs.\nfunc count_words(text string) map[string]int {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."])),
        ("func find_index(items []string, target string) *int {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         NODOC),
        ("// Return the smallest and largest value.\n//\n// Examples:\n//     lo, hi := min_max([]float64{1, 2})\n"
         "func min_max(values []float64) (float64, float64) {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."], examples=["lo, hi := min_max([]float64{1, 2})"])),
        ("func greet(name interface{}, left, right Widget) {",
         sig("greet", [("name", None), ("left", opq("Widget")), ("right", opq("Widget"))]),
         NODOC),
    ],
    "JavaScript": [
        ("/**\n * " + S1 + "\n * " + S2 + "\n * @param operations the list of operations\n"
         " * @returns " + R1 + "\n */\nconst below_zero = function (operations) {",
         sig("below_zero", [("operations", None)]),
         doc([S1, S2], [P1], R1)),
        ("/** Sum xs plus k. @param xs values to add @param k offset */\nfunction sum_values(xs, k) {",
         sig("sum_values", [("xs", None), ("k", None)]),
         doc(["Sum xs plus k."], [("xs", "values to add"), ("k", "offset")])),
        ("/**\n * Count how often each word occurs.\n */\nconst count_words = (text) => {",
         sig("count_words", [("text", None)]),
         doc(["Count how often each word occurs."])),
        ("/** Find the first index of target. */\nfunction find_index(items, target) {",
         sig("find_index", [("items", None), ("target", None)]),
         doc(["Find the first index of target."])),
        ("/**\n * Return the smallest and largest value.\n * @example\n * min_max([1, 2]) // [1, 2]\n */\n"
         "export function min_max(values) {",
         sig("min_max", [("values", None)]),
         doc(["Return the smallest and largest value."], examples=["min_max([1, 2]) // [1, 2]"])),
        ("let greet = function (name, widget) {",
         sig("greet", [("name", None), ("widget", None)]),
         NODOC),
    ],
    "TypeScript": [
        ("/**\n* You're an expert TypeScript programmer\n* You're given a list of (more information)\n*/\n"
         "const below_zero = function (operations): boolean {",
         sig("below_zero", [("operations", None)], BOOL),
         doc(["You're an expert TypeScript programmer", "You're given a list of (more information)"])),
        ("/**\n * Sum xs plus k.\n * @param xs values to add\n * @param k offset\n * @returns the total\n */\n"
         "function sum_values(xs: number[], k: number): number {",
         sig("sum_values", [("xs", lst(DOUBLE)), ("k", DOUBLE)], DOUBLE),
         doc(["Sum xs plus k."], [("xs", "values to add"), ("k", "offset")], "the total")),
        ("/** Count how often each word occurs. */\nconst count_words = (text: string): Map<string, number> => {",
         sig("count_words", [("text", STR)], mp(STR, DOUBLE)),
         doc(["Count how often each word occurs."])),
        ("function find_index(items: string[], target: string): number | null {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(DOUBLE)),
         NODOC),
        ("/**\n * Return the smallest and largest value.\n */\nfunction min_max(values: number[]): [number, number] {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."])),
        ("function greet(name: any, widget?: Widget) {",
         sig("greet", [("name", None), ("widget", opt(opq("Widget")))]),
         NODOC),
    ],
    "Kotlin": [
        ("/**\n * " + S1 + "\n * " + S2 + "\n * @param operations the list of operations\n"
         " * @return " + R1 + "\n */\nfun below_zero(operations: List<Int>): Boolean {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/** Sum xs plus k. */\nfun sum_values(xs: IntArray, k: Int): Long {",
         sig("sum_values", [("xs", opq("IntArray")), ("k", INT)], LONG),
         doc(["Sum xs plus k."])),
        ("/**\n * Count how often each word occurs.\n * @param text the input text\n */\n"
         "fun count_words(text: String): Map<String, Int> {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."], [("text", "the input text")])),
        ("fun find_index(items: List<String>, target: String): Int? {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         NODOC),
        ("/** Return the smallest and largest value. */\nfun min_max(values: List<Double>): Pair<Double, Double> {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."])),
        ("fun greet(name: Any?, widget: Widget) {",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "Scala": [
        ("/**\n * " + S1 + "\n * " + S2 + "\n * @param operations the list of operations\n"
         " * @return " + R1 + "\n */\ndef below_zero(operations: List[Int]): Boolean = {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/** Sum xs plus k. */\ndef sum_values(xs: Seq[Int], k: Int): Long =",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], LONG),
         doc(["Sum xs plus k."])),
        ("/**\n * Count how often each word occurs.\n */\ndef count_words(text: String): Map[String, Int] = {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."])),
        ("def find_index(items: List[String], target: String): Option[Int] = {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         NODOC),
        ("/** Return the smallest and largest value. */\ndef min_max(values: List[Double]): (Double, Double) = {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."])),
        ("def greet(name: Any, widget: Widget): Unit = {",
         sig("greet", [("name", None), ("widget", opq("Widget"))], opq("Unit")),
         NODOC),
    ],
    "Swift": [
        ("/// " + S1 + "\n/// " + S2 + "\n///\n/// - Parameter operations: the list of operations\n"
         "/// - Returns: " + R1 + "\nfunc below_zero(operations: [Int]) -> Bool {",
         sig("below_zero", [("operations", lst(INT))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/// Sum xs plus k.\nfunc sum_values(_ xs: [Int], k: Int) -> Int64 {",
         sig("sum_values", [("xs", lst(INT)), ("k", INT)], LONG),
         doc(["Sum xs plus k."])),
        ("/// Count how often each word occurs.\n/// - Parameter text: the input text\nfunc count_words(text: String) -> [String: Int] {",
         sig("count_words", [("text", STR)], mp(STR, INT)),
         doc(["Count how often each word occurs."], [("text", "the input text")])),
        ("func find_index(items: [String], target: String) -> Int? {",
         sig("find_index", [("items", lst(STR)), ("target", STR)], opt(INT)),
         NODOC),
        ("/// Return the smallest and largest value.\nfunc min_max(values: [Double]) -> (Double, Double) {",
         sig("min_max", [("values", lst(DOUBLE))], tup(DOUBLE, DOUBLE)),
         doc(["Return the smallest and largest value."])),
        ("func greet(name: Any, widget: Widget) {",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "PHP": [
        ("/**\n * " + S1 + "\n * " + S2 + "\n * @param array $operations the list of operations\n"
         " * @return " + R1 + "\n */\nfunction below_zero(array $operations): bool {",
         sig("below_zero", [("operations", opq("array"))], BOOL),
         doc([S1, S2], [P1], R1)),
        ("/** Sum xs plus k. */\nfunction sum_values(array $xs, int $k): int {",
         sig("sum_values", [("xs", opq("array")), ("k", INT)], INT),
         doc(["Sum xs plus k."])),
        ("/**\n * Count how often each word occurs.\n * @param $text the input text\n */\n"
         "function count_words(string $text): array {",
         sig("count_words", [("text", STR)], opq("array")),
         doc(["Count how often each word occurs."], [("text", "the input text")])),
        ("function find_index(array $items, string $target): ?int {",
         sig("find_index", [("items", opq("array")), ("target", STR)], opt(INT)),
         NODOC),
        ("/** Return the smallest and largest value. */\nfunction min_max(array $values): array {",
         sig("min_max", [("values", opq("array"))], opq("array")),
         doc(["Return the smallest and largest value."])),
        ("function greet($name, Widget $widget) {",
         sig("greet", [("name", None), ("widget", opq("Widget"))]),
         NODOC),
    ],
    "Ruby": [
        ("# " + S1 + "\n# " + S2 + "\n#\n# @param operations the list of operations\n"
         "# @return " + R1 + "\ndef below_zero(operations)",
         sig("below_zero", [("operations", None)]),
         doc([S1, S2], [P1], R1)),
        ("# Sum xs plus k.\n# @param xs [Array<Integer>] values to add\ndef sum_values(xs, k)",
         sig("sum_values", [("xs", None), ("k", None)]),
         doc(["Sum xs plus k."], [("xs", "[Array<Integer>] values to add")])),
        ("# Count how often each word occurs.\ndef count_words(text)",
         sig("count_words", [("text", None)]),
         doc(["Count how often each word occurs."])),
        ("def find_index(items, target)",
         sig("find_index", [("items", None), ("target", None)]),
         NODOC),
        ("# Return the smallest and largest value.\n# @example\n#   min_max([1, 2]) #=> [1, 2]\ndef min_max(values)",
         sig("min_max", [("values", None)]),
         doc(["Return the smallest and largest value."], examples=["min_max([1, 2]) #=> [1, 2]"])),
        ("def greet",
         sig("greet", []),
         NODOC),
    ],
    "Perl": [
        ("# " + S1 + "\n# " + S2 + "\n#\n# Args:\n#     operations: the list of operations\n"
         "# Returns:\n#     " + R1 + "\nsub below_zero {\n    my ($operations) = @_;",
         sig("below_zero", [("operations", None)]),
         doc([S1, S2], [P1], R1)),
        ("# Sum xs plus k.\nsub sum_values($xs, $k) {",
         sig("sum_values", [("xs", None), ("k", None)]),
         doc(["Sum xs plus k."])),
        ("# Count how often each word occurs.\nsub count_words {\n    my ($text) = @_;",
         sig("count_words", [("text", None)]),
         doc(["Count how often each word occurs."])),
        ("sub find_index($items, $target) {",
         sig("find_index", [("items", None), ("target", None)]),
         NODOC),
        ("# Return the smallest and largest value.\nsub min_max {\n    my ($values) = @_;",
         sig("min_max", [("values", None)]),
         doc(["Return the smallest and largest value."])),
        ("sub greet {",
         sig("greet", []),
         NODOC),
    ],
}


def stub(lang, raw):
    if lang == "Python":
        return "from typing import *\nclass Widget: pass\n" + raw + "\n    pass\n", ".py"
    if lang == "JavaScript":
        return raw + "\n}\n", ".mjs"
    if lang == "TypeScript":
        return "type Widget = any;\n" + raw + "\n  return undefined as any;\n}\nexport {};\n", ".ts"
    if lang == "Perl":
        return "use strict;\nuse feature 'signatures';\nno warnings;\n" + raw + "\n}\n1;\n", ".pl"
    return None, None


CHECKERS = {
    "Python": lambda p: [sys.executable, "-m", "py_compile", p],
    "JavaScript": lambda p: ["node", "--check", p],
    "TypeScript": lambda p: ["tsc", "--noEmit", "--noImplicitAny", "false", "--target", "es2020", "--lib", "es2020", p],
    "Perl": lambda p: ["perl", "-c", p],
}


def compile_check():
    failures = 0
    with tempfile.TemporaryDirectory() as d:
        for lang, rows in CORPUS.items():
            if lang not in CHECKERS or shutil.which(CHECKERS[lang]("x")[0]) is None:
                print(f"skip {lang}: no local toolchain")
                continue
            for i, (raw, _, _) in enumerate(rows):
                src, ext = stub(lang, raw)
                path = os.path.join(d, f"{lang.lower()}_{i}{ext}")
                with open(path, "w") as f:
                    f.write(src)
                r = subprocess.run(CHECKERS[lang](path), capture_output=True, text=True)
                if r.returncode != 0:
                    failures += 1
                    print(f"FAIL {lang} #{i}\n{src}\n{r.stdout}{r.stderr}")
            print(f"checked {lang}")
    return failures


def main():
    assert len(CORPUS) == 12
    with open(OUT, "w") as f:
        for lang in sorted(CORPUS):
            for raw, s, d in CORPUS[lang]:
                row = {"language": lang, "raw_header": raw, "ir": {"signature": s, "docstring": d}}
                f.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {sum(len(v) for v in CORPUS.values())} headers to {os.path.normpath(OUT)}")
    if "--no-compile" not in sys.argv and compile_check():
        sys.exit(1)


if __name__ == "__main__":
    main()
