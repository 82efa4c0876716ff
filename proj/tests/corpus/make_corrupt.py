#!/usr/bin/env python3
"""Regenerates tests/corpus/corrupt from tests/corpus/valid.

Each corrupt file is one seeded mutation of a valid file. The mutation
decides the line the parser must report, so MANIFEST records the expected
line and error code without consulting the parser.
"""

import pathlib
import random
import re

ROOT = pathlib.Path(__file__).resolve().parent
VALID = ROOT / "valid"
CORRUPT = ROOT / "corrupt"
SEED = 20260101
PER_FILE = 2


def code_lines(lines):
    """Indices of lines holding code outside comments."""
    return [i for i, l in enumerate(lines) if l.strip() and not l.strip().startswith("#")]


def stray_char(lines, rng):
    i = rng.choice(code_lines(lines))
    indent = len(lines[i]) - len(lines[i].lstrip())
    lines[i] = lines[i][:indent] + "$ " + lines[i][indent:]
    return i, "SyntaxError"


def bad_target(lines, rng):
    cands = [i for i, l in enumerate(lines) if re.search(r"->\s*\w+", l.split("#")[0])]
    if not cands:
        return None
    i = rng.choice(cands)
    lines[i] = re.sub(r"->\s*\w+", "-> NOWHERE", lines[i], count=1)
    return i, "SyntaxError"


def broken_arrow(lines, rng):
    cands = [i for i, l in enumerate(lines) if "->" in l.split("#")[0]]
    if not cands:
        return None
    i = rng.choice(cands)
    lines[i] = lines[i].replace("->", "- >", 1)
    return i, "SyntaxError"


def duplicate_var(lines, rng):
    cands = [i for i, l in enumerate(lines) if l.startswith("var ")]
    if not cands:
        return None
    i = rng.choice(cands)
    lines.insert(i + 1, lines[i])
    return i + 1, "DuplicateVar"


def keyword_typo(lines, rng):
    cands = [i for i, l in enumerate(lines)
             if re.match(r"\s*(state|machine|var|monitor)\s", l)]
    if not cands:
        return None
    i = rng.choice(cands)
    lines[i] = re.sub(r"(state|machine|var|monitor)", lambda m: m.group(1)[:-1], lines[i], count=1)
    return i, "SyntaxError"


def bad_initial(lines, rng):
    cands = [i for i, l in enumerate(lines) if re.search(r"\binitial\s+\w+", l.split("#")[0])
             and not l.lstrip().startswith("var")]
    if not cands:
        return None
    i = rng.choice(cands)
    lines[i] = re.sub(r"\binitial\s+\w+", "initial MISSING", lines[i], count=1)
    return i, "SyntaxError"


def duplicate_state(lines, rng):
    cands = [i for i, l in enumerate(lines)
             if re.match(r"\s*state\s+\w+\s*\{.*\}\s*;?\s*(#.*)?$", l)]
    if not cands:
        return None
    i = rng.choice(cands)
    lines.insert(i + 1, lines[i])
    return i + 1, "DuplicateState"


def unterminated_string(lines, rng):
    cands = [i for i, l in enumerate(lines)
             if '"' in l.split("#")[0] and "\\" not in l]
    if not cands:
        return None
    i = rng.choice(cands)
    j = lines[i].rfind('"')
    lines[i] = lines[i][:j] + lines[i][j + 1:]
    return i, "SyntaxError"


def plan_non_monotonic(lines, rng):
    ats = [(i, int(m.group(1))) for i, l in enumerate(lines)
           for m in [re.match(r"\s*at\s+(\d+)\s", l)] if m]
    cands = [k for k in range(1, len(ats)) if ats[k - 1][1] > 0]
    if not cands:
        return None
    k = rng.choice(cands)
    i = ats[k][0]
    earlier = ats[k - 1][1] - 1
    lines[i] = re.sub(r"at\s+\d+", f"at {earlier}", lines[i], count=1)
    return i, "NonMonotonicTimes"


def plan_fractional_time(lines, rng):
    cands = [i for i, l in enumerate(lines) if re.match(r"\s*at\s+\d+\s", l)]
    if not cands:
        return None
    i = rng.choice(cands)
    lines[i] = re.sub(r"at\s+(\d+)", r"at \1.5", lines[i], count=1)
    return i, "SyntaxError"


def plan_reversed_window(lines, rng):
    cands = [i for i, l in enumerate(lines) if re.search(r"within\s+\d+\.\.\d+", l)]
    if not cands:
        return None
    i = rng.choice(cands)
    m = re.search(r"within\s+(\d+)\.\.(\d+)", lines[i])
    a, b = int(m.group(1)), int(m.group(2))
    lines[i] = lines[i].replace(m.group(0), f"within {b + 5}..{a}", 1)
    return i, "SyntaxError"


MODEL_MUTATIONS = [stray_char, bad_target, broken_arrow, duplicate_var, keyword_typo,
                   bad_initial, duplicate_state, unterminated_string]
PLAN_MUTATIONS = [stray_char, plan_non_monotonic, plan_fractional_time, plan_reversed_window,
                  unterminated_string]


def main():
    rng = random.Random(SEED)
    CORRUPT.mkdir(exist_ok=True)
    for old in CORRUPT.iterdir():
        old.unlink()
    manifest = []
    for path in sorted(VALID.iterdir()):
        text = path.read_text(encoding="utf-8").replace("\r\n", "\n")
        if "\n" not in text.rstrip("\n"):
            continue  # single-line files give no line information
        ops = MODEL_MUTATIONS if path.suffix == ".fsm" else PLAN_MUTATIONS
        made = 0
        for op in rng.sample(ops, len(ops)):
            if made == PER_FILE:
                break
            lines = text.split("\n")
            result = op(lines, rng)
            if result is None:
                continue
            line, code = result
            made += 1
            name = f"{path.stem}__{op.__name__}{path.suffix}"
            (CORRUPT / name).write_text("\n".join(lines), encoding="utf-8")
            manifest.append(f"{name} {line + 1} {code}")
    (CORRUPT / "MANIFEST").write_text(
        "# file expected-line expected-code\n" + "\n".join(manifest) + "\n", encoding="utf-8")
    print(f"{len(manifest)} corrupt files")


if __name__ == "__main__":
    main()
