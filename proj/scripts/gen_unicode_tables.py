#!/usr/bin/env python3
"""Regenerate src/util/unicode_tables.inc from Python's unicodedata.

Emits sorted, inclusive codepoint ranges for the Letter (L*) and Number (N*)
general categories. Whitespace is a short hardcoded list in unicode.cpp and
is not generated here.
"""
import sys
import unicodedata


def ranges_for(predicate):
    out = []
    start = None
    for cp in range(0x110000):
        if predicate(chr(cp)):
            if start is None:
                start = cp
        else:
            if start is not None:
                out.append((start, cp - 1))
                start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, ranges, f):
    f.write(f"static constexpr CodepointRange {name}[] = {{\n")
    for i in range(0, len(ranges), 4):
        row = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in ranges[i : i + 4])
        f.write(f"    {row},\n")
    f.write("};\n\n")


def main():
    letters = ranges_for(lambda c: unicodedata.category(c).startswith("L"))
    numbers = ranges_for(lambda c: unicodedata.category(c).startswith("N"))
    with open(sys.argv[1] if len(sys.argv) > 1 else "src/util/unicode_tables.inc", "w") as f:
        f.write("// Generated by scripts/gen_unicode_tables.py from Python "
                f"unicodedata {unicodedata.unidata_version}. Do not edit.\n\n")
        emit("kLetterRanges", letters, f)
        emit("kNumberRanges", numbers, f)
    print(f"letters: {len(letters)} ranges, numbers: {len(numbers)} ranges")


if __name__ == "__main__":
    main()
