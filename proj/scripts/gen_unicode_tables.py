#!/usr/bin/env python3
"""Generate src/unicode_tables.inc (emoji properties, case and diacritic folding).

Requires the third-party `regex` module for the emoji property classes.
Usage: python3 scripts/gen_unicode_tables.py > src/unicode_tables.inc
"""
import sys
import unicodedata

import regex


def ranges(prop):
    pat = regex.compile(r"\p{%s}" % prop)
    out, start = [], None
    for cp in range(0x110000):
        hit = not (0xD800 <= cp <= 0xDFFF) and bool(pat.match(chr(cp)))
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    return out


LATIN_BLOCKS = [(0x00C0, 0x024F), (0x1E00, 0x1EFF)]
EXTRA_FOLD = {
    "ß": "ss", "ẞ": "ss", "æ": "ae", "Æ": "ae", "œ": "oe", "Œ": "oe",
    "ø": "o", "Ø": "o", "đ": "d", "Đ": "d", "ł": "l", "Ł": "l",
    "ð": "d", "Ð": "d", "þ": "th", "Þ": "th", "ı": "i", "ħ": "h", "Ħ": "h",
}


def fold_table():
    rows = []
    for lo, hi in LATIN_BLOCKS:
        for cp in range(lo, hi + 1):
            ch = chr(cp)
            if ch in EXTRA_FOLD:
                rows.append((cp, EXTRA_FOLD[ch]))
                continue
            base = "".join(c for c in unicodedata.normalize("NFD", ch)
                           if not unicodedata.combining(c)).lower()
            if base and base.isascii() and base.isalpha():
                rows.append((cp, base))
    return rows


def lower_table():
    rows = []
    for lo, hi in [(0x00C0, 0x024F), (0x0370, 0x052F), (0x1E00, 0x1EFF)]:
        for cp in range(lo, hi + 1):
            low = chr(cp).lower()
            if len(low) == 1 and ord(low) != cp:
                rows.append((cp, ord(low)))
    return rows


def emit_ranges(name, rs, out):
    out.write(f"inline constexpr CodepointRange {name}[] = {{\n")
    for lo, hi in rs:
        out.write(f"    {{0x{lo:X}, 0x{hi:X}}},\n")
    out.write("};\n\n")


def main():
    out = sys.stdout
    out.write("// Generated by scripts/gen_unicode_tables.py. Do not edit.\n")
    out.write(f"// Unicode data: regex {regex.__version__}, unicodedata {unicodedata.unidata_version}\n\n")
    emit_ranges("kEmojiRanges", ranges("Emoji"), out)
    emit_ranges("kEmojiPresentationRanges", ranges("Emoji_Presentation"), out)
    emit_ranges("kExtendedPictographicRanges", ranges("Extended_Pictographic"), out)
    out.write("inline constexpr AsciiFold kAsciiFold[] = {\n")
    for cp, s in fold_table():
        out.write(f'    {{0x{cp:X}, "{s}"}},\n')
    out.write("};\n\n")
    out.write("inline constexpr CaseMapping kLowercase[] = {\n")
    for cp, low in lower_table():
        out.write(f"    {{0x{cp:X}, 0x{low:X}}},\n")
    out.write("};\n")


if __name__ == "__main__":
    main()
