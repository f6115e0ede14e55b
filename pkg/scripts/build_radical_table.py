"""Regenerate the bundled Kangxi radical table (src/judou/data/kangxi_radicals.tsv).

The table maps Han codepoints to the 214 Kangxi radical numbers. It is derived
from Unicode structure alone, so it can be rebuilt offline:

  * The Kangxi Radicals block (U+2F00..U+2FD5) holds the 214 radicals in
    canonical order; NFKC-normalizing each one yields the unified ideograph
    that heads the corresponding radical section.
  * The original CJK Unified Ideographs block (U+4E00..U+9FA5) is laid out in
    radical-then-residual-stroke order, so every codepoint belongs to the
    section of the greatest head codepoint not exceeding it.

The script asserts the 214 section heads are strictly increasing before
emitting anything; a wrong head would corrupt every assignment after it.
"""

import bisect
import sys
import unicodedata
from pathlib import Path

URO_FIRST = 0x4E00
URO_LAST = 0x9FA5  # original block; later extensions are not radical-ordered
KANGXI_BLOCK_FIRST = 0x2F00

OUT_PATH = Path(__file__).resolve().parent.parent / "src" / "judou" / "data" / "kangxi_radicals.tsv"


def section_heads() -> list[int]:
    heads = []
    for i in range(214):
        unified = unicodedata.normalize("NFKC", chr(KANGXI_BLOCK_FIRST + i))
        assert len(unified) == 1, f"radical {i + 1} did not normalize to one character"
        heads.append(ord(unified))
    assert all(a < b for a, b in zip(heads, heads[1:])), "section heads must be strictly increasing"
    assert heads[0] == URO_FIRST
    return heads


def build_entries() -> list[tuple[int, int]]:
    heads = section_heads()
    entries = []
    for i in range(214):
        entries.append((KANGXI_BLOCK_FIRST + i, i + 1))
    for cp in range(URO_FIRST, URO_LAST + 1):
        entries.append((cp, bisect.bisect_right(heads, cp)))
    return entries


def main() -> None:
    entries = build_entries()
    lines = [
        "# Kangxi radical numbers (1..214) for Han codepoints.",
        "# Derived from the Unicode Kangxi Radicals block and the radical-section",
        "# layout of the original CJK Unified Ideographs block (U+4E00..U+9FA5).",
        "# Regenerate with: python scripts/build_radical_table.py",
        f"# unicodedata version: {unicodedata.unidata_version}",
    ]
    lines.extend(f"{cp:04X}\t{rid}" for cp, rid in entries)
    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    OUT_PATH.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    print(f"wrote {len(entries)} entries to {OUT_PATH}", file=sys.stderr)


if __name__ == "__main__":
    main()
