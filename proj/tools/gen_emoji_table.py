#!/usr/bin/env python3
"""Regenerate the bundled emoji description table.

Writes data/emoji_table.jsonl (one {"emoji", "text"} object per line) and
core/src/emoji_table.cpp (the same table compiled in as the default).
Descriptions are the English ':short_name:' form with underscores turned
into spaces.

    pip install emoji && python3 tools/gen_emoji_table.py
"""
import json
import pathlib

import emoji

ROOT = pathlib.Path(__file__).resolve().parent.parent


def c_literal(s: str) -> str:
    out = ['"']
    for b in s.encode("utf-8"):
        if 0x20 <= b < 0x7F and chr(b) not in '"\\?':
            out.append(chr(b))
        else:
            # Close the literal after every escape so a following hex-looking
            # character is not absorbed into it.
            out.append('\\x%02X""' % b)
    out.append('"')
    return "".join(out)


def main() -> None:
    rows = sorted(
        (e, data["en"].replace("_", " ")) for e, data in emoji.EMOJI_DATA.items()
    )
    with open(ROOT / "data" / "emoji_table.jsonl", "w", encoding="utf-8") as f:
        for e, text in rows:
            f.write(json.dumps({"emoji": e, "text": text}, ensure_ascii=False) + "\n")

    lines = [
        "// Generated by tools/gen_emoji_table.py from the `emoji` package "
        f"({emoji.__version__}). Do not edit.",
        "",
        '#include "rumor/text_normalizer.hpp"',
        "",
        "namespace rumor {",
        "namespace {",
        "",
        "struct Entry {",
        "  const char* emoji;",
        "  const char* text;",
        "};",
        "",
        "constexpr Entry kEntries[] = {",
    ]
    for e, text in rows:
        lines.append(f"    {{{c_literal(e)}, {c_literal(text)}}},")
    lines += [
        "};",
        "",
        "}  // namespace",
        "",
        "const EmojiTable& EmojiTable::builtin() {",
        "  static const EmojiTable table = [] {",
        "    EmojiTable t;",
        "    for (const Entry& e : kEntries) t.add(e.emoji, e.text);",
        "    return t;",
        "  }();",
        "  return table;",
        "}",
        "",
        "}  // namespace rumor",
        "",
    ]
    (ROOT / "core" / "src" / "emoji_table.cpp").write_text("\n".join(lines))
    print(f"{len(rows)} emoji entries")


if __name__ == "__main__":
    main()
