#!/usr/bin/env python3
"""Regenerate the shipped canonical tree file from the built-in constructor.

Run after editing the built-in questionnaire so the packaged .tree file and
the code stay in lockstep (the test suite asserts byte equality).
"""

from pathlib import Path

from shepherd.dsl import serialize_tree
from shepherd.model import canonical_tree

TARGET = Path(__file__).resolve().parent.parent / "src/shepherd/data/canonical.tree"


def main() -> None:
    text = serialize_tree(canonical_tree())
    TARGET.write_text(text, encoding="utf-8", newline="")
    print(f"wrote {TARGET} ({len(text.splitlines())} lines)")


if __name__ == "__main__":
    main()
