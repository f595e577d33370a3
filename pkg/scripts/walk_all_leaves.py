#!/usr/bin/env python3
"""Demo: walk every root-to-leaf path of the built-in questionnaire with
placeholder answers and print each resulting manifest.

Useful as a smoke test and as a gallery of what each outcome's manifest
looks like.
"""

from datetime import datetime, timezone

from shepherd.clocks import fixed_clock
from shepherd.manifest import build_manifest, serialize_manifest, validate_manifest
from shepherd.model import canonical_tree, enumerate_paths
from shepherd.traversal import apply_answer, set_field, start_session

PLACEHOLDERS = {
    "text": "placeholder description",
    "url": "https://example.org/dataset",
    "path": "scripts/preprocess.py",
    "version": "1.0.0",
    "keyvalue": {"param": "value"},
}

CLOCK = fixed_clock(datetime(2026, 1, 1, tzinfo=timezone.utc))


def main() -> None:
    tree = canonical_tree()
    for path in enumerate_paths(tree):
        session = start_session(tree, clock=CLOCK)
        for answer in path.answer_ids():
            session = apply_answer(session, answer)
        leaf = tree.nodes[path.leaf]
        for requirement in leaf.fields:
            if requirement.required:
                session = set_field(
                    session, requirement.field_id, PLACEHOLDERS[requirement.field_type]
                )
        manifest = build_manifest(session, clock=CLOCK)
        report = validate_manifest(manifest, tree)
        status = "clean" if report.is_clean else "DIRTY"
        print(f"=== {path.leaf} ({', '.join(path.answer_ids())}) [{status}] ===")
        print(serialize_manifest(manifest))


if __name__ == "__main__":
    main()
