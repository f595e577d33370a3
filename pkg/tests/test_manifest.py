from datetime import datetime, timezone

import pytest

from shepherd.clocks import fixed_clock
from shepherd.errors import IncompleteSessionError, MalformedManifestError
from shepherd.manifest import (
    RetrievabilityManifest,
    build_manifest,
    parse_manifest,
    serialize_manifest,
    validate_manifest,
)
from shepherd.model import canonical_tree, enumerate_paths
from shepherd.traversal import apply_answer, set_field, start_session

from conftest import minimal_fields

CLOCK = fixed_clock(datetime(2026, 3, 1, 12, 0, 0, tzinfo=timezone.utc))


def completed_session(path):
    tree = canonical_tree()
    session = start_session(tree, clock=CLOCK)
    for answer in path.answer_ids():
        session = apply_answer(session, answer)
    for field_id, value in minimal_fields(tree.nodes[path.leaf]).items():
        session = set_field(session, field_id, value)
    return session


def manifest_for_leaf(leaf_id):
    (path,) = [p for p in enumerate_paths(canonical_tree()) if p.leaf == leaf_id]
    return build_manifest(completed_session(path), clock=CLOCK)


class TestBuildManifest:
    def test_not_retrievable_manifest(self):
        manifest = manifest_for_leaf("L_NOT_RETRIEVABLE")
        assert manifest.outcome == "L_NOT_RETRIEVABLE"
        assert "reason" in manifest.fields
        assert manifest.created_utc == "2026-03-01T12:00:00Z"

    def test_tool_leaf_records_tool_metadata(self):
        manifest = manifest_for_leaf("L_RAW_TOOL_PUBLIC")
        for key in ("tool_name", "tool_url", "tool_version"):
            assert key in manifest.fields

    def test_incomplete_at_question(self):
        session = start_session(canonical_tree(), clock=CLOCK)
        with pytest.raises(IncompleteSessionError):
            build_manifest(session, clock=CLOCK)

    def test_incomplete_lists_missing_fields(self):
        session = start_session(canonical_tree(), clock=CLOCK)
        for answer in ("yes", "yes", "yes", "script"):
            session = apply_answer(session, answer)
        session = set_field(session, "raw_url", "https://example.org/raw.csv")
        with pytest.raises(IncompleteSessionError) as err:
            build_manifest(session, clock=CLOCK)
        assert err.value.missing == ["script_ref"]


class TestValidateManifest:
    def test_all_ten_leaves_generate_clean_manifests(self):
        tree = canonical_tree()
        for path in enumerate_paths(tree):
            manifest = build_manifest(completed_session(path), clock=CLOCK)
            report = validate_manifest(manifest, tree)
            assert report.is_clean, (path.leaf, report.codes())

    def test_missing_required_field(self):
        manifest = manifest_for_leaf("L_NOT_RETRIEVABLE")
        stripped = RetrievabilityManifest(
            tree_id=manifest.tree_id,
            tree_version=manifest.tree_version,
            created_utc=manifest.created_utc,
            path=manifest.path,
            outcome=manifest.outcome,
            fields={},
        )
        report = validate_manifest(stripped, canonical_tree())
        assert report.errors()[0].code == "E_MISSING_FIELD"
        assert len(report.errors()) == 1

    def test_path_outcome_mismatch(self):
        manifest = manifest_for_leaf("L_NOT_RETRIEVABLE")
        twisted = RetrievabilityManifest(
            tree_id=manifest.tree_id,
            tree_version=manifest.tree_version,
            created_utc=manifest.created_utc,
            path=(("Q_SHAREABLE", "yes"),),
            outcome="L_NOT_RETRIEVABLE",
            fields=dict(manifest.fields),
        )
        assert "E_PATH_MISMATCH" in validate_manifest(twisted, canonical_tree()).codes()

    def test_tree_mismatch(self):
        manifest = manifest_for_leaf("L_NOT_RETRIEVABLE")
        moved = RetrievabilityManifest(
            tree_id="someone-elses-tree",
            tree_version=9,
            created_utc=manifest.created_utc,
            path=manifest.path,
            outcome=manifest.outcome,
            fields=dict(manifest.fields),
        )
        assert "E_TREE_MISMATCH" in validate_manifest(moved, canonical_tree()).codes()

    def test_unknown_field(self):
        manifest = manifest_for_leaf("L_NOT_RETRIEVABLE")
        extra = RetrievabilityManifest(
            tree_id=manifest.tree_id,
            tree_version=manifest.tree_version,
            created_utc=manifest.created_utc,
            path=manifest.path,
            outcome=manifest.outcome,
            fields={**manifest.fields, "surprise": "x"},
        )
        assert "E_UNKNOWN_FIELD" in validate_manifest(extra, canonical_tree()).codes()

    def test_field_syntax_checked(self):
        manifest = manifest_for_leaf("L_PRE_LINK")
        broken = RetrievabilityManifest(
            tree_id=manifest.tree_id,
            tree_version=manifest.tree_version,
            created_utc=manifest.created_utc,
            path=manifest.path,
            outcome=manifest.outcome,
            fields={"preprocessed_url": "not a url"},
        )
        assert "E_FIELD_SYNTAX" in validate_manifest(broken, canonical_tree()).codes()

    def test_absent_optional_noted_as_info(self):
        manifest = manifest_for_leaf("L_RAW_DESCRIBE")
        report = validate_manifest(manifest, canonical_tree())
        assert report.is_clean
        notes = [f for f in report if f.code == "W_OPTIONAL_ABSENT"]
        assert len(notes) == 1
        assert notes[0].severity == "info"

    def test_mutation_kill_matrix(self):
        """Dropping any required field or flipping any path entry must be
        caught — zero surviving mutants across all ten leaves."""
        tree = canonical_tree()
        survivors = []
        for path in enumerate_paths(tree):
            manifest = build_manifest(completed_session(path), clock=CLOCK)
            leaf = tree.nodes[path.leaf]
            for field_id in leaf.required_ids():
                fields = dict(manifest.fields)
                del fields[field_id]
                mutant = RetrievabilityManifest(
                    tree_id=manifest.tree_id,
                    tree_version=manifest.tree_version,
                    created_utc=manifest.created_utc,
                    path=manifest.path,
                    outcome=manifest.outcome,
                    fields=fields,
                )
                if validate_manifest(mutant, tree).is_clean:
                    survivors.append((path.leaf, "drop", field_id))
            for index, (question_id, answer_id) in enumerate(manifest.path):
                node = tree.nodes[question_id]
                flipped_answer = next(
                    a.answer_id for a in node.answers if a.answer_id != answer_id
                )
                steps = list(manifest.path)
                steps[index] = (question_id, flipped_answer)
                mutant = RetrievabilityManifest(
                    tree_id=manifest.tree_id,
                    tree_version=manifest.tree_version,
                    created_utc=manifest.created_utc,
                    path=tuple(steps),
                    outcome=manifest.outcome,
                    fields=dict(manifest.fields),
                )
                if validate_manifest(mutant, tree).is_clean:
                    survivors.append((path.leaf, "flip", index))
        assert survivors == []


class TestSerialization:
    def test_round_trip(self):
        for leaf_id in ("L_NOT_RETRIEVABLE", "L_RAW_TOOL_PUBLIC", "L_PRE_LINK"):
            manifest = manifest_for_leaf(leaf_id)
            assert parse_manifest(serialize_manifest(manifest)) == manifest

    def test_byte_determinism(self):
        first = serialize_manifest(manifest_for_leaf("L_RAW_SCRIPT"))
        second = serialize_manifest(manifest_for_leaf("L_RAW_SCRIPT"))
        assert first == second

    def test_stability_under_reparse(self):
        text = serialize_manifest(manifest_for_leaf("L_ACCESS_PARTIAL"))
        assert serialize_manifest(parse_manifest(text)) == text

    def test_key_order_pinned(self):
        text = serialize_manifest(manifest_for_leaf("L_NOT_RETRIEVABLE"))
        keys = [
            line.strip().split('"')[1]
            for line in text.splitlines()
            if line.startswith('  "')
        ]
        assert keys == [
            "manifest_version",
            "tree_id",
            "tree_version",
            "created_utc",
            "path",
            "outcome",
            "fields",
            "checksums",
        ]

    def test_ends_with_newline(self):
        assert serialize_manifest(manifest_for_leaf("L_PRE_LINK")).endswith("}\n")

    def test_keyvalue_fields_serialized_sorted(self):
        manifest = manifest_for_leaf("L_RAW_TOOL_PUBLIC")
        enriched = RetrievabilityManifest(
            tree_id=manifest.tree_id,
            tree_version=manifest.tree_version,
            created_utc=manifest.created_utc,
            path=manifest.path,
            outcome=manifest.outcome,
            fields={**manifest.fields, "tool_config": {"z": "1", "a": "2"}},
        )
        text = serialize_manifest(enriched)
        assert text.find('"a": "2"') < text.find('"z": "1"')
        assert parse_manifest(text) == enriched


class TestParseManifest:
    def test_truncated_json(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        with pytest.raises(MalformedManifestError) as err:
            parse_manifest(text[: len(text) // 2])
        assert err.value.position

    def test_unknown_top_level_key_rejected(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        tampered = text.replace('"checksums": {}', '"checksums": {},\n  "extra": 1')
        with pytest.raises(MalformedManifestError):
            parse_manifest(tampered)

    def test_wrong_manifest_version_rejected(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        with pytest.raises(MalformedManifestError):
            parse_manifest(text.replace('"manifest_version": 1', '"manifest_version": 2'))

    def test_bad_created_utc_rejected(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        with pytest.raises(MalformedManifestError):
            parse_manifest(
                text.replace("2026-03-01T12:00:00Z", "March 1st, noonish")
            )

    def test_bad_path_entry_rejected(self):
        with pytest.raises(MalformedManifestError):
            parse_manifest(
                '{"manifest_version": 1, "tree_id": "t", "tree_version": 1,'
                ' "created_utc": "2026-01-01T00:00:00Z", "path": ["oops"],'
                ' "outcome": "L", "fields": {}}'
            )

    def test_bad_checksum_digest_rejected(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        with pytest.raises(MalformedManifestError):
            parse_manifest(
                text.replace('"checksums": {}', '"checksums": {"f": "zz"}')
            )

    def test_missing_checksums_defaults_empty(self):
        text = serialize_manifest(manifest_for_leaf("L_PRE_LINK"))
        trimmed = text.replace(',\n  "checksums": {}', "")
        manifest = parse_manifest(trimmed)
        assert manifest.checksums == {}
