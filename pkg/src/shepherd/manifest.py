"""The retrievability manifest: the file this whole questionnaire exists to
produce. Records the answer path, the outcome, and the outcome's metadata
fields, in a byte-stable JSON form that diffs cleanly under version control.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .clocks import Clock, format_utc, system_clock
from .errors import (
    IncompleteSessionError,
    InvalidTreeError,
    MalformedManifestError,
)
from .model import DecisionTree, LeafNode, replay_path
from .report import ValidationReport
from .traversal import TraversalSession, is_complete, missing_fields
from .validators import field_value_error

MANIFEST_VERSION = 1
DEFAULT_FILENAME = "retrievability.json"
MEDIA_TYPE = "application/json"

_KEY_ORDER = (
    "manifest_version",
    "tree_id",
    "tree_version",
    "created_utc",
    "path",
    "outcome",
    "fields",
    "checksums",
)
_CREATED_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")

FieldValue = str | dict[str, str]


@dataclass(frozen=True, eq=True)
class RetrievabilityManifest:
    tree_id: str
    tree_version: int
    created_utc: str
    path: tuple[tuple[str, str], ...]
    outcome: str
    fields: dict[str, FieldValue] = field(default_factory=dict)
    checksums: dict[str, str] = field(default_factory=dict)
    manifest_version: int = MANIFEST_VERSION


def build_manifest(
    session: TraversalSession, clock: Clock = system_clock
) -> RetrievabilityManifest:
    """Snapshot a finished session. Raises E_INCOMPLETE otherwise."""
    if not session.at_leaf:
        raise IncompleteSessionError(
            f"session is at question {session.current!r}, not at a leaf"
        )
    if not is_complete(session):
        missing = missing_fields(session)
        raise IncompleteSessionError(
            "required fields not filled: " + ", ".join(missing), missing=missing
        )
    return RetrievabilityManifest(
        tree_id=session.tree.tree_id,
        tree_version=session.tree.version,
        created_utc=format_utc(clock()),
        path=tuple(session.path),
        outcome=session.current,
        fields={
            k: dict(v) if isinstance(v, dict) else v
            for k, v in session.field_values.items()
        },
    )


def validate_manifest(
    manifest: RetrievabilityManifest, tree: DecisionTree
) -> ValidationReport:
    """Check the manifest against the tree it claims to descend from."""
    report = ValidationReport()

    if manifest.tree_id != tree.tree_id or manifest.tree_version != tree.version:
        report.error(
            "E_TREE_MISMATCH",
            f"manifest references tree {manifest.tree_id!r} v{manifest.tree_version}, "
            f"validating against {tree.tree_id!r} v{tree.version}",
            "tree_id",
        )

    try:
        landed = replay_path(tree, manifest.path)
    except InvalidTreeError as exc:
        report.error("E_PATH_MISMATCH", str(exc), "path")
    else:
        if landed != manifest.outcome:
            report.error(
                "E_PATH_MISMATCH",
                f"path replay ends at {landed!r}, manifest claims {manifest.outcome!r}",
                "outcome",
            )
        elif not isinstance(tree.nodes.get(landed), LeafNode):
            report.error(
                "E_PATH_MISMATCH",
                f"outcome {manifest.outcome!r} is not a leaf of the tree",
                "outcome",
            )

    leaf = tree.nodes.get(manifest.outcome)
    if not isinstance(leaf, LeafNode):
        return report

    for req in leaf.fields:
        location = f"fields.{req.field_id}"
        if req.field_id not in manifest.fields:
            if req.required:
                report.error(
                    "E_MISSING_FIELD",
                    f"required field {req.field_id!r} is absent",
                    location,
                )
            continue
        problem = field_value_error(req.field_type, manifest.fields[req.field_id])
        if problem:
            report.error("E_FIELD_SYNTAX", f"{req.field_id}: {problem}", location)

    declared = set(leaf.field_ids())
    for key in sorted(manifest.fields):
        if key not in declared:
            report.error(
                "E_UNKNOWN_FIELD",
                f"leaf {manifest.outcome!r} declares no field {key!r}",
                f"fields.{key}",
            )

    for req in leaf.fields:
        if not req.required and req.field_id not in manifest.fields:
            report.info(
                "W_OPTIONAL_ABSENT",
                f"optional field {req.field_id!r} was not provided",
                f"fields.{req.field_id}",
            )

    return report


def serialize_manifest(manifest: RetrievabilityManifest) -> str:
    """Deterministic JSON: pinned key order, sorted field/checksum keys,
    two-space indentation, trailing newline. Equal manifests serialize to
    identical bytes."""
    body = {
        "manifest_version": manifest.manifest_version,
        "tree_id": manifest.tree_id,
        "tree_version": manifest.tree_version,
        "created_utc": manifest.created_utc,
        "path": [list(pair) for pair in manifest.path],
        "outcome": manifest.outcome,
        "fields": {
            key: dict(sorted(value.items())) if isinstance(value, dict) else value
            for key, value in sorted(manifest.fields.items())
        },
        "checksums": dict(sorted(manifest.checksums.items())),
    }
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def _expect(condition: bool, message: str, position: str) -> None:
    if not condition:
        raise MalformedManifestError(message, position=position)


def parse_manifest(text: str) -> RetrievabilityManifest:
    """Exact inverse of serialize_manifest; strict about shape and types."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedManifestError(
            f"invalid JSON: {exc.msg}", position=f"line {exc.lineno} column {exc.colno}"
        ) from exc

    _expect(isinstance(raw, dict), "manifest must be a JSON object", "$")
    unknown = set(raw) - set(_KEY_ORDER)
    _expect(not unknown, f"unknown keys: {', '.join(sorted(unknown))}", "$")
    for required_key in _KEY_ORDER[:-1]:  # checksums may be omitted
        _expect(required_key in raw, f"missing key {required_key!r}", required_key)

    _expect(
        raw["manifest_version"] == MANIFEST_VERSION,
        f"unsupported manifest_version {raw['manifest_version']!r}",
        "manifest_version",
    )
    _expect(isinstance(raw["tree_id"], str), "tree_id must be a string", "tree_id")
    _expect(
        isinstance(raw["tree_version"], int)
        and not isinstance(raw["tree_version"], bool)
        and raw["tree_version"] >= 1,
        "tree_version must be a positive integer",
        "tree_version",
    )
    _expect(
        isinstance(raw["created_utc"], str) and _CREATED_RE.match(raw["created_utc"]),
        "created_utc must be an ISO-8601 UTC timestamp like 2026-01-01T00:00:00Z",
        "created_utc",
    )
    _expect(isinstance(raw["path"], list), "path must be an array", "path")
    path: list[tuple[str, str]] = []
    for index, entry in enumerate(raw["path"]):
        _expect(
            isinstance(entry, list)
            and len(entry) == 2
            and all(isinstance(part, str) for part in entry),
            "each path entry must be a [question_id, answer_id] pair",
            f"path[{index}]",
        )
        path.append((entry[0], entry[1]))
    _expect(isinstance(raw["outcome"], str), "outcome must be a string", "outcome")

    _expect(isinstance(raw["fields"], dict), "fields must be an object", "fields")
    fields: dict[str, FieldValue] = {}
    for key, value in raw["fields"].items():
        if isinstance(value, str):
            fields[key] = value
        elif isinstance(value, dict):
            _expect(
                all(
                    isinstance(k, str) and isinstance(v, str) for k, v in value.items()
                ),
                f"field {key!r} mapping must be flat string-to-string",
                f"fields.{key}",
            )
            fields[key] = dict(value)
        else:
            raise MalformedManifestError(
                f"field {key!r} must be a string or a string mapping",
                position=f"fields.{key}",
            )

    checksums_raw = raw.get("checksums", {})
    _expect(
        isinstance(checksums_raw, dict), "checksums must be an object", "checksums"
    )
    checksums: dict[str, str] = {}
    for key, value in checksums_raw.items():
        _expect(
            isinstance(value, str) and bool(_SHA256_RE.match(value)),
            f"checksum for {key!r} must be 64 lowercase hex characters",
            f"checksums.{key}",
        )
        checksums[key] = value

    return RetrievabilityManifest(
        tree_id=raw["tree_id"],
        tree_version=raw["tree_version"],
        created_utc=raw["created_utc"],
        path=tuple(path),
        outcome=raw["outcome"],
        fields=fields,
        checksums=checksums,
    )
