"""Deep checks beyond schema shape: URL syntax, live reachability of links,
file existence, and checksum verification.
"""

from __future__ import annotations

import hashlib
import time
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

import requests

from .errors import FileIOError, UrlSyntaxError
from .model import DecisionTree, LeafNode
from .report import ValidationReport

if TYPE_CHECKING:
    from .manifest import RetrievabilityManifest

ALLOWED_SCHEMES = ("http", "https", "ftp", "doi")
DEFAULT_TIMEOUT_MS = 10_000
DEFAULT_MAX_REDIRECTS = 5
DEFAULT_PARALLELISM = 4


@dataclass(frozen=True)
class Reachability:
    status: str  # "reachable" | "unreachable" | "timeout"
    http_status: int | None
    elapsed_ms: int

    @property
    def reachable(self) -> bool:
        return self.status == "reachable"


def url_syntax_error(text: str) -> str | None:
    """Reason the text is not an acceptable URL, or None when it is.

    Accepted: absolute URIs with scheme http, https, ftp, or doi and a
    non-empty host (or, for doi, a non-empty opaque part).
    """
    if not isinstance(text, str) or not text.strip():
        return "empty value"
    if any(ch.isspace() for ch in text) or any(ord(ch) < 0x20 for ch in text):
        return "whitespace or control character in URL"
    try:
        from urllib.parse import urlsplit

        parts = urlsplit(text)
    except ValueError as exc:
        return f"unparsable URL: {exc}"
    scheme = parts.scheme.lower()
    if not scheme:
        return "not an absolute URL (missing scheme)"
    if scheme not in ALLOWED_SCHEMES:
        return f"scheme {scheme!r} not allowed (expected one of {', '.join(ALLOWED_SCHEMES)})"
    if scheme == "doi":
        if not (parts.netloc + parts.path):
            return "doi URL has no identifier"
    elif not parts.netloc:
        return "URL has no host"
    return None


def check_url_syntax(text: str) -> None:
    problem = url_syntax_error(text)
    if problem:
        raise UrlSyntaxError(problem)


def field_value_error(field_type: str, value: object) -> str | None:
    """Per-type syntax rule for a manifest field value; None when acceptable."""
    if field_type == "keyvalue":
        if not isinstance(value, Mapping):
            return "expected a flat key/value mapping"
        if not value:
            return "mapping must not be empty"
        for key, item in value.items():
            if not isinstance(key, str) or not key.strip():
                return "mapping keys must be non-empty strings"
            if not isinstance(item, str):
                return f"value for key {key!r} must be a string"
        return None
    if not isinstance(value, str):
        return "expected a string value"
    if not value.strip():
        return "value must not be empty"
    if field_type == "url":
        return url_syntax_error(value)
    # text, path, version: any non-empty string. A path may name a local
    # file or be a URL; deep checks decide which check applies.
    return None


def normalize_live_url(url: str) -> str:
    """doi URIs resolve via the public doi.org redirector."""
    if url.lower().startswith("doi:"):
        return "https://doi.org/" + url[4:]
    return url


def check_url_live(
    url: str,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    max_redirects: int = DEFAULT_MAX_REDIRECTS,
) -> Reachability:
    """HEAD the URL (GET on 405/501), following at most max_redirects hops.

    Network failures never raise; they come back as status "unreachable" or
    "timeout". Only a syntactically invalid URL raises.
    """
    check_url_syntax(url)
    target = normalize_live_url(url)
    timeout_s = timeout_ms / 1000.0
    started = time.monotonic()

    def elapsed() -> int:
        return int((time.monotonic() - started) * 1000)

    if target.lower().startswith("ftp:"):
        try:
            with urllib.request.urlopen(target, timeout=timeout_s):
                return Reachability("reachable", None, elapsed())
        except TimeoutError:
            return Reachability("timeout", None, elapsed())
        except OSError as exc:
            if "timed out" in str(exc).lower():
                return Reachability("timeout", None, elapsed())
            return Reachability("unreachable", None, elapsed())

    session = requests.Session()
    session.max_redirects = max_redirects
    try:
        with session:
            response = session.head(
                target, allow_redirects=True, timeout=timeout_s
            )
            if response.status_code in (405, 501):
                response = session.get(
                    target, allow_redirects=True, timeout=timeout_s, stream=True
                )
                response.close()
            status = response.status_code
            if 200 <= status < 400:
                return Reachability("reachable", status, elapsed())
            return Reachability("unreachable", status, elapsed())
    except requests.Timeout:
        return Reachability("timeout", None, elapsed())
    except requests.RequestException:
        return Reachability("unreachable", None, elapsed())


def sha256_file(path: str | Path) -> str:
    """Lowercase hex SHA-256 of the file's bytes."""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                digest.update(chunk)
    except OSError as exc:
        raise FileIOError(f"cannot read {path}: {exc}") from exc
    return digest.hexdigest()


def _is_url(value: str) -> bool:
    return url_syntax_error(value) is None


def deep_validate(
    manifest: "RetrievabilityManifest",
    tree: DecisionTree,
    *,
    live: bool = False,
    checksums: bool = False,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    base_dir: str | Path = ".",
    max_parallel: int = DEFAULT_PARALLELISM,
    max_urls: int | None = None,
) -> ValidationReport:
    """Schema validation plus optional live-link and file/checksum checks.

    Findings appear in deterministic order (declared field order, then
    checksum keys) no matter how the concurrent live checks complete.
    """
    from .manifest import validate_manifest

    report = validate_manifest(manifest, tree)
    if not (live or checksums):
        return report

    leaf = tree.nodes.get(manifest.outcome)
    if not isinstance(leaf, LeafNode):
        return report  # already reported by schema validation

    base = Path(base_dir)

    link_fields: list[tuple[str, str]] = []  # (field_id, url)
    path_fields: list[tuple[str, str]] = []  # (field_id, local path)
    for req in leaf.fields:
        value = manifest.fields.get(req.field_id)
        if not isinstance(value, str) or not value:
            continue
        if req.field_type == "url":
            link_fields.append((req.field_id, value))
        elif req.field_type == "path":
            if _is_url(value):
                link_fields.append((req.field_id, value))
            else:
                path_fields.append((req.field_id, value))

    if live and link_fields:
        distinct = list(dict.fromkeys(url for _, url in link_fields))
        if max_urls is not None:
            distinct = distinct[:max_urls]
        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            results = dict(
                zip(
                    distinct,
                    pool.map(
                        lambda u: check_url_live(u, timeout_ms=timeout_ms), distinct
                    ),
                )
            )
        for field_id, url in link_fields:
            result = results.get(url)
            if result is None:
                continue
            location = f"fields.{field_id}"
            if result.status == "timeout":
                report.warning(
                    "W_LINK_TIMEOUT",
                    f"no response from {url} within {timeout_ms} ms",
                    location,
                )
            elif result.status == "unreachable":
                suffix = (
                    f" (HTTP {result.http_status})" if result.http_status else ""
                )
                report.error("E_LINK_DEAD", f"{url} is not reachable{suffix}", location)

    if checksums:
        for field_id, rel in path_fields:
            if not (base / rel).is_file():
                report.error(
                    "E_FILE_MISSING",
                    f"file {rel!r} not found under {base}",
                    f"fields.{field_id}",
                )
        for ref, expected in manifest.checksums.items():
            if _is_url(ref):
                continue  # remote content is not fetched for hashing
            target = base / ref
            location = f"checksums.{ref}"
            if not target.is_file():
                report.error(
                    "E_FILE_MISSING", f"file {ref!r} not found under {base}", location
                )
                continue
            actual = sha256_file(target)
            if actual != expected.lower():
                report.error(
                    "E_CHECKSUM_MISMATCH",
                    f"{ref}: expected sha256 {expected}, found {actual}",
                    location,
                )

    return report
