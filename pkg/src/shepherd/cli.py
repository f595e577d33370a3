"""The `shepherd` command line tool.

Exit codes: 0 success, 1 validation or traversal failure, 2 usage error,
3 IO or parse failure, 130 user abort.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
from pathlib import Path

import click

from . import dsl
from .clocks import Clock, fixed_clock, parse_utc, system_clock
from .errors import (
    AtRootError,
    FieldSyntaxError,
    IncompleteSessionError,
    MalformedManifestError,
    ShepherdError,
)
from .manifest import DEFAULT_FILENAME, build_manifest, parse_manifest, serialize_manifest
from .model import DecisionTree, canonical_tree, enumerate_paths
from .render import to_dot
from .traversal import (
    apply_answer,
    current_prompt,
    set_field,
    start_session,
    undo,
)
from .validators import deep_validate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 3
EXIT_ABORT = 130


def _fail(message: str, code: int) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _load_tree(path: str | None) -> DecisionTree:
    if path is None:
        return canonical_tree()
    try:
        return dsl.load_tree_file(path)
    except OSError as exc:
        _fail(f"cannot read tree file: {exc}", EXIT_IO)
    except dsl.ParseError as exc:
        _fail(f"{path}:{exc}", EXIT_IO)
    raise AssertionError("unreachable")


def _clock_from_now(now: str | None) -> Clock:
    if now is None:
        return system_clock
    try:
        return fixed_clock(parse_utc(now))
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--now")


def _write_manifest(manifest, out: str) -> None:
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(serialize_manifest(manifest))
    except OSError as exc:
        _fail(f"cannot write manifest: {exc}", EXIT_IO)


def _parse_keyvalue(raw: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for chunk in raw.split(","):
        if "=" not in chunk:
            raise ValueError(f"expected key=value, got {chunk.strip()!r}")
        key, _, value = chunk.partition("=")
        key = key.strip()
        if not key:
            raise ValueError("empty key in key=value pair")
        pairs[key] = value.strip()
    return pairs


@click.group()
def cli() -> None:
    """Walk the data-retrievability questionnaire and manage its manifests."""


@cli.command()
@click.option("--tree", "tree_file", type=click.Path(), default=None, help="Tree file (.tree); defaults to the built-in questionnaire.")
@click.option("--out", default=DEFAULT_FILENAME, show_default=True, help="Manifest output file.")
@click.option("--now", default=None, help="Fixed UTC timestamp (ISO-8601) for reproducible output.")
def ask(tree_file: str | None, out: str, now: str | None) -> None:
    """Interactive questionnaire; answers by id or number, `back` to undo,
    `quit` to abort."""
    tree = _load_tree(tree_file)
    session = start_session(tree, clock=_clock_from_now(now))

    def read_line(prompt_text: str) -> str:
        try:
            return input(prompt_text).strip()
        except (EOFError, KeyboardInterrupt):
            click.echo("\naborted", err=True)
            sys.exit(EXIT_ABORT)

    while True:
        prompt = current_prompt(session)
        if prompt.kind == "question":
            click.echo(f"\n{prompt.text}")
            for index, option in enumerate(prompt.options, start=1):
                click.echo(f"  [{index}] {option.label} ({option.answer_id})")
            raw = read_line("> ")
            if raw == "quit":
                sys.exit(EXIT_ABORT)
            if raw == "back":
                try:
                    session = undo(session)
                except AtRootError:
                    click.echo("already at the first question")
                continue
            answer_id = raw
            if raw.isdigit() and 1 <= int(raw) <= len(prompt.options):
                answer_id = prompt.options[int(raw) - 1].answer_id
            try:
                session = apply_answer(session, answer_id)
            except ShepherdError as exc:
                click.echo(exc.message)
            continue

        click.echo(f"\nOutcome: {prompt.outcome}")
        click.echo(prompt.text)
        went_back = False
        for requirement in prompt.requirements:
            while True:
                flag = "required" if requirement.required else "optional, enter to skip"
                hint = f" — {requirement.hint}" if requirement.hint else ""
                if requirement.field_type == "keyvalue":
                    hint += " (key=value pairs, comma-separated)"
                raw = read_line(f"{requirement.field_id}{hint} [{flag}]: ")
                if raw == "quit":
                    sys.exit(EXIT_ABORT)
                if raw == "back":
                    session = undo(session)
                    went_back = True
                    break
                if not raw:
                    if requirement.required:
                        click.echo("this field is required")
                        continue
                    break
                try:
                    value = (
                        _parse_keyvalue(raw)
                        if requirement.field_type == "keyvalue"
                        else raw
                    )
                    session = set_field(session, requirement.field_id, value)
                except (ValueError, FieldSyntaxError) as exc:
                    click.echo(str(exc))
                    continue
                break
            if went_back:
                break
        if went_back:
            continue

        manifest = build_manifest(session, clock=_clock_from_now(now))
        _write_manifest(manifest, out)
        click.echo(f"\nmanifest written to {out}")
        return


@cli.command()
@click.option("--answers", "answers_file", required=True, type=click.Path(), help="JSON array of answer ids.")
@click.option("--fields", "fields_file", required=True, type=click.Path(), help="JSON object of field values.")
@click.option("--tree", "tree_file", type=click.Path(), default=None)
@click.option("--out", required=True, help="Manifest output file.")
@click.option("--now", default=None, help="Fixed UTC timestamp (ISO-8601).")
def run(
    answers_file: str,
    fields_file: str,
    tree_file: str | None,
    out: str,
    now: str | None,
) -> None:
    """Non-interactive traversal: apply answers, fill fields, write the
    manifest."""
    tree = _load_tree(tree_file)
    try:
        with open(answers_file, "r", encoding="utf-8") as fh:
            answers = json.load(fh)
        with open(fields_file, "r", encoding="utf-8") as fh:
            fields = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read input: {exc}", EXIT_IO)
    except json.JSONDecodeError as exc:
        _fail(f"invalid JSON input: {exc}", EXIT_IO)

    if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
        _fail("answers file must be a JSON array of answer ids", EXIT_IO)
    if not isinstance(fields, dict):
        _fail("fields file must be a JSON object", EXIT_IO)

    clock = _clock_from_now(now)
    session = start_session(tree, clock=clock)
    try:
        for answer_id in answers:
            session = apply_answer(session, answer_id)
        for field_id, value in fields.items():
            session = set_field(session, field_id, value)
        manifest = build_manifest(session, clock=clock)
    except IncompleteSessionError as exc:
        _fail(f"{exc.code}: {exc.message}", EXIT_FAIL)
    except ShepherdError as exc:
        _fail(f"{exc.code}: {exc.message}", EXIT_FAIL)

    _write_manifest(manifest, out)
    click.echo(f"{manifest.outcome} -> {out}")


@cli.command()
@click.argument("manifest_file", type=click.Path())
@click.option("--tree", "tree_file", type=click.Path(), default=None)
@click.option("--live", is_flag=True, help="Check that URL fields respond.")
@click.option("--checksums", is_flag=True, help="Check path fields and recorded SHA-256 digests.")
@click.option("--timeout", "timeout_ms", default=10000, show_default=True, help="Per-URL timeout in milliseconds.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--strict", is_flag=True, help="Treat warnings as failures.")
def validate(
    manifest_file: str,
    tree_file: str | None,
    live: bool,
    checksums: bool,
    timeout_ms: int,
    output_format: str,
    strict: bool,
) -> None:
    """Validate a manifest against the tree, optionally checking links and
    files."""
    tree = _load_tree(tree_file)
    try:
        with open(manifest_file, "r", encoding="utf-8") as fh:
            manifest = parse_manifest(fh.read())
    except OSError as exc:
        _fail(f"cannot read manifest: {exc}", EXIT_IO)
    except MalformedManifestError as exc:
        where = f" (at {exc.position})" if exc.position else ""
        _fail(f"{exc.code}: {exc.message}{where}", EXIT_IO)

    report = deep_validate(
        manifest,
        tree,
        live=live,
        checksums=checksums,
        timeout_ms=timeout_ms,
        base_dir=Path(manifest_file).resolve().parent,
    )

    if output_format == "json":
        click.echo(
            json.dumps(
                {"clean": report.is_clean, "findings": report.as_dicts()}, indent=2
            )
        )
    else:
        for finding in report:
            location = f" {finding.location}" if finding.location else ""
            click.echo(f"{finding.severity}: {finding.code}{location}: {finding.message}")
        if report.is_clean:
            click.echo("OK")

    failed = not report.is_clean or (
        strict and any(f.severity == "warning" for f in report)
    )
    sys.exit(EXIT_FAIL if failed else EXIT_OK)


@cli.group()
def tree() -> None:
    """Inspect and export tree files."""


@tree.command("check")
@click.argument("tree_file", type=click.Path())
def tree_check(tree_file: str) -> None:
    """Report structural problems in a tree file."""
    try:
        with open(tree_file, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        _fail(f"cannot read tree file: {exc}", EXIT_IO)
    try:
        report = dsl.check_tree_source(source)
    except dsl.ParseError as exc:
        _fail(f"{tree_file}:{exc}", EXIT_IO)
    for finding in report:
        click.echo(f"{finding.severity}: {finding.code}: {finding.message}")
    if not report.is_clean:
        sys.exit(EXIT_FAIL)
    click.echo("OK")


@tree.command("render")
@click.argument("tree_file", type=click.Path())
@click.option("--format", "output_format", type=click.Choice(["dot"]), default="dot", show_default=True)
@click.option("--out", default=None, help="Write to a file instead of stdout.")
def tree_render(tree_file: str, output_format: str, out: str | None) -> None:
    """Export a tree as Graphviz DOT."""
    parsed = _load_tree(tree_file)
    text = to_dot(parsed)
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            _fail(f"cannot write output: {exc}", EXIT_IO)
    else:
        click.echo(text, nl=False)


@tree.command("paths")
@click.argument("tree_file", type=click.Path())
def tree_paths(tree_file: str) -> None:
    """List every root-to-leaf path, one per line."""
    parsed = _load_tree(tree_file)
    for path in enumerate_paths(parsed):
        answers = ",".join(path.answer_ids())
        click.echo(f"{answers} -> {path.leaf}")


@cli.command()
@click.option("--tree", "tree_file", type=click.Path(), default=None)
@click.option("--addr", default="127.0.0.1:8080", show_default=True, help="HOST:PORT to listen on.")
@click.option("--static", "static_dir", type=click.Path(), default=None, help="Directory of built UI assets to serve at /.")
@click.option("--now", default=None, help="Fixed UTC timestamp (ISO-8601) for reproducible manifests; testing only.")
def serve(tree_file: str | None, addr: str, static_dir: str | None, now: str | None) -> None:
    """Run the HTTP questionnaire service until interrupted."""
    import uvicorn

    from .service import create_app

    parsed_tree = _load_tree(tree_file)
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.BadParameter("expected HOST:PORT", param_hint="--addr")
    port = int(port_text)

    try:
        sock = socket.create_server((host, port))
    except OSError as exc:
        _fail(f"cannot bind {addr}: {exc}", EXIT_IO)

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    app = create_app(
        parsed_tree,
        clock=_clock_from_now(now),
        static_dir=static_dir,
        log_requests=True,
    )
    click.echo(f"serving on http://{addr}")
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        sys.exit(EXIT_ABORT)


def main() -> None:
    cli(prog_name="shepherd")


if __name__ == "__main__":
    main()
