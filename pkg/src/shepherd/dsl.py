"""Text format for decision trees: parser, structural checks, serializer.

Grammar (``#`` starts a line comment, whitespace between tokens is free):

    tree := header root_decl node+
    header := "tree" STRING "version" INT
    root_decl := "root" ID
    node := question | leaf
    question := "question" ID STRING "{" answer answer+ "}"
    answer := "answer" ID [STRING] "->" ID
    leaf := "leaf" ID STRING "{" fieldreq* "}"
    fieldreq := ("require"|"optional") ID ":" TYPE [STRING]

IDs match [A-Za-z_][A-Za-z0-9_]*; STRINGs are double-quoted with \\" and
\\\\ escapes and may hold any non-control characters. The serializer emits
a canonical layout (one declaration per line, two-space indent inside
braces, LF newlines) that is byte-identical for structurally equal trees.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidTreeError, ShepherdError
from .model import (
    Answer,
    DecisionTree,
    FIELD_TYPES,
    FieldRequirement,
    LeafNode,
    Node,
    QuestionNode,
    validate_tree,
)
from .report import Finding, ValidationReport

FILE_EXTENSION = ".tree"

_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")


class ParseError(ShepherdError):
    code = "E_SYNTAX"

    def __init__(self, message: str, line: int, column: int, code: str = "E_SYNTAX"):
        super().__init__(message, code=code)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.args[0]}"


@dataclass(frozen=True)
class _Token:
    kind: str  # ID | STRING | INT | LBRACE | RBRACE | ARROW | COLON | EOF
    value: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "{":
            tokens.append(_Token("LBRACE", "{", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "}":
            tokens.append(_Token("RBRACE", "}", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == ":":
            tokens.append(_Token("COLON", ":", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "-":
            if i + 1 < n and source[i + 1] == ">":
                tokens.append(_Token("ARROW", "->", start_line, start_col))
                i += 2
                col += 2
                continue
            raise ParseError("expected '->'", start_line, start_col)
        if ch == '"':
            i += 1
            col += 1
            chars: list[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string", start_line, start_col)
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in ('"', "\\"):
                        raise ParseError(
                            "invalid escape; only \\\" and \\\\ are allowed",
                            line,
                            col,
                        )
                    chars.append(source[i + 1])
                    i += 2
                    col += 2
                    continue
                if ord(c) < 0x20 or c == "\x7f":
                    raise ParseError(
                        "control character inside string", line, col
                    )
                chars.append(c)
                i += 1
                col += 1
            tokens.append(_Token("STRING", "".join(chars), start_line, start_col))
            continue
        m = _INT_RE.match(source, i)
        if m:
            tokens.append(_Token("INT", m.group(), start_line, start_col))
            col += len(m.group())
            i = m.end()
            continue
        m = _ID_RE.match(source, i)
        if m:
            tokens.append(_Token("ID", m.group(), start_line, start_col))
            col += len(m.group())
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {what}, found {tok.value or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        return self.next()

    def expect_word(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "ID" or tok.value != word:
            raise ParseError(
                f"expected '{word}', found {tok.value or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        return self.next()


@dataclass
class _ParseState:
    """Syntax-level parse result, before structural validation."""

    tree: DecisionTree
    node_lines: dict[str, int]
    edge_lines: dict[tuple[str, str], int]
    root_line: int
    duplicate_findings: list[tuple[int, int, Finding]]  # (line, col, finding)


def _parse_source(source: str) -> _ParseState:
    cur = _Cursor(_tokenize(source))

    cur.expect_word("tree")
    tree_id = cur.expect("STRING", "tree name string").value
    cur.expect_word("version")
    version_tok = cur.expect("INT", "version number")
    version = int(version_tok.value)
    if version < 1:
        raise ParseError(
            "version must be a positive integer", version_tok.line, version_tok.column
        )

    root_tok = cur.expect_word("root")
    root_id = cur.expect("ID", "root node id").value

    nodes: dict[str, Node] = {}
    node_lines: dict[str, int] = {}
    edge_lines: dict[tuple[str, str], int] = {}
    duplicates: list[tuple[int, int, Finding]] = []

    def note_duplicate(line: int, col: int, message: str, location: str) -> None:
        duplicates.append(
            (line, col, Finding("error", "E_DUPLICATE_ID", message, location))
        )

    def add_node(node: Node, line: int, col: int) -> None:
        if node.node_id in nodes:
            note_duplicate(
                line,
                col,
                f"node id {node.node_id!r} already declared",
                node.node_id,
            )
            return
        nodes[node.node_id] = node
        node_lines[node.node_id] = line

    while cur.peek().kind != "EOF":
        tok = cur.peek()
        if tok.kind != "ID" or tok.value not in ("question", "leaf"):
            raise ParseError(
                f"expected 'question' or 'leaf', found {tok.value or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        if tok.value == "question":
            decl = cur.next()
            qid = cur.expect("ID", "question id").value
            prompt = cur.expect("STRING", "question prompt string").value
            cur.expect("LBRACE", "'{'")
            answers: list[Answer] = []
            seen: set[str] = set()
            declared = 0
            while cur.peek().kind != "RBRACE":
                ans_tok = cur.expect_word("answer")
                aid = cur.expect("ID", "answer id").value
                label = aid
                if cur.peek().kind == "STRING":
                    label = cur.next().value
                cur.expect("ARROW", "'->'")
                target = cur.expect("ID", "target node id").value
                declared += 1
                if aid in seen:
                    note_duplicate(
                        ans_tok.line,
                        ans_tok.column,
                        f"answer id {aid!r} already declared in question {qid!r}",
                        f"{qid}.{aid}",
                    )
                    continue
                seen.add(aid)
                answers.append(Answer(aid, label, target))
                edge_lines[(qid, aid)] = ans_tok.line
            if declared < 2:
                tok = cur.peek()
                raise ParseError(
                    "expected 'answer'; a question needs at least two answers",
                    tok.line,
                    tok.column,
                )
            cur.expect("RBRACE", "'}'")
            add_node(QuestionNode(qid, prompt, tuple(answers)), decl.line, decl.column)
        else:
            decl = cur.next()
            lid = cur.expect("ID", "leaf id").value
            prescription = cur.expect("STRING", "leaf prescription string").value
            cur.expect("LBRACE", "'{'")
            reqs: list[FieldRequirement] = []
            seen_fields: set[str] = set()
            while cur.peek().kind != "RBRACE":
                mode_tok = cur.peek()
                if mode_tok.kind != "ID" or mode_tok.value not in (
                    "require",
                    "optional",
                ):
                    raise ParseError(
                        f"expected 'require', 'optional' or '}}', found "
                        f"{mode_tok.value or 'end of input'!r}",
                        mode_tok.line,
                        mode_tok.column,
                    )
                cur.next()
                fid = cur.expect("ID", "field id").value
                cur.expect("COLON", "':'")
                type_tok = cur.expect("ID", "field type")
                if type_tok.value not in FIELD_TYPES:
                    raise ParseError(
                        f"unknown field type {type_tok.value!r}; expected one of "
                        + ", ".join(FIELD_TYPES),
                        type_tok.line,
                        type_tok.column,
                    )
                hint = ""
                if cur.peek().kind == "STRING":
                    hint = cur.next().value
                if fid in seen_fields:
                    note_duplicate(
                        mode_tok.line,
                        mode_tok.column,
                        f"field id {fid!r} already declared in leaf {lid!r}",
                        f"{lid}.{fid}",
                    )
                    continue
                seen_fields.add(fid)
                reqs.append(
                    FieldRequirement(fid, type_tok.value, mode_tok.value == "require", hint)
                )
            cur.expect("RBRACE", "'}'")
            add_node(LeafNode(lid, prescription, tuple(reqs)), decl.line, decl.column)

    if not nodes:
        tok = cur.peek()
        raise ParseError("expected at least one node declaration", tok.line, tok.column)

    tree = DecisionTree(tree_id=tree_id, version=version, root=root_id, nodes=nodes)
    return _ParseState(tree, node_lines, edge_lines, root_tok.line, duplicates)


def _located_findings(state: _ParseState) -> list[tuple[int, int, Finding]]:
    """Structural findings with source lines attached, sorted by position."""
    found = list(state.duplicate_findings)
    for finding in validate_tree(state.tree):
        code, loc = finding.code, finding.location
        line = 1
        if code == "E_DANGLING_TARGET" and loc == "root":
            code = "E_NO_ROOT"
            line = state.root_line
        elif code == "E_ROOT_NOT_QUESTION":
            line = state.root_line
        elif "." in loc:
            qid, aid = loc.split(".", 1)
            line = state.edge_lines.get((qid, aid), state.node_lines.get(qid, 1))
        else:
            line = state.node_lines.get(loc, 1)
        found.append(
            (line, 1, Finding(finding.severity, code, finding.message, finding.location))
        )
    found.sort(key=lambda item: (item[0], item[1], item[2].code))
    return found


def parse_tree(source: str) -> DecisionTree:
    """Parse DSL text into a structurally valid DecisionTree.

    Raises ParseError (with 1-based line/column) for syntax problems and for
    structural violations: E_DUPLICATE_ID, E_DANGLING_TARGET, E_NO_ROOT,
    E_CYCLE, E_UNREACHABLE, E_ROOT_NOT_QUESTION.
    """
    state = _parse_source(source)
    findings = _located_findings(state)
    if findings:
        line, col, finding = findings[0]
        raise ParseError(finding.message, line, col, code=finding.code)
    return state.tree


def check_tree_source(source: str) -> ValidationReport:
    """Structural lint for `tree check`: findings instead of a raised error.

    Pure syntax errors still raise ParseError; once the text is grammatical,
    every structural problem becomes one finding whose message carries the
    source line.
    """
    state = _parse_source(source)
    report = ValidationReport()
    for line, _col, finding in _located_findings(state):
        report.findings.append(
            Finding(
                finding.severity,
                finding.code,
                f"line {line}: {finding.message}",
                finding.location,
            )
        )
    return report


def _quote(text: str) -> str:
    for ch in text:
        if ord(ch) < 0x20 or ch == "\x7f":
            raise InvalidTreeError(
                "strings in the tree format must not contain control characters"
            )
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _check_serializable_id(node_id: str) -> str:
    if not _ID_RE.fullmatch(node_id):
        raise InvalidTreeError(f"id {node_id!r} is not expressible in the tree format")
    return node_id


def _preorder(tree: DecisionTree) -> list[Node]:
    ordered: list[Node] = []
    seen: set[str] = set()

    def walk(node_id: str) -> None:
        if node_id in seen:
            return
        seen.add(node_id)
        node = tree.nodes[node_id]
        ordered.append(node)
        if isinstance(node, QuestionNode):
            for ans in node.answers:
                walk(ans.target)

    walk(tree.root)
    return ordered


def serialize_tree(tree: DecisionTree) -> str:
    """Canonical text form: byte-identical for structurally equal trees."""
    if not validate_tree(tree).is_clean:
        raise InvalidTreeError("tree fails structural validation")
    if tree.version < 1:
        raise InvalidTreeError("tree version must be a positive integer")

    lines = [
        f"tree {_quote(tree.tree_id)} version {tree.version}",
        f"root {_check_serializable_id(tree.root)}",
    ]
    for node in _preorder(tree):
        nid = _check_serializable_id(node.node_id)
        if isinstance(node, QuestionNode):
            lines.append(f"question {nid} {_quote(node.prompt)} {{")
            for ans in node.answers:
                _check_serializable_id(ans.answer_id)
                label = "" if ans.label == ans.answer_id else f" {_quote(ans.label)}"
                target = _check_serializable_id(ans.target)
                lines.append(f"  answer {ans.answer_id}{label} -> {target}")
            lines.append("}")
        else:
            if not node.fields:
                lines.append(f"leaf {nid} {_quote(node.prescription)} {{}}")
                continue
            lines.append(f"leaf {nid} {_quote(node.prescription)} {{")
            for req in node.fields:
                _check_serializable_id(req.field_id)
                keyword = "require" if req.required else "optional"
                hint = f" {_quote(req.hint)}" if req.hint else ""
                lines.append(f"  {keyword} {req.field_id}: {req.field_type}{hint}")
            lines.append("}")
    return "\n".join(lines) + "\n"


def load_tree_file(path: str) -> DecisionTree:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tree(fh.read())
