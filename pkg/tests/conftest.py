"""Shared fixtures: trees, minimal field fills, and a stub HTTP server."""

from __future__ import annotations

import random
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from shepherd.model import (
    Answer,
    DecisionTree,
    FIELD_TYPES,
    FieldRequirement,
    LeafNode,
    Node,
    QuestionNode,
    canonical_tree,
)

MINIMAL_VALUES = {
    "text": "example text",
    "url": "https://example.org/data.csv",
    "path": "data/prep.py",
    "version": "1.2.3",
    "keyvalue": {"param": "1"},
}


def minimal_value(field_type: str):
    value = MINIMAL_VALUES[field_type]
    return dict(value) if isinstance(value, dict) else value


def minimal_fields(leaf: LeafNode) -> dict:
    return {f.field_id: minimal_value(f.field_type) for f in leaf.fields if f.required}


@pytest.fixture
def canonical() -> DecisionTree:
    return canonical_tree()


def minimal_tree() -> DecisionTree:
    """Smallest legal tree: one question, two leaves."""
    return DecisionTree(
        tree_id="mini",
        version=1,
        root="Q",
        nodes={
            "Q": QuestionNode(
                "Q", "pick one", (Answer("a", "A", "L1"), Answer("b", "B", "L2"))
            ),
            "L1": LeafNode("L1", "left"),
            "L2": LeafNode("L2", "right", (FieldRequirement("note", "text", True),)),
        },
    )


# Text alphabet for generated prompts/labels: exercises quoting, escapes,
# and non-ASCII, but never control characters.
_TEXT_CHARS = 'abcdefgh XYZ"\\\'éλ→.,:;0189'


def _random_text(rng: random.Random, min_len: int = 1, max_len: int = 24) -> str:
    length = rng.randint(min_len, max_len)
    return "".join(rng.choice(_TEXT_CHARS) for _ in range(length)).strip() or "x"


def random_tree(rng: random.Random, max_questions: int = 12) -> DecisionTree:
    """Generate a structurally valid random tree (always ≥ 1 question)."""
    nodes: dict[str, Node] = {}
    counter = 0

    def fresh_id(prefix: str) -> str:
        nonlocal counter
        counter += 1
        return f"{prefix}{counter}"

    question_budget = rng.randint(1, max_questions)
    made_questions = 0

    def make_node(depth: int) -> str:
        nonlocal made_questions
        make_question = made_questions < question_budget and (
            depth == 0 or rng.random() < 0.55 / depth
        )
        if make_question:
            made_questions += 1
            qid = fresh_id("Q")
            count = rng.randint(2, 4)
            answers = []
            used = set()
            for _ in range(count):
                aid = fresh_id("a")
                used.add(aid)
                label = aid if rng.random() < 0.4 else _random_text(rng, 1, 10)
                answers.append((aid, label))
            built = tuple(
                Answer(aid, label, make_node(depth + 1)) for aid, label in answers
            )
            nodes[qid] = QuestionNode(qid, _random_text(rng), built)
            return qid
        lid = fresh_id("L")
        field_count = rng.randint(0, 3)
        reqs = []
        for index in range(field_count):
            reqs.append(
                FieldRequirement(
                    f"f{index}",
                    rng.choice(FIELD_TYPES),
                    rng.random() < 0.6,
                    "" if rng.random() < 0.3 else _random_text(rng, 1, 16),
                )
            )
        nodes[lid] = LeafNode(lid, _random_text(rng), tuple(reqs))
        return lid

    root = make_node(0)
    return DecisionTree(
        tree_id=_random_text(rng, 1, 12),
        version=rng.randint(1, 99),
        root=root,
        nodes=nodes,
    )


class _StubHandler(BaseHTTPRequestHandler):
    """Endpoints: /ok 200, /missing 404, /slow sleeps 1s then 200,
    /redirect hops to /ok, /loop redirects forever, /headonly 405 on HEAD."""

    def _respond(self, is_head: bool) -> None:
        path = self.path
        if path == "/ok":
            self.send_response(200)
            self.send_header("Content-Length", "2")
            self.end_headers()
            if not is_head:
                self.wfile.write(b"ok")
        elif path == "/missing":
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()
        elif path == "/slow":
            time.sleep(1.0)
            self.send_response(200)
            self.send_header("Content-Length", "0")
            self.end_headers()
        elif path == "/redirect":
            self.send_response(302)
            self.send_header("Location", "/ok")
            self.send_header("Content-Length", "0")
            self.end_headers()
        elif path == "/loop":
            self.send_response(302)
            self.send_header("Location", "/loop")
            self.send_header("Content-Length", "0")
            self.end_headers()
        elif path == "/headonly":
            if is_head:
                self.send_response(405)
            else:
                self.send_response(200)
            self.send_header("Content-Length", "0")
            self.end_headers()
        else:
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        self._respond(is_head=False)

    def do_HEAD(self) -> None:  # noqa: N802
        self._respond(is_head=True)

    def log_message(self, *args) -> None:
        pass


@pytest.fixture(scope="session")
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join(timeout=5)
