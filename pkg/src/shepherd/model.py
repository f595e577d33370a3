"""Decision-tree domain model: node types, the built-in retrievability tree,
structural validation, and exhaustive path enumeration.

Trees are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .errors import InvalidTreeError, NodeNotFoundError
from .report import ValidationReport

FIELD_TYPES = ("text", "url", "path", "version", "keyvalue")


@dataclass(frozen=True)
class FieldRequirement:
    field_id: str
    field_type: str
    required: bool
    hint: str = ""

    def __post_init__(self) -> None:
        if self.field_type not in FIELD_TYPES:
            raise ValueError(f"unknown field type: {self.field_type!r}")


@dataclass(frozen=True)
class Answer:
    answer_id: str
    label: str
    target: str


@dataclass(frozen=True)
class QuestionNode:
    node_id: str
    prompt: str
    answers: tuple[Answer, ...]


@dataclass(frozen=True)
class LeafNode:
    """Terminal node. The node id doubles as the manifest outcome code."""

    node_id: str
    prescription: str
    fields: tuple[FieldRequirement, ...] = ()

    def field_ids(self) -> list[str]:
        return [f.field_id for f in self.fields]

    def required_ids(self) -> list[str]:
        return [f.field_id for f in self.fields if f.required]

    def requirement(self, field_id: str) -> FieldRequirement | None:
        for f in self.fields:
            if f.field_id == field_id:
                return f
        return None


Node = QuestionNode | LeafNode


@dataclass(frozen=True)
class DecisionTree:
    tree_id: str
    version: int
    root: str
    nodes: dict[str, Node] = field(default_factory=dict)

    def questions(self) -> list[QuestionNode]:
        return [n for n in self.nodes.values() if isinstance(n, QuestionNode)]

    def leaves(self) -> list[LeafNode]:
        return [n for n in self.nodes.values() if isinstance(n, LeafNode)]

    def edge_count(self) -> int:
        return sum(len(q.answers) for q in self.questions())


@dataclass(frozen=True)
class Path:
    """One root-to-leaf walk: (question id, answer id) pairs plus the leaf."""

    steps: tuple[tuple[str, str], ...]
    leaf: str

    def answer_ids(self) -> list[str]:
        return [a for _, a in self.steps]


def node_lookup(tree: DecisionTree, node_id: str) -> Node:
    try:
        return tree.nodes[node_id]
    except KeyError:
        raise NodeNotFoundError(f"no node with id {node_id!r}") from None


def validate_tree(tree: DecisionTree) -> ValidationReport:
    """Check every structural invariant; violations become findings, not raises.

    Codes: E_DANGLING_TARGET, E_CYCLE, E_UNREACHABLE, E_DUPLICATE_ID,
    E_ROOT_NOT_QUESTION, E_TOO_FEW_ANSWERS. A clean report means the tree
    is a well-formed questionnaire: a single rooted tree whose internal
    nodes are questions with at least two answers.
    """
    report = ValidationReport()

    for key, node in tree.nodes.items():
        if key != node.node_id:
            report.error(
                "E_DUPLICATE_ID",
                f"node registered under {key!r} declares id {node.node_id!r}",
                key,
            )
        if isinstance(node, QuestionNode):
            if len(node.answers) < 2:
                report.error(
                    "E_TOO_FEW_ANSWERS",
                    f"question {key!r} has {len(node.answers)} answer(s); at least 2 required",
                    key,
                )
            seen_answers: set[str] = set()
            for ans in node.answers:
                if ans.answer_id in seen_answers:
                    report.error(
                        "E_DUPLICATE_ID",
                        f"answer id {ans.answer_id!r} repeated in question {key!r}",
                        f"{key}.{ans.answer_id}",
                    )
                seen_answers.add(ans.answer_id)
                if ans.target not in tree.nodes:
                    report.error(
                        "E_DANGLING_TARGET",
                        f"answer {key}.{ans.answer_id} targets unknown node {ans.target!r}",
                        f"{key}.{ans.answer_id}",
                    )
        else:
            seen_fields: set[str] = set()
            for req in node.fields:
                if req.field_id in seen_fields:
                    report.error(
                        "E_DUPLICATE_ID",
                        f"field id {req.field_id!r} repeated in leaf {key!r}",
                        f"{key}.{req.field_id}",
                    )
                seen_fields.add(req.field_id)

    root_node = tree.nodes.get(tree.root)
    if root_node is None:
        report.error(
            "E_DANGLING_TARGET", f"root names unknown node {tree.root!r}", "root"
        )
    elif not isinstance(root_node, QuestionNode):
        report.error(
            "E_ROOT_NOT_QUESTION", f"root node {tree.root!r} is a leaf", tree.root
        )

    # DFS from the root. Any edge into an already-seen node breaks tree-ness:
    # a back edge is a directed cycle, a cross edge a shared subtree; both are
    # rejected (undirected acyclicity) under E_CYCLE.
    visited: set[str] = set()
    if root_node is not None:
        stack = [tree.root]
        visited.add(tree.root)
        while stack:
            current = stack.pop()
            node = tree.nodes.get(current)
            if not isinstance(node, QuestionNode):
                continue
            for ans in node.answers:
                if ans.target not in tree.nodes:
                    continue  # already reported as dangling
                if ans.target in visited:
                    report.error(
                        "E_CYCLE",
                        f"answer {current}.{ans.answer_id} re-enters node "
                        f"{ans.target!r}; the graph must be a tree",
                        f"{current}.{ans.answer_id}",
                    )
                    continue
                visited.add(ans.target)
                stack.append(ans.target)

    if root_node is not None:
        for key in tree.nodes:
            if key not in visited:
                report.error(
                    "E_UNREACHABLE", f"node {key!r} is not reachable from the root", key
                )

    return report


def enumerate_paths(tree: DecisionTree) -> list[Path]:
    """Every root-to-leaf path, depth-first in answer declaration order."""
    if not validate_tree(tree).is_clean:
        raise InvalidTreeError("tree fails structural validation")

    paths: list[Path] = []

    def walk(node_id: str, steps: tuple[tuple[str, str], ...]) -> None:
        node = tree.nodes[node_id]
        if isinstance(node, LeafNode):
            paths.append(Path(steps=steps, leaf=node_id))
            return
        for ans in node.answers:
            walk(ans.target, steps + ((node_id, ans.answer_id),))

    walk(tree.root, ())
    return paths


def replay_path(tree: DecisionTree, steps: list[tuple[str, str]] | tuple) -> str:
    """Follow (question, answer) pairs from the root; return the final node id.

    Raises InvalidTreeError when a pair does not match the walk.
    """
    current = tree.root
    for question_id, answer_id in steps:
        node = tree.nodes.get(current)
        if not isinstance(node, QuestionNode) or node.node_id != question_id:
            raise InvalidTreeError(
                f"path step names {question_id!r} but the walk is at {current!r}"
            )
        for ans in node.answers:
            if ans.answer_id == answer_id:
                current = ans.target
                break
        else:
            raise InvalidTreeError(
                f"question {question_id!r} offers no answer {answer_id!r}"
            )
    return current


def _q(node_id: str, prompt: str, *answers: tuple[str, str, str]) -> QuestionNode:
    return QuestionNode(
        node_id=node_id,
        prompt=prompt,
        answers=tuple(Answer(a, label, target) for a, label, target in answers),
    )


def _req(field_id: str, field_type: str, hint: str = "") -> FieldRequirement:
    return FieldRequirement(field_id, field_type, required=True, hint=hint)


def _opt(field_id: str, field_type: str, hint: str = "") -> FieldRequirement:
    return FieldRequirement(field_id, field_type, required=False, hint=hint)


@lru_cache(maxsize=1)
def canonical_tree() -> DecisionTree:
    """The built-in data-retrievability questionnaire: 8 questions, 10 leaves.

    The shareable/no side asks for alternative access routes; the
    shareable/yes side drills into raw-data publicity and preprocessing
    provenance (script, tool, or other method).
    """
    nodes: dict[str, Node] = {}

    def add(node: Node) -> None:
        nodes[node.node_id] = node

    add(
        _q(
            "Q_SHAREABLE",
            "Can the dataset be shared (made publicly available)?",
            ("yes", "Yes", "Q_RAW_PUBLIC"),
            ("no", "No", "Q_OTHER_ACCESS"),
        )
    )
    add(
        _q(
            "Q_OTHER_ACCESS",
            "Are there other methods to access the data?",
            ("no", "No", "L_NOT_RETRIEVABLE"),
            ("yes", "Yes", "Q_FULLY_ACCESSIBLE"),
        )
    )
    add(
        _q(
            "Q_FULLY_ACCESSIBLE",
            "Is the data fully accessible (all information viewable)?",
            ("yes", "Yes", "L_ACCESS_FULL"),
            ("no", "No", "L_ACCESS_PARTIAL"),
        )
    )
    add(
        _q(
            "Q_RAW_PUBLIC",
            "Is the raw dataset public?",
            ("no", "No", "Q_PRE_PUBLIC"),
            ("yes", "Yes", "Q_PREP_AVAILABLE"),
        )
    )
    add(
        _q(
            "Q_PRE_PUBLIC",
            "Is the preprocessed dataset public?",
            ("yes", "Yes", "L_PRE_LINK"),
            ("no", "No", "L_ACQUISITION"),
        )
    )
    add(
        _q(
            "Q_PREP_AVAILABLE",
            "Are the preprocessing methods available?",
            ("no", "No", "L_RAW_DESCRIBE"),
            ("yes", "Yes", "Q_PREP_METHOD"),
        )
    )
    add(
        _q(
            "Q_PREP_METHOD",
            "How was the dataset preprocessed?",
            ("script", "With a script", "L_RAW_SCRIPT"),
            ("tool", "With a tool", "Q_TOOL_PUBLIC"),
            ("other", "Some other way", "L_RAW_INSTRUCTIONS"),
        )
    )
    add(
        _q(
            "Q_TOOL_PUBLIC",
            "Is the tool publicly available?",
            ("yes", "Yes", "L_RAW_TOOL_PUBLIC"),
            ("no", "No", "L_RAW_TOOL_PRIVATE"),
        )
    )

    add(
        LeafNode(
            "L_NOT_RETRIEVABLE",
            "The dataset is not retrievable. Record why (for example, legal or "
            "regulatory restrictions).",
            (
                _req(
                    "reason",
                    "text",
                    "Why the dataset cannot be retrieved (e.g. regulations)",
                ),
            ),
        )
    )
    add(
        LeafNode(
            "L_ACCESS_FULL",
            "Describe the procedure for accessing the data.",
            (
                _req(
                    "access_procedure",
                    "text",
                    "How another researcher can access the data",
                ),
            ),
        )
    )
    add(
        LeafNode(
            "L_ACCESS_PARTIAL",
            "List which parts of the data can be accessed and describe the "
            "access procedure.",
            (
                _req(
                    "accessible_information",
                    "text",
                    "Which parts of the data can be viewed",
                ),
                _req(
                    "access_procedure",
                    "text",
                    "How the accessible parts can be reached",
                ),
            ),
        )
    )
    add(
        LeafNode(
            "L_PRE_LINK",
            "Provide a link to the preprocessed dataset.",
            (_req("preprocessed_url", "url", "Link to the preprocessed dataset"),),
        )
    )
    add(
        LeafNode(
            "L_ACQUISITION",
            "Describe how to obtain the raw and/or preprocessed dataset (for "
            "example, a request procedure on a hosting platform).",
            (
                _req(
                    "acquisition_procedure",
                    "text",
                    "How to obtain the raw and/or preprocessed data",
                ),
                _opt("platform_url", "url", "Platform where the request is made"),
            ),
        )
    )
    add(
        LeafNode(
            "L_RAW_DESCRIBE",
            "Provide a link to the raw dataset and, if any preprocessing was "
            "applied, describe it.",
            (
                _req("raw_url", "url", "Link to the raw dataset"),
                _opt(
                    "processing_description",
                    "text",
                    "Description of any preprocessing applied",
                ),
            ),
        )
    )
    add(
        LeafNode(
            "L_RAW_SCRIPT",
            "Provide the raw dataset together with the preprocessing script.",
            (
                _req("raw_url", "url", "Link to the raw dataset"),
                _req(
                    "script_ref",
                    "path",
                    "Path or link to the preprocessing script",
                ),
                _opt("script_sha256", "text", "SHA-256 digest of the script file"),
            ),
        )
    )
    add(
        LeafNode(
            "L_RAW_TOOL_PUBLIC",
            "Provide the raw dataset and the preprocessing tool, including the "
            "tool version and its configuration if present.",
            (
                _req("raw_url", "url", "Link to the raw dataset"),
                _req("tool_name", "text", "Name of the preprocessing tool"),
                _req("tool_url", "url", "Where the tool can be obtained"),
                _req("tool_version", "version", "Tool version used"),
                _opt("tool_config", "keyvalue", "Configuration parameters, if present"),
            ),
        )
    )
    add(
        LeafNode(
            "L_RAW_TOOL_PRIVATE",
            "Provide the raw dataset and name the preprocessing tool, including "
            "its version and configuration if present.",
            (
                _req("raw_url", "url", "Link to the raw dataset"),
                _req("tool_name", "text", "Name of the preprocessing tool"),
                _req("tool_version", "version", "Tool version used"),
                _opt("tool_config", "keyvalue", "Configuration parameters, if present"),
            ),
        )
    )
    add(
        LeafNode(
            "L_RAW_INSTRUCTIONS",
            "Provide the raw dataset and step-by-step instructions for "
            "preprocessing it.",
            (
                _req("raw_url", "url", "Link to the raw dataset"),
                _req(
                    "processing_instructions",
                    "text",
                    "How to turn the raw data into the dataset used",
                ),
            ),
        )
    )

    return DecisionTree(
        tree_id="data-retrievability", version=1, root="Q_SHAREABLE", nodes=nodes
    )
