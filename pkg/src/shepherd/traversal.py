"""Questionnaire state machine: one walk from the root to a leaf.

Sessions are immutable values; every operation returns the successor
session, which makes undo equality and replay checks trivial to state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from typing import Mapping

from .clocks import Clock, system_clock
from .errors import (
    AtLeafError,
    AtRootError,
    FieldSyntaxError,
    InvalidTreeError,
    NotAtLeafError,
    UnknownAnswerError,
    UnknownFieldError,
)
from .model import DecisionTree, LeafNode, QuestionNode, validate_tree
from .validators import field_value_error

FieldValue = str | dict[str, str]


@dataclass(frozen=True, eq=True)
class TraversalSession:
    tree: DecisionTree
    path: tuple[tuple[str, str], ...]
    current: str
    field_values: dict[str, FieldValue]
    created: datetime

    @property
    def at_leaf(self) -> bool:
        return isinstance(self.tree.nodes[self.current], LeafNode)


@dataclass(frozen=True)
class PromptOption:
    answer_id: str
    label: str


@dataclass(frozen=True)
class FieldStatus:
    field_id: str
    field_type: str
    required: bool
    hint: str
    filled: bool
    value: FieldValue | None = None


@dataclass(frozen=True)
class Prompt:
    kind: str  # "question" | "leaf"
    node_id: str
    text: str
    options: tuple[PromptOption, ...] = ()
    requirements: tuple[FieldStatus, ...] = ()

    @property
    def outcome(self) -> str:
        """Leaf prompts expose the outcome code (the leaf id)."""
        return self.node_id if self.kind == "leaf" else ""

    def as_dict(self) -> dict:
        if self.kind == "question":
            return {
                "kind": "question",
                "node_id": self.node_id,
                "prompt": self.text,
                "options": [
                    {"id": o.answer_id, "label": o.label} for o in self.options
                ],
            }
        return {
            "kind": "leaf",
            "node_id": self.node_id,
            "outcome": self.outcome,
            "prescription": self.text,
            "requirements": [
                {
                    "id": f.field_id,
                    "type": f.field_type,
                    "required": f.required,
                    "hint": f.hint,
                    "filled": f.filled,
                    "value": f.value,
                }
                for f in self.requirements
            ],
        }


def start_session(tree: DecisionTree, clock: Clock = system_clock) -> TraversalSession:
    if not validate_tree(tree).is_clean:
        raise InvalidTreeError("tree fails structural validation")
    return TraversalSession(
        tree=tree, path=(), current=tree.root, field_values={}, created=clock()
    )


def apply_answer(session: TraversalSession, answer_id: str) -> TraversalSession:
    node = session.tree.nodes[session.current]
    if isinstance(node, LeafNode):
        raise AtLeafError(f"already at leaf {session.current!r}")
    for ans in node.answers:
        if ans.answer_id == answer_id:
            return replace(
                session,
                path=session.path + ((node.node_id, answer_id),),
                current=ans.target,
                field_values={},
            )
    offered = ", ".join(a.answer_id for a in node.answers)
    raise UnknownAnswerError(
        f"question {node.node_id!r} offers no answer {answer_id!r} (options: {offered})"
    )


def undo(session: TraversalSession) -> TraversalSession:
    if not session.path:
        raise AtRootError("already at the first question")
    question_id, _ = session.path[-1]
    return replace(
        session,
        path=session.path[:-1],
        current=question_id,
        field_values={},
    )


def current_prompt(session: TraversalSession) -> Prompt:
    node = session.tree.nodes[session.current]
    if isinstance(node, QuestionNode):
        return Prompt(
            kind="question",
            node_id=node.node_id,
            text=node.prompt,
            options=tuple(PromptOption(a.answer_id, a.label) for a in node.answers),
        )
    return Prompt(
        kind="leaf",
        node_id=node.node_id,
        text=node.prescription,
        requirements=tuple(
            FieldStatus(
                field_id=req.field_id,
                field_type=req.field_type,
                required=req.required,
                hint=req.hint,
                filled=req.field_id in session.field_values,
                value=session.field_values.get(req.field_id),
            )
            for req in node.fields
        ),
    )


def set_field(
    session: TraversalSession, field_id: str, value: FieldValue
) -> TraversalSession:
    node = session.tree.nodes[session.current]
    if not isinstance(node, LeafNode):
        raise NotAtLeafError(f"current node {session.current!r} is not a leaf")
    requirement = node.requirement(field_id)
    if requirement is None:
        declared = ", ".join(node.field_ids()) or "none"
        raise UnknownFieldError(
            f"leaf {node.node_id!r} declares no field {field_id!r} (fields: {declared})"
        )
    problem = field_value_error(requirement.field_type, value)
    if problem:
        raise FieldSyntaxError(f"{field_id}: {problem}")
    values = dict(session.field_values)
    values[field_id] = dict(value) if isinstance(value, Mapping) else value
    return replace(session, field_values=values)


def is_complete(session: TraversalSession) -> bool:
    node = session.tree.nodes[session.current]
    if not isinstance(node, LeafNode):
        return False
    return all(req in session.field_values for req in node.required_ids())


def missing_fields(session: TraversalSession) -> list[str]:
    """Required field ids still unfilled; empty unless current is a leaf."""
    node = session.tree.nodes[session.current]
    if not isinstance(node, LeafNode):
        return []
    return [req for req in node.required_ids() if req not in session.field_values]
