"""Graphviz export: questions as diamonds, leaves as boxes, labeled edges."""

from __future__ import annotations

from .errors import InvalidTreeError
from .model import DecisionTree, QuestionNode, validate_tree


def _dot_quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def to_dot(tree: DecisionTree) -> str:
    """Deterministic DOT text; node and edge statements in depth-first
    preorder from the root."""
    if not validate_tree(tree).is_clean:
        raise InvalidTreeError("tree fails structural validation")

    node_lines: list[str] = []
    edge_lines: list[str] = []
    seen: set[str] = set()

    def walk(node_id: str) -> None:
        if node_id in seen:
            return
        seen.add(node_id)
        node = tree.nodes[node_id]
        if isinstance(node, QuestionNode):
            node_lines.append(
                f"  {_dot_quote(node_id)} [shape=diamond, label={_dot_quote(node.prompt)}];"
            )
            for ans in node.answers:
                edge_lines.append(
                    f"  {_dot_quote(node_id)} -> {_dot_quote(ans.target)} "
                    f"[label={_dot_quote(ans.label)}];"
                )
            for ans in node.answers:
                walk(ans.target)
        else:
            node_lines.append(
                f"  {_dot_quote(node_id)} [shape=box, label={_dot_quote(node.prescription)}];"
            )

    walk(tree.root)

    lines = [f"digraph {_dot_quote(tree.tree_id)} {{"]
    lines.extend(node_lines)
    lines.extend(edge_lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
