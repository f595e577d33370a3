"""Decision-tree questionnaire for data retrievability: walk a researcher to
an outcome and emit the manifest that makes the dataset retrievable."""

from importlib import resources

from .dsl import ParseError, check_tree_source, parse_tree, serialize_tree
from .manifest import (
    RetrievabilityManifest,
    build_manifest,
    parse_manifest,
    serialize_manifest,
    validate_manifest,
)
from .model import (
    Answer,
    DecisionTree,
    FieldRequirement,
    LeafNode,
    Path,
    QuestionNode,
    canonical_tree,
    enumerate_paths,
    node_lookup,
    validate_tree,
)
from .render import to_dot
from .report import Finding, ValidationReport
from .traversal import (
    Prompt,
    TraversalSession,
    apply_answer,
    current_prompt,
    is_complete,
    set_field,
    start_session,
    undo,
)
from .validators import (
    Reachability,
    check_url_live,
    check_url_syntax,
    deep_validate,
    sha256_file,
)

__version__ = "0.1.0"


def canonical_tree_source() -> str:
    """Text of the shipped canonical tree file."""
    return (
        resources.files("shepherd").joinpath("data/canonical.tree").read_text("utf-8")
    )
