"""Linear temporal logic: formula ASTs and the graphical spec language."""

from .formulas import (
    Always,
    And,
    Atom,
    Formula,
    FormulaSyntaxError,
    Future,
    Implies,
    Next,
    Not,
    Or,
    Until,
    atoms_of,
    eval_lasso,
    format_formula,
    parse_formula,
)
from .spec_graph import (
    LEGAL_EDGE_OPS,
    SpecEdge,
    SpecGraph,
    SpecGraphError,
    SpecGraphFormatError,
    SpecNode,
    default_spec_graph,
    graph_to_formula,
    load_spec_graph,
    save_spec_graph,
    spec_graph_document,
    validate_spec_graph,
)

__all__ = [
    "Always",
    "And",
    "Atom",
    "Formula",
    "FormulaSyntaxError",
    "Future",
    "Implies",
    "Next",
    "Not",
    "Or",
    "Until",
    "atoms_of",
    "eval_lasso",
    "format_formula",
    "parse_formula",
    "LEGAL_EDGE_OPS",
    "SpecEdge",
    "SpecGraph",
    "SpecGraphError",
    "SpecGraphFormatError",
    "SpecNode",
    "default_spec_graph",
    "graph_to_formula",
    "load_spec_graph",
    "save_spec_graph",
    "spec_graph_document",
    "validate_spec_graph",
]
