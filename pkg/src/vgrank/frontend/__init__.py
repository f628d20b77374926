"""Mini-C frontend: parsing, control flow, dependence analyses, graph building."""
from .analysis import Cfg, build_cfg, control_dependencies, reaching_definitions
from .builder import build_verification_graph, extract, literal_label
from .parser import ParseError, UndeclaredVariableError, UnsupportedConstructError, parse

__all__ = [
    "Cfg",
    "ParseError",
    "UndeclaredVariableError",
    "UnsupportedConstructError",
    "build_cfg",
    "build_verification_graph",
    "control_dependencies",
    "extract",
    "literal_label",
    "parse",
    "reaching_definitions",
]
