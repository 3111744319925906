"""Ends, limit edges and Euler tours of infinite digraphs through finite quotients."""

from .core import Cut, Edge, EdgeKind, MultiDigraph, Verdict, Walk
from .errors import Certainty, EndspaceError
from .sources import Source, load_source, make_builtin, parse_source

__all__ = [
    "Certainty",
    "Cut",
    "Edge",
    "EdgeKind",
    "EndspaceError",
    "MultiDigraph",
    "Source",
    "Verdict",
    "Walk",
    "load_source",
    "make_builtin",
    "parse_source",
]

__version__ = "0.1.0"
