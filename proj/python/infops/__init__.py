"""Python bindings for the infops C++ engine."""

from ._infops import *  # noqa: F401,F403
from ._infops import Error, Graph, Shift

__all__ = [name for name in dir() if not name.startswith("_")]
