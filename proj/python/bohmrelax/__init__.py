"""Python bindings for the bohmrelax C++ core."""

from ._bohmrelax import *  # noqa: F401,F403
from ._bohmrelax import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
