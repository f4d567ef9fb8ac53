"""Python bindings for the qcap solver library."""

from ._qcap import *  # noqa: F401,F403
from ._qcap import __version__  # noqa: F401
