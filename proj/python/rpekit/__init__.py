"""Robust perfect equilibria of large games."""

from ._rpekit import *  # noqa: F401,F403
from ._rpekit import __version__  # noqa: F401
