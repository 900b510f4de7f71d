"""Olfactory representational alignment: linear probes, RSA and noise ceilings."""

from ._core import *  # noqa: F401,F403
from ._core import Error  # noqa: F401

__version__ = "0.1.0"
