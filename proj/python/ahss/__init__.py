"""Harmonic steady-state disturbance rejection toolkit."""

from ._ahss import *  # noqa: F401,F403
from ._ahss import __doc__  # noqa: F401
