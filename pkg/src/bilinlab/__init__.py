"""Numerical toolkit for bilinear Fourier multipliers on periodic grids."""

__version__ = "0.1.0"

from .grid import *  # noqa: E402,F401,F403
from .symbols import *  # noqa: E402,F401,F403
from .apply import *  # noqa: E402,F401,F403
from .witness import *  # noqa: E402,F401,F403
from .search import *  # noqa: E402,F401,F403
from .locall2 import *  # noqa: E402,F401,F403
from .transference import *  # noqa: E402,F401,F403
