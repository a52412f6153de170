"""skeinlab: exact computation in oriented/disoriented skein categories."""

__version__ = "0.1.0"
