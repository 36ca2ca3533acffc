"""Decentralized no-regret learning for channel and power selection."""
from __future__ import annotations

from .core import (ActionSpace, CapacityError, ConfigError, DomainError, RngStream, SolverError,
                   decode_action, encode_action)

__version__ = "0.1.0"

__all__ = [
    "ActionSpace", "RngStream", "encode_action", "decode_action", "DomainError", "SolverError",
    "CapacityError", "ConfigError", "__version__",
]
