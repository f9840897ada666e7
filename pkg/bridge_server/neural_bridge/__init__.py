"""Stdio server hosting generator/classifier/embedder models behind the
newline-delimited JSON bridge protocol."""

from .config import BridgeServerConfig, ConfigError
from .server import serve

__all__ = ["BridgeServerConfig", "ConfigError", "serve"]
