"""HTTP sidecar exposing a sentence-embedding model.

Serves the remote provider protocol consumed by ``weaklab``:
``POST /embed`` with ``{"texts": [...]}`` and ``GET /health``.
"""

from .server import SidecarConfig, create_app

__all__ = ["SidecarConfig", "create_app"]
__version__ = "0.1.0"
