"""HTTP service exposing the toolkit's operations.

The CLI and the service share one set of request/response models and
one set of handlers; the CLI either calls handlers in-process or posts
the same payloads to a running server.
"""

from .app import create_app

__all__ = ["create_app"]
