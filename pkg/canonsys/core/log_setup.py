import logging
import sys

from canonsys.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(level: str | None = None) -> None:
    """Send library diagnostics to stderr; stdout is reserved for command output."""
    root = logging.getLogger("canonsys")
    root.setLevel((level or settings.log_level).upper())
    # exactly one canonsys handler, bound to the current sys.stderr
    for old in [h for h in root.handlers if getattr(h, "_canonsys", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._canonsys = True
    root.addHandler(handler)
