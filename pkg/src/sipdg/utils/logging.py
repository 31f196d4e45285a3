"""
Structured logging for the sipdg package.

A thin layer over :mod:`logging` that renders records as text or JSON and
lets call sites attach a ``context`` mapping (mesh sizes, DOF counts,
residuals) that ends up as key/value pairs in the output.
"""
import datetime
import json
import logging
import sys
import time
from contextlib import contextmanager
from typing import TYPE_CHECKING, Any, Iterator, MutableMapping, Optional, Tuple

LOG_LEVELS = ("DEBUG", "INFO", "WARN", "WARNING", "ERROR")
LOG_FORMATS = ("text", "json")

_ROOT_NAME = "sipdg"


class StructuredFormatter(logging.Formatter):
    """Formatter emitting either one JSON object or one text line per record."""

    def __init__(self, use_json: bool = False) -> None:
        super().__init__()
        self.use_json = use_json

    def format(self, record: logging.LogRecord) -> str:
        """
        Format the log record.

        Args:
            record: The log record to format

        Returns:
            JSON or text representation of the record
        """
        if self.use_json:
            return self._format_json(record)
        return self._format_text(record)

    def _format_json(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "module": record.name,
            "message": record.getMessage(),
        }
        context = getattr(record, "context", None) or {}
        try:
            json.dumps(context)
            entry["context"] = context
        except (TypeError, ValueError):
            entry["context"] = {key: str(value) for key, value in context.items()}
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False)

    def _format_text(self, record: logging.LogRecord) -> str:
        line = (f"{datetime.datetime.fromtimestamp(record.created).isoformat()} - "
                f"{record.name} - {record.levelname} - {record.getMessage()}")
        context = getattr(record, "context", None)
        if context:
            line += " [" + ", ".join(f"{key}={value}" for key, value in context.items()) + "]"
        if record.exc_info:
            line += f"\n{self.formatException(record.exc_info)}"
        return line


if TYPE_CHECKING:
    _LoggerAdapterBase = logging.LoggerAdapter[Any]
else:  # logging.LoggerAdapter is not subscriptable at runtime before Python 3.11
    _LoggerAdapterBase = logging.LoggerAdapter


class LoggerAdapter(_LoggerAdapterBase):
    """
    Logger adapter accepting a ``context`` keyword.

    ``logger.info("assembled", context={"dofs": 96})`` stores the mapping on
    the record so the formatter can render it.
    """

    def process(self, msg: str, kwargs: MutableMapping[str, Any]) -> Tuple[str, MutableMapping[str, Any]]:
        extra = kwargs.setdefault("extra", {})
        base = dict(self.extra) if self.extra else {}
        extra["context"] = {**base, **extra.get("context", {}), **kwargs.pop("context", {})}
        return msg, kwargs


def configure_logging(log_level: str = "WARN", log_output: str = "stdout", log_format: str = "text") -> None:
    """
    Configure the ``sipdg`` logger hierarchy.

    Args:
        log_level: DEBUG, INFO, WARN or ERROR (case-insensitive); unknown values fall back to WARN
        log_output: ``stdout`` or a file name
        log_format: ``text`` or ``json``

    Called once by the command line entry point.
    """
    numeric_level = getattr(logging, log_level.upper(), logging.WARN)
    if not isinstance(numeric_level, int):
        numeric_level = logging.WARN

    logger = logging.getLogger(_ROOT_NAME)
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    handler: logging.Handler
    if log_output.lower() == "stdout":
        handler = logging.StreamHandler(sys.stdout)
    else:
        try:
            handler = logging.FileHandler(log_output)
        except OSError as e:
            print(f"Warning: Could not configure file logging to {log_output}: {e}", file=sys.stderr)
            handler = logging.StreamHandler(sys.stdout)

    handler.setFormatter(StructuredFormatter(use_json=log_format.lower() == "json"))
    logger.addHandler(handler)
    logger.setLevel(numeric_level)
    logger.propagate = False


def get_logger(name: Optional[str] = None) -> LoggerAdapter:
    """
    Get a context-aware logger.

    Args:
        name: Logger name, normally ``__name__`` of the calling module

    Returns:
        LoggerAdapter wrapping the named logger
    """
    return LoggerAdapter(logging.getLogger(name or _ROOT_NAME), {})


@contextmanager
def log_duration(logger: LoggerAdapter, message: str, **context: Any) -> Iterator[dict[str, Any]]:
    """
    Log ``message`` at INFO with the elapsed wall time once the block exits.

    The yielded dict may be filled by the block with extra context entries.
    """
    extra: dict[str, Any] = {}
    start = time.perf_counter()
    try:
        yield extra
    finally:
        elapsed = time.perf_counter() - start
        logger.info(message, context={**context, **extra, "seconds": round(elapsed, 4)})


# Records from the package stay quiet until configure_logging() runs.
logging.getLogger(_ROOT_NAME).addHandler(logging.NullHandler())
