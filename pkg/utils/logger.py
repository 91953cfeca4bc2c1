import os
import logging
import json
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from typing import Optional

# Configure logging format
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Environment-based configuration
ENV = os.getenv("ENV", "production")
LOG_LEVEL = os.getenv("SUGARTAX_LOG_LEVEL", "DEBUG" if ENV == "development" else "INFO")
LOG_FORMAT_NAME = os.getenv("SUGARTAX_LOG_FORMAT", "text")
LOG_DIR = os.getenv("SUGARTAX_LOG_DIR") or None

LOG_FILE_BYTES = 10 * 1024 * 1024


class JsonFormatter(logging.Formatter):
    """One JSON object per record; context passed as `props` is nested under that key."""

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "name": record.name,
            "message": record.getMessage(),
        }
        props = getattr(record, "props", None)
        if props:
            entry["props"] = props
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str, sort_keys=True)


def _formatter(json_format: bool) -> logging.Formatter:
    return JsonFormatter() if json_format else logging.Formatter(LOG_FORMAT, DATE_FORMAT)


def _file_handlers(log_dir: str, json_format: bool):
    os.makedirs(log_dir, exist_ok=True)
    suffix = "_json" if json_format else ""
    file_handler = RotatingFileHandler(
        os.path.join(log_dir, f"sugartax{suffix}.log"),
        maxBytes=LOG_FILE_BYTES,
        backupCount=5
    )
    file_handler.setFormatter(_formatter(json_format))

    error_file_handler = RotatingFileHandler(
        os.path.join(log_dir, "sugartax_error.log"),
        maxBytes=LOG_FILE_BYTES,
        backupCount=5
    )
    error_file_handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    error_file_handler.setLevel(logging.ERROR)
    return [file_handler, error_file_handler]


def setup_logger(
    name: Optional[str] = None,
    level: Optional[str] = None,
    json_format: Optional[bool] = None,
    log_dir: Optional[str] = None,
) -> logging.Logger:
    """
    Configure and return a logger with the given name.

    Solver modules log through logging.getLogger(__name__); configuring the
    root logger (name=None) once at the entry point routes all of them.

    Args:
        name: The name of the logger, None for the root logger
        level: Log level name, defaults to SUGARTAX_LOG_LEVEL
        json_format: JSON lines instead of text, defaults to SUGARTAX_LOG_FORMAT == "json"
        log_dir: Directory for rotating log files, defaults to SUGARTAX_LOG_DIR

    Returns:
        A configured logger
    """
    logger = logging.getLogger(name)
    if json_format is None:
        json_format = LOG_FORMAT_NAME.lower() == "json"
    log_dir = log_dir or LOG_DIR

    # Clear any existing handlers
    if logger.hasHandlers():
        logger.handlers.clear()

    logger.setLevel(getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO))

    # Reports go to stdout; logs stay on stderr
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(_formatter(json_format))
    logger.addHandler(console_handler)

    if log_dir:
        for handler in _file_handlers(log_dir, json_format):
            logger.addHandler(handler)

    if name is not None:
        logger.propagate = False

    return logger


def _emits_json(logger: logging.Logger) -> bool:
    handlers = logger.handlers if logger.handlers or not logger.propagate else logging.getLogger().handlers
    return any(isinstance(h.formatter, JsonFormatter) for h in handlers)


def log_with_context(logger: logging.Logger, level: str, message: str, **context) -> None:
    """
    Log a message with structured context.

    JSON handlers receive the context under `props`; text handlers get
    `key=value` pairs appended to the message.

    Args:
        logger: The logger to use
        level: The log level name (e.g. "info", "warning")
        message: The log message
        **context: Context values
    """
    log_method = getattr(logger, level.lower())
    if _emits_json(logger):
        log_method(message, extra={"props": context})
    elif context:
        log_method(f"{message} - " + " ".join(f"{k}={v}" for k, v in context.items()))
    else:
        log_method(message)
