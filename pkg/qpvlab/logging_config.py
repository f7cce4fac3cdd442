import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

from qpvlab.config import get_settings

logger = logging.getLogger("qpvlab")

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Optional[str] = None, to_file: Optional[bool] = None) -> logging.Logger:
    """Attach console and rotating file handlers to the ``qpvlab`` logger.

    The console handler writes to standard error so reports printed on standard
    output stay machine-readable. Calling it again replaces earlier handlers.
    """
    settings = get_settings()
    level = (level or settings.log_level).upper()
    to_file = settings.log_to_file if to_file is None else to_file

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_dir / "app.log",
            maxBytes=10*1024*1024,
            backupCount=5,
            encoding='utf-8'
        )
        error_handler = logging.handlers.RotatingFileHandler(
            filename=log_dir / "error.log",
            maxBytes=10*1024*1024,
            backupCount=5,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        file_handler.setFormatter(formatter)
        error_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
        logger.addHandler(error_handler)

    logger.setLevel(level)
    return logger
