# bandkit/logs.py

import logging
import logging.config
from pathlib import Path

LOGGING_INI = Path(__file__).with_name("logging.ini")


def configure(verbose: int = 0) -> None:
    """Load logging.ini; -v lowers bandkit to INFO, -vv to DEBUG."""
    logging.config.fileConfig(LOGGING_INI, disable_existing_loggers=False)
    if verbose:
        level = logging.INFO if verbose == 1 else logging.DEBUG
        logging.getLogger("bandkit").setLevel(level)
