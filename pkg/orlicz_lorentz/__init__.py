"""
Orlicz-Lorentz Spaces

Norms, duals and unit-ball geometry of Orlicz-Lorentz function spaces for
piecewise Orlicz functions, decreasing weights and simple functions, with
brute-force oracles for cross-checking.
"""

import logging
from logging.handlers import RotatingFileHandler

from .utils import configure_tolerances

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'


def configure_logging(settings):
    """Configure package logging from a configuration class."""
    package_logger = logging.getLogger(__name__)
    for handler in list(package_logger.handlers):
        package_logger.removeHandler(handler)
        handler.close()

    level = getattr(logging, str(settings.LOG_LEVEL).upper(), logging.WARNING)
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    package_logger.addHandler(stream_handler)

    if settings.LOG_FILE:
        file_handler = RotatingFileHandler(
            settings.LOG_FILE,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=10
        )
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        package_logger.addHandler(file_handler)

    package_logger.setLevel(level)
    package_logger.propagate = False


def create_context(config_name='default'):
    """Load a configuration class, configure logging and install tolerances.

    Returns:
        The selected configuration class.
    """
    from config import config

    settings = config[config_name]
    settings.validate()
    configure_logging(settings)
    configure_tolerances(settings)
    logger.info(f"orlicz_lorentz configured ({config_name})")
    return settings
