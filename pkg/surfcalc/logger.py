import logging
import sys

# logging #####################################################################

APP_LOGGER_NAME = "surfcalc"

# one child logger per module, named in upper case
MODULE_LOGGERS = (
    "CLI",
    "CONFIG",
    "ENDSPACE",
    "SURFACE",
    "EXHAUSTION",
    "PANTS",
    "SHIFTBASIS",
    "MCGWORD",
)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def setup_applevel_logger(
    logger_name=APP_LOGGER_NAME, is_debug=False, file_name=None, stream=sys.stderr
):
    """
    Set up the surfcalc logger. Records of every module logger go to stream
    and, if given, to a file; stdout stays free for command output.

    Args:
        logger_name (str): The name of the logger (default is APP_LOGGER_NAME)
        is_debug (bool): log DEBUG records such as enumeration and oracle
            progress (default is False)
        file_name (str): also append records to this file (default is None)
        stream: where records are written (default is sys.stderr)

    Returns:
        logging.Logger: The configured logger instance
    """
    logger = logging.getLogger(logger_name)
    logger.setLevel(logging.DEBUG if is_debug else logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT)

    handlers = [logging.StreamHandler(stream)]
    if file_name:
        handlers.append(logging.FileHandler(file_name))
    logger.handlers.clear()
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def get_logger(module_name):
    """
    Child logger of a surfcalc module, "surfcalc.<MODULE>".

    Raises:
        ValueError: if module_name is not one of MODULE_LOGGERS
    """
    if module_name not in MODULE_LOGGERS:
        raise ValueError(f"no surfcalc module logger named {module_name!r}")
    return logging.getLogger(APP_LOGGER_NAME).getChild(module_name)
