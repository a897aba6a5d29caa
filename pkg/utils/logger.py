# Logging configuration
import logging
import sys
import os


def _level_from_env(default):
    name = os.environ.get('CSC_LOG_LEVEL')
    if not name:
        return default
    level = logging.getLevelName(name.upper())
    return level if isinstance(level, int) else default


def setup_logging(module_name, log_level=None, log_file=None):
    """
    Configure logging for the application

    Args:
        module_name (str): The name of the module (use "csc" to cover the whole package)
        log_level (int, optional): The logging level. Defaults to CSC_LOG_LEVEL, else WARNING.
        log_file (str, optional): Path to a log file. Defaults to CSC_LOG_FILE; console only if neither is set.

    Returns:
        logger: Configured logger object
    """
    level = log_level if log_level is not None else _level_from_env(logging.WARNING)
    logger = logging.getLogger(module_name)
    logger.setLevel(level)

    # Only add handlers if they don't exist
    if not logger.handlers:
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

        log_file = log_file or os.environ.get('CSC_LOG_FILE')
        if log_file:
            directory = os.path.dirname(log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        # stdout is reserved for command output
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        logger.info(f"Logging initialized for {module_name}")

    return logger
