"""
Error Handlers

This module maps library exceptions to command exit codes and to the JSON
error payload written by the command line.
"""

import logging
from typing import Any, Dict

from .errors import OrliczLorentzError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_SPEC = 2
EXIT_PRECONDITION = 3
EXIT_INTERNAL = 1


def exit_code_for(error: BaseException) -> int:
    """Return the process exit code for an exception.

    Args:
        error: The exception raised while running a command.

    Returns:
        2 for invalid specs, 3 for precondition, configuration and solver
        failures, 1 for anything unexpected.
    """
    if isinstance(error, OrliczLorentzError):
        return error.code
    return EXIT_INTERNAL


def error_payload(error: BaseException) -> Dict[str, Any]:
    """Build the machine-readable error body for an exception."""
    if isinstance(error, OrliczLorentzError):
        body = error.to_dict()
    else:
        logger.exception(f"Unexpected error: {str(error)}")
        body = {
            'code': EXIT_INTERNAL,
            'message': 'An unexpected error occurred.',
            'type': 'internal_error',
            'details': str(error),
        }
    return {'success': False, 'error': body}
