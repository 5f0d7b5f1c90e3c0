"""
Library Errors

This module defines the exception hierarchy shared by the library and the
command line, plus a decorator that turns low-level numeric and validation
failures into library errors.
"""

import json
import logging
from functools import wraps
from typing import Any, Callable, Dict, TypeVar

from marshmallow import ValidationError

logger = logging.getLogger(__name__)

T = TypeVar('T')


class OrliczLorentzError(Exception):
    """Base exception for all library errors."""
    def __init__(self, message: str, code: int = 1, details: Any = None):
        self.message = message
        self.code = code
        self.details = details
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'code': self.code,
            'message': self.message,
            'type': type(self).__name__,
            'details': self.details,
        }


class InvalidSpecError(OrliczLorentzError):
    """Raised when an input object or a problem spec is malformed."""
    def __init__(self, message: str, code: int = 2, details: Any = None):
        super().__init__(message, code, details)


class PreconditionError(OrliczLorentzError):
    """Raised when an operation is called outside its domain of validity."""
    def __init__(self, message: str, code: int = 3, details: Any = None):
        super().__init__(message, code, details)


class ConfigurationError(OrliczLorentzError):
    """Raised when configuration values are missing or out of range."""
    def __init__(self, message: str, code: int = 3, details: Any = None):
        super().__init__(message, code, details)


class SolverError(OrliczLorentzError):
    """Raised when a bracket cannot be found or an iteration cap is hit."""
    def __init__(self, message: str, code: int = 3, details: Any = None):
        super().__init__(message, code, details)


def handle_numeric_errors(func: Callable[..., T]) -> Callable[..., T]:
    """
    Decorator to convert low-level failures into library errors.

    Args:
        func: The function to wrap with error handling.

    Returns:
        The wrapped function with error handling.
    """
    @wraps(func)
    def wrapper(*args, **kwargs) -> T:
        try:
            return func(*args, **kwargs)
        except OrliczLorentzError:
            raise
        except ValidationError as e:
            logger.warning(f"Spec validation failed: {e.messages}")
            raise InvalidSpecError('Spec validation failed', details=e.messages) from e
        except json.JSONDecodeError as e:
            logger.warning(f"Malformed JSON: {str(e)}")
            raise InvalidSpecError(
                f'Malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}',
                details={'line': e.lineno, 'column': e.colno}
            ) from e
        except (ZeroDivisionError, OverflowError, FloatingPointError) as e:
            logger.error(f"Numeric failure in {func.__name__}: {str(e)}")
            raise SolverError(f'Numeric failure: {str(e)}') from e
        except ValueError as e:
            logger.warning(f"Invalid value in {func.__name__}: {str(e)}")
            raise InvalidSpecError(str(e)) from e
    return wrapper
