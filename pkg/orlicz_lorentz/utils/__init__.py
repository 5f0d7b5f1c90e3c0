"""
Utility functions and classes for the orlicz_lorentz package.
"""

from .errors import (
    ConfigurationError,
    InvalidSpecError,
    OrliczLorentzError,
    PreconditionError,
    SolverError,
    handle_numeric_errors
)
from .error_handlers import error_payload, exit_code_for
from .tolerances import TOLERANCES, configure_tolerances, get_tolerance, reset_tolerances
from .decorators import on_unit_sphere, require_fields, validate_spec

__all__ = [
    # Errors
    'OrliczLorentzError',
    'InvalidSpecError',
    'PreconditionError',
    'ConfigurationError',
    'SolverError',
    'handle_numeric_errors',

    # Error Handling
    'error_payload',
    'exit_code_for',

    # Tolerances
    'TOLERANCES',
    'get_tolerance',
    'configure_tolerances',
    'reset_tolerances',

    # Decorators
    'validate_spec',
    'require_fields',
    'on_unit_sphere'
]
