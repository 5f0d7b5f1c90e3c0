"""
Useful decorators for the library and the command line.
"""

from functools import wraps
from typing import Any, Callable, Optional

from .errors import InvalidSpecError, PreconditionError
from .tolerances import get_tolerance


def validate_spec(schema):
    """Decorator to validate raw ProblemSpec data against a schema.

    The wrapped function receives the loaded spec object in place of the
    raw mapping.

    Args:
        schema: A marshmallow Schema class to validate against.
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(data, *args, **kwargs):
            if not isinstance(data, dict):
                raise InvalidSpecError(
                    'Spec must be a JSON object',
                    details={'type': type(data).__name__}
                )
            # ValidationError is converted by handle_numeric_errors upstream
            spec = schema().load(data)
            return f(spec, *args, **kwargs)
        return decorated_function
    return decorator


def require_fields(*names: str):
    """Decorator to require optional ProblemSpec fields for a command.

    Args:
        names: Attribute names that must be present on the loaded spec.
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(spec, *args, **kwargs):
            missing = [name for name in names if getattr(spec, name, None) is None]
            if missing:
                raise InvalidSpecError(
                    f"Missing required field(s): {', '.join(missing)}",
                    details={name: ['Missing data for required field.'] for name in missing}
                )
            return f(spec, *args, **kwargs)
        return decorated_function
    return decorator


def on_unit_sphere(norm: str):
    """Decorator to require that x lies on the unit sphere of a norm.

    The wrapped function must take (space, x, ...) and may accept a
    ``tol`` keyword.

    Args:
        norm: 'luxemburg' or 'orlicz'.
    """
    def decorator(f: Callable[..., Any]):
        @wraps(f)
        def decorated_function(space, x, *args, tol: Optional[float] = None, **kwargs):
            from ..norms_primal import luxemburg_norm, orlicz_norm

            tolerance = get_tolerance('geometry', 'unit') if tol is None else tol
            value = luxemburg_norm(space, x) if norm == 'luxemburg' else orlicz_norm(space, x)
            if abs(value - 1.0) > tolerance:
                raise PreconditionError(
                    f'x is not on the {norm} unit sphere (norm = {value!r})',
                    details={'norm': norm, 'value': value, 'tol': tolerance}
                )
            return f(space, x, *args, tol=tolerance, **kwargs)
        return decorated_function
    return decorator
