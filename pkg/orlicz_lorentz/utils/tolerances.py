"""
Numerical Tolerances

This module holds the tolerance and iteration settings used across the
library. Defaults can be replaced from a configuration class at start-up.
"""

from typing import Any, Dict

# Tolerances are grouped by the part of the library that consumes them
TOLERANCES: Dict[str, Dict[str, Any]] = {
    'solver': {
        'luxemburg_rtol': 1e-12,   # relative width of the gauge bracket
        'k_rtol': 1e-10,           # relative width for k* and k**
        'max_iter': 400,
    },
    'geometry': {
        'unit': 1e-9,              # "= 1" conditions on norms and modulars
        'k_width': 1e-9,           # K(x) singleton test
        'measure': 1e-12,          # measure of sigma images inside L(omega)
        'singular': 1e-12,
        'endpoint': 1e-9,          # snapping of values to affine endpoints
        'witness': 1e-6,           # minimal separation of witness points
    },
    'level': {
        'n_sub': 64,
        'convergence': 1e-8,
        'ratio': 1e-12,
    },
    'oracle': {
        'seed': 0,
        'trials': 10_000,
        'grid_points': 2000,
        'tol': 1e-6,
    },
}

# Overrides installed by configure_tolerances
_overrides: Dict[str, Dict[str, Any]] = {}

# Config attribute -> (category, name)
_CONFIG_KEYS = {
    'LUXEMBURG_RTOL': ('solver', 'luxemburg_rtol'),
    'K_RTOL': ('solver', 'k_rtol'),
    'MAX_ITER': ('solver', 'max_iter'),
    'GEOMETRY_TOL': ('geometry', 'unit'),
    'LEVEL_N_SUB': ('level', 'n_sub'),
    'LEVEL_CONVERGENCE_TOL': ('level', 'convergence'),
    'ORACLE_SEED': ('oracle', 'seed'),
    'ORACLE_TRIALS': ('oracle', 'trials'),
    'ORACLE_GRID_POINTS': ('oracle', 'grid_points'),
    'ORACLE_TOL': ('oracle', 'tol'),
}


def get_tolerance(category: str, name: str) -> Any:
    """Get a tolerance for a category and name.

    Args:
        category: One of the keys of TOLERANCES.
        name: The setting within the category.

    Returns:
        The configured value, or the built-in default.
    """
    if name in _overrides.get(category, {}):
        return _overrides[category][name]
    return TOLERANCES[category][name]


def configure_tolerances(settings: Any) -> None:
    """Install overrides from a configuration class or object."""
    _overrides.clear()
    for attribute, (category, name) in _CONFIG_KEYS.items():
        value = getattr(settings, attribute, None)
        if value is not None:
            _overrides.setdefault(category, {})[name] = value


def reset_tolerances() -> None:
    _overrides.clear()
