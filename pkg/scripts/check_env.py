#!/usr/bin/env python3
"""
Environment Configuration Checker

This script checks that the ORLICZ_* environment variables have valid values
and can print a template .env file.
"""

import math
import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Define environment variables and their validation rules
ENV_VARS = {
    'ORLICZ_ENV': {
        'default': 'development',
        'allowed': ['development', 'testing', 'production'],
        'description': 'Configuration class used by manage.py',
    },
    'ORLICZ_LOG_LEVEL': {
        'default': 'WARNING',
        'allowed': ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        'description': 'Log level of the orlicz_lorentz logger',
    },
    'ORLICZ_LOG_FILE': {
        'default': '',
        'description': 'Optional path of a rotating log file',
    },
    'ORLICZ_LUXEMBURG_RTOL': {
        'default': '1e-12',
        'type': float,
        'positive': True,
        'description': 'Relative width of the Luxemburg gauge bracket',
    },
    'ORLICZ_K_RTOL': {
        'default': '1e-10',
        'type': float,
        'positive': True,
        'description': 'Relative accuracy of k* and k**',
    },
    'ORLICZ_MAX_ITER': {
        'default': '400',
        'type': int,
        'positive': True,
        'description': 'Iteration cap of the bracketing solvers',
    },
    'ORLICZ_GEOMETRY_TOL': {
        'default': '1e-9',
        'type': float,
        'positive': True,
        'description': 'Tolerance of the "= 1" conditions in the classifiers',
    },
    'ORLICZ_LEVEL_N_SUB': {
        'default': '64',
        'type': int,
        'positive': True,
        'description': 'Sub-cells per power-decay cell of the level function',
    },
    'ORLICZ_LEVEL_CONVERGENCE_TOL': {
        'default': '1e-8',
        'type': float,
        'positive': True,
        'description': 'Allowed drift of level-function cell integrals',
    },
    'ORLICZ_ORACLE_SEED': {
        'default': '0',
        'type': int,
        'description': 'Seed of the randomized oracles',
    },
    'ORLICZ_ORACLE_TRIALS': {
        'default': '10000',
        'type': int,
        'positive': True,
        'description': 'Trials of the randomized oracles',
    },
    'ORLICZ_ORACLE_GRID_POINTS': {
        'default': '2000',
        'type': int,
        'positive': True,
        'description': 'Grid size of the grid oracles',
    },
    'ORLICZ_ORACLE_TOL': {
        'default': '1e-6',
        'type': float,
        'positive': True,
        'description': 'Agreement tolerance between oracles and closed forms',
    },
}


def check_variable(name, rules, value):
    """Return the error message for one variable, or None."""
    if 'type' in rules:
        try:
            value = rules['type'](value)
        except (ValueError, TypeError):
            return f"❌ {name}: Expected {rules['type'].__name__} but got '{value}'"
        if isinstance(value, float) and not math.isfinite(value):
            return f"❌ {name}: Must be finite"
        if rules.get('positive') and not value > 0:
            return f"❌ {name}: Must be positive (got {value})"
        if name == 'ORLICZ_ORACLE_SEED' and value < 0:
            return f"❌ {name}: Must be non-negative (got {value})"
    if 'allowed' in rules and value not in rules['allowed']:
        return f"❌ {name}: Must be one of {', '.join(rules['allowed'])} (got '{value}')"
    return None


def check_environment():
    """Check that every ORLICZ_* variable is valid."""
    print("🔍 Checking environment configuration...\n")

    errors = []
    for name, rules in ENV_VARS.items():
        value = os.environ.get(name)
        if value is None or value == '':
            continue
        error = check_variable(name, rules, value)
        if error:
            errors.append(error)

    if errors:
        print("❌ Found errors in environment configuration:")
        for error in errors:
            print(f"  {error}")
        return 1

    print("✅ All ORLICZ_* variables are valid")
    print("\n📋 Environment Summary:")
    print(f"  Environment: {os.environ.get('ORLICZ_ENV', 'development')}")
    print(f"  Log Level: {os.environ.get('ORLICZ_LOG_LEVEL', 'WARNING')}")
    print(f"  Log File: {os.environ.get('ORLICZ_LOG_FILE') or 'Not set'}")
    return 0


def generate_env_example(path='.env.example'):
    """Write a template .env file with every variable at its default."""
    lines = []
    for name, rules in ENV_VARS.items():
        lines.append(f"# {rules['description']}")
        lines.append(f"{name}={rules['default']}")
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    print(f"✅ Generated {path}")


if __name__ == '__main__':
    import argparse

    parser = argparse.ArgumentParser(description='Check and manage environment configuration')
    subparsers = parser.add_subparsers(dest='command', help='Command to run')
    subparsers.add_parser('check', help='Check environment configuration')
    subparsers.add_parser('generate', help='Generate .env.example file')

    args = parser.parse_args()

    if args.command == 'generate':
        generate_env_example()
    else:
        sys.exit(check_environment())
