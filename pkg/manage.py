#!/usr/bin/env python3
"""
Orlicz-Lorentz Management Script

Command-line entry point: norms, dual norms, level functions and unit-ball
geometry for a JSON problem spec, plus environment checks.
"""

import os
import subprocess
import sys
from pathlib import Path

import click
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Add the project root to the Python path
PROJECT_ROOT = str(Path(__file__).parent)
sys.path.insert(0, PROJECT_ROOT)

from orlicz_lorentz import create_context  # noqa: E402
from orlicz_lorentz.commands import COMMANDS, RunFlags, run  # noqa: E402
from orlicz_lorentz.report import format_report, to_csv, to_json  # noqa: E402


def spec_command(name, help_text):
    """Register a command that runs one analysis on a spec file."""
    @cli.command(name=name, help=help_text)
    @click.argument('spec_path', type=click.Path(dir_okay=False))
    @click.option('--tol', type=float, default=None, help='Tolerance of the "= 1" conditions')
    @click.option('--seed', type=int, default=None, help='Seed of the randomized oracles')
    @click.option('--oracle-trials', type=int, default=None, help='Trials of the randomized oracles')
    @click.option('--json', 'json_path', type=click.Path(dir_okay=False), default=None, help='Write the JSON report here')
    @click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None, help='Write piecewise rows here')
    @click.option('--no-oracle', is_flag=True, help='Skip the brute-force oracles')
    def command(spec_path, tol, seed, oracle_trials, json_path, csv_path, no_oracle):
        flags = RunFlags(tol, seed, oracle_trials, json_path, csv_path, no_oracle)
        code, report = run(name, spec_path, flags)
        emit(report, flags, failed=code != 0)
        sys.exit(code)
    return command


def emit(report, flags, failed=False):
    """Print the table and write the optional JSON and CSV files."""
    click.echo(format_report(report), err=failed)
    if failed:
        click.echo("❌ Command failed. See the error above.", err=True)
    if flags.json_path:
        Path(flags.json_path).write_text(to_json(report), encoding='utf-8')
    if flags.csv_path and 'rows' in report:
        Path(flags.csv_path).write_text(to_csv(report['rows']), encoding='utf-8')


@click.group()
@click.option('--env', 'config_name', default=lambda: os.environ.get('ORLICZ_ENV', 'default'),
              type=click.Choice(['development', 'testing', 'production', 'default']),
              help='Configuration class to load')
def cli(config_name):
    """Management script for the orlicz_lorentz library."""
    create_context(config_name)


HELP = {
    'norm': 'Luxemburg and Orlicz norms, modular and theta of x.',
    'dual-norm': 'Dual norms and the modular P of v.',
    'k-interval': 'The Amemiya interval K(x) (and K_M(v) when v is given).',
    'level': 'Maximal level intervals and the level function of x.',
    'classify-extreme': 'Is x an extreme point of the unit ball?',
    'classify-strongly-extreme': 'Is x a strongly extreme point of the unit ball?',
    'classify-exposed': 'Is x an exposed point of the unit ball?',
    'attains': 'Does the functional given by v attain its norm at x?',
    'support-band': 'Bounds of the supporting functionals of x.',
    'report': 'Every analysis that applies to the spec.',
}

for _name in COMMANDS:
    spec_command(_name, HELP[_name])


@cli.command()
def check():
    """Check the environment configuration."""
    script = os.path.join(PROJECT_ROOT, 'scripts', 'check_env.py')
    code = subprocess.call([sys.executable, script, 'check'])
    if code != 0:
        click.echo("❌ Environment check failed. Please fix the issues above.", err=True)
    sys.exit(code)


@cli.command()
@click.option('--force', is_flag=True, help='Force generation even if file exists')
def generate_env(force):
    """Generate a .env.example file."""
    if os.path.exists('.env.example') and not force:
        click.confirm('A .env.example file already exists. Do you want to overwrite it?', abort=True)
    sys.exit(subprocess.call([sys.executable, os.path.join(PROJECT_ROOT, 'scripts', 'check_env.py'), 'generate']))


@cli.command()
@click.option('--coverage/--no-coverage', default=False, help='Enable code coverage')
@click.option('--slow', is_flag=True, help='Include the slow oracle suites')
def test(coverage, slow):
    """Run the test suite with pytest."""
    import pytest

    args = ['tests']
    if coverage:
        args += ['--cov=orlicz_lorentz', '--cov-report=term-missing']
    if not slow:
        args += ['-m', 'not slow']
    sys.exit(pytest.main(args))


@cli.command()
@click.argument('path', default='orlicz_lorentz')
def lint(path):
    """Run code linter."""
    sys.exit(subprocess.call([sys.executable, '-m', 'flake8', path]))


@cli.command()
def format():
    """Format code using Black and isort."""
    subprocess.call([sys.executable, '-m', 'isort', '.'])
    sys.exit(subprocess.call([sys.executable, '-m', 'black', '.']))


if __name__ == '__main__':
    cli()
