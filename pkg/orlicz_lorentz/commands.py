"""
Commands

Dispatch of the command-line analyses. ``run`` loads a ProblemSpec, runs one
command and returns an exit code together with the report; verdict polarity
never changes the exit code.
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from .convex_core import eval_phi
from .geometry import (
    LUXEMBURG,
    attains_lux,
    attains_lux_flat,
    flat_exposed,
    grad_regular_lux,
    grad_regular_orl,
    is_exposed_lux,
    is_exposed_orl,
    is_extreme_lux,
    is_extreme_orl,
    is_strongly_extreme_lux,
    is_strongly_extreme_orl,
    is_supporting,
    support_band
)
from .level import LevelDecomposition, level_function
from .norms_dual import (
    DualSpace,
    P_modular,
    dual_luxemburg_norm,
    dual_orlicz_norm,
    flat_dual_norm,
    km_interval,
    lorentz_norm,
    marcinkiewicz_norm
)
from .norms_primal import Space, k_interval, lorentz_integral, luxemburg_norm, modular, orlicz_norm, theta
from .oracle import (
    MAX_EXHAUSTIVE_ATOMS,
    amemiya_grid,
    dual_norm_pairing,
    level_exhaustive,
    modular_infimum_grid,
    refute_extreme
)
from .schemas import SCHEMA_VERSION, ProblemSpec, ProblemSpecSchema
from .step_measure import hl_integral
from .utils.error_handlers import EXIT_OK, error_payload, exit_code_for
from .utils.errors import InvalidSpecError, PreconditionError, SolverError, handle_numeric_errors
from .utils.decorators import require_fields, validate_spec
from .weights import W_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunFlags:
    tol: Optional[float] = None
    seed: Optional[int] = None
    oracle_trials: Optional[int] = None
    json_path: Optional[str] = None
    csv_path: Optional[str] = None
    no_oracle: bool = False


Report = Dict[str, Any]


@validate_spec(ProblemSpecSchema)
def _loaded(spec: ProblemSpec) -> ProblemSpec:
    return spec


@handle_numeric_errors
def load_spec(path: str) -> ProblemSpec:
    """Read and validate a ProblemSpec JSON file."""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise InvalidSpecError(f'Cannot read spec file: {e.strerror}', details={'path': path}) from e
    return _loaded(json.loads(text))


def _with_flags(spec: ProblemSpec, flags: RunFlags) -> ProblemSpec:
    oracle = spec.oracle
    if flags.seed is not None:
        oracle = replace(oracle, seed=flags.seed)
    if flags.oracle_trials is not None:
        oracle = replace(oracle, trials=flags.oracle_trials)
    return replace(spec, oracle=oracle)


def _space(spec: ProblemSpec) -> Space:
    return Space(spec.phi, spec.omega)


# Numeric commands

def norm_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    x = spec.x
    report = {
        'luxemburg': luxemburg_norm(space, x),
        'orlicz': orlicz_norm(space, x),
        'modular': modular(space, x),
        'theta': theta(space, x),
        'lorentz': lorentz_integral(space.omega, x),
    }
    if not flags.no_oracle and not x.is_zero:
        report['oracle'] = {'amemiya_grid_upper_bound': amemiya_grid(space, x, spec.oracle)}
    return report


@require_fields('v')
def dual_norm_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    dual = DualSpace.from_space(space)
    v = spec.v
    report: Report = {
        'dual_orlicz': dual_orlicz_norm(dual, v),
        'dual_luxemburg': dual_luxemburg_norm(dual, v),
        'P': P_modular(dual, v),
        'marcinkiewicz': marcinkiewicz_norm(space.omega, v),
        'lorentz': lorentz_norm(space.omega, v),
        'pairing_with_x': hl_integral(spec.x, v),
    }
    if not v.is_zero:
        report['K_M'] = km_interval(dual, v).to_dict()
    try:
        report['flat_dual'] = flat_dual_norm(dual, v)
    except PreconditionError as e:
        logger.debug(f"flat_dual_norm skipped: {e.message}")
    if not flags.no_oracle:
        report['oracle'] = {
            'pairing_lower_bound': dual_norm_pairing(dual, v, spec.oracle),
            'modular_upper_bound': modular_infimum_grid(dual, v, spec.oracle),
        }
    return report


def k_interval_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    report = {'K': k_interval(space, spec.x).to_dict()}
    if spec.v is not None and not spec.v.is_zero:
        report['K_M'] = km_interval(DualSpace.from_space(space), spec.v).to_dict()
    return report


def _level_rows(decomposition: LevelDecomposition) -> List[Tuple[float, float, float, float]]:
    """(left, right, f0 at the right end, f0 at the left end) per cell; f0 decreases on level cells."""
    omega = decomposition.omega
    rows = []
    for cell in decomposition.cells:
        if cell.interval is None:
            rows.append((cell.left, cell.right, cell.value, cell.value))
            continue
        ratio = decomposition.maximal_intervals[cell.interval].ratio
        rows.append((cell.left, cell.right, ratio * omega.left_limit(cell.right), ratio * omega(cell.left)))
    return rows


def level_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    decomposition = level_function(spec.x, spec.omega)
    intervals = [
        {'left': iv.left, 'right': iv.right, 'ratio': iv.ratio}
        for iv in decomposition.maximal_intervals
    ]
    report: Report = {
        'intervals': intervals,
        'warnings': list(decomposition.warnings),
        'rows': _level_rows(decomposition),
    }
    small = len(spec.x.atoms) <= MAX_EXHAUSTIVE_ATOMS and spec.omega.is_piecewise_constant
    if not flags.no_oracle and small:
        exhaustive = level_exhaustive(spec.x, spec.omega, spec.oracle)
        report['oracle'] = {'exhaustive_agrees': _same_intervals(decomposition, exhaustive)}
    return report


def _same_intervals(a: LevelDecomposition, b: LevelDecomposition, rtol: float = 1e-9) -> bool:
    if len(a.maximal_intervals) != len(b.maximal_intervals):
        return False
    for p, q in zip(a.maximal_intervals, b.maximal_intervals):
        for s, t in ((p.left, q.left), (p.right, q.right), (p.ratio, q.ratio)):
            if not math.isclose(s, t, rel_tol=rtol, abs_tol=1e-12):
                return False
    return True


# Geometry commands

def _by_norm(spec: ProblemSpec, lux: Callable, orl: Callable) -> Callable:
    return lux if spec.norm == LUXEMBURG else orl


def extreme_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    classify = _by_norm(spec, is_extreme_lux, is_extreme_orl)
    verdict = classify(space, spec.x, tol=flags.tol)
    report: Report = {'norm': spec.norm, 'extreme': verdict.to_dict()}
    if verdict.positive and not flags.no_oracle:
        found = refute_extreme(space, spec.x, spec.norm, spec.oracle)
        report['oracle'] = {
            'trials': spec.oracle.trials,
            'refuted': found is not None,
            'decomposition': found.to_dict() if found is not None else None,
        }
    return report


def strongly_extreme_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    classify = _by_norm(spec, is_strongly_extreme_lux, is_strongly_extreme_orl)
    return {'norm': spec.norm, 'strongly_extreme': classify(_space(spec), spec.x, tol=flags.tol).to_dict()}


def _flat_applies(spec: ProblemSpec) -> bool:
    B = spec.phi.domain_end
    if spec.v is None or math.isinf(B):
        return False
    return eval_phi(spec.phi, B) * W_at(spec.omega, spec.v.support_measure) <= 1.0


def exposed_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    classify = _by_norm(spec, is_exposed_lux, is_exposed_orl)
    report = {'norm': spec.norm, 'exposed': classify(space, spec.x, tol=flags.tol).to_dict()}
    if spec.norm == LUXEMBURG and _flat_applies(spec):
        report['flat_exposed'] = flat_exposed(space, spec.x, spec.v, tol=flags.tol).to_dict()
    return report


@require_fields('v')
def attains_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    space = _space(spec)
    if spec.norm == LUXEMBURG:
        if _flat_applies(spec):
            verdict = attains_lux_flat(space, spec.x, spec.v, tol=flags.tol)
        else:
            verdict = attains_lux(space, spec.x, spec.v, s=spec.singular, tol=flags.tol)
        regular = grad_regular_lux(space, spec.x, tol=flags.tol)
    else:
        if spec.v.is_zero:
            raise PreconditionError('v must be non-zero')
        dual = DualSpace.from_space(space)
        v = spec.v.scaled(1.0 / dual_luxemburg_norm(dual, spec.v))
        verdict = is_supporting(space, spec.x, v, spec.norm, tol=flags.tol)
        regular = grad_regular_orl(space, spec.x, tol=flags.tol)
    return {'norm': spec.norm, 'attains': verdict.to_dict(), 'grad_regular': regular.to_dict()}


def support_band_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    band = support_band(_space(spec), spec.x, spec.norm, tol=flags.tol)
    report = band.to_dict()
    report['rows'] = band.rows()
    if spec.v is not None:
        report['supporting'] = is_supporting(_space(spec), spec.x, spec.v, spec.norm, tol=flags.tol).to_dict()
    return report


def full_report(spec: ProblemSpec, flags: RunFlags) -> Report:
    """Every analysis that applies to the spec; skipped ones carry the reason."""
    report: Report = {}
    for name, command in COMMANDS.items():
        if command is full_report:
            continue
        try:
            section = command(spec, flags)
        except (PreconditionError, InvalidSpecError) as e:
            report[name] = {'skipped': e.message}
            continue
        except SolverError as e:
            logger.warning(f"Section {name} failed: {e.message}")
            report[name] = {'skipped': e.message, 'error': e.to_dict()}
            continue
        section.pop('rows', None)
        report[name] = section
    return report


COMMANDS: Dict[str, Callable[[ProblemSpec, RunFlags], Report]] = {
    'norm': norm_report,
    'dual-norm': dual_norm_report,
    'k-interval': k_interval_report,
    'level': level_report,
    'classify-extreme': extreme_report,
    'classify-strongly-extreme': strongly_extreme_report,
    'classify-exposed': exposed_report,
    'attains': attains_report,
    'support-band': support_band_report,
    'report': full_report,
}


@handle_numeric_errors
def _dispatch(command: str, spec_path: str, flags: RunFlags) -> Report:
    if command not in COMMANDS:
        raise InvalidSpecError(f'Unknown command {command!r}', details={'commands': list(COMMANDS)})
    spec = _with_flags(load_spec(spec_path), flags)
    logger.info(f"Running {command} on {spec_path}")
    return COMMANDS[command](spec, flags)


def run(command: str, spec_path: str, flags: Optional[RunFlags] = None) -> Tuple[int, Report]:
    """Run one command on a spec file.

    Args:
        command: One of the keys of COMMANDS.
        spec_path: Path of the ProblemSpec JSON.
        flags: Command-line flags.

    Returns:
        (exit code, report). The report carries ``success`` and either the
        command's results or an error payload.
    """
    flags = flags or RunFlags()
    try:
        result = _dispatch(command, spec_path, flags)
    except Exception as e:
        return exit_code_for(e), error_payload(e)
    return EXIT_OK, {'success': True, 'command': command, 'schema_version': SCHEMA_VERSION, **result}
