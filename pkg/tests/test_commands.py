import copy
import math

import pytest
from click.testing import CliRunner

from manage import cli
from orlicz_lorentz import commands
from orlicz_lorentz.commands import RunFlags, run
from orlicz_lorentz.report import from_json
from orlicz_lorentz.utils import SolverError


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ['--env', 'testing', *args])


def unit_spec(square_spec, **changes):
    data = copy.deepcopy(square_spec)
    data['x'] = {'atoms': [[1, 1]]}
    data.update(changes)
    return data


class TestCli:
    def test_norm_writes_json(self, runner, spec_file, square_spec, tmp_path):
        out = tmp_path / 'norm.json'
        result = invoke(runner, 'norm', spec_file(square_spec), '--json', str(out))
        assert result.exit_code == 0
        report = from_json(out.read_text(encoding='utf-8'))
        assert report['success'] is True
        assert report['schema_version'] == 1
        assert report['luxemburg'] == pytest.approx(4.301162633521313, rel=1e-12)
        assert report['modular'] == pytest.approx(18.5, rel=1e-12)
        assert report['oracle']['amemiya_grid_upper_bound'] >= report['orlicz'] - 1e-12

    def test_no_oracle(self, runner, spec_file, square_spec, tmp_path):
        out = tmp_path / 'norm.json'
        invoke(runner, 'norm', spec_file(square_spec), '--no-oracle', '--json', str(out))
        assert 'oracle' not in from_json(out.read_text(encoding='utf-8'))

    def test_classify_extreme(self, runner, spec_file, square_spec):
        result = invoke(runner, 'classify-extreme', spec_file(unit_spec(square_spec)))
        assert result.exit_code == 0
        assert 'verdict: POSITIVE' in result.output

    def test_negative_verdict_still_exits_zero(self, runner, spec_file, square_spec):
        spec = unit_spec(square_spec, phi={'pieces': [
            {'left': 0, 'right': 1, 'kind': {'PowerLaw': {'c': 1, 'a': 1}}},
            {'left': 1, 'right': 2, 'kind': {'Const': {'c': 1}}},
            {'left': 2, 'right': None, 'kind': {'PowerLaw': {'c': 1, 'a': 1, 'shift': 1}}},
        ]})
        spec['x'] = {'atoms': [[1.5, 1]]}
        result = invoke(runner, 'classify-extreme', spec_file(spec))
        assert result.exit_code == 0
        assert 'verdict: NEGATIVE' in result.output
        assert 'witness: Decomposition' in result.output

    def test_off_sphere_is_a_precondition_failure(self, runner, spec_file, square_spec):
        result = invoke(runner, 'classify-extreme', spec_file(square_spec))
        assert result.exit_code == 3
        assert 'PreconditionError' in result.output

    def test_missing_field(self, runner, spec_file, square_spec, tmp_path):
        data = copy.deepcopy(square_spec)
        del data['omega']
        out = tmp_path / 'error.json'
        result = invoke(runner, 'norm', spec_file(data), '--json', str(out))
        assert result.exit_code == 2
        error = from_json(out.read_text(encoding='utf-8'))['error']
        assert error['type'] == 'InvalidSpecError'
        assert 'omega' in error['details']

    def test_malformed_json(self, runner, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"schema_version": 1,', encoding='utf-8')
        assert invoke(runner, 'norm', str(path)).exit_code == 2

    def test_missing_file(self, runner, tmp_path):
        assert invoke(runner, 'norm', str(tmp_path / 'absent.json')).exit_code == 2

    def test_dual_norm_needs_v(self, runner, spec_file, square_spec):
        assert invoke(runner, 'dual-norm', spec_file(square_spec)).exit_code == 2

    def test_reports_are_byte_identical(self, runner, spec_file, square_spec, tmp_path):
        path = spec_file(unit_spec(square_spec))
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        invoke(runner, 'report', path, '--json', str(first))
        invoke(runner, 'report', path, '--json', str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_level_csv(self, runner, spec_file, square_spec, tmp_path):
        spec = unit_spec(square_spec)
        spec['x'] = {'atoms': [[1, 1], [3, 1]]}
        out = tmp_path / 'level.csv'
        result = invoke(runner, 'level', spec_file(spec), '--csv', str(out))
        assert result.exit_code == 0
        lines = out.read_text(encoding='utf-8').splitlines()
        assert lines[0] == 'left,right,value_lo,value_hi'
        assert lines[1] == '0.0,1.0,2.0,2.0'

    def test_support_band_csv(self, runner, spec_file, square_spec, tmp_path):
        out = tmp_path / 'band.csv'
        result = invoke(runner, 'support-band', spec_file(unit_spec(square_spec)), '--csv', str(out))
        assert result.exit_code == 0
        assert out.read_text(encoding='utf-8').splitlines()[1] == '0.0,1.0,2.0,2.0'


class TestRun:
    def test_attains(self, spec_file, square_spec):
        spec = unit_spec(square_spec, v={'atoms': [[1, 1]]})
        code, report = run('attains', spec_file(spec))
        assert code == 0
        assert report['attains']['positive'] is True
        assert report['grad_regular']['positive'] is True

    def test_k_interval_with_v(self, spec_file, square_spec):
        spec = unit_spec(square_spec, v={'atoms': [[1, 1]]})
        code, report = run('k-interval', spec_file(spec))
        assert code == 0
        assert report['K']['k_star'] == pytest.approx(1.0, rel=1e-9)
        assert report['K_M']['k_star'] == pytest.approx(2.0, rel=1e-9)

    def test_full_report_marks_skipped_sections(self, spec_file, square_spec):
        code, report = run('report', spec_file(unit_spec(square_spec)), RunFlags(no_oracle=True))
        assert code == 0
        assert 'skipped' in report['dual-norm']
        assert report['norm']['luxemburg'] == pytest.approx(1.0)
        assert 'rows' not in report['level']

    def test_flags_override_oracle(self, spec_file, square_spec):
        flags = RunFlags(seed=3, oracle_trials=5)
        code, report = run('classify-extreme', spec_file(unit_spec(square_spec)), flags)
        assert code == 0
        assert report['oracle']['trials'] == 5
        assert report['oracle']['refuted'] is False

    def test_unknown_command(self, spec_file, square_spec):
        code, report = run('volume', spec_file(square_spec))
        assert code == 2
        assert report['success'] is False

    def test_unexpected_errors_exit_one(self, mocker, spec_file, square_spec):
        def boom(spec, flags):
            raise RuntimeError('lost')

        mocker.patch.dict(commands.COMMANDS, {'norm': boom})
        code, report = run('norm', spec_file(square_spec))
        assert code == 1
        assert report['error']['type'] == 'internal_error'

    def test_dual_norm(self, spec_file, square_spec):
        spec = unit_spec(square_spec, v={'atoms': [[1, 1]]})
        code, report = run('dual-norm', spec_file(spec), RunFlags(no_oracle=True))
        assert code == 0
        assert report['dual_orlicz'] == pytest.approx(1.0, rel=1e-9)
        assert report['P'] == pytest.approx(0.25, rel=1e-12)
        assert math.isclose(report['marcinkiewicz'], 1.0)

    def test_solver_failure_skips_one_section(self, mocker, spec_file, square_spec):
        def fail(spec, flags):
            raise SolverError('Could not bracket the gauge from above', details={'guess': 1.0})

        mocker.patch.dict(commands.COMMANDS, {'level': fail})
        code, report = run('report', spec_file(unit_spec(square_spec)), RunFlags(no_oracle=True))
        assert code == 0
        assert report['level']['error']['type'] == 'SolverError'
        assert 'skipped' in report['level']
        assert report['norm']['luxemburg'] == pytest.approx(1.0)
