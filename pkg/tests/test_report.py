import math

import numpy as np
import pytest

from orlicz_lorentz.geometry import Condition, Verdict
from orlicz_lorentz.report import format_float, format_report, from_json, to_csv, to_json


@pytest.mark.parametrize('value, text', [
    (1.0, '1.0'),
    (0.1, '0.10000000000000001'),
    (math.inf, '"inf"'),
    (-math.inf, '"-inf"'),
    (math.nan, 'null'),
])
def test_format_float(value, text):
    assert format_float(value) == text


def test_json_keeps_every_bit():
    report = {'a': 0.1 + 0.2, 'b': math.inf, 'c': [1, None, np.float64(1 / 3)], 'd': {'e': np.int64(4)}}
    parsed = from_json(to_json(report))
    assert parsed['a'] == 0.1 + 0.2
    assert parsed['b'] == math.inf
    assert parsed['c'] == [1, None, 1 / 3]
    assert parsed['d'] == {'e': 4}


def test_json_serialises_domain_objects():
    verdict = Verdict.from_conditions([Condition('rho(x) = 1', 'modular equals one', True, residual=0.0)])
    parsed = from_json(to_json({'verdict': verdict}))
    assert parsed['verdict']['positive'] is True
    assert parsed['verdict']['conditions'][0]['label'] == 'rho(x) = 1'


def test_json_rejects_unknown_objects():
    with pytest.raises(TypeError):
        to_json({'a': object()})


def test_csv():
    text = to_csv([(0.0, 1.0, 2.0, math.inf), (1.0, 2.5, 0.5, 0.5)])
    assert text == 'left,right,value_lo,value_hi\n0.0,1.0,2.0,inf\n1.0,2.5,0.5,0.5\n'


def test_format_report_tables():
    verdict = Verdict.from_conditions(
        [Condition('K(x) is a singleton', 'attainment interval is a point', False, residual=0.25)],
        notes=['no decomposition built'],
    )
    text = format_report({
        'success': True,
        'command': 'classify-extreme',
        'norms': {'luxemburg': 1.5},
        'extreme': verdict.to_dict(),
    })
    assert 'norms.luxemburg' in text
    assert 'FAIL' in text
    assert 'verdict: NEGATIVE' in text
    assert 'note: no decomposition built' in text


def test_format_report_error():
    report = {'success': False, 'error': {'type': 'PreconditionError', 'message': 'x is not on the unit sphere'}}
    assert format_report(report) == 'error (PreconditionError): x is not on the unit sphere'
