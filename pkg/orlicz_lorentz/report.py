"""
Report Emission

Human-readable condition tables, the machine JSON report and CSV rows for
piecewise data (support bands and level functions).

Floats are written with 17 significant digits so that a re-parsed report
reproduces every number bit for bit; infinities are written as the strings
"inf" and "-inf" and NaN as null.
"""

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Sequence, Tuple

Row = Tuple[float, float, float, float]

CSV_COLUMNS = ('left', 'right', 'value_lo', 'value_hi')


def format_float(value: float) -> str:
    if math.isnan(value):
        return 'null'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    text = f'{value:.17g}'
    if '.' not in text and 'e' not in text:
        text += '.0'
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = ' ' * (indent * (level + 1))
    close = ' ' * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if hasattr(obj, 'to_dict'):
        return _encode(obj.to_dict(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f'{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}' for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + f'\n{close}}}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [f'{pad}{_encode(v, indent, level + 1)}' for v in obj]
        return '[\n' + ',\n'.join(items) + f'\n{close}]'
    # numpy scalars
    if hasattr(obj, 'item'):
        return _encode(obj.item(), indent, level)
    raise TypeError(f'Object of type {type(obj).__name__} is not serializable')


def to_json(report: Dict[str, Any], indent: int = 2) -> str:
    return _encode(report, indent, 0) + '\n'


def _inf_hook(obj: Dict[str, Any]) -> Dict[str, Any]:
    return {k: _restore(v) for k, v in obj.items()}


def _restore(value: Any) -> Any:
    if value == 'inf':
        return math.inf
    if value == '-inf':
        return -math.inf
    if isinstance(value, list):
        return [_restore(v) for v in value]
    return value


def from_json(text: str) -> Dict[str, Any]:
    """Parse a report, turning "inf" strings back into floats."""
    return json.loads(text, object_hook=_inf_hook)


def to_csv(rows: Iterable[Row]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([format_float(float(v)).strip('"') for v in row])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f'{value:.6g}'
    if value is None:
        return '-'
    return str(value)


def _table(header: Sequence[str], rows: List[Sequence[Any]]) -> List[str]:
    cells = [[_cell(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = ['  '.join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append('  '.join('-' * w for w in widths))
    lines.extend('  '.join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)
    return lines


def verdict_lines(title: str, verdict: Dict[str, Any]) -> List[str]:
    rows = [
        (c['label'], c['citation'], 'pass' if c['ok'] else 'FAIL', c.get('residual'))
        for c in verdict['conditions']
    ]
    lines = [title]
    lines.extend(_table(('condition', 'citation', 'result', 'residual'), rows))
    lines.append(f"verdict: {'POSITIVE' if verdict['positive'] else 'NEGATIVE'}")
    witness = verdict.get('witness')
    if witness is not None:
        lines.append(f"witness: {witness['kind']}")
    for note in verdict.get('notes', ()):
        lines.append(f'note: {note}')
    return lines


def _is_verdict(value: Any) -> bool:
    return isinstance(value, dict) and 'conditions' in value and 'positive' in value


def _collect(prefix: str, obj: Dict[str, Any], scalars: List[Tuple[str, Any]], verdicts: List[Tuple[str, Any]]) -> None:
    for key, value in obj.items():
        name = f'{prefix}{key}'
        if _is_verdict(value):
            verdicts.append((name, value))
        elif isinstance(value, dict):
            _collect(f'{name}.', value, scalars, verdicts)
        elif not isinstance(value, list):
            scalars.append((name, value))


def format_report(report: Dict[str, Any]) -> str:
    """Render a command report as plain text."""
    if not report.get('success', True):
        error = report['error']
        return f"error ({error['type']}): {error['message']}"
    scalars: List[Tuple[str, Any]] = []
    verdicts: List[Tuple[str, Any]] = []
    body = {k: v for k, v in report.items() if k not in ('success', 'command', 'rows')}
    _collect('', body, scalars, verdicts)
    lines: List[str] = []
    if scalars:
        lines.extend(_table(('quantity', 'value'), scalars))
    for name, verdict in verdicts:
        if lines:
            lines.append('')
        lines.extend(verdict_lines(name, verdict))
    return '\n'.join(lines)
