import json
import math
import os
import sys

import pytest

# Make the project root importable (manage.py, config.py, orlicz_lorentz)
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from orlicz_lorentz.convex_core import Const, OrliczFunction, PowerLaw, conjugate  # noqa: E402
from orlicz_lorentz.norms_primal import Space  # noqa: E402
from orlicz_lorentz.utils import reset_tolerances  # noqa: E402
from orlicz_lorentz.weights import PowerDecay, Weight, WeightConst  # noqa: E402

INF = math.inf


@pytest.fixture(autouse=True)
def _default_tolerances():
    reset_tolerances()
    yield
    reset_tolerances()


@pytest.fixture
def square():
    """phi(t) = t^2."""
    return OrliczFunction.from_pieces([(0, INF, PowerLaw(2.0, 1.0))])


@pytest.fixture
def half_square():
    """phi(t) = t^2 / 2, its own conjugate."""
    return OrliczFunction.from_pieces([(0, INF, PowerLaw(1.0, 1.0))])


@pytest.fixture
def linear():
    """phi(t) = t; the conjugate is 0 on [0, 1] and +inf beyond."""
    return OrliczFunction.from_pieces([(0, INF, Const(1.0))])


@pytest.fixture
def bounded():
    """phi(t) = t^2 / 2 on [0, 1], +inf beyond."""
    return OrliczFunction.from_pieces([(0, 1, PowerLaw(1.0, 1.0))])


@pytest.fixture
def affine_middle():
    """p = t on [0, 1), 1 on [1, 2), t - 1 on [2, inf): phi is affine on [1, 2]."""
    return OrliczFunction.from_pieces([
        (0, 1, PowerLaw(1.0, 1.0)),
        (1, 2, Const(1.0)),
        (2, INF, PowerLaw(1.0, 1.0, shift=1.0)),
    ])


@pytest.fixture
def unit_weight():
    return Weight.constant(1.0)


@pytest.fixture
def sqrt_weight():
    """omega(t) = t^(-1/2), W(t) = 2 sqrt(t)."""
    return Weight.from_pieces([(0, INF, PowerDecay(1.0, 0.5))])


@pytest.fixture
def step_weight():
    """omega = 2 on (0, 1), 1 on [1, inf)."""
    return Weight.from_pieces([(0, 1, WeightConst(2.0)), (1, INF, WeightConst(1.0))])


@pytest.fixture
def space(half_square, unit_weight):
    return Space(half_square, unit_weight)


@pytest.fixture
def flat_dual_phi(linear):
    """conjugate of phi(t) = t: zero on [0, 1], bounded domain."""
    return conjugate(linear)


@pytest.fixture
def spec_file(tmp_path):
    """Write a ProblemSpec mapping to a JSON file and return its path."""
    def write(spec, name='spec.json'):
        path = tmp_path / name
        path.write_text(json.dumps(spec), encoding='utf-8')
        return str(path)
    return write


@pytest.fixture
def square_spec():
    return {
        'schema_version': 1,
        'phi': {'pieces': [{'left': 0, 'right': None, 'kind': {'PowerLaw': {'c': 2, 'a': 1}}}]},
        'omega': {'pieces': [{'left': 0, 'right': None, 'kind': {'Const': {'c': 1}}}]},
        'x': {'atoms': [[5, 0.5], [2, 1.5]]},
        'norm': 'luxemburg',
        'oracle': {'seed': 0, 'trials': 200, 'grid_points': 400},
    }
