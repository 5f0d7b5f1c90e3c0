"""
ProblemSpec Schemas

marshmallow schemas for the JSON problem specs read by the command line.
Loading a spec builds the immutable domain objects; construction errors are
reported under the path of the offending field.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from .convex_core import Const, DerivPiece, OrliczFunction, PowerLaw, Saturate
from .geometry import NORMS, SingularPart
from .oracle import OracleConfig
from .step_measure import StepFunction
from .utils.errors import InvalidSpecError
from .weights import PowerDecay, Weight, WeightConst, WeightPiece

SCHEMA_VERSION = 1

# name -> (constructor, required params, optional params)
DERIV_KINDS = {
    'Const': (Const, ('c',), ()),
    'PowerLaw': (PowerLaw, ('c', 'a'), ('shift', 'base')),
    'Saturate': (Saturate, ('B', 'c'), ('shift',)),
}

WEIGHT_KINDS = {
    'Const': (WeightConst, ('c',), ()),
    'PowerDecay': (PowerDecay, ('c', 'a'), ()),
}


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f'{name} must be a number')
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f'{name} must be finite')
    return value


class PieceKindField(fields.Field):
    """A one-key object such as {"PowerLaw": {"c": 1, "a": 1}}."""

    def __init__(self, kinds: Dict[str, tuple], **kwargs):
        super().__init__(**kwargs)
        self.kinds = kinds

    def _deserialize(self, value, attr, data, **kwargs):
        if not isinstance(value, dict) or len(value) != 1:
            raise ValidationError(f"kind must be an object with one of the keys {', '.join(self.kinds)}")
        name, params = next(iter(value.items()))
        if name not in self.kinds:
            raise ValidationError(f"Unknown kind {name!r}; expected one of {', '.join(self.kinds)}")
        if not isinstance(params, dict):
            raise ValidationError(f'{name} parameters must be an object')
        constructor, required, optional = self.kinds[name]
        unknown = set(params) - set(required) - set(optional)
        if unknown:
            raise ValidationError(f"{name}: unknown parameter(s) {', '.join(sorted(unknown))}")
        missing = [p for p in required if p not in params]
        if missing:
            raise ValidationError(f"{name}: missing parameter(s) {', '.join(missing)}")
        return constructor(**{p: _number(v, f'{name}.{p}') for p, v in params.items()})

    def _serialize(self, value, attr, obj, **kwargs):
        return value.to_dict() if value is not None else None


class _PieceSchema(Schema):
    left = fields.Float(required=True, validate=validate.Range(min=0))
    # null means +inf and is allowed only on the last piece
    right = fields.Float(required=True, allow_none=True, validate=validate.Range(min=0))

    @staticmethod
    def bounds(data):
        right = data['right']
        return data['left'], math.inf if right is None else right


class DerivPieceSchema(_PieceSchema):
    kind = PieceKindField(DERIV_KINDS, required=True)

    @post_load
    def make_piece(self, data, **kwargs):
        return DerivPiece(*self.bounds(data), data['kind'])


class WeightPieceSchema(_PieceSchema):
    kind = PieceKindField(WEIGHT_KINDS, required=True)

    @post_load
    def make_piece(self, data, **kwargs):
        return WeightPiece(*self.bounds(data), data['kind'])


def _build(constructor, *args):
    try:
        return constructor(*args)
    except InvalidSpecError as e:
        raise ValidationError({'pieces': [e.message]}) from e


class OrliczFunctionSchema(Schema):
    pieces = fields.List(fields.Nested(DerivPieceSchema), required=True, validate=validate.Length(min=1))

    @post_load
    def make_function(self, data, **kwargs):
        return _build(OrliczFunction, tuple(data['pieces']))


class WeightSchema(Schema):
    pieces = fields.List(fields.Nested(WeightPieceSchema), required=True, validate=validate.Length(min=1))

    @post_load
    def make_weight(self, data, **kwargs):
        return _build(Weight, tuple(data['pieces']))


class StepFunctionSchema(Schema):
    atoms = fields.List(
        fields.List(fields.Float(allow_nan=False), validate=validate.Length(equal=2)),
        required=True
    )

    @post_load
    def make_step(self, data, **kwargs):
        try:
            return StepFunction.from_pairs(data['atoms'])
        except InvalidSpecError as e:
            raise ValidationError({'atoms': [e.message]}) from e


class OracleConfigSchema(Schema):
    seed = fields.Int(load_default=None, validate=validate.Range(min=0))
    trials = fields.Int(load_default=None, validate=validate.Range(min=1))
    grid_points = fields.Int(load_default=None, validate=validate.Range(min=1))
    tol = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))

    @post_load
    def make_config(self, data, **kwargs):
        return OracleConfig.from_defaults(**data)


@dataclass(frozen=True)
class ProblemSpec:
    phi: OrliczFunction
    omega: Weight
    x: StepFunction
    norm: str
    oracle: OracleConfig
    v: Optional[StepFunction] = None
    singular: Optional[SingularPart] = None


class ProblemSpecSchema(Schema):
    schema_version = fields.Int(required=True, validate=validate.Equal(SCHEMA_VERSION))
    phi = fields.Nested(OrliczFunctionSchema, required=True)
    omega = fields.Nested(WeightSchema, required=True)
    x = fields.Nested(StepFunctionSchema, required=True)
    v = fields.Nested(StepFunctionSchema, load_default=None)
    singular = fields.List(fields.Float(allow_nan=False), load_default=None, validate=validate.Length(equal=2))
    norm = fields.Str(load_default='luxemburg', validate=validate.OneOf(NORMS))
    oracle = fields.Nested(OracleConfigSchema, load_default=None)

    @validates_schema
    def validate_singular(self, data, **kwargs):
        singular = data.get('singular')
        if singular is not None and singular[0] < 0:
            raise ValidationError('norm_s must be non-negative', 'singular')

    @post_load
    def make_spec(self, data, **kwargs):
        singular = data.pop('singular', None)
        oracle = data.pop('oracle', None) or OracleConfig.from_defaults()
        data.pop('schema_version')
        return ProblemSpec(
            oracle=oracle,
            singular=SingularPart(*singular) if singular is not None else None,
            **data
        )
