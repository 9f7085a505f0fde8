# -*- coding: utf-8 -*-
import math

from marshmallow import Schema, ValidationError, fields, missing, post_dump

__author__ = 'pfwgan'


class BaseSchema(Schema):
    SKIP_VALUES = [None]

    @post_dump
    def remove_skip_values(self, data, **kwargs):
        return {key: value for key, value in data.items() if value not in self.SKIP_VALUES}


class FiniteFloatField(fields.Field):
    """ A float that refuses NaN and infinities in both directions. """

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f'not a number: {value!r}')
        if not math.isfinite(number):
            raise ValidationError(f'non-finite value: {value!r}')
        return number

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return missing
        number = float(value)
        if not math.isfinite(number):
            raise ValidationError(f'non-finite value in {attr}: {value!r}')
        return number
