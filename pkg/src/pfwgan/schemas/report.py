# -*- coding: utf-8 -*-
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Type

import numpy as np
from marshmallow import fields
from marshmallow_dataclass import class_schema

from pfwgan.schemas.base import BaseSchema, FiniteFloatField

__author__ = 'pfwgan'

METRICS = ('accuracy', 'f1', 'auc_roc', 'dp_gap', 'identifiability')


@dataclass(frozen=True)
class MetricSummary:
    mean: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    std: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    values: List[float] = field(
        default_factory=list, metadata={'marshmallow_field': fields.List(FiniteFloatField(), required=True)}
    )

    @classmethod
    def from_values(cls: Type[MetricSummary], values: Sequence[float]) -> Optional[MetricSummary]:
        """ Mean and population standard deviation, None without values. """
        if not values:
            return None
        array = np.asarray(values, dtype=np.float64)
        return cls(mean=float(array.mean()), std=float(array.std()), values=[float(v) for v in array])


@dataclass(frozen=True)
class ModelReport:
    model: str
    accuracy: Optional[MetricSummary] = None
    f1: Optional[MetricSummary] = None
    auc_roc: Optional[MetricSummary] = None
    dp_gap: Optional[MetricSummary] = None
    identifiability: Optional[MetricSummary] = None
    seeds: List[int] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    errors: Dict[str, str] = field(default_factory=dict)

    def metric(self, name: str) -> Optional[MetricSummary]:
        return getattr(self, name)


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    rows: List[ModelReport] = field(default_factory=list)
    repetitions: int = 1
    repetition_mode: str = 'resample'

    def row(self, model: str) -> Optional[ModelReport]:
        for row in self.rows:
            if row.model == model:
                return row
        return None


MetricSummarySchema = class_schema(MetricSummary, base_schema=BaseSchema)
ModelReportSchema = class_schema(ModelReport, base_schema=BaseSchema)
EvalReportSchema = class_schema(EvalReport, base_schema=BaseSchema)
