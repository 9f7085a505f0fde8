# -*- coding: utf-8 -*-
"""
Invertible encoding between raw tables and the real-valued matrix space.

Numeric columns go through an exact empirical quantile map onto [0, 1], categorical
columns are one-hot encoded over the vocabulary seen at fit time.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type

import numpy as np
import pandas as pd

from pfwgan.config import FeatureWeighting
from pfwgan.data.table import ColumnKind, RawTable, TableSchema
from pfwgan.exceptions import FitError, LayoutMismatch, SchemaMismatch, UnseenCategory

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


class UnseenPolicy(str, Enum):
    ERROR = 'error'
    IGNORE = 'ignore'


@dataclass(frozen=True, eq=False)
class QuantileMap:
    column: str
    sorted_values: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantileMap):
            return NotImplemented
        return self.column == other.column and np.array_equal(self.sorted_values, other.sorted_values)

    def __hash__(self) -> int:
        return hash((self.column, self.sorted_values.tobytes()))

    def __post_init__(self):
        if self.sorted_values.ndim != 1 or self.sorted_values.size == 0:
            raise FitError(detail=f'Quantile map for {self.column!r} needs at least one value')
        if np.any(np.diff(self.sorted_values) < 0):
            raise FitError(detail=f'Quantile map for {self.column!r} is not sorted')

    @property
    def resolution(self) -> int:
        return int(self.sorted_values.size)

    @property
    def step(self) -> float:
        """ Largest round-trip error for evenly spaced training values. """
        if self.resolution < 2:
            return 0.0
        return float(self.sorted_values[-1] - self.sorted_values[0]) / (self.resolution - 1)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """ Mid-rank empirical CDF: (#less + #less-or-equal) / (2 * resolution). """
        x = np.asarray(x, dtype=np.float64)
        rank_low = np.searchsorted(self.sorted_values, x, side='left')
        rank_high = np.searchsorted(self.sorted_values, x, side='right')
        return np.clip((rank_low + rank_high) / (2.0 * self.resolution), 0.0, 1.0)

    def inverse(self, u: np.ndarray) -> np.ndarray:
        position = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0) * (self.resolution - 1)
        return np.interp(position, np.arange(self.resolution, dtype=np.float64), self.sorted_values)

    def to_dict(self) -> Dict[str, Any]:
        return {'column': self.column, 'sorted_values': [float(v) for v in self.sorted_values]}

    @classmethod
    def from_dict(cls: Type[QuantileMap], data: Mapping[str, Any]) -> QuantileMap:
        return cls(column=data['column'], sorted_values=np.asarray(data['sorted_values'], dtype=np.float64))


@dataclass(frozen=True)
class CategoryVocab:
    column: str
    categories: Tuple[str, ...]

    def __post_init__(self):
        if not self.categories:
            raise FitError(detail=f'Vocabulary for {self.column!r} is empty')
        if len(set(self.categories)) != len(self.categories):
            raise FitError(detail=f'Vocabulary for {self.column!r} has duplicate categories')

    @property
    def cardinality(self) -> int:
        return len(self.categories)

    def index_of(self, value: str) -> Optional[int]:
        try:
            return self.categories.index(value)
        except ValueError:
            return None

    def to_dict(self) -> Dict[str, Any]:
        return {'column': self.column, 'categories': list(self.categories)}

    @classmethod
    def from_dict(cls: Type[CategoryVocab], data: Mapping[str, Any]) -> CategoryVocab:
        return cls(column=data['column'], categories=tuple(data['categories']))


@dataclass(frozen=True)
class ColumnSpan:
    column: str
    kind: ColumnKind
    start: int
    stop: int

    @property
    def width(self) -> int:
        return self.stop - self.start

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


@dataclass(frozen=True, eq=False)
class TransformModel:
    schema: TableSchema
    quantile_maps: Dict[str, QuantileMap]
    vocabs: Dict[str, CategoryVocab]

    def __post_init__(self):
        if set(self.quantile_maps) != set(self.schema.numeric_columns):
            raise FitError(detail='Quantile maps do not match the numeric columns of the schema')
        if set(self.vocabs) != set(self.schema.categorical_columns):
            raise FitError(detail='Vocabularies do not match the categorical columns of the schema')

    @property
    def block_layout(self) -> Tuple[ColumnSpan, ...]:
        spans: List[ColumnSpan] = []
        start = 0
        for column in self.schema.columns:
            width = 1 if column.kind is ColumnKind.NUMERIC else self.vocabs[column.name].cardinality
            spans.append(ColumnSpan(column=column.name, kind=column.kind, start=start, stop=start + width))
            start += width
        return tuple(spans)

    @property
    def encoded_width(self) -> int:
        return len(self.quantile_maps) + sum(v.cardinality for v in self.vocabs.values())

    @property
    def numeric_indices(self) -> List[int]:
        return [span.start for span in self.block_layout if span.kind is ColumnKind.NUMERIC]

    @property
    def categorical_spans(self) -> List[ColumnSpan]:
        return [span for span in self.block_layout if span.kind is ColumnKind.CATEGORICAL]

    def span(self, column: str) -> ColumnSpan:
        for span in self.block_layout:
            if span.column == column:
                return span
        raise KeyError(column)

    def category_index(self, column: str, value: str) -> Optional[int]:
        """ Absolute encoded index of a category, or None when it was not seen at fit time. """
        offset = self.vocabs[column].index_of(value)
        if offset is None:
            return None
        return self.span(column).start + offset

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': self.schema.to_dict(),
            'quantile_maps': [self.quantile_maps[name].to_dict() for name in self.schema.numeric_columns],
            'vocabs': [self.vocabs[name].to_dict() for name in self.schema.categorical_columns],
        }

    @classmethod
    def from_dict(cls: Type[TransformModel], data: Mapping[str, Any]) -> TransformModel:
        quantile_maps = [QuantileMap.from_dict(item) for item in data['quantile_maps']]
        vocabs = [CategoryVocab.from_dict(item) for item in data['vocabs']]
        return cls(
            schema=TableSchema.from_dict(data['schema']),
            quantile_maps={q.column: q for q in quantile_maps},
            vocabs={v.column: v for v in vocabs},
        )


@dataclass(frozen=True, eq=False)
class DataMatrix:
    values: np.ndarray
    model: TransformModel

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != self.model.encoded_width:
            raise LayoutMismatch(
                detail=f'Matrix of shape {self.values.shape} does not fit encoded width {self.model.encoded_width}'
            )

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    def check(self, hard: bool = False, tolerance: float = 1e-6) -> None:
        """
        Verify numeric coordinates lie in [0, 1] and categorical blocks are probability vectors.

        :raise LayoutMismatch: some row breaks the invariants
        """
        numeric = self.values[:, self.model.numeric_indices]
        if numeric.size and (numeric.min() < -tolerance or numeric.max() > 1 + tolerance):
            raise LayoutMismatch(detail='Numeric coordinates outside [0, 1]')
        for span in self.model.categorical_spans:
            block = self.values[:, span.slice]
            if block.min() < -tolerance or not np.allclose(block.sum(axis=1), 1.0, rtol=0.0, atol=tolerance):
                raise LayoutMismatch(
                    detail=f'Block for {span.column!r} is not a probability vector', fields=[span.column]
                )
            if hard and not np.all(np.isclose(block, 0.0) | np.isclose(block, 1.0)):
                raise LayoutMismatch(detail=f'Block for {span.column!r} is not one-hot', fields=[span.column])


def fit(train: RawTable) -> TransformModel:
    """
    Fit quantile maps and vocabularies on the training table only.

    :raise FitError: empty table or numeric column without a finite value
    """
    if train.n_rows == 0:
        raise FitError(detail='Can not fit a transform on an empty table')
    quantile_maps: Dict[str, QuantileMap] = {}
    vocabs: Dict[str, CategoryVocab] = {}
    for column in train.schema.columns:
        values = train.column(column.name)
        if column.kind is ColumnKind.NUMERIC:
            numbers = values.astype(np.float64)
            numbers = numbers[np.isfinite(numbers)]
            if numbers.size == 0:
                raise FitError(detail=f'Numeric column {column.name!r} has no finite values', fields=[column.name])
            quantile_maps[column.name] = QuantileMap(column=column.name, sorted_values=np.sort(numbers, kind='stable'))
        else:
            categories = tuple(str(v) for v in pd.unique(values))
            vocabs[column.name] = CategoryVocab(column=column.name, categories=categories)
    model = TransformModel(schema=train.schema, quantile_maps=quantile_maps, vocabs=vocabs)
    logger.debug(f'Fitted transform on {train.n_rows} rows, encoded width {model.encoded_width}')
    return model


def encode(table: RawTable, model: TransformModel, unseen: UnseenPolicy = UnseenPolicy.ERROR) -> DataMatrix:
    """
    Encode a table. With unseen=IGNORE an unknown category encodes as an all-zero block.

    :raise SchemaMismatch: the table is bound to another schema
    :raise UnseenCategory: a category was not seen at fit time and unseen=ERROR
    """
    if table.schema != model.schema:
        raise SchemaMismatch(detail='Table schema differs from the schema the transform was fitted on')
    out = np.zeros((table.n_rows, model.encoded_width), dtype=np.float64)
    ignored = 0
    for span in model.block_layout:
        values = table.column(span.column)
        if span.kind is ColumnKind.NUMERIC:
            out[:, span.start] = model.quantile_maps[span.column].forward(values.astype(np.float64))
            continue
        lookup = {category: i for i, category in enumerate(model.vocabs[span.column].categories)}
        indices = np.fromiter((lookup.get(str(v), -1) for v in values), dtype=np.int64, count=table.n_rows)
        missing = indices < 0
        if missing.any():
            first = str(values[np.argmax(missing)])
            if UnseenPolicy(unseen) is UnseenPolicy.ERROR:
                raise UnseenCategory(
                    detail=f'Unseen category {first!r} in column {span.column!r}',
                    fields=[span.column],
                    data={'column': span.column, 'value': first},
                )
            ignored += int(missing.sum())
        rows = np.nonzero(~missing)[0]
        out[rows, span.start + indices[rows]] = 1.0
    if ignored:
        logger.info(f'Encoded {ignored} cells with unseen categories as all-zero blocks')
    return DataMatrix(values=out, model=model)


def decode(matrix: DataMatrix, model: TransformModel) -> RawTable:
    """ Invert encode. Numerics interpolate into the sorted training values, categoricals take the argmax. """
    if matrix.width != model.encoded_width:
        raise LayoutMismatch(detail=f'Matrix width {matrix.width} differs from encoded width {model.encoded_width}')
    columns: Dict[str, Any] = {}
    for span in model.block_layout:
        if span.kind is ColumnKind.NUMERIC:
            columns[span.column] = model.quantile_maps[span.column].inverse(matrix.values[:, span.start])
        else:
            categories = np.asarray(model.vocabs[span.column].categories, dtype=object)
            # np.argmax returns the first maximum, so ties resolve to the lowest index
            columns[span.column] = categories[np.argmax(matrix.values[:, span.slice], axis=1)]
    frame = pd.DataFrame(columns, columns=model.schema.names)
    return RawTable.from_records(model.schema, frame.itertuples(index=False, name=None))


def feature_weights(matrix: DataMatrix, weighting: FeatureWeighting = FeatureWeighting.UNIT) -> np.ndarray:
    """ Per-coordinate weights w for weighted distances. Constant coordinates keep weight 1. """
    width = matrix.width
    if FeatureWeighting(weighting) is FeatureWeighting.UNIT:
        return np.ones(width, dtype=np.float64)
    std = matrix.values.std(axis=0)
    weights = np.ones(width, dtype=np.float64)
    nonzero = std > 0
    weights[nonzero] = 1.0 / std[nonzero]
    return weights
