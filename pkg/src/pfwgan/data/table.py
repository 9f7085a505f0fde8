# -*- coding: utf-8 -*-
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Type, Union

import numpy as np
import pandas as pd

from pfwgan.config import BinarizeRule, DerivedColumn, SchemaConfig, ThresholdRule
from pfwgan.exceptions import EmptyTable, IOFault, SchemaMismatch, SplitDegenerate

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

CellValue = Union[float, str]


class ColumnKind(Enum):
    NUMERIC = 'numeric'
    CATEGORICAL = 'categorical'


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind

    def to_dict(self) -> Dict[str, str]:
        return {'name': self.name, 'kind': self.kind.value}

    @classmethod
    def from_dict(cls: Type[Column], data: Mapping[str, Any]) -> Column:
        return cls(name=data['name'], kind=ColumnKind(data['kind']))


@dataclass(frozen=True)
class GroupValue:
    """ A (column, category) binding: the privileged sensitive value or the favorable target value. """

    column: str
    value: str

    def to_dict(self) -> Dict[str, str]:
        return {'column': self.column, 'value': self.value}

    @classmethod
    def from_dict(cls: Type[GroupValue], data: Mapping[str, Any]) -> GroupValue:
        return cls(column=data['column'], value=data['value'])


@dataclass(frozen=True)
class TableSchema:
    columns: Tuple[Column, ...]
    sensitive: GroupValue
    target: GroupValue

    def __post_init__(self):
        kinds = {c.name: c.kind for c in self.columns}
        if len(kinds) != len(self.columns):
            raise SchemaMismatch(detail='Column names must be unique')
        for role, binding in (('sensitive', self.sensitive), ('target', self.target)):
            if binding.column not in kinds:
                raise SchemaMismatch(detail=f'{role} column {binding.column!r} is not in the schema', fields=[role])
            if kinds[binding.column] is not ColumnKind.CATEGORICAL:
                raise SchemaMismatch(detail=f'{role} column {binding.column!r} must be categorical', fields=[role])
        if self.sensitive.column == self.target.column:
            raise SchemaMismatch(detail='sensitive and target columns must be distinct')

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def numeric_columns(self) -> List[str]:
        return [c.name for c in self.columns if c.kind is ColumnKind.NUMERIC]

    @property
    def categorical_columns(self) -> List[str]:
        return [c.name for c in self.columns if c.kind is ColumnKind.CATEGORICAL]

    def kind_of(self, name: str) -> ColumnKind:
        for column in self.columns:
            if column.name == name:
                return column.kind
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'columns': [c.to_dict() for c in self.columns],
            'sensitive': self.sensitive.to_dict(),
            'target': self.target.to_dict(),
        }

    @classmethod
    def from_dict(cls: Type[TableSchema], data: Mapping[str, Any]) -> TableSchema:
        return cls(
            columns=tuple(Column.from_dict(c) for c in data['columns']),
            sensitive=GroupValue.from_dict(data['sensitive']),
            target=GroupValue.from_dict(data['target']),
        )

    @classmethod
    def from_config(cls: Type[TableSchema], config: SchemaConfig) -> TableSchema:
        return cls(
            columns=tuple(Column(name=c.name, kind=ColumnKind(c.kind.value)) for c in config.columns),
            sensitive=GroupValue(column=config.sensitive.column, value=config.sensitive.value),
            target=GroupValue(column=config.target.column, value=config.target.value),
        )


@dataclass(frozen=True)
class RawTable:
    """
    Rows bound to a schema. Numeric columns hold float64, categorical columns hold str.

    The frame is never modified after construction; operations return new tables.
    """

    schema: TableSchema
    frame: pd.DataFrame = field(repr=False)
    dropped: int = 0

    def __post_init__(self):
        if list(self.frame.columns) != self.schema.names:
            raise SchemaMismatch(detail='Frame columns do not follow the schema column order')

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    def records(self) -> Iterator[Tuple[CellValue, ...]]:
        for row in self.frame.itertuples(index=False, name=None):
            yield tuple(row)

    def take(self, indices: Sequence[int]) -> RawTable:
        frame = self.frame.iloc[np.asarray(indices, dtype=np.int64)].reset_index(drop=True)
        return RawTable(schema=self.schema, frame=frame)

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy()

    def sensitive_mask(self) -> np.ndarray:
        """ True where the row belongs to the privileged group (s=1). """
        return self.frame[self.schema.sensitive.column].to_numpy() == self.schema.sensitive.value

    def favorable_mask(self) -> np.ndarray:
        """ True where the row has the favorable outcome (y=1). """
        return self.frame[self.schema.target.column].to_numpy() == self.schema.target.value

    def equals(self, other: RawTable, tolerance: float = 1e-9) -> bool:
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        for column in self.schema.columns:
            a = self.frame[column.name].to_numpy()
            b = other.frame[column.name].to_numpy()
            if column.kind is ColumnKind.NUMERIC:
                if not np.allclose(a.astype(float), b.astype(float), rtol=0.0, atol=tolerance):
                    return False
            elif not np.array_equal(a.astype(str), b.astype(str)):
                return False
        return True

    @classmethod
    def from_records(cls: Type[RawTable], schema: TableSchema, records: Iterable[Sequence[CellValue]]) -> RawTable:
        frame = pd.DataFrame([list(r) for r in records], columns=schema.names)
        return cls(schema=schema, frame=_coerce_frame(frame, schema))


def _coerce_frame(frame: pd.DataFrame, schema: TableSchema) -> pd.DataFrame:
    out = pd.DataFrame(index=frame.index)
    for column in schema.columns:
        if column.kind is ColumnKind.NUMERIC:
            out[column.name] = frame[column.name].astype(np.float64)
        else:
            out[column.name] = frame[column.name].astype(str).astype(object)
    return out.reset_index(drop=True)


class SplitSpec(NamedTuple):
    train_fraction: float
    seed: int


class GroupCounts(NamedTuple):
    n_s0y1: int
    n_s0: int
    n_s1y1: int
    n_s1: int


def apply_derivations(frame: pd.DataFrame, rules: Sequence[DerivedColumn]) -> pd.DataFrame:
    """
    Apply derived-column rules to a string-valued frame.

    Rules are idempotent: a cell that already holds one of the rule's output labels keeps it, so a
    table written after derivation can be loaded again with the same rules.
    """
    if not rules:
        return frame
    frame = frame.copy()
    for rule in rules:
        if rule.source not in frame.columns:
            raise SchemaMismatch(detail=f'Derived column source {rule.source!r} missing from header')
        target = rule.column or rule.source
        source = frame[rule.source].astype(str).str.strip()
        if isinstance(rule, ThresholdRule):
            numeric = pd.to_numeric(source, errors='coerce')
            derived = np.where(numeric > rule.threshold, rule.above, rule.at_or_below).astype(object)
            derived[numeric.isna().to_numpy()] = ''
            keep = source.isin([rule.above, rule.at_or_below]).to_numpy()
            derived[keep] = source.to_numpy()[keep]
        elif isinstance(rule, BinarizeRule):
            hit = source.isin(list(rule.values) + [rule.label]).to_numpy()
            derived = np.where(hit, rule.label, rule.other).astype(object)
            derived[(source == '').to_numpy()] = ''
        else:
            raise SchemaMismatch(detail=f'Unknown derivation rule {rule!r}')
        frame[target] = derived
        logger.debug(f'Derived column {target!r} from {rule.source!r} using {rule.rule} rule')
    return frame


def load_csv(path: Union[str, Path], schema: TableSchema, derived: Sequence[DerivedColumn] = ()) -> RawTable:
    """
    Load a CSV file (UTF-8, header row, comma delimited, RFC-4180 quoting) and bind it to schema.

    Rows with an empty cell, or a numeric cell that does not parse to a finite number, are dropped
    and counted in RawTable.dropped.

    :raise SchemaMismatch: a schema column is missing from the header, or the target is not binary
    :raise EmptyTable: no rows survive cleaning
    :raise IOFault: the file can not be read
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding='utf-8')
    except FileNotFoundError as e:
        raise IOFault(detail=f'No such file: {path}', data={'error': str(e)})
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise IOFault(detail=f'Could not read {path}: {e}')
    except pd.errors.EmptyDataError:
        raise EmptyTable(detail=f'{path} has no header row')

    raw.columns = [str(c).strip() for c in raw.columns]
    raw = apply_derivations(raw, derived)

    missing = [name for name in schema.names if name not in raw.columns]
    if missing:
        raise SchemaMismatch(detail=f'Header of {path} lacks schema columns {missing}', fields=missing)

    frame = raw[schema.names].apply(lambda col: col.str.strip())
    keep = np.ones(len(frame), dtype=bool)
    parsed: Dict[str, Any] = {}
    for column in schema.columns:
        values = frame[column.name]
        if column.kind is ColumnKind.NUMERIC:
            numbers = pd.to_numeric(values, errors='coerce').astype(np.float64)
            keep &= np.isfinite(numbers.to_numpy())
            parsed[column.name] = numbers
        else:
            keep &= (values != '').to_numpy()
            parsed[column.name] = values.astype(object)

    dropped = int((~keep).sum())
    clean = pd.DataFrame(parsed)[keep].reset_index(drop=True)
    if dropped:
        logger.info(f'Dropped {dropped} incomplete or unparsable rows out of {len(frame)} from {path}')
    if clean.empty:
        raise EmptyTable(detail=f'No rows left in {path} after dropping {dropped} incomplete rows')

    table = RawTable(schema=schema, frame=clean, dropped=dropped)
    _check_binary_target(table)
    logger.debug(f'Loaded {table.n_rows} rows from {path}')
    return table


def _check_binary_target(table: RawTable) -> None:
    target = table.schema.target.column
    distinct = pd.unique(table.frame[target])
    if len(distinct) > 2:
        raise SchemaMismatch(
            detail=f'Target column {target!r} has {len(distinct)} distinct values, declare a binarize rule',
            fields=['schema.target'],
        )


def write_csv(table: RawTable, path: Union[str, Path]) -> None:
    """ Write the table in the same format load_csv reads. Floats use their shortest round-trip repr. """
    if not str(path):
        raise IOFault(detail='Empty output path')
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        table.frame.to_csv(path, index=False, encoding='utf-8', float_format=None, lineterminator='\n')
    except OSError as e:
        raise IOFault(detail=f'Could not write {path}: {e}')
    logger.debug(f'Wrote {table.n_rows} rows to {path}')


def split(table: RawTable, spec: SplitSpec) -> Tuple[RawTable, RawTable]:
    """
    Shuffle row indices with a generator seeded by spec.seed and cut after ceil(n * train_fraction).

    :raise SplitDegenerate: the fraction is outside (0, 1) or either half would be empty
    """
    if not 0.0 < spec.train_fraction < 1.0:
        raise SplitDegenerate(detail=f'train_fraction must be in (0, 1), got {spec.train_fraction}')
    n = table.n_rows
    # round away float noise such as 10 * 0.7 = 7.000000000000001 before taking the ceiling
    n_train = math.ceil(round(n * spec.train_fraction, 9))
    if n_train <= 0 or n_train >= n:
        raise SplitDegenerate(detail=f'Split of {n} rows at {spec.train_fraction} leaves an empty half')
    order = np.random.default_rng(spec.seed).permutation(n)
    train, test = table.take(order[:n_train]), table.take(order[n_train:])
    logger.debug(f'Split {n} rows into {train.n_rows} train and {test.n_rows} test rows (seed {spec.seed})')
    return train, test


def group_counts(table: RawTable) -> GroupCounts:
    s1 = table.sensitive_mask()
    y1 = table.favorable_mask()
    return GroupCounts(
        n_s0y1=int(np.sum(~s1 & y1)), n_s0=int(np.sum(~s1)), n_s1y1=int(np.sum(s1 & y1)), n_s1=int(np.sum(s1))
    )
