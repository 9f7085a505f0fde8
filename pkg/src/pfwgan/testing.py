# -*- coding: utf-8 -*-
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from pfwgan.checkpoint import Checkpoint
from pfwgan.config import ArchitectureConfig, LossWeightsConfig, TrainConfig
from pfwgan.data.table import Column, ColumnKind, GroupValue, RawTable, TableSchema, write_csv
from pfwgan.data.transform import DataMatrix, encode, fit
from pfwgan.diffcompute import configure_runtime
from pfwgan.losses import PrivacyReference
from pfwgan.trainer import precompute_privacy_reference, train

__author__ = 'pfwgan'

SLOW_TESTS_ENV = 'PFWGAN_SLOW_TESTS'

# (numeric columns, categorical columns) including the sensitive and target columns
SCHEMA_SHAPES: Dict[str, Tuple[int, int]] = {
    'adult': (6, 9),
    'propublica': (4, 12),
    'bank': (6, 11),
    'law': (5, 3),
}


def slow_tests_enabled() -> bool:
    return os.environ.get(SLOW_TESTS_ENV, '') not in ('', '0')


def toy_schema(numeric: Sequence[str] = ('x',), categorical: Sequence[str] = ()) -> TableSchema:
    """
    Numeric columns, extra categorical columns, then sensitive `s` (privileged 'a') and target `y`
    (favorable '1').
    """
    columns = [Column(name=name, kind=ColumnKind.NUMERIC) for name in numeric]
    columns += [Column(name=name, kind=ColumnKind.CATEGORICAL) for name in categorical]
    columns += [Column(name='s', kind=ColumnKind.CATEGORICAL), Column(name='y', kind=ColumnKind.CATEGORICAL)]
    return TableSchema(
        columns=tuple(columns), sensitive=GroupValue(column='s', value='a'), target=GroupValue(column='y', value='1')
    )


def biased_table(n: int = 200, rate_privileged: float = 0.7, rate_unprivileged: float = 0.3, seed: int = 0) -> RawTable:
    """
    Half of the rows privileged ('a'), half not ('b'), with exact favorable rates per group, so the
    demographic parity gap is |rate_privileged - rate_unprivileged| by construction.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    records: List[Tuple[Any, ...]] = []
    for group, size, rate in (('a', half, rate_privileged), ('b', n - half, rate_unprivileged)):
        favorable = int(round(rate * size))
        labels = ['1'] * favorable + ['0'] * (size - favorable)
        for label in labels:
            x = rng.normal(1.0 if label == '1' else -1.0, 1.0)
            records.append((float(x), group, label))
    order = rng.permutation(len(records))
    return RawTable.from_records(toy_schema(), [records[i] for i in order])


def two_cluster_table(n: int = 400, centers: Tuple[float, float] = (0.25, 0.75), spread: float = 0.05, seed: int = 0):
    """ Two equally sized 2-D Gaussian clusters on the diagonal; the target marks the cluster. """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        cluster = i % 2
        center = centers[cluster]
        x1, x2 = rng.normal(center, spread, size=2)
        records.append((float(x1), float(x2), 'a' if rng.random() < 0.5 else 'b', str(cluster)))
    return RawTable.from_records(toy_schema(numeric=('x1', 'x2')), records)


def shaped_table(name: str, n: int = 300, seed: int = 0) -> RawTable:
    """ Random data with the column counts of one of the benchmark datasets. """
    n_numeric, n_categorical = SCHEMA_SHAPES[name]
    rng = np.random.default_rng(seed)
    numeric = [f'num{i}' for i in range(n_numeric)]
    categorical = [f'cat{i}' for i in range(n_categorical - 2)]
    schema = toy_schema(numeric=numeric, categorical=categorical)
    cardinalities = {c: int(rng.integers(2, 7)) for c in categorical}
    records = []
    for _ in range(n):
        row: List[Any] = [
            float(rng.gamma(2.0, 10.0)) if i % 2 else float(rng.integers(0, 50)) for i in range(n_numeric)
        ]
        row += [f'v{rng.integers(0, cardinalities[c])}' for c in categorical]
        row += ['a' if rng.random() < 0.6 else 'b', '1' if rng.random() < 0.3 else '0']
        records.append(tuple(row))
    return RawTable.from_records(schema, records)


def small_train_config(**kwargs: Any) -> TrainConfig:
    """ A TrainConfig small enough for unit tests. Keyword arguments override fields, `loss` takes a mapping. """
    data: Dict[str, Any] = {
        'epochs': 3,
        'batch_size': 16,
        'n_critic': 2,
        'pf_start': 0,
        'architecture': ArchitectureConfig(noise_dim=4, generator_hidden=[8], critic_hidden=[8]),
        'deterministic': True,
    }
    loss = kwargs.pop('loss', None)
    if loss is not None:
        data['loss'] = LossWeightsConfig(**loss) if isinstance(loss, Mapping) else loss
    data.update(kwargs)
    return TrainConfig(**data)


def run_config_dict(dataset: Path, output_dir: Path, /, **overrides: Any) -> Dict[str, Any]:
    """ A RunConfig document for tables built by toy_schema(). """
    config: Dict[str, Any] = {
        'dataset': str(dataset),
        'dataset_name': 'toy',
        'output_dir': str(output_dir),
        'testing': True,
        'schema': {
            'columns': [
                {'name': 'x', 'kind': 'numeric'},
                {'name': 's', 'kind': 'categorical'},
                {'name': 'y', 'kind': 'categorical'},
            ],
            'sensitive': {'column': 's', 'value': 'a'},
            'target': {'column': 'y', 'value': '1'},
        },
        'split': {'train_fraction': 0.8, 'seed': 1},
        'train': {
            'epochs': 2,
            'batch_size': 16,
            'n_critic': 2,
            'architecture': {'noise_dim': 4, 'generator_hidden': [8], 'critic_hidden': [8]},
        },
        'eval': {'repetitions': 2},
    }
    config.update(overrides)
    return config


def prepare_matrix(table: RawTable) -> Tuple[DataMatrix, PrivacyReference]:
    """ Fit a transform on table and return the encoded matrix with its privacy reference. """
    matrix = encode(table, fit(table))
    return matrix, precompute_privacy_reference(matrix)


def trained_checkpoint(table: Optional[RawTable] = None, **kwargs: Any) -> Checkpoint:
    """ Train a small generator on table (biased_table() by default) for the checkpoint and sampling tests. """
    matrix, ref = prepare_matrix(table if table is not None else biased_table(n=64))
    return train(small_train_config(**kwargs), matrix, ref)


class PFWGANTestCase(unittest.TestCase):
    """
    Base test case with a temporary directory and 64-bit deterministic compute.
    """

    def setUp(self) -> None:
        super().setUp()
        self.tmpdir = Path(tempfile.mkdtemp(prefix='pfwgan-test-'))
        configure_runtime(deterministic=True)

    def tearDown(self) -> None:
        configure_runtime(deterministic=False)
        shutil.rmtree(self.tmpdir, ignore_errors=True)
        super().tearDown()

    def write_table(self, table: RawTable, name: str = 'table.csv') -> Path:
        path = self.tmpdir / name
        write_csv(table, path)
        return path

    def write_text(self, text: str, name: str) -> Path:
        path = self.tmpdir / name
        path.write_text(text, encoding='utf-8')
        return path

    def assertTablesEqual(self, a: RawTable, b: RawTable, tolerance: float = 1e-9, msg: Optional[str] = None):
        self.assertTrue(a.equals(b, tolerance=tolerance), msg or f'{a.frame}\n!=\n{b.frame}')
