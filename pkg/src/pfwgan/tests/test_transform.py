# -*- coding: utf-8 -*-
import numpy as np

from pfwgan.config import FeatureWeighting
from pfwgan.data.table import RawTable
from pfwgan.data.transform import (
    DataMatrix,
    QuantileMap,
    TransformModel,
    UnseenPolicy,
    decode,
    encode,
    feature_weights,
    fit,
)
from pfwgan.exceptions import FitError, LayoutMismatch, SchemaMismatch, UnseenCategory
from pfwgan.testing import SCHEMA_SHAPES, PFWGANTestCase, biased_table, shaped_table, toy_schema

__author__ = 'pfwgan'


def _table(records):
    return RawTable.from_records(toy_schema(), records)


class TestQuantileMap(PFWGANTestCase):
    def test_mid_rank(self):
        qmap = QuantileMap(column='x', sorted_values=np.array([1.0, 2.0, 2.0, 3.0]))
        np.testing.assert_allclose(qmap.forward(np.array([1.0, 2.0, 3.0])), [0.125, 0.5, 0.875])

    def test_out_of_range_clamps(self):
        qmap = QuantileMap(column='x', sorted_values=np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(qmap.forward(np.array([-10.0, 10.0])), [0.0, 1.0])
        np.testing.assert_array_equal(qmap.inverse(np.array([-0.5, 0.0, 1.0, 1.5])), [1.0, 1.0, 3.0, 3.0])

    def test_must_be_sorted(self):
        with self.assertRaises(FitError):
            QuantileMap(column='x', sorted_values=np.array([2.0, 1.0]))


class TestTransform(PFWGANTestCase):
    def test_fit_layout(self):
        table = _table([(1.0, 'b', '0'), (2.0, 'a', '1'), (3.0, 'b', '1')])
        model = fit(table)
        self.assertEqual(model.vocabs['s'].categories, ('b', 'a'))
        self.assertEqual(model.encoded_width, 5)
        self.assertEqual(model.numeric_indices, [0])
        self.assertEqual([(s.column, s.start, s.stop) for s in model.categorical_spans], [('s', 1, 3), ('y', 3, 5)])
        self.assertEqual(model.category_index('s', 'a'), 2)
        self.assertIsNone(model.category_index('s', 'c'))

    def test_encode(self):
        table = _table([(1.0, 'b', '0'), (2.0, 'a', '1')])
        matrix = encode(table, fit(table))
        np.testing.assert_array_equal(matrix.values, [[0.25, 1, 0, 1, 0], [0.75, 0, 1, 0, 1]])
        matrix.check(hard=True)

    def test_encode_is_monotone_in_numeric_columns(self):
        table = shaped_table('bank', n=150, seed=4)
        model = fit(table)
        rng = np.random.default_rng(5)
        for column in table.schema.numeric_columns:
            values = table.column(column).astype(float)
            frame = table.frame.copy()
            frame[column] = np.sort(rng.uniform(values.min() - 10.0, values.max() + 10.0, size=table.n_rows))
            sweep = RawTable(schema=table.schema, frame=frame)
            encoded = encode(sweep, model).values[:, model.numeric_indices[table.schema.numeric_columns.index(column)]]
            self.assertTrue(np.all(np.diff(encoded) >= 0.0), column)

    def test_round_trip_on_benchmark_shapes(self):
        for name in SCHEMA_SHAPES:
            with self.subTest(schema=name):
                table = shaped_table(name, n=200, seed=7)
                model = fit(table)
                decoded = decode(encode(table, model), model)
                for column in table.schema.categorical_columns:
                    np.testing.assert_array_equal(decoded.column(column), table.column(column))
                for column in table.schema.numeric_columns:
                    values = np.sort(table.column(column).astype(float))
                    step = np.max(np.diff(values))
                    error = np.abs(decoded.column(column).astype(float) - table.column(column).astype(float))
                    self.assertTrue(np.all(error <= step + 1e-12), f'{name}.{column}')

    def test_round_trip_of_random_matrix_is_schema_valid(self):
        table = shaped_table('adult', n=100, seed=1)
        model = fit(table)
        values = np.random.default_rng(0).random((50, model.encoded_width))
        decoded = decode(DataMatrix(values=values, model=model), model)
        self.assertEqual(decoded.n_rows, 50)
        for column in table.schema.categorical_columns:
            self.assertTrue(set(decoded.column(column)) <= set(model.vocabs[column].categories))
        encode(decoded, model).check(hard=True)

    def test_decode_tie_takes_lowest_index(self):
        table = _table([(1.0, 'b', '0'), (2.0, 'a', '1')])
        model = fit(table)
        values = np.array([[0.5, 0.5, 0.5, 0.5, 0.5]])
        decoded = decode(DataMatrix(values=values, model=model), model)
        self.assertEqual(list(decoded.records()), [(1.5, 'b', '0')])

    def test_unseen_category(self):
        model = fit(_table([(1.0, 'b', '0'), (2.0, 'a', '1')]))
        other = _table([(1.0, 'c', '0')])
        with self.assertRaises(UnseenCategory) as cm:
            encode(other, model)
        self.assertEqual(cm.exception.error_detail.data, {'column': 's', 'value': 'c'})
        matrix = encode(other, model, unseen=UnseenPolicy.IGNORE)
        np.testing.assert_array_equal(matrix.values[0, 1:3], [0.0, 0.0])

    def test_schema_mismatch(self):
        model = fit(_table([(1.0, 'b', '0'), (2.0, 'a', '1')]))
        other = RawTable.from_records(toy_schema(numeric=('z',)), [(1.0, 'a', '1')])
        with self.assertRaises(SchemaMismatch):
            encode(other, model)

    def test_dict_round_trip(self):
        model = fit(shaped_table('law', n=50))
        again = TransformModel.from_dict(model.to_dict())
        self.assertEqual(again.to_dict(), model.to_dict())
        self.assertEqual(again.schema, model.schema)

    def test_matrix_width_checked(self):
        model = fit(biased_table(n=20))
        with self.assertRaises(LayoutMismatch):
            DataMatrix(values=np.zeros((2, model.encoded_width + 1)), model=model)

    def test_check_rejects_soft_and_out_of_range(self):
        model = fit(biased_table(n=20))
        soft = np.array([[0.5, 0.5, 0.5, 0.5, 0.5]])
        DataMatrix(values=soft, model=model).check()
        with self.assertRaises(LayoutMismatch):
            DataMatrix(values=soft, model=model).check(hard=True)
        with self.assertRaises(LayoutMismatch):
            DataMatrix(values=np.array([[1.5, 1, 0, 1, 0]]), model=model).check()

    def test_feature_weights(self):
        table = _table([(1.0, 'a', '0'), (2.0, 'a', '1'), (3.0, 'a', '1'), (4.0, 'a', '0')])
        matrix = encode(table, fit(table))
        np.testing.assert_array_equal(feature_weights(matrix), np.ones(4))
        weights = feature_weights(matrix, FeatureWeighting.INVERSE_STD)
        self.assertEqual(weights[1], 1.0)
        self.assertAlmostEqual(weights[2], 2.0)
        self.assertAlmostEqual(weights[0], 1.0 / matrix.values[:, 0].std())
