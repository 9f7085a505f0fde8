# -*- coding: utf-8 -*-
import numpy as np

from pfwgan.config import BinarizeRule, ThresholdRule
from pfwgan.data.table import (
    Column,
    ColumnKind,
    GroupValue,
    RawTable,
    SplitSpec,
    TableSchema,
    group_counts,
    load_csv,
    split,
    write_csv,
)
from pfwgan.exceptions import EmptyTable, IOFault, SchemaMismatch, SplitDegenerate
from pfwgan.testing import PFWGANTestCase, biased_table, toy_schema

__author__ = 'pfwgan'


class TestTableSchema(PFWGANTestCase):
    def test_roles_must_be_categorical(self):
        with self.assertRaises(SchemaMismatch):
            TableSchema(
                columns=(Column('x', ColumnKind.NUMERIC), Column('y', ColumnKind.CATEGORICAL)),
                sensitive=GroupValue('x', '1'),
                target=GroupValue('y', '1'),
            )

    def test_roles_must_differ(self):
        with self.assertRaises(SchemaMismatch):
            TableSchema(
                columns=(Column('s', ColumnKind.CATEGORICAL),),
                sensitive=GroupValue('s', 'a'),
                target=GroupValue('s', 'a'),
            )

    def test_dict_round_trip(self):
        schema = toy_schema(numeric=('a', 'b'), categorical=('c',))
        self.assertEqual(TableSchema.from_dict(schema.to_dict()), schema)
        self.assertEqual(schema.numeric_columns, ['a', 'b'])
        self.assertEqual(schema.categorical_columns, ['c', 's', 'y'])


class TestLoadCSV(PFWGANTestCase):
    def test_load(self):
        path = self.write_text('x,s,y\n1.5,a,1\n2,b,0\n', 'in.csv')
        table = load_csv(path, toy_schema())
        self.assertEqual(table.n_rows, 2)
        self.assertEqual(list(table.records()), [(1.5, 'a', '1'), (2.0, 'b', '0')])
        self.assertEqual(table.dropped, 0)

    def test_header_order_and_extra_columns(self):
        path = self.write_text('y,extra,s,x\n1,zz,a,3\n', 'in.csv')
        table = load_csv(path, toy_schema())
        self.assertEqual(list(table.records()), [(3.0, 'a', '1')])

    def test_quoted_fields(self):
        path = self.write_text('x,s,y\n1,"a, quoted",1\n2,b,0\n', 'in.csv')
        table = load_csv(path, toy_schema())
        self.assertEqual(table.column('s')[0], 'a, quoted')

    def test_drops_incomplete_rows(self):
        path = self.write_text('x,s,y\n1,a,1\n,b,0\nnan,a,0\nabc,b,1\n2,,1\n3,b,0\n', 'in.csv')
        with self.assertLogs('pfwgan.data.table', level='INFO') as cm:
            table = load_csv(path, toy_schema())
        self.assertEqual(table.n_rows, 2)
        self.assertEqual(table.dropped, 4)
        self.assertTrue(any('Dropped 4' in line for line in cm.output))

    def test_question_mark_is_a_category(self):
        path = self.write_text('x,s,y\n1,?,1\n2,a,0\n', 'in.csv')
        self.assertEqual(load_csv(path, toy_schema()).n_rows, 2)

    def test_missing_column(self):
        path = self.write_text('x,s\n1,a\n', 'in.csv')
        with self.assertRaises(SchemaMismatch) as cm:
            load_csv(path, toy_schema())
        self.assertEqual(cm.exception.error_detail.fields, ['y'])

    def test_empty_after_cleaning(self):
        path = self.write_text('x,s,y\n,a,1\n', 'in.csv')
        with self.assertRaises(EmptyTable):
            load_csv(path, toy_schema())

    def test_missing_file(self):
        with self.assertRaises(IOFault):
            load_csv(self.tmpdir / 'nope.csv', toy_schema())

    def test_target_must_be_binary(self):
        path = self.write_text('x,s,y\n1,a,1\n2,b,0\n3,a,2\n', 'in.csv')
        with self.assertRaises(SchemaMismatch):
            load_csv(path, toy_schema())

    def test_threshold_rule(self):
        schema = TableSchema(
            columns=(Column('age', ColumnKind.CATEGORICAL), Column('y', ColumnKind.CATEGORICAL)),
            sensitive=GroupValue('age', 'young'),
            target=GroupValue('y', 'yes'),
        )
        rule = ThresholdRule(rule='threshold', source='age', threshold=25, above='older', at_or_below='young')
        path = self.write_text('age,y\n25,yes\n26,no\n19,no\n', 'in.csv')
        table = load_csv(path, schema, derived=[rule])
        self.assertEqual(list(table.column('age')), ['young', 'older', 'young'])
        # derived labels load again unchanged
        again = self.tmpdir / 'again.csv'
        write_csv(table, again)
        self.assertTablesEqual(load_csv(again, schema, derived=[rule]), table)

    def test_binarize_rule(self):
        rule = BinarizeRule(rule='binarize', source='y', values=['>50K', '>50K.'], label='1', other='0')
        path = self.write_text('x,s,y\n1,a,>50K.\n2,b,<=50K\n3,a,>50K\n4,b,<=50K.\n', 'in.csv')
        table = load_csv(path, toy_schema(), derived=[rule])
        self.assertEqual(list(table.column('y')), ['1', '0', '1', '0'])

    def test_csv_round_trip(self):
        table = biased_table(n=50, seed=3)
        path = self.write_table(table)
        self.assertTablesEqual(load_csv(path, table.schema), table, tolerance=1e-12)

    def test_write_empty_path(self):
        with self.assertRaises(IOFault):
            write_csv(biased_table(n=10), '')


class TestSplit(PFWGANTestCase):
    def test_sizes(self):
        table = biased_table(n=10)
        train, test = split(table, SplitSpec(train_fraction=0.7, seed=0))
        self.assertEqual((train.n_rows, test.n_rows), (7, 3))

    def test_ceiling(self):
        train, test = split(biased_table(n=11), SplitSpec(train_fraction=0.5, seed=0))
        self.assertEqual((train.n_rows, test.n_rows), (6, 5))

    def test_disjoint_and_complete(self):
        table = RawTable.from_records(toy_schema(), [(float(i), 'a' if i % 2 else 'b', str(i % 2)) for i in range(20)])
        train, test = split(table, SplitSpec(train_fraction=0.8, seed=4))
        xs = sorted(list(train.column('x')) + list(test.column('x')))
        self.assertEqual(xs, [float(i) for i in range(20)])

    def test_deterministic(self):
        table = biased_table(n=40)
        a, _ = split(table, SplitSpec(0.8, 9))
        b, _ = split(table, SplitSpec(0.8, 9))
        self.assertTablesEqual(a, b, tolerance=0.0)

    def test_degenerate(self):
        table = RawTable.from_records(toy_schema(), [(1.0, 'a', '1'), (2.0, 'b', '0')])
        with self.assertRaises(SplitDegenerate):
            split(table, SplitSpec(train_fraction=0.9, seed=0))
        with self.assertRaises(SplitDegenerate):
            split(table, SplitSpec(train_fraction=1.0, seed=0))


class TestGroupCounts(PFWGANTestCase):
    def test_counts(self):
        table = RawTable.from_records(
            toy_schema(), [(0.0, 'b', '1'), (0.0, 'b', '0'), (0.0, 'a', '1'), (0.0, 'a', '1')]
        )
        counts = group_counts(table)
        self.assertEqual(tuple(counts), (1, 2, 2, 2))
        np.testing.assert_array_equal(table.sensitive_mask(), [False, False, True, True])
