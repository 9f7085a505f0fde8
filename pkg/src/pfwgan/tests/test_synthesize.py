# -*- coding: utf-8 -*-
import numpy as np

from pfwgan.exceptions import ContractError
from pfwgan.synthesize import generate, generate_matrix
from pfwgan.testing import PFWGANTestCase, biased_table, trained_checkpoint

__author__ = 'pfwgan'


class TestGenerate(PFWGANTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.checkpoint = None

    def setUp(self):
        super().setUp()
        if TestGenerate.checkpoint is None:
            TestGenerate.checkpoint = trained_checkpoint(epochs=2)
        self.cp = TestGenerate.checkpoint

    def test_same_seed_same_rows(self):
        self.assertTablesEqual(generate(self.cp, 50, seed=3), generate(self.cp, 50, seed=3), tolerance=0.0)

    def test_seed_changes_rows(self):
        a = generate(self.cp, 50, seed=3).column('x')
        b = generate(self.cp, 50, seed=4).column('x')
        self.assertFalse(np.array_equal(a, b))

    def test_rows_are_in_the_training_domain(self):
        real = biased_table(n=64)
        table = generate(self.cp, 200, seed=1)
        self.assertEqual(table.n_rows, 200)
        self.assertEqual(table.schema, real.schema)
        x = table.column('x').astype(float)
        self.assertGreaterEqual(x.min(), real.column('x').astype(float).min())
        self.assertLessEqual(x.max(), real.column('x').astype(float).max())
        self.assertTrue(set(table.column('s')) <= {'a', 'b'})
        self.assertTrue(set(table.column('y')) <= {'0', '1'})

    def test_matrix_is_hard(self):
        matrix = generate_matrix(self.cp, 30, seed=0, batch_size=7)
        self.assertEqual(matrix.n_rows, 30)
        matrix.check(hard=True)

    def test_needs_rows(self):
        with self.assertRaises(ContractError):
            generate(self.cp, 0, seed=0)
