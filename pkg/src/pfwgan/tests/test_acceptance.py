# -*- coding: utf-8 -*-
"""
Desk-scale training runs. They take minutes each and only run with PFWGAN_SLOW_TESTS=1.
"""
import os
import unittest

import numpy as np
import torch

from pfwgan.checkpoint import load_checkpoint
from pfwgan.config import ArchitectureConfig, RunConfig, load_config
from pfwgan.context import Context
from pfwgan.data.transform import encode
from pfwgan.evaluate.fairness import dp_gap
from pfwgan.evaluate.report import evaluate_all
from pfwgan.neighbors import nearest_distances
from pfwgan.pipeline import prepare, run_train
from pfwgan.synthesize import generate
from pfwgan.testing import (
    SLOW_TESTS_ENV,
    PFWGANTestCase,
    biased_table,
    prepare_matrix,
    slow_tests_enabled,
    small_train_config,
    two_cluster_table,
)
from pfwgan.trainer import param_snapshot, train

__author__ = 'pfwgan'

ADULT_CSV_ENV = 'PFWGAN_ADULT_CSV'

DESK_ARCHITECTURE = ArchitectureConfig(noise_dim=32, generator_hidden=[64, 64], critic_hidden=[64, 64])


@unittest.skipUnless(slow_tests_enabled(), f'set {SLOW_TESTS_ENV}=1 to run desk-scale training')
class TestToyTraining(PFWGANTestCase):
    def _config(self, **kwargs):
        data = {'batch_size': 64, 'n_critic': 4, 'pf_start': 0, 'architecture': DESK_ARCHITECTURE, 'seed': 11}
        data.update(kwargs)
        return small_train_config(**data)

    def test_zero_weights_follow_the_plain_trajectory(self):
        matrix, ref = prepare_matrix(biased_table(n=1000))
        # 15 minibatches per epoch, so 14 epochs give 52 generator updates
        zero = train(self._config(epochs=14, loss={'lambda_p': 0.0, 'lambda_f': 0.0}), matrix, ref)
        plain = train(self._config(epochs=14, pf_start=14, pf_end=14), matrix, ref)
        for x, y in zip(param_snapshot(zero.generator), param_snapshot(plain.generator)):
            torch.testing.assert_close(x, y, atol=0.0, rtol=0.0)

    def test_two_clusters(self):
        table = two_cluster_table(n=4000)
        matrix, ref = prepare_matrix(table)
        # 62 minibatches per epoch with n_critic 4, about 3000 generator updates
        epochs = 194
        runs = {}
        for lambda_p in (0.0, 0.5):
            config = self._config(epochs=epochs, loss={'lambda_p': lambda_p, 'lambda_f': 0.0})
            runs[lambda_p] = train(config, matrix, ref)

        synth = generate(runs[0.0], table.n_rows, seed=1)
        for cluster in ('0', '1'):
            real_rows = table.column('y') == cluster
            synth_rows = synth.column('y') == cluster
            self.assertGreater(int(synth_rows.sum()), 0)
            for column in ('x1', 'x2'):
                real_mean = table.column(column)[real_rows].astype(float).mean()
                synth_mean = synth.column(column)[synth_rows].astype(float).mean()
                self.assertLess(abs(real_mean - synth_mean), 0.15)

        distances = {}
        for lambda_p, cp in runs.items():
            synth_matrix = encode(generate(cp, table.n_rows, seed=1), matrix.model)
            distances[lambda_p] = float(np.mean(nearest_distances(matrix.values, synth_matrix.values)))
        self.assertGreater(distances[0.5], distances[0.0])

    def test_fairness_steering(self):
        table = biased_table(n=2000, rate_privileged=0.7, rate_unprivileged=0.3)
        self.assertAlmostEqual(dp_gap(table), 0.4)
        matrix, ref = prepare_matrix(table)
        gaps = {}
        for lambda_f in (0.0, 1.0):
            cp = train(self._config(epochs=100, loss={'lambda_p': 0.0, 'lambda_f': lambda_f}), matrix, ref)
            gaps[lambda_f] = dp_gap(generate(cp, table.n_rows, seed=2))
        self.assertLessEqual(gaps[1.0], 0.1)
        self.assertGreaterEqual(gaps[0.0], 0.25)


@unittest.skipUnless(
    slow_tests_enabled() and os.environ.get(ADULT_CSV_ENV), f'set {SLOW_TESTS_ENV}=1 and {ADULT_CSV_ENV}=adult.csv'
)
class TestAdult(PFWGANTestCase):
    def _context(self, **loss) -> Context:
        test_config = {
            'preset': 'adult',
            'dataset': os.environ[ADULT_CSV_ENV],
            'output_dir': str(self.tmpdir / '-'.join(f'{k}{v}' for k, v in sorted(loss.items()))),
            'split': {'train_fraction': 0.9, 'seed': 0},
            'train': {'epochs': 230, 'deterministic': False, 'loss': loss},
            'eval': {'repetitions': 3},
        }
        return Context(load_config(RunConfig, test_config=test_config))

    def test_desk_scale_reproduction(self):
        ctx = self._context()
        baseline_ctx = self._context(lambda_p=0.0, lambda_f=0.0)
        reports = {}
        for name, context in (('pfwgan', ctx), ('wgan', baseline_ctx)):
            checkpoint = load_checkpoint(run_train(context))
            data = prepare(context.run_config, privacy=False)
            synths = [generate(checkpoint, data.train.n_rows, seed) for seed in range(3)]
            reports[name] = evaluate_all(data.train, data.test, synths, context.run_config.evaluation, model=name)

        row = reports['pfwgan'].row('pfwgan')
        self.assertLess(abs(row.accuracy.mean - 0.7577), 0.05)
        self.assertLess(abs(row.f1.mean - 0.4733), 0.06)
        self.assertLessEqual(row.dp_gap.mean, 0.15)
        self.assertLess(row.identifiability.mean, reports['wgan'].row('wgan').identifiability.mean)
        self.assertLess(abs(reports['pfwgan'].row('real').accuracy.mean - 0.8150), 0.03)
