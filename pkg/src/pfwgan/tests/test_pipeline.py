# -*- coding: utf-8 -*-
import json
from unittest import mock

from pfwgan.checkpoint import load_checkpoint
from pfwgan.config import RunConfig, load_config
from pfwgan.context import Context
from pfwgan.data.table import load_csv
from pfwgan.exceptions import ConfigInvalid
from pfwgan.pipeline import (
    MODEL_CHECKPOINT,
    RESOLVED_CONFIG,
    TRAIN_LOG,
    load_real,
    run_evaluate,
    run_generate,
    run_plot_data,
    run_train,
)
from pfwgan.schemas.trainlog import read_log
from pfwgan.testing import PFWGANTestCase, biased_table, run_config_dict, toy_schema

__author__ = 'pfwgan'


class TestPipeline(PFWGANTestCase):
    def setUp(self):
        super().setUp()
        self.dataset = self.write_table(biased_table(n=100), 'toy.csv')
        self.out = self.tmpdir / 'run'

    def _context(self, **overrides) -> Context:
        config = run_config_dict(self.dataset, self.out, **overrides)
        config['train']['deterministic'] = True
        return Context(load_config(RunConfig, test_config=config))

    def test_load_real(self):
        train, test = load_real(self._context().run_config)
        self.assertEqual((train.n_rows, test.n_rows), (80, 20))
        with self.assertRaises(ConfigInvalid) as cm:
            load_real(self._context(dataset=None).run_config)
        self.assertEqual(cm.exception.error_detail.fields, ['dataset'])

    def test_train_generate_evaluate(self):
        ctx = self._context()
        checkpoint = run_train(ctx)
        self.assertEqual(checkpoint, self.out / MODEL_CHECKPOINT)
        resolved = json.loads((self.out / RESOLVED_CONFIG).read_text())
        self.assertEqual(resolved['train']['epochs'], 2)
        self.assertEqual([r.epoch for r in read_log(self.out / TRAIN_LOG)], [1, 2])
        self.assertEqual(load_checkpoint(checkpoint).train_rows, 80)

        synth_path = run_generate(checkpoint, self.tmpdir / 'synth.csv')
        synth = load_csv(synth_path, toy_schema())
        self.assertEqual(synth.n_rows, 80)
        ten = run_generate(checkpoint, self.tmpdir / 'ten.csv', n=10, seed=1)
        self.assertEqual(load_csv(ten, toy_schema()).n_rows, 10)

        paths = run_evaluate(ctx, synth=synth_path, plot=True)
        names = [p.name for p in paths]
        self.assertEqual(names, ['report.json', 'report.csv', 'utility.csv', 'fairness.csv', 'privacy.csv'])
        report = json.loads(paths[0].read_text())
        self.assertEqual(report['dataset'], 'toy')
        self.assertEqual([row['model'] for row in report['rows']], ['pfwgan', 'real'])

        paths = run_evaluate(ctx, checkpoint=checkpoint)
        self.assertEqual(len(paths), 2)

        merged = run_plot_data([paths[0], paths[0]], self.tmpdir / 'plot')
        self.assertEqual(len(merged), 3)

    def test_evaluating_a_csv_skips_the_privacy_reference(self):
        ctx = self._context()
        synth = self.write_table(biased_table(n=60, seed=4), 'synth.csv')
        with mock.patch('pfwgan.pipeline.precompute_privacy_reference') as reference:
            paths = run_evaluate(ctx, synth=synth)
        reference.assert_not_called()
        self.assertEqual([p.name for p in paths], ['report.json', 'report.csv'])

    def test_evaluate_needs_synthetic_data(self):
        with self.assertRaises(ConfigInvalid):
            run_evaluate(self._context())
        with self.assertRaises(ConfigInvalid):
            run_plot_data([], self.tmpdir / 'plot')

    def test_retrain_repetitions(self):
        ctx = self._context(eval={'repetitions': 2, 'repetition_mode': 'retrain'})
        paths = run_evaluate(ctx)
        report = json.loads(paths[0].read_text())
        self.assertEqual(report['repetition_mode'], 'retrain')
        for repetition in range(2):
            rep_dir = self.out / 'retrain' / f'rep-{repetition:02d}'
            self.assertTrue((rep_dir / MODEL_CHECKPOINT).exists())
            self.assertEqual(len(read_log(rep_dir / TRAIN_LOG)), 2)
        first = load_checkpoint(self.out / 'retrain' / 'rep-00' / MODEL_CHECKPOINT)
        second = load_checkpoint(self.out / 'retrain' / 'rep-01' / MODEL_CHECKPOINT)
        self.assertEqual(second.seed, first.seed + 1)

    def test_resume(self):
        train = {
            'epochs': 3,
            'batch_size': 16,
            'n_critic': 2,
            'checkpoint_every': 1,
            'architecture': {'noise_dim': 4, 'generator_hidden': [8], 'critic_hidden': [8]},
        }
        ctx = self._context(train=train)
        final = run_train(ctx)
        uninterrupted = final.read_bytes()
        partial = self.out / 'checkpoints' / 'epoch-0001.ckpt'
        self.assertTrue(partial.exists())

        run_train(ctx, resume=partial)
        self.assertEqual(final.read_bytes(), uninterrupted)
        self.assertEqual([r.epoch for r in read_log(self.out / TRAIN_LOG)], [1, 2, 3])
