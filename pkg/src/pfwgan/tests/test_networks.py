# -*- coding: utf-8 -*-
import math

import numpy as np
import torch

from pfwgan.config import ArchitectureConfig
from pfwgan.data.transform import DataMatrix, fit
from pfwgan.diffcompute import Mode
from pfwgan.exceptions import ShapeError
from pfwgan.networks import (
    CriticArch,
    Dense,
    GeneratorArch,
    critic_forward,
    generator_forward,
    init_params,
    sample_noise,
)
from pfwgan.testing import PFWGANTestCase, biased_table, shaped_table
from pfwgan.utils import torch_generator

__author__ = 'pfwgan'


class TestNetworks(PFWGANTestCase):
    def setUp(self):
        super().setUp()
        self.model = fit(biased_table(n=40))
        self.arch_config = ArchitectureConfig(noise_dim=4, generator_hidden=[8, 8], critic_hidden=[8])
        self.generator_arch = GeneratorArch.for_transform(self.model, self.arch_config)
        self.critic_arch = CriticArch.for_transform(self.model, self.arch_config)

    def test_architecture_follows_layout(self):
        self.assertEqual(self.generator_arch.blocks, (('numeric', 1), ('categorical', 2), ('categorical', 2)))
        self.assertEqual(self.generator_arch.output_width, self.model.encoded_width)
        self.assertEqual(self.critic_arch.input_width, 5)

    def test_arch_dict_round_trip(self):
        self.assertEqual(GeneratorArch.from_dict(self.generator_arch.to_dict()), self.generator_arch)
        self.assertEqual(CriticArch.from_dict(self.critic_arch.to_dict()), self.critic_arch)

    def test_train_mode_output(self):
        store = init_params(self.generator_arch, seed=1)
        rng = torch_generator(2)
        out = generator_forward(store, sample_noise(16, 4, rng), Mode.TRAIN, rng)
        self.assertEqual(tuple(out.shape), (16, 5))
        self.assertGreaterEqual(float(out[:, 0].min()), 0.0)
        for span in self.model.categorical_spans:
            torch.testing.assert_close(out[:, span.slice].sum(dim=1), torch.ones(16))

    def test_eval_mode_output_is_a_valid_hard_matrix(self):
        for name in ('adult', 'law'):
            model = fit(shaped_table(name, n=120))
            store = init_params(GeneratorArch.for_transform(model, self.arch_config), seed=3)
            out = generator_forward(store, sample_noise(32, 4, torch_generator(4)), Mode.EVAL)
            DataMatrix(values=out.detach().numpy(), model=model).check(hard=True)

    def test_noise_width(self):
        store = init_params(self.generator_arch, seed=1)
        with self.assertRaises(ShapeError):
            generator_forward(store, torch.zeros(3, 5), Mode.EVAL)
        critic = init_params(self.critic_arch, seed=1)
        with self.assertRaises(ShapeError):
            critic_forward(critic, torch.zeros(3, 4))

    def test_init_is_deterministic(self):
        a = init_params(self.generator_arch, seed=7)
        b = init_params(self.generator_arch, seed=7)
        c = init_params(self.generator_arch, seed=8)
        for x, y in zip(a.parameters, b.parameters):
            torch.testing.assert_close(x, y, atol=0.0, rtol=0.0)
        self.assertFalse(all(torch.equal(x, y) for x, y in zip(a.parameters, c.parameters)))

    def test_init_ranges(self):
        store = init_params(self.critic_arch, seed=5)
        for module in store.module.modules():
            if isinstance(module, Dense):
                bound = math.sqrt(6.0 / module.fan_in)
                self.assertLessEqual(float(module.weight.abs().max()), bound)
                self.assertEqual(float(module.bias.abs().max()), 0.0)

    def test_zero_critic_scores_equal_bias(self):
        store = init_params(self.critic_arch, seed=5)
        with torch.no_grad():
            for p in store.parameters:
                p.zero_()
            store.module.score.bias.fill_(0.3)
        batch = torch.as_tensor(np.random.default_rng(0).random((6, 5)))
        scores = critic_forward(store, batch)
        torch.testing.assert_close(scores, torch.full((6, 1), 0.3))

    def test_init_std_follows_fan_in(self):
        for arch in (
            CriticArch(input_width=300, hidden_dims=(512,)),
            GeneratorArch(
                noise_dim=256, hidden_dims=(384,), blocks=(('numeric', 1), ('categorical', 3)), temperature=0.2
            ),
        ):
            store = init_params(arch, seed=9)
            for module in store.module.modules():
                if isinstance(module, Dense) and module.fan_in >= 256:
                    expected = math.sqrt(2.0 / module.fan_in)
                    self.assertLess(abs(float(module.weight.std()) - expected), 0.2 * expected)

    def test_batch_norm_starts_as_identity_scale(self):
        store = init_params(self.generator_arch, seed=2)
        normalized = [m for m in store.module.modules() if isinstance(m, Dense) and m.normalize]
        self.assertTrue(normalized)
        for module in normalized:
            torch.testing.assert_close(module.gamma, torch.ones_like(module.gamma), atol=0.0, rtol=0.0)
            torch.testing.assert_close(module.beta, torch.zeros_like(module.beta), atol=0.0, rtol=0.0)

    def test_critic_is_row_permutation_equivariant(self):
        store = init_params(self.critic_arch, seed=6)
        batch = torch.as_tensor(np.random.default_rng(1).random((20, 5)))
        order = torch.as_tensor(np.random.default_rng(2).permutation(20))
        with torch.no_grad():
            torch.testing.assert_close(critic_forward(store, batch[order]), critic_forward(store, batch)[order])

    def test_critic_is_piecewise_linear_along_lines(self):
        store = init_params(CriticArch(input_width=5, hidden_dims=(8,)), seed=7)
        rng = np.random.default_rng(3)
        t = torch.linspace(-3.0, 3.0, 2001, dtype=torch.float64).unsqueeze(1)
        for _ in range(5):
            x = torch.as_tensor(rng.random(5)).unsqueeze(0)
            d = torch.as_tensor(rng.normal(size=5)).unsqueeze(0)
            with torch.no_grad():
                scores = critic_forward(store, x + t * d).squeeze(1)
            second = scores[2:] - 2.0 * scores[1:-1] + scores[:-2]
            # every hidden unit bends the line at most once, touching at most two second differences
            self.assertLessEqual(int((second.abs() > 1e-9).sum()), 2 * 8)
