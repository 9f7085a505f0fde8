# -*- coding: utf-8 -*-
import logging

import numpy as np
import torch

from pfwgan.checkpoint import Checkpoint
from pfwgan.data.table import RawTable
from pfwgan.data.transform import DataMatrix, decode
from pfwgan.diffcompute import Mode, check_finite
from pfwgan.exceptions import ContractError
from pfwgan.networks import generator_forward, sample_noise
from pfwgan.utils import torch_generator

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

GENERATE_BATCH = 4096


def generate_matrix(cp: Checkpoint, n: int, seed: int, batch_size: int = GENERATE_BATCH) -> DataMatrix:
    """ n rows from the eval-mode generator: numerics clamped to [0, 1], one-hot categorical blocks. """
    if n < 1:
        raise ContractError(detail=f'Can not generate {n} rows')
    rng = torch_generator(seed)
    noise_dim = cp.generator_arch.noise_dim
    numeric = cp.transform.numeric_indices
    parts = []
    with torch.no_grad():
        for start in range(0, n, batch_size):
            rows = min(batch_size, n - start)
            z = sample_noise(rows, noise_dim, rng).to(cp.generator.parameters[0].dtype)
            out = generator_forward(cp.generator, z, Mode.EVAL)
            check_finite('generator output', out)
            out[:, numeric] = out[:, numeric].clamp(0.0, 1.0)
            parts.append(out.cpu().numpy().astype(np.float64))
    return DataMatrix(values=np.concatenate(parts, axis=0), model=cp.transform)


def generate(cp: Checkpoint, n: int, seed: int) -> RawTable:
    """ Sample n synthetic rows and decode them into raw-data space. Deterministic per seed. """
    table = decode(generate_matrix(cp, n, seed), cp.transform)
    logger.info(f'Generated {table.n_rows} synthetic rows with seed {seed}')
    return table
