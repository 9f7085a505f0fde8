# -*- coding: utf-8 -*-
"""
The adversarial training loop.

An epoch is one shuffled sweep over the training matrix in minibatches of `batch_size` rows (a
trailing partial batch is skipped). Every minibatch drives one critic update. After every
`n_critic` critic updates, counted across epochs, the generator is updated once, paired with the
real minibatch of the last critic update.

All randomness of epoch i comes from a generator seeded with derive_seed(seed, i), so a run
resumed from a checkpoint of epoch k continues exactly like an uninterrupted run.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch

from pfwgan.checkpoint import Checkpoint, save_checkpoint
from pfwgan.config import TrainConfig
from pfwgan.data.transform import DataMatrix, TransformModel
from pfwgan.diffcompute import Mode, ParamStore, adam_step, as_tensor, grad
from pfwgan.exceptions import (
    ComputeFault,
    ConfigInvalid,
    DataInvalid,
    FitError,
    LayoutMismatch,
    NonFiniteLoss,
    NonFiniteValue,
)
from pfwgan.losses import FairnessLayout, LossWeights, PrivacyReference, critic_loss, generator_loss
from pfwgan.neighbors import nearest_distances
from pfwgan.networks import CriticArch, GeneratorArch, generator_forward, init_params, sample_noise
from pfwgan.schemas.trainlog import TrainLogRecord, append_record
from pfwgan.utils import derive_seed, torch_generator

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

DIAGNOSTIC_CHECKPOINT = 'diagnostic.ckpt'


def precompute_privacy_reference(train_matrix: DataMatrix, weights: Optional[np.ndarray] = None) -> PrivacyReference:
    """
    Exact weighted distance from every training row to its nearest other training row.

    Duplicated rows get distance 0, so their privacy hinge never fires.
    """
    if train_matrix.n_rows < 2:
        raise DataInvalid(detail='The privacy reference needs at least two training rows')
    if weights is None:
        weights = np.ones(train_matrix.width)
    distances = nearest_distances(train_matrix.values, train_matrix.values, weights=weights, exclude_self=True)
    duplicates = int(np.sum(distances == 0))
    if duplicates:
        logger.warning(f'{duplicates} training rows have an exact duplicate, their privacy hinge stays inactive')
    return PrivacyReference.from_arrays(train_matrix.values, distances, weights)


@dataclass
class _EpochTotals:
    critic_loss: List[float] = field(default_factory=list)
    gradient_penalty: List[float] = field(default_factory=list)
    adv_loss: List[float] = field(default_factory=list)
    privacy_loss: List[float] = field(default_factory=list)
    fairness_loss: List[float] = field(default_factory=list)

    @staticmethod
    def _mean(values: List[float]) -> float:
        return float(np.mean(values)) if values else 0.0

    def record(self, epoch: int, phase_active: bool, wall_time: float) -> TrainLogRecord:
        return TrainLogRecord(
            epoch=epoch,
            critic_loss=self._mean(self.critic_loss),
            adv_loss=self._mean(self.adv_loss),
            privacy_loss=self._mean(self.privacy_loss),
            fairness_loss=self._mean(self.fairness_loss),
            gradient_penalty=self._mean(self.gradient_penalty),
            phase_active=phase_active,
            wall_time=wall_time,
            critic_steps=len(self.critic_loss),
            generator_steps=len(self.adv_loss),
        )


class Trainer(object):
    def __init__(
        self,
        config: TrainConfig,
        train_matrix: DataMatrix,
        privacy_ref: PrivacyReference,
        log_path: Optional[Union[str, Path]] = None,
        checkpoint_dir: Optional[Union[str, Path]] = None,
        resume: Optional[Checkpoint] = None,
    ):
        if train_matrix.n_rows < config.batch_size:
            raise DataInvalid(
                detail=f'Training matrix has {train_matrix.n_rows} rows, fewer than the batch size {config.batch_size}'
            )
        if privacy_ref.n_rows != train_matrix.n_rows:
            raise LayoutMismatch(detail='Privacy reference and training matrix have different row counts')
        self.config = config
        self.transform: TransformModel = train_matrix.model
        self.real = as_tensor(train_matrix.values)
        self.privacy_ref = privacy_ref
        self.weights = LossWeights.from_config(config.loss)
        self.log_path = Path(log_path) if log_path is not None else None
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
        self.layout = self._fairness_layout()
        self.batches_per_epoch = train_matrix.n_rows // config.batch_size

        if resume is None:
            self.generator, self.critic = self._init_stores()
            self.epoch = 0
        else:
            if resume.transform.encoded_width != self.transform.encoded_width:
                raise LayoutMismatch(detail='Checkpoint was trained on another encoded layout')
            if resume.diagnostic and resume.diagnostic.get('mid_epoch'):
                failed = resume.diagnostic.get('failed_epoch')
                raise ConfigInvalid(detail=f'Checkpoint is from inside failed epoch {failed} and can not be resumed')
            self.generator, self.critic = resume.generator, resume.critic
            self.epoch = resume.epoch
            logger.info(f'Resuming training after epoch {self.epoch}')

    def _fairness_layout(self) -> Optional[FairnessLayout]:
        try:
            return FairnessLayout.from_transform(self.transform)
        except FitError:
            if self.weights.lambda_f > 0:
                raise
            return None

    def _init_stores(self):
        arch = self.config.architecture
        generator = init_params(
            GeneratorArch.for_transform(self.transform, arch),
            seed=derive_seed(self.config.seed, 0, 0),
            lr=self.config.lr_generator,
            beta1=self.config.beta1,
            beta2=self.config.beta2,
        )
        critic = init_params(
            CriticArch.for_transform(self.transform, arch),
            seed=derive_seed(self.config.seed, 0, 1),
            lr=self.config.lr_critic,
            beta1=self.config.beta1,
            beta2=self.config.beta2,
        )
        return generator, critic

    def checkpoint(self, diagnostic: Optional[dict] = None) -> Checkpoint:
        return Checkpoint(
            transform=self.transform,
            generator=self.generator,
            critic=self.critic,
            train_config=self.config,
            epoch=self.epoch,
            seed=self.config.seed,
            train_rows=int(self.real.shape[0]),
            diagnostic=diagnostic,
        )

    def run(self) -> Checkpoint:
        logger.info(
            f'Training epochs {self.epoch + 1}..{self.config.epochs}, {self.batches_per_epoch} minibatches per epoch, '
            f'privacy and fairness active for {self.config.pf_start} < epoch < {self.config.pf_end}'
        )
        while self.epoch < self.config.epochs:
            epoch = self.epoch + 1
            try:
                record = self.run_epoch(epoch)
            except (NonFiniteLoss, NonFiniteValue) as e:
                raise self._abort(epoch, e)
            self.epoch = epoch
            if self.log_path is not None:
                append_record(self.log_path, record)
            logger.debug(f'Epoch {epoch}: {record}')
            every = self.config.checkpoint_every
            if every and self.checkpoint_dir is not None and epoch % every == 0 and epoch < self.config.epochs:
                save_checkpoint(self.checkpoint(), self.checkpoint_dir / f'epoch-{epoch:04d}.ckpt')
        return self.checkpoint()

    def run_epoch(self, epoch: int) -> TrainLogRecord:
        config = self.config
        phase_active = config.phase_active(epoch)
        if phase_active and not config.phase_active(epoch - 1):
            logger.info(f'Privacy and fairness terms active from epoch {epoch}')
        elif not phase_active and config.phase_active(epoch - 1):
            logger.info(f'Privacy and fairness terms inactive from epoch {epoch}')

        rng = torch_generator(derive_seed(config.seed, epoch))
        order = torch.randperm(self.real.shape[0], generator=rng)
        totals = _EpochTotals()
        started = time.perf_counter()
        critic_fn = self.critic.module
        noise_dim = self.generator.module.arch.noise_dim

        for k in range(self.batches_per_epoch):
            indices = order[k * config.batch_size : (k + 1) * config.batch_size]
            real = self.real[indices]

            with torch.no_grad():
                z = sample_noise(config.batch_size, noise_dim, rng)
                fake = generator_forward(self.generator, z, Mode.TRAIN, rng)
            terms = critic_loss(critic_fn, real, fake, self.weights, generator=rng)
            adam_step(self.critic, grad(terms.loss, self.critic.parameters))
            totals.critic_loss.append(float(terms.loss.detach()))
            totals.gradient_penalty.append(float(terms.gradient_penalty.detach()))

            critic_updates = (epoch - 1) * self.batches_per_epoch + k + 1
            if critic_updates % config.n_critic:
                continue

            fake = generator_forward(self.generator, sample_noise(config.batch_size, noise_dim, rng), Mode.TRAIN, rng)
            losses = generator_loss(
                critic_fn, fake, self.privacy_ref.select(indices), self.layout, self.weights, phase_active
            )
            adam_step(self.generator, grad(losses.loss, self.generator.parameters))
            totals.adv_loss.append(float(losses.adv.detach()))
            totals.privacy_loss.append(float(losses.privacy.detach()))
            totals.fairness_loss.append(float(losses.fairness.detach()))

        return totals.record(epoch, phase_active, time.perf_counter() - started)

    def _abort(self, epoch: int, error: ComputeFault) -> NonFiniteLoss:
        """
        Save the parameters as they stand inside the failed epoch. The header keeps `epoch` at the last
        finished epoch, but some updates of the failed epoch are already applied, so the diagnostic
        checkpoint is marked `mid_epoch` and refused by resume.
        """
        diagnostic = {'failed_epoch': epoch, 'mid_epoch': True, 'error': error.to_dict()}
        data = dict(error.error_detail.data)
        data['epoch'] = epoch
        if self.checkpoint_dir is not None:
            path = save_checkpoint(self.checkpoint(diagnostic=diagnostic), self.checkpoint_dir / DIAGNOSTIC_CHECKPOINT)
            data['checkpoint'] = str(path)
            logger.error(f'Non-finite value in epoch {epoch}, diagnostic checkpoint written to {path}')
        else:
            logger.error(f'Non-finite value in epoch {epoch}, no checkpoint directory for a diagnostic checkpoint')
        return NonFiniteLoss(detail=f'Training aborted in epoch {epoch}: {error.detail}', data=data)


def train(
    config: TrainConfig,
    train_matrix: DataMatrix,
    privacy_ref: PrivacyReference,
    log_path: Optional[Union[str, Path]] = None,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    resume: Optional[Checkpoint] = None,
) -> Checkpoint:
    """
    Train generator and critic for config.epochs epochs and return the final checkpoint.

    :raise NonFiniteLoss: a loss or gradient went NaN or infinite, parameters are those from before the step
    """
    trainer = Trainer(
        config, train_matrix, privacy_ref, log_path=log_path, checkpoint_dir=checkpoint_dir, resume=resume
    )
    return trainer.run()


def param_snapshot(store: ParamStore) -> List[torch.Tensor]:
    return [p.detach().clone() for p in store.parameters]
