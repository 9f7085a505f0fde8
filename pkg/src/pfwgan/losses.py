# -*- coding: utf-8 -*-
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple, Type

import numpy as np
import torch

from pfwgan.config import LossWeightsConfig, PrivacyForm, PrivacyVariant
from pfwgan.data.transform import TransformModel
from pfwgan.diffcompute import CriticFn, as_tensor, gradient_penalty, safe_norm
from pfwgan.exceptions import ConfigInvalid, ContractError, FitError, NonFiniteLoss, ShapeError

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LossWeights:
    lambda_gp: float = 10.0
    lambda_p: float = 0.2
    lambda_f: float = 1.0
    privacy_variant: PrivacyVariant = PrivacyVariant.L2
    privacy_form: PrivacyForm = PrivacyForm.HINGE
    privacy_clamp: Tuple[float, float] = (0.0, 5.0)
    fairness_clamp: Tuple[float, float] = (0.0, 1.0)
    epsilon: float = 1e-8

    def __post_init__(self):
        if min(self.lambda_gp, self.lambda_p, self.lambda_f) < 0:
            raise ConfigInvalid(detail='Loss weights must not be negative')
        for lo, hi in (self.privacy_clamp, self.fairness_clamp):
            if lo > hi:
                raise ConfigInvalid(detail=f'Clamp bounds ({lo}, {hi}) are not ordered')
        if self.epsilon <= 0:
            raise ConfigInvalid(detail='epsilon must be positive')

    @classmethod
    def from_config(cls: Type[LossWeights], config: LossWeightsConfig) -> LossWeights:
        return cls(
            lambda_gp=config.lambda_gp,
            lambda_p=config.lambda_p,
            lambda_f=config.lambda_f,
            privacy_variant=config.privacy_variant,
            privacy_form=config.privacy_form,
            privacy_clamp=tuple(config.privacy_clamp),  # type: ignore
            fairness_clamp=tuple(config.fairness_clamp),  # type: ignore
            epsilon=config.epsilon,
        )


@dataclass(frozen=True, eq=False)
class PrivacyReference:
    """
    Real rows in encoded space, each with the weighted distance to its nearest other real row.

    The trainer keeps one reference over the whole training split and selects the rows of each
    real minibatch from it.
    """

    batch: torch.Tensor
    distances: torch.Tensor
    weights: torch.Tensor

    def __post_init__(self):
        if self.batch.dim() != 2 or self.distances.shape != (self.batch.shape[0],):
            raise ShapeError(detail='Privacy reference needs one distance per real row')
        if self.weights.shape != (self.batch.shape[1],):
            raise ShapeError(detail='Privacy reference needs one weight per encoded coordinate')
        if bool((self.weights <= 0).any()):
            raise ConfigInvalid(detail='Feature weights must be strictly positive')

    @property
    def n_rows(self) -> int:
        return int(self.batch.shape[0])

    def select(self, indices: torch.Tensor) -> PrivacyReference:
        return PrivacyReference(batch=self.batch[indices], distances=self.distances[indices], weights=self.weights)

    @classmethod
    def from_arrays(
        cls: Type[PrivacyReference], batch: np.ndarray, distances: np.ndarray, weights: Optional[np.ndarray] = None
    ) -> PrivacyReference:
        if weights is None:
            weights = np.ones(batch.shape[1])
        return cls(batch=as_tensor(batch), distances=as_tensor(distances), weights=as_tensor(weights))


@dataclass(frozen=True)
class FairnessLayout:
    """ Absolute encoded indices of the privileged sensitive category and the favorable target category. """

    privileged_index: int
    favorable_index: int

    @classmethod
    def from_transform(cls: Type[FairnessLayout], model: TransformModel) -> FairnessLayout:
        sensitive, target = model.schema.sensitive, model.schema.target
        privileged = model.category_index(sensitive.column, sensitive.value)
        favorable = model.category_index(target.column, target.value)
        if privileged is None:
            raise FitError(detail=f'Privileged value {sensitive.value!r} never occurs in {sensitive.column!r}')
        if favorable is None:
            raise FitError(detail=f'Favorable value {target.value!r} never occurs in {target.column!r}')
        return cls(privileged_index=privileged, favorable_index=favorable)


class CriticLoss(NamedTuple):
    loss: torch.Tensor
    gradient_penalty: torch.Tensor


class GeneratorLoss(NamedTuple):
    loss: torch.Tensor
    adv: torch.Tensor
    privacy: torch.Tensor
    fairness: torch.Tensor


def _zero(like: torch.Tensor) -> torch.Tensor:
    return torch.zeros((), dtype=like.dtype)


def ensure_finite(label: str, **terms: torch.Tensor) -> None:
    """ :raise NonFiniteLoss: some term is NaN or infinite, the breakdown goes in the error data """
    breakdown: Dict[str, float] = {name: float(value.detach()) for name, value in terms.items()}
    if not all(np.isfinite(v) for v in breakdown.values()):
        raise NonFiniteLoss(detail=f'Non-finite {label}', data={'terms': breakdown})


def critic_loss(
    critic: CriticFn,
    real: torch.Tensor,
    fake: torch.Tensor,
    weights: LossWeights,
    generator: Optional[torch.Generator] = None,
    mix: Optional[torch.Tensor] = None,
) -> CriticLoss:
    """
    mean C(fake) - mean C(real) + lambda_gp * penalty at x = e * real + (1 - e) * fake, e ~ U[0, 1] per row.

    :raise NonFiniteLoss: any term is NaN or infinite
    """
    if real.shape != fake.shape:
        raise ShapeError(detail=f'Real batch {tuple(real.shape)} and fake batch {tuple(fake.shape)} differ')
    fake = fake.detach()
    if mix is None:
        mix = torch.rand(real.shape[0], 1, generator=generator, dtype=real.dtype)
    interpolates = mix * real + (1.0 - mix) * fake
    fake_score = critic(fake).mean()
    real_score = critic(real).mean()
    penalty = gradient_penalty(critic, interpolates)
    loss = fake_score - real_score + weights.lambda_gp * penalty
    ensure_finite('critic loss', fake_score=fake_score, real_score=real_score, gradient_penalty=penalty)
    return CriticLoss(loss=loss, gradient_penalty=penalty)


def generator_adv_loss(critic: CriticFn, fake: torch.Tensor) -> torch.Tensor:
    return -critic(fake).mean()


def pair_distances(real: torch.Tensor, fake: torch.Tensor, ref: PrivacyReference, variant: PrivacyVariant):
    """
    Pair real and fake rows and return (weighted distances, reference distance of each pair).

    L1 pairs by batch index. L2 pairs every fake row with its nearest real row, ties to the lowest index.
    """
    w = ref.weights.to(fake.dtype)
    if PrivacyVariant(variant) is PrivacyVariant.L1:
        if real.shape != fake.shape:
            raise ShapeError(detail='Index pairing needs as many fake rows as real rows')
        return safe_norm(w * (real - fake)), ref.distances
    with torch.no_grad():
        nearest = torch.cdist(w * fake, w * real).argmin(dim=1)
    return safe_norm(w * (real[nearest] - fake)), ref.distances[nearest]


def privacy_loss(fake: torch.Tensor, ref: PrivacyReference, weights: LossWeights) -> torch.Tensor:
    """
    lambda_p * clamp(mean max(0, d - dist)) over the pairs. The hinge fires when a fake row sits
    closer to a real row than that row's nearest real neighbour.

    The literal form uses lambda_p * clamp(mean dist) instead.
    """
    if weights.lambda_p == 0:
        return _zero(fake)
    real = ref.batch.to(fake.dtype)
    dist, reference = pair_distances(real, fake, ref, weights.privacy_variant)
    if PrivacyForm(weights.privacy_form) is PrivacyForm.LITERAL:
        term = dist.mean()
    else:
        term = torch.relu(reference.to(fake.dtype) - dist).mean()
    lo, hi = weights.privacy_clamp
    return weights.lambda_p * term.clamp(lo, hi)


def group_rates(fake: torch.Tensor, layout: FairnessLayout, epsilon: float) -> Tuple[torch.Tensor, torch.Tensor]:
    """ Soft favorable-outcome rates (rate_0, rate_1) of the unprivileged and privileged groups. """
    p_s1 = fake[:, layout.privileged_index]
    p_y1 = fake[:, layout.favorable_index]
    p_s0 = 1.0 - p_s1
    rate_0 = (p_s0 * p_y1).sum() / (p_s0.sum() + epsilon)
    rate_1 = (p_s1 * p_y1).sum() / (p_s1.sum() + epsilon)
    return rate_0, rate_1


def fairness_loss(fake: torch.Tensor, layout: Optional[FairnessLayout], weights: LossWeights) -> torch.Tensor:
    """ lambda_f * clamp(|rate_0 - rate_1|) on the soft categorical blocks of a generated batch. """
    if weights.lambda_f == 0:
        return _zero(fake)
    if layout is None:
        raise ContractError(detail='Fairness loss needs the privileged and favorable category indices')
    rate_0, rate_1 = group_rates(fake, layout, weights.epsilon)
    lo, hi = weights.fairness_clamp
    return weights.lambda_f * torch.abs(rate_0 - rate_1).clamp(lo, hi)


def combined_generator_loss(
    adv: torch.Tensor, privacy: torch.Tensor, fairness: torch.Tensor, phase_active: bool
) -> torch.Tensor:
    if not phase_active:
        return adv
    return adv + privacy + fairness


def generator_loss(
    critic: CriticFn,
    fake: torch.Tensor,
    ref: PrivacyReference,
    layout: Optional[FairnessLayout],
    weights: LossWeights,
    phase_active: bool,
) -> GeneratorLoss:
    """
    Every generator term for one update. Privacy and fairness are only computed inside the phase window.

    :raise NonFiniteLoss: any term is NaN or infinite
    """
    adv = generator_adv_loss(critic, fake)
    if phase_active:
        privacy = privacy_loss(fake, ref, weights)
        fairness = fairness_loss(fake, layout, weights)
    else:
        privacy = fairness = _zero(fake)
    ensure_finite('generator loss', adv=adv, privacy=privacy, fairness=fairness)
    loss = combined_generator_loss(adv, privacy, fairness, phase_active)
    return GeneratorLoss(loss=loss, adv=adv, privacy=privacy, fairness=fairness)
