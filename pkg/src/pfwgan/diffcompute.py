# -*- coding: utf-8 -*-
"""
Dense differentiable operations on top of torch autograd.

The gradient penalty needs the derivative of an input-gradient with respect to the critic
parameters, which is a double reverse pass (`create_graph=True` on the first pass).
"""
from __future__ import annotations

import logging
from collections import OrderedDict
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import torch
import torch.nn.functional as F
from torch import nn

from pfwgan.exceptions import ContractError, DegenerateBatch, NonFiniteValue, ShapeError

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

BATCH_NORM_MOMENTUM = 0.9
BATCH_NORM_EPS = 1e-5
ADAM_EPS = 1e-8
LEAKY_SLOPE = 0.01

CriticFn = Callable[[torch.Tensor], torch.Tensor]


class Mode(str, Enum):
    TRAIN = 'train'
    EVAL = 'eval'


def configure_runtime(deterministic: bool, num_threads: int = 0) -> None:
    """
    Select 64-bit deterministic kernels for tests and reproduction runs, 32-bit otherwise.

    num_threads = 0 leaves the torch default in place.
    """
    torch.set_default_dtype(torch.float64 if deterministic else torch.float32)
    torch.use_deterministic_algorithms(deterministic)
    if num_threads > 0:
        torch.set_num_threads(num_threads)
    logger.debug(
        f'Compute runtime: dtype {torch.get_default_dtype()}, deterministic {deterministic}, '
        f'threads {torch.get_num_threads()}'
    )


def as_tensor(values, dtype: Optional[torch.dtype] = None) -> torch.Tensor:
    return torch.as_tensor(values, dtype=dtype or torch.get_default_dtype())


def check_finite(label: str, *tensors: Optional[torch.Tensor]) -> None:
    """ :raise NonFiniteValue: some entry is NaN or infinite """
    for tensor in tensors:
        if tensor is not None and not bool(torch.isfinite(tensor).all()):
            raise NonFiniteValue(detail=f'Non-finite value in {label}', data={'where': label})


def linear(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor) -> torch.Tensor:
    """ x @ weight + bias, with weight of shape (in, out). """
    if x.dim() != 2 or weight.dim() != 2 or x.shape[1] != weight.shape[0]:
        raise ShapeError(detail=f'Can not multiply input {tuple(x.shape)} with weight {tuple(weight.shape)}')
    if bias.shape != (weight.shape[1],):
        raise ShapeError(detail=f'Bias {tuple(bias.shape)} does not match output width {weight.shape[1]}')
    return torch.addmm(bias, x, weight)


def relu(x: torch.Tensor) -> torch.Tensor:
    return torch.relu(x)


def leaky_relu(x: torch.Tensor, slope: float = LEAKY_SLOPE) -> torch.Tensor:
    return F.leaky_relu(x, negative_slope=slope)


def batch_norm(
    x: torch.Tensor,
    gamma: torch.Tensor,
    beta: torch.Tensor,
    mode: Mode,
    running_mean: torch.Tensor,
    running_var: torch.Tensor,
    momentum: float = BATCH_NORM_MOMENTUM,
    eps: float = BATCH_NORM_EPS,
) -> torch.Tensor:
    """
    Batch normalization. `momentum` is the weight kept on the old running statistics, so torch
    receives 1 - momentum.

    :raise DegenerateBatch: fewer than two rows in train mode
    """
    training = Mode(mode) is Mode.TRAIN
    if training and x.shape[0] < 2:
        raise DegenerateBatch(data={'rows': int(x.shape[0])})
    return F.batch_norm(
        x, running_mean, running_var, weight=gamma, bias=beta, training=training, momentum=1.0 - momentum, eps=eps
    )


def sample_gumbel(shape: Sequence[int], generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """ i.i.d. Gumbel(0, 1) noise, -log(-log(U)). """
    dtype = torch.get_default_dtype()
    tiny = torch.finfo(dtype).tiny
    u = torch.rand(tuple(shape), generator=generator, dtype=dtype)
    u = u.clamp(min=tiny, max=1.0 - torch.finfo(dtype).eps)
    return -torch.log(-torch.log(u))


def gumbel_softmax(
    logits: torch.Tensor,
    temperature: float,
    generator: Optional[torch.Generator] = None,
    noise: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    softmax((logits + g) / temperature) over one categorical block.

    Pass `noise` to hold g fixed, otherwise it is drawn from `generator`.
    """
    if temperature <= 0:
        raise ContractError(detail=f'Gumbel-softmax temperature must be positive, got {temperature}')
    if noise is None:
        noise = sample_gumbel(logits.shape, generator=generator).to(logits.dtype)
    elif noise.shape != logits.shape:
        raise ShapeError(detail=f'Noise {tuple(noise.shape)} does not match logits {tuple(logits.shape)}')
    return torch.softmax((logits + noise) / temperature, dim=1)


def one_hot_argmax(logits: torch.Tensor) -> torch.Tensor:
    """ Exact one-hot rows at the argmax; ties resolve to the lowest index. """
    index = torch.argmax(logits, dim=1, keepdim=True)
    return torch.zeros_like(logits).scatter_(1, index, 1.0)


def grad(
    output: torch.Tensor, wrt: Sequence[torch.Tensor], create_graph: bool = False, retain_graph: Optional[bool] = None
) -> List[torch.Tensor]:
    """
    Reverse-mode derivatives of a scalar. Inputs the output does not depend on get zeros.

    :raise ContractError: output is not a scalar
    """
    if output.numel() != 1:
        raise ContractError(detail=f'Gradient requested of a non-scalar of shape {tuple(output.shape)}')
    wrt = list(wrt)
    if not output.requires_grad:
        return [torch.zeros_like(t) for t in wrt]
    grads = torch.autograd.grad(
        output.reshape(()), wrt, create_graph=create_graph, retain_graph=retain_graph, allow_unused=True
    )
    return [torch.zeros_like(t) if g is None else g for g, t in zip(grads, wrt)]


def safe_norm(x: torch.Tensor) -> torch.Tensor:
    """ Row-wise L2 norm whose derivative is 0 (not NaN) at a zero row. """
    squared = (x * x).sum(dim=1)
    positive = squared > 0
    return torch.where(positive, torch.sqrt(torch.where(positive, squared, torch.ones_like(squared))), 0.0 * squared)


def input_gradient(critic: CriticFn, interpolates: torch.Tensor) -> torch.Tensor:
    """ Per-row gradient of the critic score with respect to its input, kept differentiable. """
    x = interpolates.detach().requires_grad_(True)
    scores = critic(x)
    if not scores.requires_grad:
        return torch.zeros_like(x)
    (gradient,) = torch.autograd.grad(scores.sum(), x, create_graph=True, allow_unused=True)
    if gradient is None:
        return torch.zeros_like(x)
    return gradient


def gradient_penalty(critic: CriticFn, interpolates: torch.Tensor) -> torch.Tensor:
    """ mean over rows of (||grad_x C(x)||_2 - 1)^2, differentiable in the critic parameters. """
    norms = safe_norm(input_gradient(critic, interpolates))
    return ((norms - 1.0) ** 2).mean()


def grad_penalty_grad(
    critic: CriticFn, params: Sequence[torch.Tensor], interpolates: torch.Tensor
) -> Tuple[torch.Tensor, List[torch.Tensor]]:
    penalty = gradient_penalty(critic, interpolates)
    return penalty.detach(), grad(penalty, params)


class ParamStore(object):
    """
    Named parameters of one network with their Adam state.

    Iteration order follows `module.named_parameters()`, which is fixed by the module definition.
    """

    def __init__(self, module: nn.Module, lr: float, beta1: float, beta2: float):
        self.module = module
        self.optimizer = torch.optim.Adam(module.parameters(), lr=lr, betas=(beta1, beta2), eps=ADAM_EPS)

    @property
    def parameters(self) -> List[torch.Tensor]:
        return [p for _, p in self.module.named_parameters()]

    def named_parameters(self) -> 'OrderedDict[str, torch.Tensor]':
        return OrderedDict(self.module.named_parameters())

    def named_buffers(self) -> 'OrderedDict[str, torch.Tensor]':
        return OrderedDict(self.module.named_buffers())

    def adam_state(self) -> Dict[str, Dict[str, torch.Tensor]]:
        """ exp_avg, exp_avg_sq and step per parameter name, empty before the first step. """
        res: Dict[str, Dict[str, torch.Tensor]] = {}
        for name, param in self.module.named_parameters():
            state = self.optimizer.state.get(param)
            if state:
                res[name] = state
        return res

    def load_adam_state(self, state: Dict[str, Dict[str, torch.Tensor]]) -> None:
        names = list(self.named_parameters())
        optimizer_state = self.optimizer.state_dict()
        optimizer_state['state'] = {
            names.index(name): {key: value.clone() for key, value in entry.items()} for name, entry in state.items()
        }
        self.optimizer.load_state_dict(optimizer_state)

    def set_hyperparameters(
        self, lr: Optional[float] = None, beta1: Optional[float] = None, beta2: Optional[float] = None
    ) -> None:
        for group in self.optimizer.param_groups:
            if lr is not None:
                group['lr'] = lr
            if beta1 is not None or beta2 is not None:
                old1, old2 = group['betas']
                group['betas'] = (old1 if beta1 is None else beta1, old2 if beta2 is None else beta2)


def adam_step(
    params: ParamStore,
    grads: Sequence[torch.Tensor],
    lr: Optional[float] = None,
    beta1: Optional[float] = None,
    beta2: Optional[float] = None,
) -> ParamStore:
    """
    One bias-corrected Adam update (eps 1e-8) of every parameter in the store.

    :raise ShapeError: a gradient does not match its parameter
    :raise NonFiniteValue: a gradient holds NaN or Inf, parameters are left untouched
    """
    tensors = params.parameters
    if len(grads) != len(tensors):
        raise ShapeError(detail=f'Got {len(grads)} gradients for {len(tensors)} parameters')
    for name, (param, gradient) in zip(params.named_parameters(), zip(tensors, grads)):
        if gradient.shape != param.shape:
            raise ShapeError(detail=f'Gradient {tuple(gradient.shape)} does not match {name} {tuple(param.shape)}')
    check_finite('parameter gradients', *grads)
    params.set_hyperparameters(lr=lr, beta1=beta1, beta2=beta2)
    for param, gradient in zip(tensors, grads):
        param.grad = gradient.detach().to(param.dtype).clone()
    params.optimizer.step()
    for param in tensors:
        param.grad = None
    return params
