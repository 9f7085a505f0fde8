# -*- coding: utf-8 -*-
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Type, Union

import torch
from torch import nn

from pfwgan.config import ArchitectureConfig
from pfwgan.data.table import ColumnKind
from pfwgan.data.transform import TransformModel
from pfwgan.diffcompute import (
    LEAKY_SLOPE,
    Mode,
    ParamStore,
    batch_norm,
    gumbel_softmax,
    leaky_relu,
    linear,
    one_hot_argmax,
    relu,
)
from pfwgan.exceptions import ShapeError
from pfwgan.utils import torch_generator

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

NUMERIC_BLOCK = 'numeric'
CATEGORICAL_BLOCK = 'categorical'


@dataclass(frozen=True)
class GeneratorArch:
    """
    Generator shape. `blocks` lists (kind, width) in encoded column order, so the output of
    every head can be placed where the transform expects it.
    """

    noise_dim: int
    hidden_dims: Tuple[int, ...]
    blocks: Tuple[Tuple[str, int], ...]
    temperature: float

    @property
    def numeric_head_width(self) -> int:
        return sum(1 for kind, _ in self.blocks if kind == NUMERIC_BLOCK)

    @property
    def categorical_heads(self) -> Tuple[int, ...]:
        return tuple(width for kind, width in self.blocks if kind == CATEGORICAL_BLOCK)

    @property
    def output_width(self) -> int:
        return sum(width for _, width in self.blocks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'noise_dim': self.noise_dim,
            'hidden_dims': list(self.hidden_dims),
            'blocks': [[kind, width] for kind, width in self.blocks],
            'temperature': self.temperature,
        }

    @classmethod
    def from_dict(cls: Type[GeneratorArch], data: Mapping[str, Any]) -> GeneratorArch:
        return cls(
            noise_dim=int(data['noise_dim']),
            hidden_dims=tuple(int(d) for d in data['hidden_dims']),
            blocks=tuple((str(kind), int(width)) for kind, width in data['blocks']),
            temperature=float(data['temperature']),
        )

    @classmethod
    def for_transform(cls: Type[GeneratorArch], model: TransformModel, config: ArchitectureConfig) -> GeneratorArch:
        blocks = tuple(
            (NUMERIC_BLOCK if span.kind is ColumnKind.NUMERIC else CATEGORICAL_BLOCK, span.width)
            for span in model.block_layout
        )
        return cls(
            noise_dim=config.noise_dim,
            hidden_dims=tuple(config.generator_hidden),
            blocks=blocks,
            temperature=config.temperature,
        )


@dataclass(frozen=True)
class CriticArch:
    input_width: int
    hidden_dims: Tuple[int, ...]
    leaky_slope: float = LEAKY_SLOPE

    def to_dict(self) -> Dict[str, Any]:
        return {'input_width': self.input_width, 'hidden_dims': list(self.hidden_dims), 'leaky_slope': self.leaky_slope}

    @classmethod
    def from_dict(cls: Type[CriticArch], data: Mapping[str, Any]) -> CriticArch:
        return cls(
            input_width=int(data['input_width']),
            hidden_dims=tuple(int(d) for d in data['hidden_dims']),
            leaky_slope=float(data.get('leaky_slope', LEAKY_SLOPE)),
        )

    @classmethod
    def for_transform(cls: Type[CriticArch], model: TransformModel, config: ArchitectureConfig) -> CriticArch:
        return cls(
            input_width=model.encoded_width, hidden_dims=tuple(config.critic_hidden), leaky_slope=config.leaky_slope
        )


class Dense(nn.Module):
    """ linear, optionally followed by batch normalization. Weight shape is (fan_in, fan_out). """

    def __init__(self, fan_in: int, fan_out: int, normalize: bool = False):
        super().__init__()
        dtype = torch.get_default_dtype()
        self.normalize = normalize
        self.weight = nn.Parameter(torch.zeros(fan_in, fan_out, dtype=dtype))
        self.bias = nn.Parameter(torch.zeros(fan_out, dtype=dtype))
        if normalize:
            self.gamma = nn.Parameter(torch.ones(fan_out, dtype=dtype))
            self.beta = nn.Parameter(torch.zeros(fan_out, dtype=dtype))
            self.register_buffer('running_mean', torch.zeros(fan_out, dtype=dtype))
            self.register_buffer('running_var', torch.ones(fan_out, dtype=dtype))

    @property
    def fan_in(self) -> int:
        return int(self.weight.shape[0])

    def forward(self, x: torch.Tensor, mode: Mode = Mode.TRAIN) -> torch.Tensor:
        out = linear(x, self.weight, self.bias)
        if self.normalize:
            out = batch_norm(out, self.gamma, self.beta, mode, self.running_mean, self.running_var)
        return out


class Generator(nn.Module):
    def __init__(self, arch: GeneratorArch):
        super().__init__()
        self.arch = arch
        widths = [arch.noise_dim, *arch.hidden_dims]
        self.trunk = nn.ModuleList([Dense(a, b, normalize=True) for a, b in zip(widths[:-1], widths[1:])])
        self.numeric_head: Optional[Dense] = None
        if arch.numeric_head_width:
            self.numeric_head = Dense(widths[-1], arch.numeric_head_width, normalize=True)
        self.categorical_heads = nn.ModuleList([Dense(widths[-1], width) for width in arch.categorical_heads])

    def forward(
        self,
        z: torch.Tensor,
        mode: Mode = Mode.TRAIN,
        generator: Optional[torch.Generator] = None,
        noise: Optional[Sequence[torch.Tensor]] = None,
    ) -> torch.Tensor:
        if z.dim() != 2 or z.shape[1] != self.arch.noise_dim:
            raise ShapeError(detail=f'Noise of shape {tuple(z.shape)} does not match noise_dim {self.arch.noise_dim}')
        mode = Mode(mode)
        h = z
        for layer in self.trunk:
            h = relu(layer(h, mode))

        numeric: Optional[torch.Tensor] = None
        if self.numeric_head is not None:
            numeric = relu(self.numeric_head(h, mode))
            if mode is Mode.EVAL:
                numeric = numeric.clamp(max=1.0)

        heads: List[torch.Tensor] = []
        for i, head in enumerate(self.categorical_heads):
            logits = head(h, mode)
            if mode is Mode.TRAIN:
                heads.append(
                    gumbel_softmax(
                        logits, self.arch.temperature, generator=generator, noise=None if noise is None else noise[i]
                    )
                )
            else:
                heads.append(one_hot_argmax(logits))

        parts: List[torch.Tensor] = []
        numeric_col = 0
        head_idx = 0
        for kind, _ in self.arch.blocks:
            if kind == NUMERIC_BLOCK:
                assert numeric is not None  # please mypy
                parts.append(numeric[:, numeric_col : numeric_col + 1])
                numeric_col += 1
            else:
                parts.append(heads[head_idx])
                head_idx += 1
        return torch.cat(parts, dim=1)


class Critic(nn.Module):
    """ linear + leaky relu per hidden layer, a final linear score without activation and no batch norm. """

    def __init__(self, arch: CriticArch):
        super().__init__()
        self.arch = arch
        widths = [arch.input_width, *arch.hidden_dims]
        self.hidden = nn.ModuleList([Dense(a, b) for a, b in zip(widths[:-1], widths[1:])])
        self.score = Dense(widths[-1], 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 2 or x.shape[1] != self.arch.input_width:
            raise ShapeError(
                detail=f'Batch of shape {tuple(x.shape)} does not match input width {self.arch.input_width}'
            )
        h = x
        for layer in self.hidden:
            h = leaky_relu(layer(h), self.arch.leaky_slope)
        return self.score(h)


Arch = Union[GeneratorArch, CriticArch]


def build_network(arch: Arch) -> nn.Module:
    if isinstance(arch, GeneratorArch):
        return Generator(arch)
    return Critic(arch)


def kaiming_uniform_(weight: torch.Tensor, generator: torch.Generator) -> None:
    """ U(-b, b) with b = sqrt(6 / fan_in), giving std sqrt(2 / fan_in). """
    bound = math.sqrt(6.0 / weight.shape[0])
    with torch.no_grad():
        weight.copy_((torch.rand(weight.shape, generator=generator, dtype=weight.dtype) * 2.0 - 1.0) * bound)


def init_params(arch: Arch, seed: int, lr: float = 1e-4, beta1: float = 0.5, beta2: float = 0.999) -> ParamStore:
    """
    Build the network for arch and initialize it deterministically from seed.

    Weights are Kaiming-uniform over fan-in, biases and beta 0, gamma 1.
    """
    network = build_network(arch)
    generator = torch_generator(seed)
    for name, module in network.named_modules():
        if isinstance(module, Dense):
            kaiming_uniform_(module.weight, generator)
    logger.debug(f'Initialized {type(network).__name__} with {sum(p.numel() for p in network.parameters())} params')
    return ParamStore(network, lr=lr, beta1=beta1, beta2=beta2)


def generator_forward(
    params: ParamStore,
    z: torch.Tensor,
    mode: Mode = Mode.TRAIN,
    generator: Optional[torch.Generator] = None,
    noise: Optional[Sequence[torch.Tensor]] = None,
) -> torch.Tensor:
    return params.module(z, mode=mode, generator=generator, noise=noise)


def critic_forward(params: ParamStore, batch: torch.Tensor) -> torch.Tensor:
    return params.module(batch)


def sample_noise(batch: int, noise_dim: int, generator: torch.Generator) -> torch.Tensor:
    """ z ~ N(0, I). """
    return torch.randn(batch, noise_dim, generator=generator, dtype=torch.get_default_dtype())
