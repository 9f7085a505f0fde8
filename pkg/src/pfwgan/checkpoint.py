# -*- coding: utf-8 -*-
"""
Checkpoint file format:

    b'PFWG' | version u32 LE | header length u64 LE | UTF-8 JSON header (sorted keys) |
    tensors, contiguous little-endian, in header order | CRC-32 u32 LE of everything before it

Each tensor is stored in its runtime dtype, '<f4' in production and '<f8' in 64-bit
deterministic mode, and the header declares the dtype and shape of every tensor.
"""
from __future__ import annotations

import json
import logging
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import torch
from marshmallow import ValidationError

from pfwgan.config import TrainConfig
from pfwgan.data.table import TableSchema
from pfwgan.data.transform import TransformModel
from pfwgan.diffcompute import ParamStore
from pfwgan.exceptions import ChecksumFailure, CheckpointError, IOFault, TruncatedCheckpoint, VersionMismatch
from pfwgan.networks import CriticArch, GeneratorArch, init_params
from pfwgan.schemas.checkpoint import CheckpointHeader, CheckpointHeaderSchema, TensorEntry
from pfwgan.utils import atomic_write_bytes

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

MAGIC = b'PFWG'
FORMAT_VERSION = 1
_PREFIX = struct.Struct('<4sIQ')
_CRC = struct.Struct('<I')

_DTYPES = {torch.float32: '<f4', torch.float64: '<f8'}
_ADAM_KEYS = ('exp_avg', 'exp_avg_sq')


@dataclass(eq=False)
class Checkpoint:
    transform: TransformModel
    generator: ParamStore
    critic: ParamStore
    train_config: TrainConfig
    epoch: int
    seed: int
    train_rows: int = 0
    diagnostic: Optional[Dict[str, Any]] = None

    @property
    def schema(self) -> TableSchema:
        return self.transform.schema

    @property
    def generator_arch(self) -> GeneratorArch:
        return self.generator.module.arch

    @property
    def critic_arch(self) -> CriticArch:
        return self.critic.module.arch


def _store_tensors(prefix: str, store: ParamStore) -> Tuple[List[Tuple[str, torch.Tensor]], Dict[str, int]]:
    tensors: List[Tuple[str, torch.Tensor]] = []
    steps: Dict[str, int] = {}
    for name, param in store.named_parameters().items():
        tensors.append((f'{prefix}/param/{name}', param))
    for name, buffer in store.named_buffers().items():
        tensors.append((f'{prefix}/buffer/{name}', buffer))
    for name, state in store.adam_state().items():
        steps[f'{prefix}/{name}'] = int(state['step'])
        for key in _ADAM_KEYS:
            tensors.append((f'{prefix}/adam/{name}/{key}', state[key]))
    return tensors, steps


def encode_checkpoint(cp: Checkpoint) -> bytes:
    tensors: List[Tuple[str, torch.Tensor]] = []
    steps: Dict[str, int] = {}
    for prefix, store in (('generator', cp.generator), ('critic', cp.critic)):
        store_tensors, store_steps = _store_tensors(prefix, store)
        tensors.extend(store_tensors)
        steps.update(store_steps)

    entries = []
    payload = bytearray()
    for name, tensor in tensors:
        if tensor.dtype not in _DTYPES:
            raise CheckpointError(detail=f'Can not store tensor {name} of dtype {tensor.dtype}')
        dtype = _DTYPES[tensor.dtype]
        entries.append(TensorEntry(name=name, dtype=dtype, shape=list(tensor.shape)))
        payload += np.ascontiguousarray(tensor.detach().cpu().numpy(), dtype=np.dtype(dtype)).tobytes()

    header = CheckpointHeader(
        format_version=FORMAT_VERSION,
        epoch=cp.epoch,
        seed=cp.seed,
        train_rows=cp.train_rows,
        table_schema=cp.schema.to_dict(),
        transform=cp.transform.to_dict(),
        generator_arch=cp.generator_arch.to_dict(),
        critic_arch=cp.critic_arch.to_dict(),
        train_config=json.loads(cp.train_config.json()),
        adam_steps=steps,
        tensors=entries,
        diagnostic=cp.diagnostic,
    )
    header_bytes = json.dumps(CheckpointHeaderSchema().dump(header), sort_keys=True, separators=(',', ':')).encode(
        'utf-8'
    )
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + bytes(payload)
    return body + _CRC.pack(zlib.crc32(body) & 0xFFFFFFFF)


def save_checkpoint(cp: Checkpoint, path: Union[str, Path]) -> Path:
    """ Write the checkpoint atomically (temporary file, then rename). """
    data = encode_checkpoint(cp)
    try:
        atomic_write_bytes(path, data)
    except OSError as e:
        raise IOFault(detail=f'Could not write checkpoint {path}: {e}')
    logger.info(f'Wrote checkpoint for epoch {cp.epoch} to {path} ({len(data)} bytes)')
    return Path(path)


def decode_checkpoint(data: bytes) -> Checkpoint:
    """
    :raise VersionMismatch: bad magic or unsupported version
    :raise TruncatedCheckpoint: the file ends before the declared content
    :raise ChecksumFailure: the CRC does not match or trailing bytes follow the content
    """
    if len(data) < _PREFIX.size:
        raise TruncatedCheckpoint(detail=f'Checkpoint of {len(data)} bytes is shorter than its prefix')
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise VersionMismatch(detail=f'Not a checkpoint file (magic {magic!r})')
    if version != FORMAT_VERSION:
        raise VersionMismatch(detail=f'Checkpoint format version {version}, expected {FORMAT_VERSION}')
    header_end = _PREFIX.size + header_len
    if len(data) < header_end:
        raise TruncatedCheckpoint(detail='Checkpoint ends inside its header')
    try:
        header: CheckpointHeader = CheckpointHeaderSchema().load(json.loads(data[_PREFIX.size : header_end]))
    except (ValueError, ValidationError) as e:
        raise ChecksumFailure(detail=f'Checkpoint header is corrupt: {e}')

    expected = header_end + sum(entry.nbytes for entry in header.tensors) + _CRC.size
    if len(data) < expected:
        raise TruncatedCheckpoint(detail=f'Checkpoint has {len(data)} bytes, expected {expected}')
    if len(data) > expected:
        raise ChecksumFailure(detail=f'Checkpoint has {len(data) - expected} trailing bytes')
    (crc,) = _CRC.unpack_from(data, expected - _CRC.size)
    if crc != zlib.crc32(data[: expected - _CRC.size]) & 0xFFFFFFFF:
        raise ChecksumFailure()

    tensors: Dict[str, torch.Tensor] = {}
    offset = header_end
    for entry in header.tensors:
        array = np.frombuffer(data, dtype=np.dtype(entry.dtype), count=entry.nbytes // entry.itemsize, offset=offset)
        tensors[entry.name] = torch.from_numpy(array.reshape(entry.shape).astype(array.dtype.newbyteorder('=')))
        offset += entry.nbytes

    train_config = TrainConfig.parse_obj(header.train_config)
    generator = _restore_store(
        'generator', GeneratorArch.from_dict(header.generator_arch), train_config, tensors, header.adam_steps
    )
    critic = _restore_store(
        'critic', CriticArch.from_dict(header.critic_arch), train_config, tensors, header.adam_steps
    )
    transform = TransformModel.from_dict(header.transform)
    if transform.schema != TableSchema.from_dict(header.table_schema):
        raise ChecksumFailure(detail='Checkpoint schema and transform schema differ')
    return Checkpoint(
        transform=transform,
        generator=generator,
        critic=critic,
        train_config=train_config,
        epoch=header.epoch,
        seed=header.seed,
        train_rows=header.train_rows,
        diagnostic=header.diagnostic,
    )


def _restore_store(
    prefix: str,
    arch: Union[GeneratorArch, CriticArch],
    config: TrainConfig,
    tensors: Dict[str, torch.Tensor],
    steps: Dict[str, int],
) -> ParamStore:
    if isinstance(arch, GeneratorArch):
        lr = config.lr_generator
    else:
        lr = config.lr_critic
    store = init_params(arch, seed=0, lr=lr, beta1=config.beta1, beta2=config.beta2)
    try:
        for name, param in store.named_parameters().items():
            param.data = tensors[f'{prefix}/param/{name}']
        for name, buffer in store.named_buffers().items():
            buffer.data = tensors[f'{prefix}/buffer/{name}']
    except KeyError as e:
        raise ChecksumFailure(detail=f'Checkpoint lacks tensor {e}')
    adam: Dict[str, Dict[str, torch.Tensor]] = {}
    for key, step in steps.items():
        owner, _, name = key.partition('/')
        if owner != prefix:
            continue
        adam[name] = {
            'step': torch.tensor(float(step)),
            'exp_avg': tensors[f'{prefix}/adam/{name}/exp_avg'],
            'exp_avg_sq': tensors[f'{prefix}/adam/{name}/exp_avg_sq'],
        }
    if adam:
        store.load_adam_state(adam)
    return store


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IOFault(detail=f'Could not read checkpoint {path}: {e}')
    cp = decode_checkpoint(data)
    logger.info(f'Loaded checkpoint for epoch {cp.epoch} from {path}')
    return cp
