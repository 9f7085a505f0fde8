# -*- coding: utf-8 -*-
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from marshmallow_dataclass import class_schema

from pfwgan.schemas.base import BaseSchema

__author__ = 'pfwgan'


@dataclass(frozen=True)
class TensorEntry:
    name: str
    dtype: str = field(metadata={'validate': lambda v: v in ('<f4', '<f8')})
    shape: List[int] = field(default_factory=list)

    @property
    def itemsize(self) -> int:
        return 4 if self.dtype == '<f4' else 8

    @property
    def nbytes(self) -> int:
        count = 1
        for dim in self.shape:
            count *= dim
        return count * self.itemsize


@dataclass(frozen=True)
class CheckpointHeader:
    format_version: int
    epoch: int
    seed: int
    train_rows: int
    table_schema: Dict[str, Any] = field(metadata={'data_key': 'schema', 'required': True})
    transform: Dict[str, Any] = field(metadata={'required': True})
    generator_arch: Dict[str, Any] = field(metadata={'required': True})
    critic_arch: Dict[str, Any] = field(metadata={'required': True})
    train_config: Dict[str, Any] = field(metadata={'required': True})
    adam_steps: Dict[str, int] = field(default_factory=dict)
    tensors: List[TensorEntry] = field(default_factory=list)
    diagnostic: Optional[Dict[str, Any]] = field(default=None, metadata={'required': False})


CheckpointHeaderSchema = class_schema(CheckpointHeader, base_schema=BaseSchema)
