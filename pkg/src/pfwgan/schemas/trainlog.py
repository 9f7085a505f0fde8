# -*- coding: utf-8 -*-
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

from marshmallow_dataclass import class_schema

from pfwgan.exceptions import IOFault
from pfwgan.schemas.base import BaseSchema, FiniteFloatField

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainLogRecord:
    """ Per-epoch means of every loss term. """

    epoch: int
    critic_loss: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    adv_loss: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    privacy_loss: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    fairness_loss: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    gradient_penalty: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    phase_active: bool
    wall_time: float = field(metadata={'marshmallow_field': FiniteFloatField(required=True)})
    critic_steps: int = 0
    generator_steps: int = 0


TrainLogRecordSchema = class_schema(TrainLogRecord, base_schema=BaseSchema)


def append_record(path: Union[str, Path], record: TrainLogRecord) -> None:
    line = json.dumps(TrainLogRecordSchema().dump(record), sort_keys=True)
    try:
        with open(path, 'a', encoding='utf-8') as fd:
            fd.write(line + '\n')
    except OSError as e:
        raise IOFault(detail=f'Could not append to training log {path}: {e}')


def read_log(path: Union[str, Path]) -> List[TrainLogRecord]:
    schema = TrainLogRecordSchema()
    try:
        with open(path, encoding='utf-8') as fd:
            return [schema.load(json.loads(line)) for line in fd if line.strip()]
    except OSError as e:
        raise IOFault(detail=f'Could not read training log {path}: {e}')
