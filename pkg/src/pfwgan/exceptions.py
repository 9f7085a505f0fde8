from __future__ import annotations

import json
import logging
import traceback
import uuid
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from pfwgan.utils import filter_none

logger = logging.getLogger(__name__)


class ExitCode:
    SUCCESS = 0
    UNEXPECTED = 1
    CONFIG_INVALID = 2
    DATA_INVALID = 3
    TRAINING_FAULT = 4
    IO_FAULT = 5


@dataclass
class ErrorDetail(object):
    kind: str
    detail: Optional[str] = None
    fields: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)


class PFWGANError(Exception):
    """
    Base for every error raised on purpose by this package.

    Keyword arguments `detail`, `fields` and `data` end up in the ErrorDetail, which the CLI
    prints as JSON before exiting with `exit_code`.
    """

    exit_code: int = ExitCode.UNEXPECTED
    default_detail: str = 'Unspecified error'

    def __init__(self, detail: Optional[str] = None, **kwargs):
        fields = kwargs.pop('fields', None) or []
        data = kwargs.pop('data', None) or {}
        self._error_detail = ErrorDetail(
            kind=self.__class__.__name__, detail=detail or self.default_detail, fields=list(fields), data=dict(data)
        )
        super().__init__(self._error_detail.detail)

    @property
    def error_detail(self) -> ErrorDetail:
        return self._error_detail

    @property
    def detail(self) -> Optional[str]:
        return self._error_detail.detail

    def to_dict(self) -> Dict[str, Any]:
        res = filter_none(asdict(self._error_detail))
        res['exit_code'] = self.exit_code
        return res

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=str, sort_keys=True)


# Configuration


class ConfigInvalid(PFWGANError):
    exit_code = ExitCode.CONFIG_INVALID
    default_detail = 'Invalid configuration'


# Data


class DataInvalid(PFWGANError):
    exit_code = ExitCode.DATA_INVALID
    default_detail = 'Invalid data'


class SchemaMismatch(DataInvalid):
    default_detail = 'Table does not match the declared schema'


class EmptyTable(DataInvalid):
    default_detail = 'No rows left after ingestion'


class SplitDegenerate(DataInvalid):
    default_detail = 'Split produced an empty half'


class UnseenCategory(DataInvalid):
    default_detail = 'Category not seen when the transform was fitted'


class FitError(DataInvalid):
    default_detail = 'Could not fit transform'


class LayoutMismatch(DataInvalid):
    default_detail = 'Matrix layout does not match the transform model'


class DegenerateTraining(DataInvalid):
    default_detail = 'Training labels contain a single class'


# Compute


class ComputeFault(PFWGANError):
    exit_code = ExitCode.TRAINING_FAULT
    default_detail = 'Compute fault'


class ShapeError(ComputeFault):
    default_detail = 'Tensor shapes do not conform'


class ContractError(ComputeFault):
    default_detail = 'Operation contract violated'


class DegenerateBatch(ComputeFault):
    default_detail = 'Batch normalization needs at least two rows in train mode'


class NonFiniteValue(ComputeFault):
    default_detail = 'Non-finite value detected'


# Training


class TrainingFault(PFWGANError):
    exit_code = ExitCode.TRAINING_FAULT
    default_detail = 'Training failed'


class NonFiniteLoss(TrainingFault):
    default_detail = 'Non-finite loss, training aborted'


# I/O


class IOFault(PFWGANError):
    exit_code = ExitCode.IO_FAULT
    default_detail = 'I/O failure'


class CheckpointError(IOFault):
    default_detail = 'Invalid checkpoint'


class VersionMismatch(CheckpointError):
    default_detail = 'Unsupported checkpoint format version'


class ChecksumFailure(CheckpointError):
    default_detail = 'Checkpoint checksum mismatch'


class TruncatedCheckpoint(ChecksumFailure):
    default_detail = 'Checkpoint file is truncated'


def unexpected_error_handler(ex: Exception) -> int:
    error_id = uuid.uuid4()
    logger.error(f'Unexpected error {error_id}: {ex}')
    logger.error(traceback.format_exc())
    return ExitCode.UNEXPECTED
