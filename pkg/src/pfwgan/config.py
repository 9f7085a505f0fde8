import copy
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, root_validator, validator

from pfwgan.exceptions import ConfigInvalid

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

DEFAULT_FORMAT = '{asctime} | {levelname:7} | {hostname} | {name:35} | {module:10} | {message}'

NUM_THREADS_ENV = 'PFWGAN_NUM_THREADS'
DEBUG_ENV = 'PFWGAN_DEBUG'


class LoggingConfigMixin(BaseModel):
    app_name: str = 'pfwgan'
    debug: bool = False
    testing: bool = False
    log_level: str = 'INFO'
    log_format: str = DEFAULT_FORMAT
    logging_config: Dict[str, Any] = Field(default_factory=dict)

    @validator('debug', always=True)
    def debug_from_environment(cls, v: bool) -> bool:
        return v or bool(os.environ.get(DEBUG_ENV))


class ColumnKindName(str, Enum):
    NUMERIC = 'numeric'
    CATEGORICAL = 'categorical'


class ColumnDeclaration(BaseModel):
    name: str
    kind: ColumnKindName


class GroupBinding(BaseModel):
    column: str
    value: str


class ThresholdRule(BaseModel):
    """ Numeric source column -> two labels, e.g. age > 25 -> 'older'. """

    rule: Literal['threshold']
    source: str
    column: Optional[str] = None
    threshold: float
    above: str
    at_or_below: str


class BinarizeRule(BaseModel):
    """ Categorical source column -> `label` for any of `values`, `other` for everything else. """

    rule: Literal['binarize']
    source: str
    column: Optional[str] = None
    values: List[str]
    label: str
    other: str


DerivedColumn = Union[ThresholdRule, BinarizeRule]


class SchemaConfig(BaseModel):
    columns: List[ColumnDeclaration]
    sensitive: GroupBinding
    target: GroupBinding
    derived: List[DerivedColumn] = Field(default_factory=list)

    @validator('columns')
    def unique_columns(cls, v: List[ColumnDeclaration]) -> List[ColumnDeclaration]:
        names = [c.name for c in v]
        if len(set(names)) != len(names):
            raise ValueError('column names must be unique')
        if not names:
            raise ValueError('at least one column must be declared')
        return v

    @root_validator(skip_on_failure=True)
    def check_bindings(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        kinds = {c.name: c.kind for c in values['columns']}
        for role in ('sensitive', 'target'):
            binding: GroupBinding = values[role]
            if binding.column not in kinds:
                raise ValueError(f'{role} column {binding.column!r} is not a declared column')
            if kinds[binding.column] != ColumnKindName.CATEGORICAL:
                raise ValueError(f'{role} column {binding.column!r} must be categorical')
        if values['sensitive'].column == values['target'].column:
            raise ValueError('sensitive and target columns must be distinct')
        return values


class SplitConfig(BaseModel):
    train_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)
    seed: int = 0


class PrivacyVariant(str, Enum):
    L1 = 'L1'
    L2 = 'L2'


class PrivacyForm(str, Enum):
    HINGE = 'hinge'
    LITERAL = 'literal'


class FeatureWeighting(str, Enum):
    UNIT = 'unit'
    INVERSE_STD = 'inverse_std'


class LossWeightsConfig(BaseModel):
    lambda_gp: float = Field(default=10.0, ge=0.0)
    lambda_p: float = Field(default=0.2, ge=0.0)
    lambda_f: float = Field(default=1.0, ge=0.0)
    privacy_variant: PrivacyVariant = PrivacyVariant.L2
    privacy_form: PrivacyForm = PrivacyForm.HINGE
    feature_weights: FeatureWeighting = FeatureWeighting.UNIT
    privacy_clamp: Tuple[float, float] = (0.0, 5.0)
    fairness_clamp: Tuple[float, float] = (0.0, 1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)

    @validator('privacy_clamp', 'fairness_clamp')
    def ordered_clamp(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if v[0] > v[1]:
            raise ValueError('clamp lower bound must not exceed upper bound')
        return v


class ArchitectureConfig(BaseModel):
    noise_dim: int = Field(default=128, ge=1)
    generator_hidden: List[int] = Field(default_factory=lambda: [256, 256])
    critic_hidden: List[int] = Field(default_factory=lambda: [256, 256])
    temperature: float = Field(default=0.2, gt=0.0)
    leaky_slope: float = Field(default=0.01, ge=0.0)


class TrainConfig(BaseModel):
    """
    Every constant of the training algorithm, pre-filled with the published defaults.

    pf_start/pf_end default to a quarter of the epochs and the last epoch respectively. The
    privacy and fairness terms are active for epochs i with pf_start < i < pf_end.
    """

    epochs: int = Field(default=200, ge=1)
    batch_size: int = Field(default=256, ge=2)
    n_critic: int = Field(default=4, ge=1)
    lr_generator: float = Field(default=1e-4, gt=0.0)
    lr_critic: float = Field(default=2e-4, gt=0.0)
    beta1: float = Field(default=0.5, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    loss: LossWeightsConfig = Field(default_factory=LossWeightsConfig)
    architecture: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    pf_start: Optional[int] = None
    pf_end: Optional[int] = None
    seed: int = 0
    checkpoint_every: int = Field(default=0, ge=0)
    deterministic: bool = False

    @root_validator(skip_on_failure=True)
    def phase_window(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        epochs = values['epochs']
        if values.get('pf_start') is None:
            values['pf_start'] = int(0.25 * epochs)
        if values.get('pf_end') is None:
            values['pf_end'] = epochs
        if not 0 <= values['pf_start'] <= values['pf_end'] <= epochs:
            raise ValueError('phase window must satisfy 0 <= pf_start <= pf_end <= epochs')
        return values

    def phase_active(self, epoch: int) -> bool:
        assert self.pf_start is not None and self.pf_end is not None  # please mypy
        return self.pf_start < epoch < self.pf_end


class RepetitionMode(str, Enum):
    RESAMPLE = 'resample'
    RETRAIN = 'retrain'


class TreeConfig(BaseModel):
    max_depth: Optional[int] = Field(default=None, ge=1)
    min_samples_split: int = Field(default=2, ge=2)


class EvalConfig(BaseModel):
    repetitions: int = Field(default=10, ge=1)
    repetition_mode: RepetitionMode = RepetitionMode.RESAMPLE
    feature_weights: FeatureWeighting = FeatureWeighting.UNIT
    identifiability_cap: Optional[int] = Field(default=None, ge=2)
    tree: TreeConfig = Field(default_factory=TreeConfig)
    seed: int = 0


class RunConfig(LoggingConfigMixin):
    """
    Configuration for one pipeline run (train, generate, evaluate)
    """

    dataset: Optional[Path] = None
    dataset_name: str = 'dataset'
    model_name: str = 'pfwgan'
    preset: Optional[str] = None
    table_schema: SchemaConfig = Field(alias='schema')
    split: SplitConfig = Field(default_factory=SplitConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    evaluation: EvalConfig = Field(default_factory=EvalConfig, alias='eval')
    output_dir: Path = Path('runs') / 'default'

    class Config:
        allow_population_by_field_name = True

    @root_validator(pre=True)
    def apply_preset(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        name = values.get('preset')
        if name is None:
            return values
        if name not in PRESETS:
            raise ValueError(f'unknown preset {name!r}, expected one of {sorted(PRESETS)}')
        return merge_config(copy.deepcopy(PRESETS[name]), values)

    def resolved_json(self) -> str:
        return self.json(by_alias=True, indent=2, sort_keys=True)


ADULT_PRESET: Dict[str, Any] = {
    'dataset_name': 'adult',
    'schema': {
        'columns': [
            {'name': 'age', 'kind': 'numeric'},
            {'name': 'workclass', 'kind': 'categorical'},
            {'name': 'fnlwgt', 'kind': 'numeric'},
            {'name': 'education', 'kind': 'categorical'},
            {'name': 'education-num', 'kind': 'numeric'},
            {'name': 'marital-status', 'kind': 'categorical'},
            {'name': 'occupation', 'kind': 'categorical'},
            {'name': 'relationship', 'kind': 'categorical'},
            {'name': 'race', 'kind': 'categorical'},
            {'name': 'sex', 'kind': 'categorical'},
            {'name': 'capital-gain', 'kind': 'numeric'},
            {'name': 'capital-loss', 'kind': 'numeric'},
            {'name': 'hours-per-week', 'kind': 'numeric'},
            {'name': 'native-country', 'kind': 'categorical'},
            {'name': 'income', 'kind': 'categorical'},
        ],
        'sensitive': {'column': 'sex', 'value': 'Male'},
        'target': {'column': 'income', 'value': '>50K'},
        # The combined UCI release spells the test half's labels with a trailing dot
        'derived': [
            {'rule': 'binarize', 'source': 'income', 'values': ['>50K', '>50K.'], 'label': '>50K', 'other': '<=50K'}
        ],
    },
    'split': {'train_fraction': 0.9},
    'train': {'epochs': 230},
}

BANK_PRESET: Dict[str, Any] = {
    'dataset_name': 'bank',
    'schema': {
        'columns': [
            {'name': 'age', 'kind': 'categorical'},
            {'name': 'job', 'kind': 'categorical'},
            {'name': 'marital', 'kind': 'categorical'},
            {'name': 'education', 'kind': 'categorical'},
            {'name': 'default', 'kind': 'categorical'},
            {'name': 'balance', 'kind': 'numeric'},
            {'name': 'housing', 'kind': 'categorical'},
            {'name': 'loan', 'kind': 'categorical'},
            {'name': 'contact', 'kind': 'categorical'},
            {'name': 'day', 'kind': 'numeric'},
            {'name': 'month', 'kind': 'categorical'},
            {'name': 'duration', 'kind': 'numeric'},
            {'name': 'campaign', 'kind': 'numeric'},
            {'name': 'pdays', 'kind': 'numeric'},
            {'name': 'previous', 'kind': 'numeric'},
            {'name': 'poutcome', 'kind': 'categorical'},
            {'name': 'y', 'kind': 'categorical'},
        ],
        'sensitive': {'column': 'age', 'value': 'young'},
        'target': {'column': 'y', 'value': 'yes'},
        'derived': [{'rule': 'threshold', 'source': 'age', 'threshold': 25, 'above': 'older', 'at_or_below': 'young'}],
    },
    'split': {'train_fraction': 0.8},
    'train': {'epochs': 200},
}

# Column names of the cleaned two-year COMPAS release; declare `schema` explicitly for other releases
PROPUBLICA_PRESET: Dict[str, Any] = {
    'dataset_name': 'propublica',
    'schema': {
        'columns': [
            {'name': 'sex', 'kind': 'categorical'},
            {'name': 'age', 'kind': 'numeric'},
            {'name': 'age_cat', 'kind': 'categorical'},
            {'name': 'race', 'kind': 'categorical'},
            {'name': 'juv_fel_count', 'kind': 'categorical'},
            {'name': 'juv_misd_count', 'kind': 'categorical'},
            {'name': 'juv_other_count', 'kind': 'categorical'},
            {'name': 'priors_count', 'kind': 'numeric'},
            {'name': 'days_b_screening_arrest', 'kind': 'numeric'},
            {'name': 'c_charge_degree', 'kind': 'categorical'},
            {'name': 'decile_score', 'kind': 'numeric'},
            {'name': 'score_text', 'kind': 'categorical'},
            {'name': 'v_decile_score', 'kind': 'categorical'},
            {'name': 'v_score_text', 'kind': 'categorical'},
            {'name': 'is_violent_recid', 'kind': 'categorical'},
            {'name': 'two_year_recid', 'kind': 'categorical'},
        ],
        'sensitive': {'column': 'race', 'value': 'Caucasian'},
        'target': {'column': 'two_year_recid', 'value': '0'},
    },
    'split': {'train_fraction': 0.8},
    'train': {'epochs': 200},
}

# LSAC bar passage study columns; the target is the binary first-year grade, spelled 1/0 or True/False
LAW_PRESET: Dict[str, Any] = {
    'dataset_name': 'law',
    'schema': {
        'columns': [
            {'name': 'lsat', 'kind': 'numeric'},
            {'name': 'ugpa', 'kind': 'numeric'},
            {'name': 'decile1b', 'kind': 'numeric'},
            {'name': 'decile3', 'kind': 'numeric'},
            {'name': 'fam_inc', 'kind': 'numeric'},
            {'name': 'race', 'kind': 'categorical'},
            {'name': 'gender', 'kind': 'categorical'},
            {'name': 'gpa', 'kind': 'categorical'},
        ],
        'sensitive': {'column': 'race', 'value': 'White'},
        'target': {'column': 'gpa', 'value': '1'},
        'derived': [
            {'rule': 'binarize', 'source': 'gpa', 'values': ['1', '1.0', 'True', 'true'], 'label': '1', 'other': '0'}
        ],
    },
    'split': {'train_fraction': 0.8},
    'train': {'epochs': 200},
}

PRESETS: Dict[str, Dict[str, Any]] = {
    'adult': ADULT_PRESET,
    'propublica': PROPUBLICA_PRESET,
    'bank': BANK_PRESET,
    'law': LAW_PRESET,
}


def merge_config(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """ Recursively merge `override` into `base`. Mappings are merged, anything else is replaced. """
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            base[key] = merge_config(base[key], value)
        else:
            base[key] = copy.deepcopy(value)
    return base


TConfig = TypeVar('TConfig', bound=BaseModel)


def load_config(
    typ: Type[TConfig], path: Optional[Union[str, Path]] = None, test_config: Optional[Mapping[str, Any]] = None
) -> TConfig:
    """
    Load and validate a configuration document.

    The file is parsed with yaml.safe_load, which accepts JSON documents as well. Values from
    test_config are merged on top of the file contents.

    :raise ConfigInvalid: unreadable document or failed validation, with offending field paths
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding='utf-8') as fd:
                loaded = yaml.safe_load(fd)
        except OSError as e:
            raise ConfigInvalid(detail=f'Could not read config {path}: {e}')
        except yaml.YAMLError as e:
            raise ConfigInvalid(detail=f'Could not parse config {path}: {e}')
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigInvalid(detail=f'Config {path} must contain a mapping at the top level')
        data = loaded
    if test_config:
        data = merge_config(data, test_config)
    try:
        config = typ.parse_obj(data)
    except ValidationError as e:
        fields = ['.'.join(str(part) for part in err['loc']) for err in e.errors()]
        raise ConfigInvalid(detail=f'Configuration validation failed: {e}', fields=fields)
    logger.debug(f'Loaded {typ.__name__} from {path or "test config"}')
    return config
