import logging
import os
from pathlib import Path
from typing import Optional

from pfwgan.config import NUM_THREADS_ENV, LoggingConfigMixin, RunConfig
from pfwgan.diffcompute import configure_runtime
from pfwgan.exceptions import ConfigInvalid, IOFault
from pfwgan.log import init_logging

__author__ = 'pfwgan'


class Context(object):
    def __init__(self, config: LoggingConfigMixin, deterministic: Optional[bool] = None):
        self.name = config.app_name
        self.config = config

        # Setup logging
        init_logging(self.name, self.config)
        self.logger = logging.getLogger('pfwgan')
        self.logger.info('Logging initialized')

        # Setup numerics
        if deterministic is None:
            deterministic = isinstance(config, RunConfig) and config.train.deterministic
        self.deterministic = deterministic
        self.num_threads = self._num_threads()
        configure_runtime(deterministic=self.deterministic, num_threads=self.num_threads)

    @staticmethod
    def _num_threads() -> int:
        value = os.environ.get(NUM_THREADS_ENV)
        if not value:
            return 0
        try:
            threads = int(value)
        except ValueError:
            raise ConfigInvalid(detail=f'{NUM_THREADS_ENV} must be an integer, got {value!r}', fields=[NUM_THREADS_ENV])
        if threads < 0:
            raise ConfigInvalid(detail=f'{NUM_THREADS_ENV} must not be negative', fields=[NUM_THREADS_ENV])
        return threads

    @property
    def run_config(self) -> RunConfig:
        if not isinstance(self.config, RunConfig):
            raise ConfigInvalid(detail='This command needs a run configuration (--config)')
        return self.config

    @property
    def output_dir(self) -> Path:
        path = Path(self.run_config.output_dir)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IOFault(detail=f'Could not create output directory {path}: {e}')
        return path

    @property
    def checkpoint_dir(self) -> Path:
        path = self.output_dir / 'checkpoints'
        path.mkdir(parents=True, exist_ok=True)
        return path
