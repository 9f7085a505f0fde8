import logging
import pprint
import socket
import time
from dataclasses import dataclass, field
from logging.config import dictConfig
from typing import Any, Dict, List

from pfwgan.config import DEFAULT_FORMAT, LoggingConfigMixin, merge_config
from pfwgan.exceptions import ConfigInvalid

__author__ = 'pfwgan'


@dataclass
class LocalContext:
    """
    Local context is a place to put parameters for filters and formatters in logging dictConfigs.

    To provide typing and order, we keep them in a neat dataclass.
    """

    level: str
    format: str
    app_name: str
    app_debug: bool
    relative_time: bool = False
    loggers: List[str] = field(default_factory=lambda: ['pfwgan'])


class AppFilter(logging.Filter):
    """ Add hostname and app_name to every record, and optionally make asctime relative to start-up. """

    def __init__(self, app_name: str, relative_time: bool = False):
        super().__init__()
        self.app_name = app_name
        self.hostname = socket.gethostname()
        self.relative_time = relative_time
        self._start = time.time()

    def filter(self, record: logging.LogRecord) -> bool:
        record.hostname = self.hostname
        record.app_name = self.app_name
        if self.relative_time:
            record.created = record.created - self._start
        return True


def make_local_context(app_name: str, config: LoggingConfigMixin) -> LocalContext:
    log_format = config.log_format
    if not log_format:
        log_format = DEFAULT_FORMAT

    log_level = config.log_level
    if config.debug:
        log_level = 'DEBUG'

    try:
        local_context = LocalContext(
            level=log_level.upper(),
            format=log_format,
            app_name=app_name,
            app_debug=config.debug,
            relative_time=config.testing,
        )
    except (KeyError, AttributeError) as e:
        raise ConfigInvalid(detail=f'Could not initialize logging local_context. {type(e).__name__}: {e}')
    return local_context


def make_dictConfig(local_context: LocalContext) -> Dict[str, Any]:
    loggers: Dict[str, Any] = {
        name: {'handlers': ['console'], 'level': local_context.level, 'propagate': False}
        for name in local_context.loggers
    }
    return {
        'version': 1,
        'disable_existing_loggers': False,
        'filters': {
            'app_filter': {
                '()': AppFilter,
                'app_name': local_context.app_name,
                'relative_time': local_context.relative_time,
            },
        },
        'formatters': {'default': {'format': local_context.format, 'style': '{'}},
        'handlers': {
            'console': {
                'class': 'logging.StreamHandler',
                'level': local_context.level,
                'formatter': 'default',
                'filters': ['app_filter'],
            },
        },
        'loggers': loggers,
        'root': {'handlers': ['console'], 'level': 'WARNING'},
    }


def init_logging(app_name: str, config: LoggingConfigMixin) -> None:
    local_context = make_local_context(app_name, config)
    logging_config = make_dictConfig(local_context)
    logging_config = merge_config(logging_config, config.logging_config)
    dictConfig(logging_config)
    logger = logging.getLogger(__name__)
    logger.debug(f'Logging config:\n{pprint.pformat(logging_config)}')
    return None
