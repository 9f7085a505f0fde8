# -*- coding: utf-8 -*-
import logging
from dataclasses import dataclass, field
from typing import List

from pfwgan.data.table import RawTable, group_counts

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemographicParity:
    gap: float
    rate_unprivileged: float
    rate_privileged: float
    warnings: List[str] = field(default_factory=list)


def demographic_parity(table: RawTable) -> DemographicParity:
    """ Favorable-outcome rates of both sensitive groups on hard counts. An empty group has rate 0. """
    counts = group_counts(table)
    warnings: List[str] = []
    rate_0 = rate_1 = 0.0
    if counts.n_s0:
        rate_0 = counts.n_s0y1 / counts.n_s0
    else:
        warnings.append(f'unprivileged group of {table.schema.sensitive.column!r} is empty')
    if counts.n_s1:
        rate_1 = counts.n_s1y1 / counts.n_s1
    else:
        warnings.append(f'privileged group {table.schema.sensitive.value!r} is empty')
    for warning in warnings:
        logger.warning(f'Degenerate group in demographic parity: {warning}')
    return DemographicParity(
        gap=abs(rate_1 - rate_0), rate_unprivileged=rate_0, rate_privileged=rate_1, warnings=warnings
    )


def dp_gap(table: RawTable) -> float:
    return demographic_parity(table).gap
