# -*- coding: utf-8 -*-
"""
Exact weighted nearest-neighbour distances, shared by the privacy reference and the
identifiability metric.

Every returned distance is a scipy `cdist` value, so both search paths agree bit for bit and
strict comparisons between two distances (ties are common on one-hot data) do not depend on the
table size.
"""
import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from pfwgan.exceptions import LayoutMismatch

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

# Up to this many reference rows every pair goes through cdist, above it a matrix-product prefilter picks candidates
BRUTE_FORCE_LIMIT = 2000
BLOCK_ROWS = 512
# upper bound on the elements of one (query block x reference) distance matrix
BLOCK_ELEMENTS = 1 << 23


def _weighted(values: np.ndarray, weights: Optional[np.ndarray]) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if weights is None:
        return values
    return values * np.asarray(weights, dtype=np.float64)


def _block_rows(n_reference: int) -> int:
    return max(1, min(BLOCK_ROWS, BLOCK_ELEMENTS // max(n_reference, 1)))


def nearest_distances(
    queries: np.ndarray,
    reference: np.ndarray,
    weights: Optional[np.ndarray] = None,
    exclude_self: bool = False,
    brute_force_limit: int = BRUTE_FORCE_LIMIT,
) -> np.ndarray:
    """
    Distance from every query row to its nearest reference row, ||w * (q - r)||_2.

    With exclude_self, queries and reference must be the same rows and each row skips only its
    own index, so a duplicated row gets distance 0.
    """
    q = _weighted(queries, weights)
    r = _weighted(reference, weights)
    if q.ndim != 2 or r.ndim != 2 or q.shape[1] != r.shape[1]:
        raise LayoutMismatch(detail=f'Can not compare rows of shape {q.shape} with {r.shape}')
    if exclude_self and (q.shape[0] != r.shape[0] or r.shape[0] < 2):
        raise LayoutMismatch(detail='Excluding self needs the same set of at least two rows')
    if r.shape[0] <= brute_force_limit:
        return _brute_force(q, r, exclude_self)
    return _prefiltered(q, r, exclude_self)


def _brute_force(q: np.ndarray, r: np.ndarray, exclude_self: bool) -> np.ndarray:
    out = np.empty(q.shape[0], dtype=np.float64)
    step = _block_rows(r.shape[0])
    for start in range(0, q.shape[0], step):
        stop = min(start + step, q.shape[0])
        block = cdist(q[start:stop], r, metric='euclidean')
        if exclude_self:
            rows = np.arange(stop - start)
            block[rows, rows + start] = np.inf
        out[start:stop] = block.min(axis=1)
    return out


def _prefiltered(q: np.ndarray, r: np.ndarray, exclude_self: bool) -> np.ndarray:
    """
    Squared distances in the expanded form |q|^2 - 2 q.r + |r|^2 (one matrix product per block)
    keep every reference row within the rounding margin of the block minimum. Only those
    candidates are measured with cdist.
    """
    q_sq = np.einsum('ij,ij->i', q, q)
    r_sq = np.einsum('ij,ij->i', r, r)
    # the expanded form is off by at most a few (width + 2) * eps * (|q|^2 + |r|^2)
    unit = 8.0 * (q.shape[1] + 2) * np.finfo(np.float64).eps
    out = np.empty(q.shape[0], dtype=np.float64)
    step = _block_rows(r.shape[0])
    candidates = 0
    for start in range(0, q.shape[0], step):
        stop = min(start + step, q.shape[0])
        approx = q_sq[start:stop, None] - 2.0 * (q[start:stop] @ r.T) + r_sq[None, :]
        if exclude_self:
            rows = np.arange(stop - start)
            approx[rows, rows + start] = np.inf
        margin = unit * (q_sq[start:stop] + r_sq.max())
        threshold = approx.min(axis=1) + 2.0 * margin
        for i, row in enumerate(approx):
            index = np.flatnonzero(row <= threshold[i])
            candidates += index.size
            out[start + i] = cdist(q[start + i : start + i + 1], r[index], metric='euclidean').min()
    logger.debug(f'Nearest distances for {q.shape[0]} rows measured {candidates} candidate pairs exactly')
    return out
