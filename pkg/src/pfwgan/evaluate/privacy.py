# -*- coding: utf-8 -*-
import logging
from typing import Optional

import numpy as np

from pfwgan.data.transform import DataMatrix
from pfwgan.exceptions import LayoutMismatch
from pfwgan.neighbors import nearest_distances

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


def identifiability(
    real: DataMatrix,
    synth: DataMatrix,
    weights: Optional[np.ndarray] = None,
    cap: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Fraction of real rows whose nearest synthetic row is strictly closer than their nearest other real row.

    Distances are exact weighted Euclidean distances in encoded space. With `cap`, both matrices are
    first subsampled to at most cap rows using a generator seeded with `seed`.
    """
    if real.width != synth.width:
        raise LayoutMismatch(detail=f'Real width {real.width} differs from synthetic width {synth.width}')
    if real.n_rows < 2 or synth.n_rows < 1:
        raise LayoutMismatch(detail='Identifiability needs at least two real rows and one synthetic row')
    real_values, synth_values = real.values, synth.values
    if cap is not None:
        rng = np.random.default_rng(seed)
        if real.n_rows > cap:
            real_values = real_values[np.sort(rng.choice(real.n_rows, size=cap, replace=False))]
        if synth.n_rows > cap:
            synth_values = synth_values[np.sort(rng.choice(synth.n_rows, size=cap, replace=False))]
        logger.debug(f'Identifiability on {real_values.shape[0]} real and {synth_values.shape[0]} synthetic rows')

    d_real = nearest_distances(real_values, real_values, weights=weights, exclude_self=True)
    d_synth = nearest_distances(real_values, synth_values, weights=weights)
    return float(np.mean(d_synth < d_real))
