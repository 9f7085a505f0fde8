# -*- coding: utf-8 -*-
"""
Train-on-synthetic, test-on-real classifier efficacy.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import accuracy_score, f1_score

from pfwgan.config import EvalConfig
from pfwgan.data.table import RawTable
from pfwgan.data.transform import TransformModel, UnseenPolicy, encode, fit
from pfwgan.evaluate.tree import decision_tree_fit, decision_tree_predict_proba
from pfwgan.exceptions import DegenerateTraining, SchemaMismatch

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UtilityScores:
    accuracy: float
    f1: float
    auc_roc: float


def auc_rank_sum(labels: np.ndarray, scores: np.ndarray) -> float:
    """
    Area under the ROC curve as the normalized Mann-Whitney statistic, tied scores get midranks.

    Returns 0.5 when one of the classes is absent.
    """
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        logger.warning('AUC-ROC is undefined with a single class in the test labels, reporting 0.5')
        return 0.5
    ranks = rankdata(np.asarray(scores, dtype=np.float64), method='average')
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def feature_matrix(table: RawTable, model: TransformModel) -> Tuple[np.ndarray, np.ndarray]:
    """ Encoded features without the target block, and labels with 1 for the favorable outcome. """
    values = encode(table, model, unseen=UnseenPolicy.IGNORE).values
    target = model.span(table.schema.target.column)
    keep = np.ones(values.shape[1], dtype=bool)
    keep[target.slice] = False
    return values[:, keep], table.favorable_mask().astype(np.int64)


def tstr(synth: RawTable, real_test: RawTable, cfg: Optional[EvalConfig] = None, seed: int = 0) -> UtilityScores:
    """
    Fit a decision tree on synth, with features encoded by a transform fitted on synth, and score it on real_test.

    :raise SchemaMismatch: the tables are bound to different schemas
    :raise DegenerateTraining: the synthetic target holds a single class
    """
    cfg = cfg or EvalConfig()
    if synth.schema != real_test.schema:
        raise SchemaMismatch(detail='Synthetic and test tables have different schemas')
    if synth.schema.target.column in synth.schema.numeric_columns:
        raise SchemaMismatch(detail='Target column must be categorical')
    model = fit(synth)
    x_train, y_train = feature_matrix(synth, model)
    if np.unique(y_train).size < 2:
        raise DegenerateTraining(
            detail=f'Synthetic target {synth.schema.target.column!r} holds a single class',
            fields=[synth.schema.target.column],
        )
    x_test, y_test = feature_matrix(real_test, model)
    tree = decision_tree_fit(x_train, y_train, cfg.tree, seed=seed)
    proba = decision_tree_predict_proba(tree, x_test)
    favorable = int(np.nonzero(tree.classes == 1)[0][0])
    predicted = tree.classes[np.argmax(proba, axis=1)]
    return UtilityScores(
        accuracy=float(accuracy_score(y_test, predicted)),
        f1=float(f1_score(y_test, predicted, pos_label=1, zero_division=0)),
        auc_roc=auc_rank_sum(y_test, proba[:, favorable]),
    )
