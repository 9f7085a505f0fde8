# -*- coding: utf-8 -*-
"""
CART classifier: greedy binary splits minimizing weighted Gini impurity.

Numeric features split at midpoints between consecutive distinct values, so a one-hot
feature splits on {0, 1} at 0.5. Rows with value <= threshold go left.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from pfwgan.config import TreeConfig
from pfwgan.exceptions import ContractError

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

LEAF = -1


def gini(counts: np.ndarray) -> float:
    """
    >>> gini(np.array([3, 1]))
    0.375
    """
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass
class TreeModel:
    classes: np.ndarray
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    counts: List[np.ndarray] = field(default_factory=list)
    depth: List[int] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def max_depth(self) -> int:
        return max(self.depth) if self.depth else 0

    def add_node(self, counts: np.ndarray, depth: int) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.counts.append(counts)
        self.depth.append(depth)
        return self.n_nodes - 1


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int) -> Optional[Tuple[float, float]]:
    """ (weighted impurity, threshold) of the best split of one feature, None if the feature is constant. """
    order = np.argsort(x, kind='stable')
    xs, ys = x[order], y[order]
    n = xs.size
    distinct = xs[:-1] < xs[1:]
    if not distinct.any():
        return None
    left_counts = np.cumsum(np.eye(n_classes, dtype=np.float64)[ys], axis=0)[:-1]
    right_counts = left_counts[-1] + np.eye(n_classes, dtype=np.float64)[ys[-1]] - left_counts
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
    gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    weighted[~distinct] = np.inf
    i = int(np.argmin(weighted))
    threshold = (xs[i] + xs[i + 1]) / 2.0
    if threshold >= xs[i + 1]:
        threshold = xs[i]
    return float(weighted[i]), float(threshold)


def decision_tree_fit(
    features: np.ndarray, labels: np.ndarray, cfg: Optional[TreeConfig] = None, seed: int = 0
) -> TreeModel:
    """
    Grow a CART tree. A node is split while it is impure, holds at least min_samples_split rows,
    is above max_depth and some feature is not constant on it. The seed permutes the order in which
    features are tried, which decides between equally good splits.
    """
    cfg = cfg or TreeConfig()
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ContractError(detail=f'Features {features.shape} and labels {labels.shape} do not line up')
    if features.shape[0] < 2 or features.shape[1] < 1:
        raise ContractError(detail='A tree needs at least two rows and one feature')
    classes, y = np.unique(labels, return_inverse=True)
    n_classes = classes.size
    feature_order = np.random.default_rng(seed).permutation(features.shape[1])

    tree = TreeModel(classes=classes)
    root = tree.add_node(np.bincount(y, minlength=n_classes), depth=0)
    stack = [(root, np.arange(features.shape[0]))]
    while stack:
        node, rows = stack.pop()
        counts = tree.counts[node]
        depth = tree.depth[node]
        if np.count_nonzero(counts) < 2 or rows.size < cfg.min_samples_split:
            continue
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            continue
        best: Optional[Tuple[float, int, float]] = None
        for f in feature_order:
            candidate = _best_split(features[rows, f], y[rows], n_classes)
            if candidate is not None and (best is None or candidate[0] < best[0]):
                best = (candidate[0], int(f), candidate[1])
        if best is None:
            continue
        _, f, threshold = best
        go_left = features[rows, f] <= threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        tree.feature[node] = f
        tree.threshold[node] = threshold
        tree.left[node] = tree.add_node(np.bincount(y[left_rows], minlength=n_classes), depth + 1)
        tree.right[node] = tree.add_node(np.bincount(y[right_rows], minlength=n_classes), depth + 1)
        stack.append((tree.right[node], right_rows))
        stack.append((tree.left[node], left_rows))
    logger.debug(f'Grew tree with {tree.n_nodes} nodes, depth {tree.max_depth}')
    return tree


def decision_tree_predict_proba(tree: TreeModel, features: np.ndarray) -> np.ndarray:
    """ Class frequencies of the leaf every row lands in, columns ordered like tree.classes. """
    features = np.asarray(features, dtype=np.float64)
    out = np.zeros((features.shape[0], tree.classes.size), dtype=np.float64)
    stack = [(0, np.arange(features.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        if tree.feature[node] == LEAF:
            counts = tree.counts[node]
            out[rows] = counts / counts.sum()
            continue
        go_left = features[rows, tree.feature[node]] <= tree.threshold[node]
        stack.append((tree.left[node], rows[go_left]))
        stack.append((tree.right[node], rows[~go_left]))
    return out


def decision_tree_predict(tree: TreeModel, features: np.ndarray) -> np.ndarray:
    """ Most frequent leaf class; ties go to the first class in tree.classes. """
    return tree.classes[np.argmax(decision_tree_predict_proba(tree, features), axis=1)]
