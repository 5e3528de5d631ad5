"""Multi-output CART regression trees with budget-limited best-first growth.

Size convention: a split node costs two weights (feature index plus
threshold), a leaf costs one, so a tree with s splits weighs 3s + 1.
Growth is best-first on impurity decrease and stops when the next split
would push the tree past its weight budget (or its depth limit).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np


@dataclass
class _Node:
    indices: np.ndarray
    depth: int
    value: np.ndarray                 # mean target vector of the node
    feature: int | None = None
    threshold: float | None = None
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _sse(Y: np.ndarray) -> float:
    if len(Y) == 0:
        return 0.0
    return float(((Y - Y.mean(axis=0)) ** 2).sum())


def _best_split(X, Y, indices, feature_pool):
    """Best (gain, feature, threshold) over candidate midpoints, or None."""
    Xs = X[indices]
    Ys = Y[indices]
    parent = _sse(Ys)
    best = None
    for f in feature_pool:
        order = np.argsort(Xs[:, f], kind="stable")
        xs = Xs[order, f]
        ys = Ys[order]
        distinct = np.nonzero(np.diff(xs) > 0)[0]
        if len(distinct) == 0:
            continue
        csum = np.cumsum(ys, axis=0)
        csq = np.cumsum(ys**2, axis=0)
        total_sum = csum[-1]
        total_sq = csq[-1]
        n = len(ys)
        for cut in distinct:
            nl = cut + 1
            nr = n - nl
            sse_l = (csq[cut] - csum[cut] ** 2 / nl).sum()
            sse_r = ((total_sq - csq[cut]) - (total_sum - csum[cut]) ** 2 / nr).sum()
            gain = parent - (sse_l + sse_r)
            thr = (xs[cut] + xs[cut + 1]) / 2.0
            key = (gain, -f, -thr)
            if best is None or key > best[0]:
                best = (key, f, thr)
    if best is None or best[0][0] <= 1e-12:
        return None
    return best[0][0], best[1], best[2]


@dataclass
class RegressionTree:
    """CART regression tree; multi-output leaves hold mean target vectors."""

    max_depth: int | None = None
    budget: int | None = None
    max_features: int | None = None
    rng: np.random.Generator | None = None
    root: _Node | None = field(default=None, repr=False)
    n_splits: int = 0
    split_sequence: list[float] = field(default_factory=list, repr=False)

    def fit(self, X: np.ndarray, Y: np.ndarray) -> "RegressionTree":
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        m, d = X.shape
        self.root = _Node(np.arange(m), 0, Y.mean(axis=0))
        self.n_splits = 0
        self.split_sequence = []
        size = 1

        counter = 0
        heap: list[tuple[float, int, _Node, tuple]] = []

        def push(node):
            nonlocal counter
            if self.max_depth is not None and node.depth >= self.max_depth:
                return
            if len(node.indices) < 2:
                return
            pool = self._feature_pool(d)
            found = _best_split(X, Y, node.indices, pool)
            if found is None:
                return
            gain, f, thr = found
            heapq.heappush(heap, (-gain, counter, node, (f, thr)))
            counter += 1

        push(self.root)
        while heap:
            if self.budget is not None and size + 3 > self.budget:
                break
            _, _, node, (f, thr) = heapq.heappop(heap)
            mask = X[node.indices, f] <= thr
            li = node.indices[mask]
            ri = node.indices[~mask]
            node.feature = int(f)
            node.threshold = float(thr)
            node.left = _Node(li, node.depth + 1, Y[li].mean(axis=0))
            node.right = _Node(ri, node.depth + 1, Y[ri].mean(axis=0))
            self.n_splits += 1
            self.split_sequence.append(float(thr))
            size += 3
            push(node.left)
            push(node.right)
        return self

    def _feature_pool(self, d: int) -> np.ndarray:
        if self.max_features is None or self.max_features >= d:
            return np.arange(d)
        assert self.rng is not None, "feature subsampling needs an rng"
        return np.sort(self.rng.choice(d, size=self.max_features, replace=False))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((len(X), len(self.root.value)))
        for i, row in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.value
        return out

    def size(self) -> int:
        """Weight count: two per split plus one per leaf."""
        return 3 * self.n_splits + 1

    def thresholds_in_growth_order(self) -> list[float]:
        """Split thresholds in the order best-first growth chose them."""
        return list(self.split_sequence)
