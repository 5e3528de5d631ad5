"""Alternative models with weight-budget size matching.

Every baseline exposes the same surface: fit on prepared scores, predict
0/1 labels (or rankings), and report an exact weight count. Size matching
keeps comparisons honest: whenever a model family can only realise a
discrete set of sizes, a tracker alternates above/below the target so the
mean size over repetitions approaches it.

Weight conventions: dense weight matrices count every entry, intercepts
count one each, a tree split costs two weights and a leaf one, forests sum
their trees, and an MLP with h hidden units costs h*(d+1) + n*(h+1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import encode_ranking
from .solvers import SolverKind, solve_weights
from .trees import RegressionTree

BASELINE_KINDS = ("linear", "ridge", "random", "dt", "brdt", "rf", "brrf", "mlp")


def mlp_weight_count(h: int, d: int, n: int) -> int:
    return h * (d + 1) + n * (h + 1)


@dataclass
class WeightBudget:
    """Per-repetition budget tracker for models with discrete sizes.

    Odd repetitions allow the natural size just above the target; even
    repetitions allow only the accumulated deficit, so undersized fits pull
    the running mean back towards the target.
    """

    target: int
    achieved_sequence: list[int] = field(default_factory=list)
    repetition: int = 0

    def next_budget(self) -> int:
        """Weight allowance for the next tree-model fit."""
        self.repetition += 1
        deficit = self.repetition * self.target - sum(self.achieved_sequence)
        return max(1, deficit)

    def next_mlp_hidden(self, d: int, n: int) -> int:
        """Hidden size for the next MLP fit under the alternating rule."""
        self.repetition += 1
        h_real = (self.target - n) / (d + n + 1)
        if h_real <= 0:
            warnings.warn(
                f"weight target {self.target} infeasible for an MLP with "
                f"d={d}, n={n}; using a single hidden unit",
                stacklevel=2,
            )
            return 1
        h_up = max(1, int(np.ceil(h_real)))
        if self.repetition % 2 == 1:
            return h_up
        deficit = self.repetition * self.target - sum(self.achieved_sequence)
        h = h_up
        while h > 1 and mlp_weight_count(h, d, n) > deficit:
            h -= 1
        return h

    def record(self, achieved: int) -> None:
        self.achieved_sequence.append(achieved)

    @property
    def running_mean(self) -> float:
        if not self.achieved_sequence:
            return 0.0
        return float(np.mean(self.achieved_sequence))


def mlp_size_schedule(target: int, d: int, n: int, repetitions: int) -> list[int]:
    """Realised MLP weight counts over a run of size-tracked repetitions."""
    tracker = WeightBudget(target)
    sizes = []
    for _ in range(repetitions):
        h = tracker.next_mlp_hidden(d, n)
        size = mlp_weight_count(h, d, n)
        tracker.record(size)
        sizes.append(size)
    return sizes


class _Scorer:
    """Common decision logic over continuous per-label scores.

    Like the main model, each baseline picks per-label thresholds on its
    training reconstructions (best F1 per label) instead of assuming the
    0/1 midpoint; this keeps the size-matched comparison about the feature
    representation rather than the calibration.
    """

    task: str = "multilabel"
    thresholds: np.ndarray | None = None

    def _fit_thresholds(self, X, Y):
        from .core import select_thresholds

        self.thresholds = select_thresholds(
            np.asarray(Y, dtype=int), self.scores(X), "multiple", 101
        )

    def _decide(self, scores: np.ndarray) -> np.ndarray:
        cut = self.thresholds if self.thresholds is not None else 0.5
        labels = (scores >= cut).astype(int)
        if self.task == "multiclass":
            empty = labels.sum(axis=1) == 0
            if empty.any():
                labels[empty] = 0
                labels[empty, np.argmax(scores[empty], axis=1)] = 1
        return labels


@dataclass
class LinearBaseline(_Scorer):
    kind: str = "linear"
    task: str = "multilabel"

    def fit(self, X, Y, seed=0):
        solver = SolverKind("ridge") if self.kind == "ridge" else SolverKind("lstsq")
        n = Y.shape[1]
        self.W = np.zeros((n, X.shape[1]))
        self.intercepts = np.zeros(n) if self.kind == "ridge" else None
        for j in range(n):
            w, b = solve_weights(X, Y[:, j].astype(float), solver)
            self.W[j] = w
            if self.intercepts is not None:
                self.intercepts[j] = b
        return self

    def scores(self, X):
        out = X @ self.W.T
        if self.intercepts is not None:
            out = out + self.intercepts
        return out

    def predict(self, X):
        return self._decide(self.scores(X))

    def size(self) -> int:
        n, d = self.W.shape
        return n * d + (n if self.intercepts is not None else 0)


@dataclass
class RandomBaseline(_Scorer):
    """Chance floor: per-label Bernoulli draws at the training prevalence."""

    task: str = "multilabel"

    def fit(self, X, Y, seed=0):
        self.prevalence = Y.mean(axis=0)
        self.rng = np.random.default_rng(seed)
        return self

    def scores(self, X):
        m = len(X)
        return self.rng.uniform(0, 1, size=(m, len(self.prevalence)))

    def predict(self, X):
        draws = self.rng.uniform(0, 1, size=(len(X), len(self.prevalence)))
        labels = (draws < self.prevalence[np.newaxis, :]).astype(int)
        if self.task == "multiclass":
            labels[:] = 0
            probs = self.prevalence / self.prevalence.sum()
            picks = self.rng.choice(len(probs), size=len(X), p=probs)
            labels[np.arange(len(X)), picks] = 1
        return labels

    def size(self) -> int:
        return len(self.prevalence)


@dataclass
class TreeBaseline(_Scorer):
    """Single CART tree ("dt") or one tree per label ("brdt")."""

    kind: str = "dt"
    budget: int | None = None
    task: str = "multilabel"

    def fit(self, X, Y, seed=0):
        n = Y.shape[1]
        if self.budget is not None and self.budget < 4:
            warnings.warn(
                f"tree weight budget {self.budget} cannot pay for a split; "
                "growing depth-1 trees",
                stacklevel=2,
            )
        if self.kind == "dt":
            budget = self.budget if (self.budget is None or self.budget >= 4) else 4
            self.trees = [RegressionTree(budget=budget).fit(X, Y.astype(float))]
        else:
            per_label = None
            if self.budget is not None:
                per_label = max(4, self.budget // n)
            self.trees = [
                RegressionTree(budget=per_label).fit(X, Y[:, j].astype(float))
                for j in range(n)
            ]
        self.n_labels = n
        return self

    def scores(self, X):
        if self.kind == "dt":
            return self.trees[0].predict(X)
        return np.column_stack([t.predict(X)[:, 0] for t in self.trees])

    def predict(self, X):
        return self._decide(self.scores(X))

    def size(self) -> int:
        return sum(t.size() for t in self.trees)


@dataclass
class ForestBaseline(_Scorer):
    """Bagged CART forest ("rf") or one forest per label ("brrf").

    Bagging draws a bootstrap sample per tree and a random feature subset
    per split. The rf tree count is capped at the number of labels; brrf
    component forests grow at most 10 trees each.
    """

    kind: str = "rf"
    budget: int | None = None
    task: str = "multilabel"

    def fit(self, X, Y, seed=0):
        rng = np.random.default_rng(seed)
        m, d = X.shape
        n = Y.shape[1]
        max_features = max(1, int(np.ceil(np.sqrt(d))))

        def grow_forest(targets, tree_cap, budget):
            # a tree below 4 weights cannot hold a split, so shrink the
            # forest before shrinking the trees
            if budget is None:
                n_trees = tree_cap
                per_tree = None
            else:
                n_trees = max(1, min(tree_cap, budget // 4))
                per_tree = max(4, budget // n_trees)
            forest = []
            for _ in range(n_trees):
                idx = rng.integers(0, m, size=m)
                tree = RegressionTree(
                    budget=per_tree, max_features=max_features, rng=rng
                ).fit(X[idx], targets[idx])
                forest.append(tree)
            return forest

        if self.kind == "rf":
            self.forests = [grow_forest(Y.astype(float), max(1, n), self.budget)]
        else:
            per_label = None if self.budget is None else max(4, self.budget // n)
            self.forests = [
                grow_forest(Y[:, j].astype(float)[:, None], 10, per_label)
                for j in range(n)
            ]
        self.n_labels = n
        return self

    def scores(self, X):
        if self.kind == "rf":
            preds = [t.predict(X) for t in self.forests[0]]
            return np.mean(preds, axis=0)
        cols = []
        for forest in self.forests:
            preds = [t.predict(X)[:, 0] for t in forest]
            cols.append(np.mean(preds, axis=0))
        return np.column_stack(cols)

    def predict(self, X):
        return self._decide(self.scores(X))

    def size(self) -> int:
        return sum(t.size() for forest in self.forests for t in forest)


@dataclass
class MlpBaseline(_Scorer):
    """Single hidden layer with sigmoid activation, linear output.

    Trained by full-batch gradient descent on the squared error; the
    learning rate, epoch count, and init range are fixed conventions since
    only the architecture is prescribed.
    """

    hidden: int = 2
    task: str = "multilabel"
    learning_rate: float = 0.1
    epochs: int = 2000

    def fit(self, X, Y, seed=0):
        rng = np.random.default_rng(seed)
        m, d = X.shape
        n = Y.shape[1]
        h = self.hidden
        Yf = Y.astype(float)
        W1 = rng.uniform(-0.5, 0.5, size=(d, h))
        b1 = rng.uniform(-0.5, 0.5, size=h)
        W2 = rng.uniform(-0.5, 0.5, size=(h, n))
        b2 = rng.uniform(-0.5, 0.5, size=n)
        lr = self.learning_rate
        for _ in range(self.epochs):
            A = 1.0 / (1.0 + np.exp(-(X @ W1 + b1)))
            out = A @ W2 + b2
            err = (out - Yf) / m
            gW2 = A.T @ err
            gb2 = err.sum(axis=0)
            dA = err @ W2.T * A * (1.0 - A)
            gW1 = X.T @ dA
            gb1 = dA.sum(axis=0)
            W2 -= lr * gW2
            b2 -= lr * gb2
            W1 -= lr * gW1
            b1 -= lr * gb1
        self.params = (W1, b1, W2, b2)
        self.dims = (d, h, n)
        return self

    def scores(self, X):
        W1, b1, W2, b2 = self.params
        A = 1.0 / (1.0 + np.exp(-(X @ W1 + b1)))
        return A @ W2 + b2

    def predict(self, X):
        return self._decide(self.scores(X))

    def size(self) -> int:
        d, h, n = self.dims
        return mlp_weight_count(h, d, n)


@dataclass
class RankingAdapter:
    """Wraps a presence model and a membership model into a ranker.

    Mirrors the main model's scheme: presence decisions pick the label set
    and membership scores order it. The weight budget is split evenly
    between the two halves.
    """

    presence: object
    membership: object
    n_labels: int

    def predict_rankings(self, X) -> np.ndarray:
        labels = self.presence.predict(X)
        member = self.membership.scores(X)
        out = np.full((len(X), self.n_labels), -1, dtype=int)
        for i in range(len(X)):
            present = np.nonzero(labels[i] == 1)[0]
            order = sorted(present, key=lambda j: (-member[i, j], j))
            out[i] = encode_ranking(np.array(order, dtype=int), self.n_labels)
        return out

    def size(self) -> int:
        return self.presence.size() + self.membership.size()


def _make_model(kind: str, task: str, budget: int | None, d: int, n: int,
                budget_tracker: WeightBudget | None = None, seed: int = 0):
    if kind in ("linear", "ridge"):
        return LinearBaseline(kind=kind, task=task)
    if kind == "random":
        return RandomBaseline(task=task)
    if kind in ("dt", "brdt"):
        allowance = budget_tracker.next_budget() if budget_tracker else budget
        return TreeBaseline(kind=kind, budget=allowance, task=task)
    if kind in ("rf", "brrf"):
        allowance = budget_tracker.next_budget() if budget_tracker else budget
        return ForestBaseline(kind=kind, budget=allowance, task=task)
    if kind == "mlp":
        if budget_tracker is not None:
            h = budget_tracker.next_mlp_hidden(d, n)
        else:
            target = budget if budget is not None else n * (d + 1)
            h = WeightBudget(target).next_mlp_hidden(d, n)
        return MlpBaseline(hidden=h, task=task)
    raise ValueError(f"unknown baseline kind {kind!r}")


def fit_baseline(
    kind: str,
    X: np.ndarray,
    Y: np.ndarray,
    task: str = "multilabel",
    budget: int | None = None,
    seed: int = 0,
    budget_tracker: WeightBudget | None = None,
):
    """Fit one baseline; for ranking tasks Y is the ranking encoding."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=int)
    d = X.shape[1]
    n = Y.shape[1]
    if task == "labelranking":
        from .core import downgrade, logranks

        presence_targets = downgrade(Y)
        member_targets = logranks(Y)
        half = None if budget is None else max(1, budget // 2)
        presence = _make_model(kind, "multilabel", half, d, n, None, seed).fit(
            X, presence_targets, seed=seed
        )
        if not isinstance(presence, RandomBaseline):
            presence._fit_thresholds(X, presence_targets)
        membership = _make_model(kind, "multilabel", half, d, n, None, seed + 1).fit(
            X, member_targets, seed=seed + 1
        )
        model = RankingAdapter(presence, membership, n)
        if budget_tracker is not None:
            budget_tracker.record(model.size())
        return model

    model = _make_model(kind, task, budget, d, n, budget_tracker, seed)
    model.fit(X, Y, seed=seed)
    if not isinstance(model, RandomBaseline):
        model._fit_thresholds(X, Y)
    if budget_tracker is not None:
        budget_tracker.record(model.size())
    return model


def model_size(fitted) -> int:
    """Exact weight count of a fitted model."""
    return int(fitted.size())
