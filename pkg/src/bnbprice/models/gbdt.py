"""Gradient boosted regression trees with exact greedy splits.

Each tree fits the residuals of the running prediction. A candidate
split is priced by

    gain = S_L^2/(n_L + lambda) + S_R^2/(n_R + lambda) - S_P^2/(n_P + lambda)

with S the residual sum inside a node, and leaf values are the
soft-thresholded node sums soft(S, alpha)/(n + lambda), which is how the
alpha (L1) and lambda (L2) penalties enter. Growth is either depth_wise
(expand whole levels to max_depth) or leaf_wise (always split the leaf
with the globally largest gain until num_leaves).

Scanning is vectorized: every node keeps an (n_node, m) matrix whose
column j lists the node's rows sorted by feature j, carved out of one
global stable argsort per fit, so prefix sums down each column price all
candidate thresholds of a node at once. Prefix sums accumulate
sequentially in sorted order, which keeps the arithmetic reproducible by
a plain left-to-right scan.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GbdtParams:
    n_estimators: int = 1000
    learning_rate: float = 0.1
    growth: str = "depth_wise"
    max_depth: int = 6
    num_leaves: int = 31
    min_samples_leaf: int = 20
    alpha: float = 0.5
    lam: float = 1.0
    min_gain: float = 0.0

    def validate(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError("learning_rate must be in (0, 1]")
        if self.growth not in ("depth_wise", "leaf_wise"):
            raise ValueError("growth must be depth_wise or leaf_wise")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.num_leaves < 1:
            raise ValueError("num_leaves must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.alpha < 0.0 or self.lam < 0.0 or self.min_gain < 0.0:
            raise ValueError("alpha, lambda and min_gain must be >= 0")


class Tree:
    """Flat node arrays; feature[i] == -1 marks a leaf whose output is value[i]."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    def predict_rows(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            inner = self.feature[node] >= 0
            if not inner.any():
                break
            rows = np.nonzero(inner)[0]
            at = node[rows]
            go_left = X[rows, self.feature[at]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])
        return self.value[node]


class GbdtModel:
    def __init__(self, base_score, trees, params, feature_gain, n_features):
        self.base_score = float(base_score)
        self.trees = list(trees)
        self.params = params
        self.feature_gain = np.asarray(feature_gain, dtype=float)
        self.n_features = int(n_features)
        self.train_mse = []  # per-round training MSE, diagnostic only


def _eval_node(I, X, r, params):
    """Best split of the node whose per-feature sorted rows are I's columns.

    Returns (gain, feature, threshold, left_count) or None when no
    candidate clears min_samples_leaf and min_gain. The per-feature
    parent sums come from the same sequential prefix scan as the left
    sums, so an independent left-to-right oracle reproduces every gain
    bit for bit. Ties break to the lower feature index, then the lower
    threshold.
    """
    n, m = I.shape
    if n < 2 or m == 0:
        return None
    rs = r[I]
    cum = np.cumsum(rs, axis=0)
    totals = cum[-1, :]
    xs = X[I, np.arange(m)]
    lam = params.lam
    left_n = np.arange(1, n, dtype=float)[:, None]
    right_n = float(n) - left_n
    left_S = cum[:-1, :]
    right_S = totals[None, :] - left_S
    parent = (totals * totals) / (n + lam)
    gain = left_S * left_S / (left_n + lam) + right_S * right_S / (right_n + lam) - parent[None, :]
    ok = xs[:-1, :] != xs[1:, :]
    if params.min_samples_leaf > 1:
        counts = np.arange(1, n)
        fits = (counts >= params.min_samples_leaf) & ((n - counts) >= params.min_samples_leaf)
        ok &= fits[:, None]
    gain = np.where(ok, gain, -np.inf)
    best = float(gain.max())
    if not best > params.min_gain:
        return None
    positions, features = np.nonzero(gain == best)
    f = int(features.min())
    i = int(positions[features == f].min())
    threshold = (xs[i, f] + xs[i + 1, f]) / 2.0
    return best, f, threshold, i + 1


def _partition(I, left_rows, n_rows_total):
    """Split a node's index matrix, keeping per-feature sorted order."""
    member = np.zeros(n_rows_total, dtype=bool)
    member[left_rows] = True
    keep = member[I]
    m = I.shape[1]
    n_left = left_rows.shape[0]
    left = I.T[keep.T].reshape(m, n_left).T
    right = I.T[~keep.T].reshape(m, I.shape[0] - n_left).T
    return left, right


def _leaf_value(I, r, params):
    total = float(r[I[:, 0]].sum())
    magnitude = abs(total) - params.alpha
    if magnitude <= 0.0:
        return 0.0
    return math.copysign(magnitude, total) / (I.shape[0] + params.lam)


class _Builder:
    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def split(self, node_id, f, threshold):
        self.feature[node_id] = f
        self.threshold[node_id] = threshold
        left_id = self.new_node()
        right_id = self.new_node()
        self.left[node_id] = left_id
        self.right[node_id] = right_id
        return left_id, right_id

    def finish(self, leaves, r, params, update):
        for node_id, I in leaves:
            v = _leaf_value(I, r, params)
            self.value[node_id] = v
            update[I[:, 0]] = v
        return Tree(self.feature, self.threshold, self.left, self.right, self.value)


def _grow_depth_wise(X, r, I_root, params, feature_gain, n_total):
    b = _Builder()
    leaves = []
    level = [(b.new_node(), I_root)]
    for _ in range(params.max_depth):
        next_level = []
        for node_id, I in level:
            hit = _eval_node(I, X, r, params)
            if hit is None:
                leaves.append((node_id, I))
                continue
            gain, f, threshold, left_count = hit
            feature_gain[f] += gain
            left_id, right_id = b.split(node_id, f, threshold)
            I_left, I_right = _partition(I, I[:left_count, f], n_total)
            next_level.append((left_id, I_left))
            next_level.append((right_id, I_right))
        level = next_level
        if not level:
            break
    leaves.extend(level)  # depth cap reached
    return b, leaves


def _grow_leaf_wise(X, r, I_root, params, feature_gain, n_total):
    b = _Builder()
    leaves = []
    heap = []
    tick = 0  # creation order, the deterministic tie-break for equal gains

    def consider(node_id, I):
        nonlocal tick
        hit = _eval_node(I, X, r, params)
        if hit is None:
            leaves.append((node_id, I))
        else:
            heapq.heappush(heap, (-hit[0], tick, node_id, I, hit))
            tick += 1

    consider(b.new_node(), I_root)
    n_leaves = 1
    while heap and n_leaves < params.num_leaves:
        _, _, node_id, I, (gain, f, threshold, left_count) = heapq.heappop(heap)
        feature_gain[f] += gain
        left_id, right_id = b.split(node_id, f, threshold)
        I_left, I_right = _partition(I, I[:left_count, f], n_total)
        n_leaves += 1
        consider(left_id, I_left)
        consider(right_id, I_right)
    while heap:
        _, _, node_id, I, _ = heapq.heappop(heap)
        leaves.append((node_id, I))
    return b, leaves


def gbdt_fit(X, y, params=None):
    """Boost params.n_estimators trees against squared-error residuals."""
    if params is None:
        params = GbdtParams()
    params.validate()
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, m) with one target per row")
    n, m = X.shape
    if n < 1:
        raise ValueError("need at least one row")
    if m < 1:
        raise ValueError("X must have at least one feature")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("X and y must be finite")

    order = np.argsort(X, axis=0, kind="stable")
    base = float(y.mean())
    pred = np.full(n, base)
    feature_gain = np.zeros(m)
    trees = []
    history = []
    grow = _grow_depth_wise if params.growth == "depth_wise" else _grow_leaf_wise
    prev_mse = float(np.mean((y - pred) ** 2))
    update = np.empty(n)
    for _ in range(params.n_estimators):
        r = y - pred
        update.fill(0.0)
        builder, leaves = grow(X, r, order, params, feature_gain, n)
        trees.append(builder.finish(leaves, r, params, update))
        pred = pred + params.learning_rate * update
        mse = float(np.mean((y - pred) ** 2))
        # squared loss with learning_rate <= 1 cannot get worse on the
        # training rows; a violation means the leaf math is wrong
        assert mse <= prev_mse * (1.0 + 1e-9) + 1e-12, "training MSE increased"
        history.append(mse)
        prev_mse = mse
    model = GbdtModel(base, trees, params, feature_gain, m)
    model.train_mse = history
    return model


def gbdt_predict(model, X):
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError("expected %d features, got %s" % (model.n_features, X.shape))
    out = np.full(X.shape[0], model.base_score)
    for tree in model.trees:
        out += model.params.learning_rate * tree.predict_rows(X)
    return out


def find_best_split(node_rows, X, residuals, params):
    """Best (feature, threshold, gain) over an arbitrary row subset, or None.

    Candidate thresholds are midpoints between adjacent distinct sorted
    feature values; splits must satisfy min_samples_leaf on both sides
    and exceed min_gain strictly.
    """
    rows = np.asarray(node_rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("node_rows must be non-empty")
    X = np.ascontiguousarray(X, dtype=float)
    r = np.asarray(residuals, dtype=float)
    order = np.argsort(X[rows], axis=0, kind="stable")
    hit = _eval_node(rows[order], X, r, params)
    if hit is None:
        return None
    gain, f, threshold, _ = hit
    return f, threshold, gain
