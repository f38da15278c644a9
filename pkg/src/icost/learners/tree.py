"""CART classification tree with sample-weighted Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import check_problem, check_rows

LEAF = -1


@dataclass(frozen=True, eq=False)
class TreeModel:
    """Flat preorder arrays; ``feature[i] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go to ``left``. ``value[i]`` holds
    the summed training weight of classes 0 and 1 reaching node ``i``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int
    min_samples_split: int = 2
    max_depth: int | None = None

    kind = "tree"

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def is_leaf_node(self) -> np.ndarray:
        return self.feature == LEAF

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = check_rows(X, self.n_features)
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while len(active):
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def leaf_share(self, X) -> np.ndarray:
        """Positive-class weight share at the reached leaf."""
        v = self.value[self.apply(X)]
        return v[:, 1] / v.sum(axis=1)

    def score(self, X) -> np.ndarray:
        return self.leaf_share(X)

    def predict(self, X) -> np.ndarray:
        return (self.leaf_share(X) > 0.5).astype(np.int64)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            i, dep = stack.pop()
            best = max(best, dep)
            if self.feature[i] != LEAF:
                stack += [(self.left[i], dep + 1), (self.right[i], dep + 1)]
        return best

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "min_samples_split": self.min_samples_split,
            "max_depth": self.max_depth,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, doc) -> "TreeModel":
        return cls(
            np.array(doc["feature"], dtype=np.int64),
            np.array(doc["threshold"], dtype=float),
            np.array(doc["left"], dtype=np.int64),
            np.array(doc["right"], dtype=np.int64),
            np.array(doc["value"], dtype=float).reshape(-1, 2),
            int(doc["n_features"]),
            int(doc["min_samples_split"]),
            None if doc["max_depth"] is None else int(doc["max_depth"]),
        )

    def same_as(self, other: "TreeModel") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("feature", "threshold", "left", "right", "value"))


def weighted_gini(class_weights) -> float:
    cw = np.asarray(class_weights, dtype=float)
    tot = cw.sum()
    return 0.0 if tot == 0 else float(1.0 - np.sum((cw / tot) ** 2))


def split_impurity(left_cw, right_cw) -> float:
    """``sum_side W_side/W * gini(side)``, the quantity minimized at each node."""
    L, R = np.sum(left_cw), np.sum(right_cw)
    return float((L * weighted_gini(left_cw) + R * weighted_gini(right_cw)) / (L + R))


def _best_split_on(x, y, w, total):
    """Lowest-impurity midpoint threshold for one feature, or None if constant."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    distinct = np.flatnonzero(xs[1:] != xs[:-1])
    if len(distinct) == 0:
        return None
    w1 = np.where(y[order] == 1, w[order], 0.0)
    w0 = w[order] - w1
    l0 = np.cumsum(w0)[distinct]
    l1 = np.cumsum(w1)[distinct]
    r0 = total[0] - l0
    r1 = total[1] - l1
    L = l0 + l1
    R = r0 + r1
    W = total[0] + total[1]
    # L*gini_L = L - (l0^2 + l1^2)/L; R and L are > 0 at every distinct boundary
    imp = ((L - (l0 * l0 + l1 * l1) / L) + (R - (r0 * r0 + r1 * r1) / R)) / W
    k = int(np.argmin(imp))
    lo, hi = xs[distinct[k]], xs[distinct[k] + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return float(imp[k]), thr


def grow_tree(X, y, w, min_samples_split=2, max_depth=None, max_features=None, rng=None) -> TreeModel:
    """Greedy CART growth without input validation (single-class input gives one leaf).

    ``max_features`` features are drawn per node when set; if none of them
    admits a split the remaining features are tried before giving up.
    """
    n, d = X.shape
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        cw = np.array([w[idx][y[idx] == 0].sum(), w[idx][y[idx] == 1].sum()])
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(cw)
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        cw = value[node]
        if (cw[0] == 0 or cw[1] == 0 or len(idx) < min_samples_split
                or (max_depth is not None and depth >= max_depth)):
            continue
        yi, wi = y[idx], w[idx]
        if max_features is None or max_features >= d:
            groups = [np.arange(d)]
        else:
            perm = rng.permutation(d)
            groups = [np.sort(perm[:max_features]), np.sort(perm[max_features:])]
        best = None
        for feats in groups:
            for f in feats:
                res = _best_split_on(X[idx, f], yi, wi, cw)
                if res is None:
                    continue
                imp, thr = res
                # strict < keeps the lower feature index on ties
                if best is None or imp < best[0]:
                    best = (imp, int(f), thr)
            if best is not None:
                break
        if best is None:
            continue
        _, f, thr = best
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node] = f
        threshold[node] = thr
        ln = new_node(li)
        rn = new_node(ri)
        left[node], right[node] = ln, rn
        # right pushed first so the left subtree is expanded (and numbered) first
        stack.append((rn, ri, depth + 1))
        stack.append((ln, li, depth + 1))

    return TreeModel(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=float).reshape(-1, 2),
        d, min_samples_split, max_depth,
    )


def train_tree(X, y, weights=None, min_samples_split: int = 2, max_depth: int | None = None) -> TreeModel:
    """Fit a weighted-Gini CART tree on 0/1 targets.

    Candidate thresholds are midpoints between consecutive distinct values.
    Ties go to the lower feature index, then the lower threshold.
    """
    X, y, w = check_problem(X, y, weights)
    if min_samples_split < 2:
        raise ValueError("min_samples_split must be >= 2")
    return grow_tree(X, y, w, min_samples_split, max_depth)
